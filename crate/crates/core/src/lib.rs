//! Deterministic incoherent dictionaries over prime fields and Monte Carlo
//! checks of the spectral behaviour of their random Gram submatrices.
//!
//! Three dictionary families are provided, each a disjoint union of
//! orthonormal bases of `C(F_p)`:
//!
//! * [`heisenberg`]: chirps `t -> psi(a t^2 + c t) / sqrt(p)` plus the delta
//!   basis, `p (p + 1)` atoms, coherence 1.
//! * [`weil`]: eigenbases of the Weil representation restricted to the `p^2`
//!   maximal tori of `SL2(F_p)` (the oscillator dictionary, `p^3` atoms), and
//!   their Heisenberg translates (the extended oscillator dictionary, `p^5`
//!   atoms, generated lazily).
//!
//! [`spectral`] measures `||G(S) - Id||` and the spectrum of the normalized
//! error `sqrt(p / n) (G(S) - Id)`, and [`experiments`] runs seeded,
//! order-independent Monte Carlo trials over uniformly random subsets.

pub mod dictionary;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod field;
pub mod heisenberg;
pub mod manifest;
pub mod matrix;
pub mod spectral;
pub mod tolerance;
pub mod weil;

pub use dictionary::{AtomId, Dictionary, DictionaryKind, SignalVector, SubsetSelection};
pub use error::{Error, Result};
pub use field::{FiniteField, PrimeModulus, Residue};
pub use num_complex::Complex64;
