//! Numeric thresholds shared across the crate.

/// Tolerances and iteration budgets used by the solvers and the structural
/// checks. [`Tolerances::DEFAULT`] is what every public entry point uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Jacobi stops once the off-diagonal Frobenius norm falls below this
    /// fraction of the full Frobenius norm.
    pub jacobi_relative_off_norm: f64,
    /// Maximum number of cyclic Jacobi sweeps.
    pub jacobi_max_sweeps: usize,
    /// Orthonormality of every basis, entrywise on its Gram matrix.
    pub orthonormality: f64,
    /// `||U v - lambda v||` for returned torus eigenpairs.
    pub eigen_residual: f64,
    /// A projection of a standard basis vector onto an eigenspace with
    /// norm below this is treated as zero.
    pub projection_floor: f64,
    /// Slack added to `mu / sqrt(p)` when checking declared coherence.
    pub coherence_slack: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        jacobi_relative_off_norm: 1e-13,
        jacobi_max_sweeps: 50,
        orthonormality: 1e-9,
        eigen_residual: 1e-8,
        projection_floor: 1e-6,
        coherence_slack: 1e-9,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
