//! The chirp dictionary and Heisenberg time-frequency shifts.
//!
//! Basis `a` (for `a` in `F_p`) holds the chirps `t -> psi(a t^2 + c t) / sqrt(p)`,
//! `c` in `F_p`; basis `p` is the delta basis. Chirps with different rates
//! have inner products of modulus exactly `1 / sqrt(p)` (a quadratic Gauss
//! sum), and every chirp has entries of modulus `1 / sqrt(p)`, so the
//! dictionary has coherence 1.

use num_complex::Complex64;

use crate::dictionary::{AtomSource, Dictionary, DictionaryKind, SignalVector};
use crate::field::{FiniteField, PrimeModulus, Residue};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChirpParams {
    /// Quadratic rate; selects the basis.
    pub a: Residue,
    /// Linear term; selects the vector within the basis.
    pub c: Residue,
}

/// Time shift `tau` and frequency shift `w`: `f(t) -> psi(w t) f(t + tau)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeisenbergShift {
    pub tau: Residue,
    pub w: Residue,
}

pub(crate) fn write_chirp(field: &FiniteField, a: u64, c: u64, out: &mut [Complex64]) {
    let m = field.modulus();
    let scale = 1.0 / (field.p() as f64).sqrt();
    for (t, o) in out.iter_mut().enumerate() {
        let t = t as u64;
        let phase = m.add(m.mul(a, m.mul(t, t)), m.mul(c, t));
        *o = field.psi(phase) * scale;
    }
}

pub(crate) fn write_shifted(field: &FiniteField, tau: u64, w: u64, f: &[Complex64], out: &mut [Complex64]) {
    let m = field.modulus();
    for (t, o) in out.iter_mut().enumerate() {
        let t = t as u64;
        *o = field.psi(m.mul(w, t)) * f[m.add(t, tau) as usize];
    }
}

pub fn chirp_atom(field: &FiniteField, params: ChirpParams) -> SignalVector {
    let mut out = vec![Complex64::new(0.0, 0.0); field.p()];
    write_chirp(field, params.a.value(), params.c.value(), &mut out);
    SignalVector::new(out)
}

/// The standard basis: vector `k` is the indicator of `t = k`.
pub fn delta_basis(p: PrimeModulus) -> Vec<SignalVector> {
    (0..p.size()).map(|k| SignalVector::delta(p.size(), k)).collect()
}

/// `p + 1` orthonormal bases: chirp rates `a = 0..p` in order, then the
/// delta basis; `p (p + 1)` atoms with declared coherence 1.
pub fn build_heisenberg_dictionary(p: PrimeModulus) -> Dictionary {
    let field = FiniteField::new(p);
    Dictionary::from_parts(
        field,
        DictionaryKind::Heisenberg,
        p.size() + 1,
        1.0,
        AtomSource::Heisenberg,
    )
}

pub fn apply_shift(field: &FiniteField, shift: HeisenbergShift, f: &SignalVector) -> SignalVector {
    let mut out = vec![Complex64::new(0.0, 0.0); field.p()];
    write_shifted(field, shift.tau.value(), shift.w.value(), f.entries(), &mut out);
    SignalVector::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::{coherence, inner_product, AtomId, CoherenceMode};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn field(p: u64) -> FiniteField {
        FiniteField::with_prime(p).unwrap()
    }

    fn chirp(f: &FiniteField, a: i64, c: i64) -> SignalVector {
        let m = f.modulus();
        chirp_atom(f, ChirpParams { a: m.residue(a), c: m.residue(c) })
    }

    fn random_signal(rng: &mut ChaCha8Rng, p: usize) -> SignalVector {
        SignalVector::new(
            (0..p)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        )
    }

    #[test]
    fn trivial_chirp_is_constant() {
        let f = field(7);
        let v = chirp(&f, 0, 0);
        for z in v.entries() {
            assert!((z - Complex64::new(1.0 / 7f64.sqrt(), 0.0)).norm() < 1e-15);
        }
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chirp_cross_products_brute_force_p5() {
        let f = field(5);
        let root = 5f64.sqrt();
        let mut cross_pairs = 0;
        for a in 0..5 {
            for c in 0..5 {
                let u = chirp(&f, a, c);
                for a2 in 0..5 {
                    for c2 in 0..5 {
                        let v = chirp(&f, a2, c2);
                        // Independent route: direct angle evaluation.
                        let direct: Complex64 = (0..5i64)
                            .map(|t| {
                                let k = (a * t * t + c * t - a2 * t * t - c2 * t).rem_euclid(5);
                                Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / 5.0)
                            })
                            .sum::<Complex64>()
                            / 5.0;
                        let ip = inner_product(&u, &v).unwrap();
                        assert!((ip - direct).norm() < 1e-12);
                        if a == a2 && c != c2 {
                            assert!(ip.norm() < 1e-10);
                        }
                        if a != a2 {
                            cross_pairs += 1;
                            assert!((ip.norm() - 1.0 / root).abs() < 1e-12);
                        }
                    }
                }
            }
        }
        assert_eq!(cross_pairs, 500);
    }

    #[test]
    fn delta_basis_examples() {
        let p = PrimeModulus::new(5).unwrap();
        let b = delta_basis(p);
        assert_eq!(b.len(), 5);
        assert_eq!(b[2].entries()[2], Complex64::new(1.0, 0.0));
        assert!(b[2].entries().iter().enumerate().all(|(t, z)| t == 2 || z.norm() == 0.0));
        for (i, u) in b.iter().enumerate() {
            for (j, v) in b.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_eq!(inner_product(u, v).unwrap(), Complex64::new(expected, 0.0));
            }
        }
        let f = field(5);
        for delta in &b {
            for a in 0..5 {
                for c in 0..5 {
                    let ip = inner_product(delta, &chirp(&f, a, c)).unwrap();
                    assert!((ip.norm() - 1.0 / 5f64.sqrt()).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn dictionary_shape_and_coherence() {
        for p in [5u64, 7, 11, 13] {
            let d = build_heisenberg_dictionary(PrimeModulus::new(p).unwrap());
            assert_eq!(d.basis_count(), p as usize + 1);
            assert_eq!(d.atom_count(), (p * (p + 1)) as usize);
            assert!(d.max_orthonormality_error() < 1e-9);
            let r = coherence(&d, CoherenceMode::Exhaustive).unwrap();
            assert!((r.mu_hat - 1.0).abs() < 1e-9, "p={p} mu={}", r.mu_hat);
            assert!(r.pass);
        }
    }

    #[test]
    fn cross_basis_pairs_all_have_modulus_inverse_root_p() {
        let p = 7usize;
        let d = build_heisenberg_dictionary(PrimeModulus::new(p as u64).unwrap());
        for x in 0..d.atom_count() {
            for y in x + 1..d.atom_count() {
                let (a, b) = (AtomId::from_flat(x, p), AtomId::from_flat(y, p));
                if a.basis_index == b.basis_index {
                    continue;
                }
                let ip = inner_product(&d.atom(a).unwrap(), &d.atom(b).unwrap()).unwrap();
                assert!((ip.norm() * (p as f64).sqrt() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn shift_examples() {
        let f = field(7);
        let m = f.modulus();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = random_signal(&mut rng, 7);
        let id = HeisenbergShift { tau: m.residue(0), w: m.residue(0) };
        assert_eq!(apply_shift(&f, id, &v), v);
        for k in 0..7 {
            for tau in 0..7 {
                let s = HeisenbergShift { tau: m.residue(tau), w: m.residue(0) };
                let out = apply_shift(&f, s, &SignalVector::delta(7, k as usize));
                assert_eq!(out, SignalVector::delta(7, (k - tau).rem_euclid(7) as usize));
            }
        }
    }

    #[test]
    fn shifts_are_unitary() {
        let f = field(7);
        let m = f.modulus();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let v = random_signal(&mut rng, 7);
            let s = HeisenbergShift {
                tau: m.residue(rng.random_range(0..7)),
                w: m.residue(rng.random_range(0..7)),
            };
            assert!((apply_shift(&f, s, &v).norm() - v.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn shifts_compose_up_to_a_global_phase() {
        let f = field(11);
        let m = f.modulus();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let v = random_signal(&mut rng, 11);
            let (t1, w1, t2, w2) = (
                rng.random_range(0..11),
                rng.random_range(0..11),
                rng.random_range(0..11),
                rng.random_range(0..11),
            );
            let s1 = HeisenbergShift { tau: m.residue(t1), w: m.residue(w1) };
            let s2 = HeisenbergShift { tau: m.residue(t2), w: m.residue(w2) };
            let s12 = HeisenbergShift { tau: m.residue(t1 + t2), w: m.residue(w1 + w2) };
            let lhs = apply_shift(&f, s2, &apply_shift(&f, s1, &v));
            let rhs = apply_shift(&f, s12, &v);
            let phase = lhs.entries()[0] / rhs.entries()[0];
            for (a, b) in lhs.entries().iter().zip(rhs.entries()) {
                assert!((a.norm() - b.norm()).abs() < 1e-12);
                assert!((a - phase * b).norm() < 1e-10);
            }
            assert!((phase.norm() - 1.0).abs() < 1e-10);
        }
    }
}
