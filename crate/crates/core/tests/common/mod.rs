//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use srip_core::matrix::CMatrix;
use srip_core::Complex64;

type Dense = Vec<Vec<Complex64>>;

fn dense_mul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

/// Coefficients `c[0..=n]` of `det(x I - A)`, lowest degree first, by the
/// Faddeev-LeVerrier recursion.
pub fn characteristic_polynomial(a: &Dense) -> Vec<Complex64> {
    let n = a.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut c = vec![zero; n + 1];
    c[n] = Complex64::new(1.0, 0.0);
    let mut m: Dense = vec![vec![zero; n]; n];
    for k in 1..=n {
        let mut next = dense_mul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += c[n - k + 1];
        }
        m = next;
        let am = dense_mul(a, &m);
        let trace: Complex64 = (0..n).map(|i| am[i][i]).sum();
        c[n - k] = -trace / k as f64;
    }
    c
}

fn horner(c: &[f64], x: f64) -> (f64, f64) {
    let mut value = 0.0;
    let mut slope = 0.0;
    for &coef in c.iter().rev() {
        slope = slope * x + value;
        value = value * x + coef;
    }
    (value, slope)
}

/// Real roots of a Hermitian matrix's characteristic polynomial: all
/// complex roots by Durand-Kerner, then Newton on the real polynomial.
pub fn charpoly_eigenvalues(a: &Dense) -> Vec<f64> {
    let n = a.len();
    let c = characteristic_polynomial(a);
    let eval = |z: Complex64| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &k| acc * z + k);
    let radius = 1.0 + c.iter().take(n).map(|z| z.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..2000 {
        let mut shift = 0.0f64;
        for i in 0..n {
            let denom: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| roots[i] - roots[j])
                .product();
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            shift = shift.max(step.norm());
        }
        if shift < 1e-15 * radius {
            break;
        }
    }
    let real: Vec<f64> = c.iter().map(|z| z.re).collect();
    let mut out: Vec<f64> = roots
        .iter()
        .map(|z| {
            let mut x = z.re;
            for _ in 0..8 {
                let (v, d) = horner(&real, x);
                if d.abs() < 1e-300 {
                    break;
                }
                let step = v / d;
                if !step.is_finite() || step.abs() > 1e-6 * (1.0 + x.abs()) {
                    break;
                }
                x -= step;
            }
            x
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Hermitian matrix with entries uniform in the unit square.
#[allow(clippy::needless_range_loop)]
pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> Dense {
    let zero = Complex64::new(0.0, 0.0);
    let mut a = vec![vec![zero; n]; n];
    for i in 0..n {
        a[i][i] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
        for j in i + 1..n {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            a[i][j] = z;
            a[j][i] = z.conj();
        }
    }
    a
}

pub fn to_cmatrix(a: &Dense) -> CMatrix {
    CMatrix::from_fn(a.len(), a.len(), |i, j| a[i][j])
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `[a, b, c, d]` for the matrix `[[a, b], [c, d]]`.
pub type Mat2 = [u64; 4];

fn mat2_mul(x: Mat2, y: Mat2, p: u64) -> Mat2 {
    [
        (x[0] * y[0] + x[1] * y[2]) % p,
        (x[0] * y[1] + x[1] * y[3]) % p,
        (x[2] * y[0] + x[3] * y[2]) % p,
        (x[2] * y[1] + x[3] * y[3]) % p,
    ]
}

/// Elements of the cyclic group generated by `g`.
pub fn cyclic_subgroup(g: Mat2, p: u64) -> BTreeSet<Mat2> {
    let one = [1, 0, 0, 1];
    let mut out = BTreeSet::new();
    let mut x = one;
    loop {
        out.insert(x);
        x = mat2_mul(x, g, p);
        if x == one {
            return out;
        }
    }
}

pub fn sl2_all(p: u64) -> Vec<Mat2> {
    let mut out = Vec::new();
    for a in 0..p {
        for b in 0..p {
            for c in 0..p {
                for d in 0..p {
                    if (a * d + p * p - b * c) % p == 1 {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

/// Distinct cyclic subgroups of `SL_2(F_p)` of order `p - 1` (split) and
/// `p + 1` (non-split), found by walking every group element.
pub struct BruteCensus {
    pub split: HashSet<BTreeSet<Mat2>>,
    pub nonsplit: HashSet<BTreeSet<Mat2>>,
}

pub fn brute_force_tori(p: u64) -> BruteCensus {
    let mut split = HashSet::new();
    let mut nonsplit = HashSet::new();
    for g in sl2_all(p) {
        let h = cyclic_subgroup(g, p);
        if h.len() as u64 == p - 1 {
            split.insert(h);
        } else if h.len() as u64 == p + 1 {
            nonsplit.insert(h);
        }
    }
    BruteCensus { split, nonsplit }
}
