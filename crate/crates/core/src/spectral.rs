//! Hermitian eigenvalues, restricted-isometry deviation of Gram submatrices,
//! the normalized error spectrum and its distance to the semicircle law.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::tolerance::Tolerances;

/// `G(S)`: the Hermitian matrix of inner products of the atoms of a subset,
/// `G[i][j] = <phi_j, phi_i>`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    matrix: CMatrix,
    subset_hash: String,
}

impl GramMatrix {
    /// Builds the matrix from its upper triangle (`i <= j`); the lower triangle is
    /// mirrored so the result is exactly Hermitian, and the diagonal is made real.
    pub fn from_upper(n: usize, mut entry: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut matrix = CMatrix::zeros(n, n);
        for i in 0..n {
            matrix[(i, i)] = Complex64::new(entry(i, i).re, 0.0);
            for j in i + 1..n {
                let z = entry(i, j);
                matrix[(i, j)] = z;
                matrix[(j, i)] = z.conj();
            }
        }
        GramMatrix {
            matrix,
            subset_hash: String::new(),
        }
    }

    /// Wraps an arbitrary matrix after checking exact Hermiticity.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        let n = matrix.rows();
        for i in 0..n {
            for j in i..n {
                if matrix[(i, j)] != matrix[(j, i)].conj() {
                    return Err(Error::domain(format!("matrix is not Hermitian at ({i}, {j})")));
                }
            }
        }
        Ok(GramMatrix {
            matrix,
            subset_hash: String::new(),
        })
    }

    pub(crate) fn with_subset_hash(mut self, hash: String) -> Self {
        self.subset_hash = hash;
        self
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    /// Digest of the atom list the matrix was built from (empty when built directly).
    pub fn subset_hash(&self) -> &str {
        &self.subset_hash
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// `max_i sum_{j != i} |G_ij|`, the Gershgorin bound on `||G - Id||` for unit diagonals.
    pub fn max_off_diagonal_row_sum(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| self.matrix[(i, j)].norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        (0..self.n()).map(|i| self.matrix[(i, i)].re).sum()
    }
}

/// Eigenvalues of a Hermitian matrix, ascending, by cyclic complex Jacobi.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    hermitian_eigenvalues_with(m, &Tolerances::DEFAULT)
}

pub fn hermitian_eigenvalues_with(m: &CMatrix, tol: &Tolerances) -> Result<Vec<f64>> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.cols(),
        });
    }
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
    }
    let scale = a.frobenius_norm();
    let target = tol.jacobi_relative_off_norm * scale;

    let mut converged = scale == 0.0;
    let mut sweeps = 0;
    while !converged {
        if off_diagonal_norm(&a) <= target {
            converged = true;
            break;
        }
        if sweeps == tol.jacobi_max_sweeps {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::Numeric(format!(
            "Jacobi did not converge in {} sweeps (n = {n}, off-diagonal norm {:.3e}, target {:.3e})",
            tol.jacobi_max_sweeps,
            off_diagonal_norm(&a),
            target
        )));
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One Jacobi step annihilating `a[p][q]`: a phase on coordinate `q` makes the
/// pivot real, then a real plane rotation zeroes it.
fn rotate(a: &mut CMatrix, p: usize, q: usize) {
    let g = a[(p, q)];
    let h = g.norm();
    if h == 0.0 {
        return;
    }
    let phase = g / h;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * h);
    let t = if theta.is_infinite() {
        0.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let n = a.rows();
    let unphase = phase.conj();
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[(r, p)];
        let arq = a[(r, q)] * unphase;
        let new_rp = arp * c - arq * s;
        let new_rq = arp * s + arq * c;
        a[(r, p)] = new_rp;
        a[(p, r)] = new_rp.conj();
        a[(r, q)] = new_rq;
        a[(q, r)] = new_rq.conj();
    }
    a[(p, p)] = Complex64::new(app - t * h, 0.0);
    a[(q, q)] = Complex64::new(aqq + t * h, 0.0);
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
}

/// Measured restricted-isometry deviation of one Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RipDeviation {
    /// `1 - lambda_min(G)`
    pub lower: f64,
    /// `lambda_max(G) - 1`
    pub upper: f64,
    /// `max_i |lambda_i - 1| = ||G - Id||`
    pub norm: f64,
}

impl RipDeviation {
    pub fn from_eigenvalues(eig: &[f64]) -> Self {
        let (Some(&min), Some(&max)) = (eig.first(), eig.last()) else {
            return RipDeviation {
                lower: 0.0,
                upper: 0.0,
                norm: 0.0,
            };
        };
        let norm = eig.iter().map(|l| (l - 1.0).abs()).fold(0.0, f64::max);
        RipDeviation {
            lower: 1.0 - min,
            upper: max - 1.0,
            norm,
        }
    }
}

pub fn rip_deviation(g: &GramMatrix) -> Result<RipDeviation> {
    Ok(RipDeviation::from_eigenvalues(&g.eigenvalues()?))
}

/// Sorted eigenvalues of `E(S) = sqrt(p / n) (G(S) - Id)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSample {
    pub n: usize,
    pub p: u64,
    pub eigenvalues: Vec<f64>,
    pub subset_hash: String,
}

impl SpectralSample {
    pub fn from_gram_eigenvalues(gram_eigenvalues: &[f64], p: u64, subset_hash: String) -> Self {
        let n = gram_eigenvalues.len();
        let scale = (p as f64 / n as f64).sqrt();
        let mut eigenvalues: Vec<f64> = gram_eigenvalues.iter().map(|l| scale * (l - 1.0)).collect();
        eigenvalues.sort_by(f64::total_cmp);
        SpectralSample {
            n,
            p,
            eigenvalues,
            subset_hash,
        }
    }
}

pub fn normalized_error_eigenvalues(g: &GramMatrix, p: u64) -> Result<SpectralSample> {
    let eig = g.eigenvalues()?;
    Ok(SpectralSample::from_gram_eigenvalues(&eig, p, g.subset_hash.clone()))
}

/// Right-continuous empirical distribution function of a finite sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("empirical CDF of an empty sample"));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::domain("empirical CDF sample contains NaN"));
        }
        samples.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// `#{x_i <= x} / n`
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    /// Left limit `#{x_i < x} / n`.
    pub fn eval_left(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v < x) as f64 / self.len() as f64
    }
}

/// `(2 pi)^-1 sqrt(4 - x^2)` on `[-2, 2]`.
pub fn semicircle_density(x: f64) -> f64 {
    if x.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - x * x).sqrt() / (2.0 * PI)
    }
}

pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI
    }
}

/// Exact `sup_x |F_n(x) - F(x)|` for a continuous reference `F`, checking both
/// one-sided limits of the step function at every distinct sample.
pub fn ks_distance_to(empirical: &EmpiricalCdf, reference: impl Fn(f64) -> f64) -> f64 {
    let xs = empirical.samples();
    let n = xs.len() as f64;
    let mut best: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        let f = reference(x);
        best = best.max((j as f64 / n - f).abs()).max((f - i as f64 / n).abs());
        i = j;
    }
    best
}

pub fn ks_distance(empirical: &EmpiricalCdf) -> f64 {
    ks_distance_to(empirical, semicircle_cdf)
}
