//! The Weil representation of `SL2(F_p)`, its maximal tori, and the
//! oscillator dictionaries built from torus eigenbases.
//!
//! On the generators
//!
//! ```text
//! d_s = [[s, 0], [0, 1/s]]   (rho f)(t) = leg(s) f(s t)
//! u_b = [[1, b], [0, 1]]     (rho f)(t) = psi(b t^2 / 2) f(t)
//! w   = [[0, 1], [-1, 0]]    rho(w) = nu F,  F[x][y] = psi(x y) / sqrt(p)
//! ```
//!
//! with `nu = leg(2) * gamma` and `gamma` the normalized Gauss sum of
//! `psi(t^2)`. Every `g` with `c != 0` factors as
//! `u_{a/c} d_{-1/c} w u_{d/c}`, which collapses to the closed form
//!
//! ```text
//! rho(g)[x][y] = leg(-c) nu / sqrt(p) * psi((a x^2 - 2 x y + d y^2) / (2 c)),
//! ```
//!
//! and `g = d_a u_{b/a}` when `c = 0`. The result is a genuine (not
//! projective) unitary representation; the tests check the homomorphism
//! property directly.

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::fmt;
use std::ops::Mul;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dictionary::{AtomSource, Dictionary, DictionaryKind};
use crate::error::{Error, Result};
use crate::exec;
use crate::field::{FiniteField, PrimeModulus, Residue};
use crate::manifest::OscillatorParams;
use crate::matrix::CMatrix;
use crate::tolerance::Tolerances;

/// `[[a, b], [c, d]]` with `a d - b c = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SL2Element {
    entries: [u64; 4],
    modulus: PrimeModulus,
}

impl SL2Element {
    pub fn new(a: Residue, b: Residue, c: Residue, d: Residue) -> Result<Self> {
        let m = a.modulus();
        for r in [b, c, d] {
            if r.modulus() != m {
                return Err(Error::domain("SL2 entries from different fields"));
            }
        }
        Self::from_raw(m, [a.value(), b.value(), c.value(), d.value()])
    }

    /// Entries are reduced mod `p` first.
    pub fn from_i64(p: PrimeModulus, a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        Self::new(p.residue(a), p.residue(b), p.residue(c), p.residue(d))
    }

    fn from_raw(m: PrimeModulus, [a, b, c, d]: [u64; 4]) -> Result<Self> {
        let det = m.sub(m.mul(a, d), m.mul(b, c));
        if det != 1 {
            return Err(Error::NotUnimodular {
                a,
                b,
                c,
                d,
                det,
                p: m.get(),
            });
        }
        Ok(SL2Element {
            entries: [a, b, c, d],
            modulus: m,
        })
    }

    #[inline]
    fn raw(m: PrimeModulus, entries: [u64; 4]) -> Self {
        SL2Element { entries, modulus: m }
    }

    pub fn identity(p: PrimeModulus) -> Self {
        Self::raw(p, [1, 0, 0, 1])
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    /// `(a, b, c, d)` as integers in `[0, p)`.
    pub fn entries(&self) -> [u64; 4] {
        self.entries
    }

    pub fn a(&self) -> Residue {
        self.modulus.residue(self.entries[0] as i64)
    }

    pub fn b(&self) -> Residue {
        self.modulus.residue(self.entries[1] as i64)
    }

    pub fn c(&self) -> Residue {
        self.modulus.residue(self.entries[2] as i64)
    }

    pub fn d(&self) -> Residue {
        self.modulus.residue(self.entries[3] as i64)
    }

    pub fn inverse(&self) -> Self {
        let m = self.modulus;
        let [a, b, c, d] = self.entries;
        Self::raw(m, [d, m.neg(b), m.neg(c), a])
    }

    pub fn pow(&self, mut exp: u64) -> Self {
        let mut acc = Self::identity(self.modulus);
        let mut base = *self;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            exp >>= 1;
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        self.entries == [1, 0, 0, 1]
    }

    /// Multiplicative order; every element of `SL2(F_p)` has order at most `2p`.
    pub fn order(&self) -> u64 {
        let mut x = *self;
        let mut k = 1;
        while !x.is_identity() {
            x = x * *self;
            k += 1;
        }
        k
    }

    pub fn conjugate_by(&self, g: &SL2Element) -> Self {
        *g * *self * g.inverse()
    }
}

impl Mul for SL2Element {
    type Output = SL2Element;

    fn mul(self, rhs: SL2Element) -> SL2Element {
        let m = self.modulus;
        let [a, b, c, d] = self.entries;
        let [e, f, g, h] = rhs.entries;
        SL2Element::raw(
            m,
            [
                m.add(m.mul(a, e), m.mul(b, g)),
                m.add(m.mul(a, f), m.mul(b, h)),
                m.add(m.mul(c, e), m.mul(d, g)),
                m.add(m.mul(c, f), m.mul(d, h)),
            ],
        )
    }
}

impl fmt::Display for SL2Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.entries;
        write!(f, "[[{a}, {b}], [{c}, {d}]]")
    }
}

/// Every element of `SL2(F_p)` in lexicographic `(a, b, c, d)` order.
pub fn sl2_elements(p: PrimeModulus) -> impl Iterator<Item = SL2Element> {
    let n = p.get();
    (0..n).flat_map(move |a| {
        (0..n).flat_map(move |b| {
            (0..n).flat_map(move |c| {
                let ds: Vec<u64> = if a != 0 {
                    vec![p.mul(p.add(1, p.mul(b, c)), p.inv(a).expect("a != 0"))]
                } else if p.mul(b, c) == n - 1 {
                    (0..n).collect()
                } else {
                    Vec::new()
                };
                ds.into_iter().map(move |d| SL2Element::raw(p, [a, b, c, d]))
            })
        })
    })
}

/// A `p x p` unitary matrix `rho(g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeilOperator {
    pub matrix: CMatrix,
}

impl WeilOperator {
    /// `||U* U - Id||_op`
    pub fn unitarity_error(&self) -> Result<f64> {
        let m = &self.matrix;
        (&(&m.adjoint() * m) - &CMatrix::identity(m.rows())).operator_norm()
    }
}

/// `leg(2) * gamma`, the scalar attached to the Weyl element.
pub fn weyl_scalar(field: &FiniteField) -> Complex64 {
    field.weil_normalizer() * f64::from(field.legendre(2))
}

pub fn weil_matrix(field: &FiniteField, g: &SL2Element) -> Result<WeilOperator> {
    if g.modulus() != field.modulus() {
        return Err(Error::domain("SL2 element and field use different primes"));
    }
    // Re-check the determinant so hand-built elements are caught too.
    let checked = SL2Element::from_raw(g.modulus, g.entries)?;
    Ok(WeilOperator {
        matrix: WeilKernel::new(field, &checked).matrix(),
    })
}

/// Entry generator for `rho(g)`.
struct WeilKernel<'a> {
    field: &'a FiniteField,
    g: [u64; 4],
    scale: Complex64,
    // 1 / (2c) when c != 0, otherwise a b / 2.
    quad: u64,
}

impl<'a> WeilKernel<'a> {
    fn new(field: &'a FiniteField, g: &SL2Element) -> Self {
        let m = field.modulus();
        let [a, b, c, _] = g.entries;
        let half = m.inv(2).expect("p odd");
        let (scale, quad) = if c != 0 {
            let root = (field.p() as f64).sqrt();
            let s = weyl_scalar(field) * f64::from(field.legendre(m.neg(c))) / root;
            (s, m.inv(m.mul(2, c)).expect("c != 0"))
        } else {
            (
                Complex64::new(f64::from(field.legendre(a)), 0.0),
                m.mul(half, m.mul(a, b)),
            )
        };
        WeilKernel {
            field,
            g: g.entries,
            scale,
            quad,
        }
    }

    #[inline]
    fn entry(&self, x: u64, y: u64) -> Complex64 {
        let m = self.field.modulus();
        let [a, _, c, d] = self.g;
        if c != 0 {
            let q = m.add(m.sub(m.mul(a, m.mul(x, x)), m.mul(2, m.mul(x, y))), m.mul(d, m.mul(y, y)));
            self.scale * self.field.psi(m.mul(q, self.quad))
        } else if m.mul(a, x) == y {
            self.scale * self.field.psi(m.mul(self.quad, m.mul(x, x)))
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    fn matrix(&self) -> CMatrix {
        let p = self.field.p();
        CMatrix::from_fn(p, p, |x, y| self.entry(x as u64, y as u64))
    }

    fn trace(&self) -> Complex64 {
        (0..self.field.p() as u64).map(|x| self.entry(x, x)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TorusKind {
    /// Order `p - 1`, diagonalizable over `F_p`.
    Split,
    /// Order `p + 1`, diagonalizable only over `F_{p^2}`.
    NonSplit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Torus {
    pub id: usize,
    pub kind: TorusKind,
    /// `conjugator * reference_generator * conjugator^-1`
    pub generator: SL2Element,
    pub conjugator: SL2Element,
}

impl Torus {
    pub fn order(&self) -> u64 {
        let p = self.generator.modulus().get();
        match self.kind {
            TorusKind::Split => p - 1,
            TorusKind::NonSplit => p + 1,
        }
    }
}

/// All `p^2` maximal tori of `SL2(F_p)` together with the parameters that fix
/// their enumeration.
#[derive(Debug, Clone)]
pub struct TorusCensus {
    pub modulus: PrimeModulus,
    /// Smallest primitive root `r`; the split reference torus is generated by `d_r`.
    pub primitive_root: u64,
    /// Smallest non-residue `D`; the non-split reference torus is
    /// `{[[x, D y], [y, x]] : x^2 - D y^2 = 1}`.
    pub nonresidue: u64,
    pub split_reference: SL2Element,
    pub nonsplit_reference: SL2Element,
    pub tori: Vec<Torus>,
}

impl TorusCensus {
    pub fn split_count(&self) -> usize {
        self.tori.iter().filter(|t| t.kind == TorusKind::Split).count()
    }

    pub fn nonsplit_count(&self) -> usize {
        self.tori.len() - self.split_count()
    }
}

/// Split tori first, then non-split; within each kind, in order of first
/// appearance while conjugating the reference torus by `SL2(F_p)` in
/// lexicographic order. That first conjugating element is the recorded
/// conjugator.
pub fn enumerate_tori(p: PrimeModulus) -> TorusCensus {
    let r = p.primitive_root();
    let delta = p.smallest_nonresidue();
    let split_reference = SL2Element::raw(p, [r, 0, 0, p.inv(r).expect("r != 0")]);
    let nonsplit_reference = (0..p.get())
        .flat_map(|x| (0..p.get()).map(move |y| (x, y)))
        .filter(|&(x, y)| p.sub(p.mul(x, x), p.mul(delta, p.mul(y, y))) == 1)
        .map(|(x, y)| SL2Element::raw(p, [x, p.mul(delta, y), y, x]))
        .find(|g| g.order() == p.get() + 1)
        .expect("the non-split torus is cyclic of order p + 1");

    let mut tori = Vec::with_capacity(p.size() * p.size());
    for (kind, reference) in [
        (TorusKind::Split, split_reference),
        (TorusKind::NonSplit, nonsplit_reference),
    ] {
        let mut seen = HashSet::new();
        for g in sl2_elements(p) {
            let generator = reference.conjugate_by(&g);
            let key = generator.entries.min(generator.inverse().entries);
            if seen.insert(key) {
                tori.push(Torus {
                    id: tori.len(),
                    kind,
                    generator,
                    conjugator: g,
                });
            }
        }
    }
    TorusCensus {
        modulus: p,
        primitive_root: r,
        nonresidue: delta,
        split_reference,
        nonsplit_reference,
        tori,
    }
}

/// An orthonormal eigenbasis of `rho` restricted to one torus.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusBasis {
    torus_id: usize,
    order: u64,
    vectors: Vec<Vec<Complex64>>,
    phase_index: Vec<u64>,
    degenerate: Vec<bool>,
}

impl TorusBasis {
    pub fn torus_id(&self) -> usize {
        self.torus_id
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &[Complex64] {
        &self.vectors[i]
    }

    /// Eigenvalue of vector `i` under the torus generator, `exp(2 pi i k / order)`.
    pub fn eigenvalue(&self, i: usize) -> Complex64 {
        Complex64::from_polar(1.0, TAU * self.phase_index[i] as f64 / self.order as f64)
    }

    pub fn phase_index(&self, i: usize) -> u64 {
        self.phase_index[i]
    }

    pub fn is_degenerate(&self, i: usize) -> bool {
        self.degenerate[i]
    }
}

/// Eigenvectors of `rho(generator)`, ordered by eigenvalue phase in `[0, 2 pi)`.
///
/// The generator has finite order `m`, so its eigenvalues are `m`-th roots of
/// unity and `P_k = m^-1 sum_j lambda_k^-j rho(gen)^j` projects onto the
/// `lambda_k` eigenspace exactly. Eigenspace dimensions come from the
/// character `tr rho(gen^j)`. Each space is filled with the Gram-Schmidt
/// orthonormalized projections of `e_0, e_1, ...`, skipping standard vectors
/// whose projection is (numerically) zero or already spanned.
pub fn torus_eigenbasis(field: &FiniteField, torus: &Torus) -> Result<TorusBasis> {
    torus_eigenbasis_with(field, torus, &Tolerances::DEFAULT)
}

pub fn torus_eigenbasis_with(field: &FiniteField, torus: &Torus, tol: &Tolerances) -> Result<TorusBasis> {
    let p = field.p();
    let m = torus.order() as usize;
    let gen = &torus.generator;
    let roots: Vec<Complex64> = (0..m)
        .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / m as f64))
        .collect();

    let mut traces = Vec::with_capacity(m);
    let mut power = SL2Element::identity(gen.modulus());
    for _ in 0..m {
        traces.push(WeilKernel::new(field, &power).trace());
        power = power * *gen;
    }
    let mut multiplicity = vec![0usize; m];
    for (k, mult) in multiplicity.iter_mut().enumerate() {
        let raw: Complex64 = traces
            .iter()
            .enumerate()
            .map(|(j, t)| t * roots[(m - k * j % m) % m])
            .sum::<Complex64>()
            / m as f64;
        let rounded = raw.re.round();
        if (raw - rounded).norm() > 1e-6 || rounded < 0.0 {
            return Err(Error::Numeric(format!(
                "torus {}: eigenvalue multiplicity {raw} is not a non-negative integer",
                torus.id
            )));
        }
        *mult = rounded as usize;
    }
    if multiplicity.iter().sum::<usize>() != p {
        return Err(Error::Numeric(format!(
            "torus {}: eigenspace dimensions sum to {} instead of {p}",
            torus.id,
            multiplicity.iter().sum::<usize>()
        )));
    }

    let rho = WeilKernel::new(field, gen).matrix();
    let mut spaces: Vec<Vec<Vec<Complex64>>> = vec![Vec::new(); m];
    let mut missing: usize = p;
    let zero = Complex64::new(0.0, 0.0);
    for i in 0..p {
        if missing == 0 {
            break;
        }
        let mut orbit = Vec::with_capacity(m);
        let mut e = vec![zero; p];
        e[i] = Complex64::new(1.0, 0.0);
        orbit.push(e);
        for j in 1..m {
            let next = rho.mul_vec(&orbit[j - 1]);
            orbit.push(next);
        }
        for k in 0..m {
            if spaces[k].len() == multiplicity[k] {
                continue;
            }
            let mut v = vec![zero; p];
            for (j, o) in orbit.iter().enumerate() {
                let coeff = roots[(m - k * j % m) % m] / m as f64;
                for (vt, ot) in v.iter_mut().zip(o) {
                    *vt += coeff * ot;
                }
            }
            if norm(&v) <= tol.projection_floor {
                continue;
            }
            for _ in 0..2 {
                for u in &spaces[k] {
                    let c = crate::dictionary::dot(&v, u);
                    for (vt, ut) in v.iter_mut().zip(u) {
                        *vt -= c * ut;
                    }
                }
            }
            let len = norm(&v);
            if len <= tol.projection_floor {
                continue;
            }
            v.iter_mut().for_each(|z| *z /= len);
            spaces[k].push(v);
            missing -= 1;
        }
    }
    if missing != 0 {
        return Err(Error::Numeric(format!(
            "torus {}: {missing} eigenvectors could not be resolved",
            torus.id
        )));
    }

    let mut vectors = Vec::with_capacity(p);
    let mut phase_index = Vec::with_capacity(p);
    let mut degenerate = Vec::with_capacity(p);
    for (k, space) in spaces.into_iter().enumerate() {
        let deg = space.len() > 1;
        for v in space {
            let rv = rho.mul_vec(&v);
            let residual = norm(&rv.iter().zip(&v).map(|(a, b)| a - roots[k] * b).collect::<Vec<_>>());
            if residual > tol.eigen_residual {
                return Err(Error::Numeric(format!(
                    "torus {}: eigen residual {residual:.3e} for phase index {k}",
                    torus.id
                )));
            }
            vectors.push(v);
            phase_index.push(k as u64);
            degenerate.push(deg);
        }
    }
    Ok(TorusBasis {
        torus_id: torus.id,
        order: m as u64,
        vectors,
        phase_index,
        degenerate,
    })
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Torus eigenbases shared by the oscillator and extended oscillator dictionaries.
#[derive(Debug)]
pub struct OscillatorBases {
    census: Arc<TorusCensus>,
    selected: Option<Vec<usize>>,
    bases: Vec<TorusBasis>,
}

impl OscillatorBases {
    pub fn new(field: &FiniteField, torus_subset: Option<&[usize]>) -> Result<Self> {
        let census = Arc::new(enumerate_tori(field.modulus()));
        let count = census.tori.len();
        let ids: Vec<usize> = match torus_subset {
            Some(ids) => {
                if ids.is_empty() {
                    return Err(Error::domain("torus subset is empty"));
                }
                let mut seen = HashSet::new();
                for &id in ids {
                    if id >= count {
                        return Err(Error::InvalidTorus { id, count });
                    }
                    if !seen.insert(id) {
                        return Err(Error::domain(format!("torus id {id} repeated in subset")));
                    }
                }
                ids.to_vec()
            }
            None => (0..count).collect(),
        };
        let bases = exec::map_indexed(ids.len(), |i| torus_eigenbasis(field, &census.tori[ids[i]]))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(OscillatorBases {
            census,
            selected: torus_subset.map(<[usize]>::to_vec),
            bases,
        })
    }

    pub fn census(&self) -> &TorusCensus {
        &self.census
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    /// Basis at position `pos` of the selection.
    pub fn basis(&self, pos: usize) -> &TorusBasis {
        &self.bases[pos]
    }

    pub(crate) fn manifest_params(&self) -> OscillatorParams {
        OscillatorParams {
            torus_subset: self.selected.clone(),
            primitive_root: self.census.primitive_root,
            nonresidue: self.census.nonresidue,
        }
    }
}

/// One eigenbasis per selected torus (all `p^2` by default): `p^3` atoms,
/// declared coherence 4. `basis_index` is the position in the selection.
pub fn build_oscillator_dictionary(p: PrimeModulus, torus_subset: Option<&[usize]>) -> Result<Dictionary> {
    let field = FiniteField::new(p);
    let bases = Arc::new(OscillatorBases::new(&field, torus_subset)?);
    let count = bases.len();
    Ok(Dictionary::from_parts(
        field,
        DictionaryKind::Oscillator,
        count,
        4.0,
        AtomSource::Oscillator(bases),
    ))
}

/// Heisenberg translates of the oscillator bases. Basis
/// `pos * p^2 + tau * p + w` holds `f -> psi(w t) f(t + tau)` applied to the
/// eigenbasis of the torus at selection position `pos`: `p^4` bases and
/// `p^5` atoms at default, generated on demand.
pub fn build_extended_oscillator_dictionary(p: PrimeModulus, torus_subset: Option<&[usize]>) -> Result<Dictionary> {
    let field = FiniteField::new(p);
    let bases = Arc::new(OscillatorBases::new(&field, torus_subset)?);
    let count = bases.len() * p.size() * p.size();
    Ok(Dictionary::from_parts(
        field,
        DictionaryKind::ExtendedOscillator,
        count,
        4.0,
        AtomSource::Extended(bases),
    ))
}

/// `rho(g)` for a dictionary's field; convenience for callers holding a prime only.
pub fn weil_matrix_for(p: PrimeModulus, g: &SL2Element) -> Result<WeilOperator> {
    weil_matrix(&FiniteField::new(p), g)
}
