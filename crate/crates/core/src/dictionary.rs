//! Signals on `F_p`, dictionaries built as disjoint unions of orthonormal
//! bases, the synthesis map and Gram submatrices.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exec;
use crate::experiments::derive_seed;
use crate::field::FiniteField;
use crate::heisenberg;
use crate::manifest::{DictionaryManifest, ManifestParams};
use crate::spectral::GramMatrix;
use crate::tolerance::Tolerances;
use crate::weil::OscillatorBases;

/// Default cap on the number of pairs an exhaustive coherence audit may examine.
pub const DEFAULT_PAIR_BUDGET: u128 = 10_000_000;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A complex function on `F_p`, stored as its `p` values.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalVector(Vec<Complex64>);

impl SignalVector {
    pub fn new(entries: Vec<Complex64>) -> Self {
        SignalVector(entries)
    }

    pub fn zeros(p: usize) -> Self {
        SignalVector(vec![ZERO; p])
    }

    /// Indicator of `t = k`.
    pub fn delta(p: usize, k: usize) -> Self {
        let mut v = Self::zeros(p);
        v.0[k % p] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.0
    }

    pub fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl From<Vec<Complex64>> for SignalVector {
    fn from(v: Vec<Complex64>) -> Self {
        SignalVector(v)
    }
}

/// `<f, g> = sum_t f(t) conj(g(t))`.
pub fn inner_product(f: &SignalVector, g: &SignalVector) -> Result<Complex64> {
    if f.len() != g.len() {
        return Err(Error::DimensionMismatch {
            expected: f.len(),
            found: g.len(),
        });
    }
    Ok(dot(f.entries(), g.entries()))
}

#[inline]
pub(crate) fn dot(f: &[Complex64], g: &[Complex64]) -> Complex64 {
    f.iter().zip(g).map(|(a, b)| a * b.conj()).sum()
}

/// Two-level atom address: which basis, and which vector inside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AtomId {
    pub basis_index: usize,
    pub vector_index: usize,
}

impl AtomId {
    pub fn new(basis_index: usize, vector_index: usize) -> Self {
        AtomId {
            basis_index,
            vector_index,
        }
    }

    /// `basis_index * p + vector_index`
    pub fn flat(self, p: usize) -> usize {
        self.basis_index * p + self.vector_index
    }

    pub fn from_flat(flat: usize, p: usize) -> Self {
        AtomId::new(flat / p, flat % p)
    }
}

impl fmt::Display for AtomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.basis_index, self.vector_index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DictionaryKind {
    Heisenberg,
    Oscillator,
    ExtendedOscillator,
    Custom,
}

impl fmt::Display for DictionaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DictionaryKind::Heisenberg => "heisenberg",
            DictionaryKind::Oscillator => "oscillator",
            DictionaryKind::ExtendedOscillator => "extended_oscillator",
            DictionaryKind::Custom => "custom",
        })
    }
}

#[derive(Debug, Clone)]
pub(crate) enum AtomSource {
    Heisenberg,
    Oscillator(Arc<OscillatorBases>),
    Extended(Arc<OscillatorBases>),
    /// One entry per basis, each `p` vectors of length `p`.
    Custom(Arc<Vec<Vec<Vec<Complex64>>>>),
}

/// A disjoint union of orthonormal bases of `C(F_p)`. Atoms are produced on
/// demand from their [`AtomId`]; the same id always yields bit-identical entries.
#[derive(Debug, Clone)]
pub struct Dictionary {
    field: FiniteField,
    kind: DictionaryKind,
    basis_count: usize,
    coherence_mu: f64,
    source: AtomSource,
}

impl Dictionary {
    pub(crate) fn from_parts(
        field: FiniteField,
        kind: DictionaryKind,
        basis_count: usize,
        coherence_mu: f64,
        source: AtomSource,
    ) -> Self {
        Dictionary {
            field,
            kind,
            basis_count,
            coherence_mu,
            source,
        }
    }

    /// A dictionary from explicitly given bases; each must be orthonormal.
    pub fn custom(field: FiniteField, bases: Vec<Vec<SignalVector>>, coherence_mu: f64) -> Result<Self> {
        let p = field.p();
        if bases.is_empty() {
            return Err(Error::domain("custom dictionary needs at least one basis"));
        }
        let mut raw = Vec::with_capacity(bases.len());
        for (b, basis) in bases.into_iter().enumerate() {
            if basis.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: basis.len(),
                });
            }
            let vectors: Vec<Vec<Complex64>> = basis
                .into_iter()
                .map(|v| {
                    if v.len() == p {
                        Ok(v.into_entries())
                    } else {
                        Err(Error::DimensionMismatch {
                            expected: p,
                            found: v.len(),
                        })
                    }
                })
                .collect::<Result<_>>()?;
            let err = orthonormality_error(&vectors);
            if err > Tolerances::DEFAULT.orthonormality {
                return Err(Error::domain(format!(
                    "custom basis {b} is not orthonormal (max |G - Id| = {err:.3e})"
                )));
            }
            raw.push(vectors);
        }
        let basis_count = raw.len();
        Ok(Dictionary::from_parts(
            field,
            DictionaryKind::Custom,
            basis_count,
            coherence_mu,
            AtomSource::Custom(Arc::new(raw)),
        ))
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn p(&self) -> usize {
        self.field.p()
    }

    pub fn kind(&self) -> DictionaryKind {
        self.kind
    }

    pub fn basis_count(&self) -> usize {
        self.basis_count
    }

    pub fn atom_count(&self) -> usize {
        self.basis_count * self.p()
    }

    /// Declared coherence coefficient `mu`: `|<phi, psi>| <= mu / sqrt(p)`.
    pub fn coherence_mu(&self) -> f64 {
        self.coherence_mu
    }

    /// Torus eigenbases behind the oscillator families.
    pub fn oscillator_bases(&self) -> Option<&OscillatorBases> {
        match &self.source {
            AtomSource::Oscillator(b) | AtomSource::Extended(b) => Some(b),
            _ => None,
        }
    }

    pub fn validate(&self, id: AtomId) -> Result<()> {
        if id.basis_index >= self.basis_count || id.vector_index >= self.p() {
            return Err(Error::InvalidAtom {
                basis: id.basis_index,
                vector: id.vector_index,
                bases: self.basis_count,
                p: self.p(),
            });
        }
        Ok(())
    }

    pub fn atom(&self, id: AtomId) -> Result<SignalVector> {
        self.validate(id)?;
        let mut out = vec![ZERO; self.p()];
        self.write_atom(id, &mut out);
        Ok(SignalVector(out))
    }

    /// Writes the entries of a valid atom into `out` (length `p`).
    pub(crate) fn write_atom(&self, id: AtomId, out: &mut [Complex64]) {
        let p = self.p();
        match &self.source {
            AtomSource::Heisenberg => {
                if id.basis_index == p {
                    out.fill(ZERO);
                    out[id.vector_index] = Complex64::new(1.0, 0.0);
                } else {
                    heisenberg::write_chirp(&self.field, id.basis_index as u64, id.vector_index as u64, out);
                }
            }
            AtomSource::Oscillator(bases) => {
                out.copy_from_slice(bases.basis(id.basis_index).vector(id.vector_index));
            }
            AtomSource::Extended(bases) => {
                let shifts = p * p;
                let torus_pos = id.basis_index / shifts;
                let shift = id.basis_index % shifts;
                let v = bases.basis(torus_pos).vector(id.vector_index);
                heisenberg::write_shifted(&self.field, (shift / p) as u64, (shift % p) as u64, v, out);
            }
            AtomSource::Custom(raw) => out.copy_from_slice(&raw[id.basis_index][id.vector_index]),
        }
    }

    /// Whether the atom was chosen inside a multi-dimensional eigenspace
    /// (degenerate split-torus eigenvalue in the oscillator families).
    pub fn is_degenerate(&self, id: AtomId) -> bool {
        let p = self.p();
        match &self.source {
            AtomSource::Oscillator(bases) => bases.basis(id.basis_index).is_degenerate(id.vector_index),
            AtomSource::Extended(bases) => bases
                .basis(id.basis_index / (p * p))
                .is_degenerate(id.vector_index),
            _ => false,
        }
    }

    pub fn basis(&self, basis_index: usize) -> Result<Vec<SignalVector>> {
        (0..self.p())
            .map(|v| self.atom(AtomId::new(basis_index, v)))
            .collect()
    }

    /// Max entrywise `|G - Id|` over the Gram matrix of one basis.
    pub fn basis_orthonormality_error(&self, basis_index: usize) -> Result<f64> {
        let vectors: Vec<Vec<Complex64>> = self
            .basis(basis_index)?
            .into_iter()
            .map(SignalVector::into_entries)
            .collect();
        Ok(orthonormality_error(&vectors))
    }

    /// Worst [`Self::basis_orthonormality_error`] over every basis.
    pub fn max_orthonormality_error(&self) -> f64 {
        exec::map_reduce(
            self.basis_count,
            0.0,
            |b| self.basis_orthonormality_error(b).expect("basis index in range"),
            f64::max,
        )
    }

    pub fn manifest(&self) -> DictionaryManifest {
        let p = self.field.modulus().get();
        let params = match &self.source {
            AtomSource::Heisenberg => ManifestParams::Heisenberg,
            AtomSource::Oscillator(b) => ManifestParams::Oscillator(b.manifest_params()),
            AtomSource::Extended(b) => ManifestParams::ExtendedOscillator(b.manifest_params()),
            AtomSource::Custom(raw) => ManifestParams::Custom {
                bases: raw
                    .iter()
                    .map(|basis| {
                        basis
                            .iter()
                            .map(|v| v.iter().map(|z| [z.re, z.im]).collect())
                            .collect()
                    })
                    .collect(),
            },
        };
        DictionaryManifest::new(self.kind, p, self.basis_count, self.coherence_mu, params)
    }
}

pub(crate) fn orthonormality_error(vectors: &[Vec<Complex64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, u) in vectors.iter().enumerate() {
        for (j, v) in vectors.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot(u, v) - target).norm());
        }
    }
    worst
}

/// `Theta(f) = sum_phi f(phi) phi`.
pub fn synthesis(
    dict: &Dictionary,
    coeffs: impl IntoIterator<Item = (AtomId, Complex64)>,
) -> Result<SignalVector> {
    let p = dict.p();
    let mut out = vec![ZERO; p];
    let mut buf = vec![ZERO; p];
    for (id, c) in coeffs {
        dict.validate(id)?;
        dict.write_atom(id, &mut buf);
        for (o, a) in out.iter_mut().zip(&buf) {
            *o += c * a;
        }
    }
    Ok(SignalVector(out))
}

/// An ordered list of distinct atoms of one dictionary.
#[derive(Debug, Clone)]
pub struct SubsetSelection<'a> {
    dictionary: &'a Dictionary,
    atom_ids: Vec<AtomId>,
}

impl<'a> SubsetSelection<'a> {
    pub fn new(dictionary: &'a Dictionary, atom_ids: Vec<AtomId>) -> Result<Self> {
        if atom_ids.is_empty() {
            return Err(Error::domain("subset selection must contain at least one atom"));
        }
        let mut seen = HashSet::with_capacity(atom_ids.len());
        for &id in &atom_ids {
            dictionary.validate(id)?;
            if !seen.insert(id) {
                return Err(Error::DuplicateAtom {
                    basis: id.basis_index,
                    vector: id.vector_index,
                });
            }
        }
        Ok(SubsetSelection { dictionary, atom_ids })
    }

    pub fn dictionary(&self) -> &'a Dictionary {
        self.dictionary
    }

    pub fn atom_ids(&self) -> &[AtomId] {
        &self.atom_ids
    }

    pub fn len(&self) -> usize {
        self.atom_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atom_ids.is_empty()
    }

    /// SHA-256 over the flat atom indices (little-endian `u64`), first 16 hex digits.
    pub fn subset_hash(&self) -> String {
        let p = self.dictionary.p();
        let mut h = Sha256::new();
        for id in &self.atom_ids {
            h.update((id.flat(p) as u64).to_le_bytes());
        }
        h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// `G(S) = Theta_S^* Theta_S` with `G[i][j] = <phi_j, phi_i>`.
pub fn gram_submatrix(sel: &SubsetSelection<'_>) -> GramMatrix {
    let dict = sel.dictionary;
    let p = dict.p();
    let atoms: Vec<Vec<Complex64>> = sel
        .atom_ids
        .iter()
        .map(|&id| {
            let mut v = vec![ZERO; p];
            dict.write_atom(id, &mut v);
            v
        })
        .collect();
    GramMatrix::from_upper(atoms.len(), |i, j| dot(&atoms[j], &atoms[i])).with_subset_hash(sel.subset_hash())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum CoherenceMode {
    Exhaustive,
    Sampled { pairs: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairMaximum {
    /// `sqrt(p) |<phi, psi>|`
    pub mu: f64,
    pub pair: Option<(AtomId, AtomId)>,
}

impl PairMaximum {
    const NONE: PairMaximum = PairMaximum { mu: 0.0, pair: None };

    // Ties resolve to the lexicographically smallest pair so the reduction
    // order never shows in the result.
    fn merge(self, other: PairMaximum) -> PairMaximum {
        match (self.pair, other.pair) {
            (None, _) => other,
            (_, None) => self,
            (Some(a), Some(b)) => {
                if other.mu > self.mu || (other.mu == self.mu && b < a) {
                    other
                } else {
                    self
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub kind: DictionaryKind,
    pub p: u64,
    pub mode: CoherenceMode,
    pub pairs_examined: u64,
    /// Empirical coherence, `max sqrt(p) |<phi, psi>|` over examined pairs.
    pub mu_hat: f64,
    pub argmax: Option<(AtomId, AtomId)>,
    pub declared_mu: f64,
    pub pass: bool,
    /// Maximum over pairs where neither atom comes from a degenerate eigenspace.
    pub regular: PairMaximum,
    /// Maximum over pairs involving at least one degenerate-eigenspace atom.
    pub degenerate: PairMaximum,
}

#[derive(Debug, Clone, Copy)]
struct Maxima {
    all: PairMaximum,
    regular: PairMaximum,
    degenerate: PairMaximum,
}

impl Maxima {
    const NONE: Maxima = Maxima {
        all: PairMaximum::NONE,
        regular: PairMaximum::NONE,
        degenerate: PairMaximum::NONE,
    };

    fn record(&mut self, mu: f64, a: AtomId, b: AtomId, degenerate: bool) {
        let m = PairMaximum { mu, pair: Some((a, b)) };
        self.all = self.all.merge(m);
        if degenerate {
            self.degenerate = self.degenerate.merge(m);
        } else {
            self.regular = self.regular.merge(m);
        }
    }

    fn merge(self, o: Maxima) -> Maxima {
        Maxima {
            all: self.all.merge(o.all),
            regular: self.regular.merge(o.regular),
            degenerate: self.degenerate.merge(o.degenerate),
        }
    }
}

pub fn coherence(dict: &Dictionary, mode: CoherenceMode) -> Result<CoherenceReport> {
    coherence_with_budget(dict, mode, DEFAULT_PAIR_BUDGET)
}

/// Empirical coherence over all distinct pairs (exhaustive) or over uniformly
/// drawn distinct pairs (sampled, reproducible from the seed).
pub fn coherence_with_budget(dict: &Dictionary, mode: CoherenceMode, budget: u128) -> Result<CoherenceReport> {
    let p = dict.p();
    let total = dict.atom_count();
    let root_p = (p as f64).sqrt();
    let (maxima, examined) = match mode {
        CoherenceMode::Exhaustive => {
            let pairs = total as u128 * (total as u128 - 1) / 2;
            if pairs > budget {
                return Err(Error::BudgetExceeded { pairs, budget });
            }
            let mut atoms = vec![ZERO; total * p];
            for (flat, chunk) in atoms.chunks_mut(p).enumerate() {
                dict.write_atom(AtomId::from_flat(flat, p), chunk);
            }
            let degenerate: Vec<bool> = (0..total).map(|f| dict.is_degenerate(AtomId::from_flat(f, p))).collect();
            let maxima = exec::map_reduce(
                total,
                Maxima::NONE,
                |i| {
                    let mut m = Maxima::NONE;
                    let u = &atoms[i * p..(i + 1) * p];
                    for j in i + 1..total {
                        let mu = root_p * dot(u, &atoms[j * p..(j + 1) * p]).norm();
                        m.record(
                            mu,
                            AtomId::from_flat(i, p),
                            AtomId::from_flat(j, p),
                            degenerate[i] || degenerate[j],
                        );
                    }
                    m
                },
                Maxima::merge,
            );
            (maxima, pairs as u64)
        }
        CoherenceMode::Sampled { pairs, seed } => {
            if total < 2 {
                return Err(Error::domain("sampled coherence needs at least two atoms"));
            }
            const CHUNK: u64 = 4096;
            let chunks = pairs.div_ceil(CHUNK) as usize;
            let maxima = exec::map_reduce(
                chunks,
                Maxima::NONE,
                |c| {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, c as u64));
                    let count = CHUNK.min(pairs - c as u64 * CHUNK);
                    let mut u = vec![ZERO; p];
                    let mut v = vec![ZERO; p];
                    let mut m = Maxima::NONE;
                    for _ in 0..count {
                        let i = rng.random_range(0..total);
                        let mut j = rng.random_range(0..total - 1);
                        if j >= i {
                            j += 1;
                        }
                        let (i, j) = (i.min(j), i.max(j));
                        let (a, b) = (AtomId::from_flat(i, p), AtomId::from_flat(j, p));
                        dict.write_atom(a, &mut u);
                        dict.write_atom(b, &mut v);
                        let mu = root_p * dot(&u, &v).norm();
                        m.record(mu, a, b, dict.is_degenerate(a) || dict.is_degenerate(b));
                    }
                    m
                },
                Maxima::merge,
            );
            (maxima, pairs)
        }
    };
    let declared_mu = dict.coherence_mu();
    let mu_hat = maxima.all.mu;
    Ok(CoherenceReport {
        kind: dict.kind(),
        p: p as u64,
        mode,
        pairs_examined: examined,
        mu_hat,
        argmax: maxima.all.pair,
        declared_mu,
        pass: mu_hat <= declared_mu + Tolerances::DEFAULT.coherence_slack * root_p,
        regular: maxima.regular,
        degenerate: maxima.degenerate,
    })
}
