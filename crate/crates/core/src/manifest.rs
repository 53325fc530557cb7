//! JSON manifests: everything needed to rebuild a dictionary exactly.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dictionary::{Dictionary, DictionaryKind, SignalVector};
use crate::error::{Error, Result};
use crate::field::{FiniteField, PrimeModulus};
use crate::heisenberg::build_heisenberg_dictionary;
use crate::weil::{build_extended_oscillator_dictionary, build_oscillator_dictionary};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    /// Selected torus ids in enumeration order, or `None` for all `p^2`.
    pub torus_subset: Option<Vec<usize>>,
    pub primitive_root: u64,
    pub nonresidue: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum ManifestParams {
    Heisenberg,
    Oscillator(OscillatorParams),
    ExtendedOscillator(OscillatorParams),
    /// Explicit bases: `bases[b][v][t] = [re, im]`.
    Custom { bases: Vec<Vec<Vec<[f64; 2]>>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictionaryManifest {
    pub schema_version: u32,
    pub kind: DictionaryKind,
    pub p: u64,
    pub basis_count: usize,
    pub atom_count: usize,
    pub coherence_mu: f64,
    pub params: ManifestParams,
}

impl DictionaryManifest {
    pub(crate) fn new(
        kind: DictionaryKind,
        p: u64,
        basis_count: usize,
        coherence_mu: f64,
        params: ManifestParams,
    ) -> Self {
        DictionaryManifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            kind,
            p,
            basis_count,
            atom_count: basis_count * p as usize,
            coherence_mu,
            params,
        }
    }

    /// Rebuilds the dictionary and checks it against the recorded counts
    /// and enumeration parameters.
    pub fn build(&self) -> Result<Dictionary> {
        if self.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(Error::domain(format!(
                "unsupported manifest schema version {}",
                self.schema_version
            )));
        }
        let p = PrimeModulus::new(self.p)?;
        let dict = match &self.params {
            ManifestParams::Heisenberg => build_heisenberg_dictionary(p),
            ManifestParams::Oscillator(o) => {
                check_enumeration(p, o)?;
                build_oscillator_dictionary(p, o.torus_subset.as_deref())?
            }
            ManifestParams::ExtendedOscillator(o) => {
                check_enumeration(p, o)?;
                build_extended_oscillator_dictionary(p, o.torus_subset.as_deref())?
            }
            ManifestParams::Custom { bases } => {
                let bases = bases
                    .iter()
                    .map(|basis| {
                        basis
                            .iter()
                            .map(|v| SignalVector::new(v.iter().map(|&[re, im]| Complex64::new(re, im)).collect()))
                            .collect()
                    })
                    .collect();
                Dictionary::custom(FiniteField::new(p), bases, self.coherence_mu)?
            }
        };
        if dict.kind() != self.kind {
            return Err(Error::domain(format!(
                "manifest kind {} does not match its parameters ({})",
                self.kind,
                dict.kind()
            )));
        }
        if dict.basis_count() != self.basis_count || dict.atom_count() != self.atom_count {
            return Err(Error::domain(format!(
                "manifest records {} bases / {} atoms but the construction yields {} / {}",
                self.basis_count,
                self.atom_count,
                dict.basis_count(),
                dict.atom_count()
            )));
        }
        Ok(dict)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json() + "\n").map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn check_enumeration(p: PrimeModulus, o: &OscillatorParams) -> Result<()> {
    let (r, delta) = (p.primitive_root(), p.smallest_nonresidue());
    if o.primitive_root != r || o.nonresidue != delta {
        return Err(Error::domain(format!(
            "manifest torus parameters (r = {}, D = {}) differ from this build's enumeration (r = {r}, D = {delta})",
            o.primitive_root, o.nonresidue
        )));
    }
    Ok(())
}
