//! Seeded Monte Carlo trials over uniformly random atom subsets.
//!
//! Trial `i` of a run draws its subset from its own RNG, seeded with
//! [`derive_seed`]`(master_seed, i)`. Nothing is shared between trials, so
//! they may run in any order or in parallel and the report is the same.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dictionary::{gram_submatrix, AtomId, Dictionary, SubsetSelection};
use crate::error::{Error, Result};
use crate::exec;
use crate::manifest::DictionaryManifest;
use crate::spectral::{ks_distance, EmpiricalCdf, RipDeviation, SpectralSample};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream element `index`: the `(index + 1)`-th SplitMix64 output
/// from state `master`, i.e. `splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15)`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dictionary: DictionaryManifest,
    /// Subset size exponent: `n = ceil(p^(1 - epsilon))`.
    pub epsilon: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub n_override: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(dictionary: DictionaryManifest, epsilon: f64, trials: usize, master_seed: u64) -> Self {
        ExperimentConfig {
            dictionary,
            epsilon,
            trials,
            master_seed,
            n_override: None,
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n_override = Some(n);
        self
    }

    pub fn p(&self) -> u64 {
        self.dictionary.p
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::domain(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if self.trials == 0 {
            return Err(Error::domain("trials must be at least 1"));
        }
        let n = self.subset_size();
        if n == 0 || n > self.dictionary.atom_count {
            return Err(Error::domain(format!(
                "subset size {n} outside [1, {}]",
                self.dictionary.atom_count
            )));
        }
        Ok(())
    }

    pub fn subset_size(&self) -> usize {
        self.n_override
            .unwrap_or_else(|| default_subset_size(self.p(), self.epsilon))
    }

    /// `p^(-epsilon / 2)`
    pub fn threshold(&self) -> f64 {
        (self.p() as f64).powf(-self.epsilon / 2.0)
    }
}

pub fn default_subset_size(p: u64, epsilon: f64) -> usize {
    ((p as f64).powf(1.0 - epsilon).ceil() as usize).max(1)
}

/// `n` distinct atoms drawn uniformly without replacement from the whole dictionary.
pub fn sample_subset(dict: &Dictionary, n: usize, trial_seed: u64) -> Result<SubsetSelection<'_>> {
    let total = dict.atom_count();
    if n == 0 || n > total {
        return Err(Error::domain(format!("subset size {n} outside [1, {total}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    let p = dict.p();
    let ids = rand::seq::index::sample(&mut rng, total, n)
        .into_iter()
        .map(|flat| AtomId::from_flat(flat, p))
        .collect();
    SubsetSelection::new(dict, ids)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Abort {
    pub trial: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SripTrial {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub deviation: RipDeviation,
    /// `deviation.norm >= threshold`
    pub exceeded: bool,
}

/// Order statistics of the per-trial norms. The median averages the two
/// middle values for even counts; `p95` is the nearest-rank 95th percentile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub median: f64,
    pub p95: f64,
    pub max: f64,
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Option<Quantiles> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        };
        let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
        Some(Quantiles {
            min: v[0],
            median,
            p95: v[rank - 1],
            max: v[n - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SripReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub n: usize,
    /// `p^(-epsilon / 2)`
    pub threshold: f64,
    pub trials: Vec<SripTrial>,
    /// Fraction of completed trials with `||G(S) - Id|| >= threshold`.
    pub exceedance_rate: f64,
    pub norm_quantiles: Option<Quantiles>,
    pub aborted: Option<Abort>,
}

impl SripReport {
    pub fn norms(&self) -> Vec<f64> {
        self.trials.iter().map(|t| t.deviation.norm).collect()
    }
}

/// Collects trial results in index order, stopping at the first failure.
fn completed<T>(results: Vec<Result<T>>) -> (Vec<T>, Option<Abort>) {
    let mut done = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(t) => done.push(t),
            Err(e) => {
                return (
                    done,
                    Some(Abort {
                        trial: i,
                        message: e.to_string(),
                    }),
                )
            }
        }
    }
    (done, None)
}

pub fn run_srip(config: &ExperimentConfig) -> Result<SripReport> {
    config.validate()?;
    let dict = config.dictionary.build()?;
    run_srip_on(&dict, config)
}

/// Like [`run_srip`] with an already-built dictionary matching `config.dictionary`.
pub fn run_srip_on(dict: &Dictionary, config: &ExperimentConfig) -> Result<SripReport> {
    config.validate()?;
    let n = config.subset_size();
    let threshold = config.threshold();
    let results = exec::map_indexed(config.trials, |i| {
        let seed = derive_seed(config.master_seed, i as u64);
        let sel = sample_subset(dict, n, seed)?;
        let eig = gram_submatrix(&sel).eigenvalues()?;
        let deviation = RipDeviation::from_eigenvalues(&eig);
        Ok(SripTrial {
            trial: i,
            seed,
            n,
            deviation,
            exceeded: deviation.norm >= threshold,
        })
    });
    let (trials, aborted) = completed(results);
    let norms: Vec<f64> = trials.iter().map(|t| t.deviation.norm).collect();
    let exceedance_rate = if trials.is_empty() {
        0.0
    } else {
        trials.iter().filter(|t| t.exceeded).count() as f64 / trials.len() as f64
    };
    Ok(SripReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: config.clone(),
        n,
        threshold,
        norm_quantiles: Quantiles::of(&norms),
        trials,
        exceedance_rate,
        aborted,
    })
}

/// Fixed-edge histogram; values outside `[lo, hi)` go to the under/overflow counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub const BINS: usize = 60;
    pub const RANGE: (f64, f64) = (-3.0, 3.0);

    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        Histogram {
            lo,
            hi,
            counts: vec![0; bins],
            underflow: 0,
            overflow: 0,
        }
    }

    pub fn standard() -> Self {
        Self::new(Self::RANGE.0, Self::RANGE.1, Self::BINS)
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn add(&mut self, x: f64) {
        if x < self.lo {
            self.underflow += 1;
        } else if x >= self.hi {
            self.overflow += 1;
        } else {
            let last = self.counts.len() - 1;
            let k = ((x - self.lo) / self.bin_width()).floor() as usize;
            self.counts[k.min(last)] += 1;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }

    /// Fraction of the mass in bins whose centre lies outside `[-limit, limit]`,
    /// plus under/overflow.
    pub fn fraction_outside(&self, limit: f64) -> f64 {
        let w = self.bin_width();
        let outside: u64 = self
            .counts
            .iter()
            .enumerate()
            .filter(|(k, _)| (self.lo + (*k as f64 + 0.5) * w).abs() > limit)
            .map(|(_, c)| c)
            .sum();
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            (outside + self.underflow + self.overflow) as f64 / total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemicircleTrial {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    /// KS distance of this trial's spectrum alone.
    pub ks: f64,
    pub subset_hash: String,
    /// Sorted eigenvalues of `sqrt(p / n) (G(S) - Id)`.
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemicircleReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub n: usize,
    pub pooled_count: usize,
    /// KS distance between the pooled spectrum and the semicircle law.
    pub ks_distance: f64,
    pub trials: Vec<SemicircleTrial>,
    pub histogram: Histogram,
    pub aborted: Option<Abort>,
}

impl SemicircleReport {
    pub fn pooled_eigenvalues(&self) -> Vec<f64> {
        self.trials.iter().flat_map(|t| t.eigenvalues.iter().copied()).collect()
    }
}

pub fn run_semicircle(config: &ExperimentConfig) -> Result<SemicircleReport> {
    config.validate()?;
    let dict = config.dictionary.build()?;
    run_semicircle_on(&dict, config)
}

pub fn run_semicircle_on(dict: &Dictionary, config: &ExperimentConfig) -> Result<SemicircleReport> {
    config.validate()?;
    let n = config.subset_size();
    let p = config.p();
    let results = exec::map_indexed(config.trials, |i| {
        let seed = derive_seed(config.master_seed, i as u64);
        let sel = sample_subset(dict, n, seed)?;
        let gram = gram_submatrix(&sel);
        let sample = SpectralSample::from_gram_eigenvalues(&gram.eigenvalues()?, p, sel.subset_hash());
        let ks = ks_distance(&EmpiricalCdf::new(sample.eigenvalues.clone())?);
        Ok(SemicircleTrial {
            trial: i,
            seed,
            n,
            ks,
            subset_hash: sample.subset_hash,
            eigenvalues: sample.eigenvalues,
        })
    });
    let (trials, aborted) = completed(results);
    let mut histogram = Histogram::standard();
    let pooled: Vec<f64> = trials.iter().flat_map(|t| t.eigenvalues.iter().copied()).collect();
    pooled.iter().for_each(|&x| histogram.add(x));
    let ks = if pooled.is_empty() {
        0.0
    } else {
        ks_distance(&EmpiricalCdf::new(pooled.clone())?)
    };
    Ok(SemicircleReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: config.clone(),
        n,
        pooled_count: pooled.len(),
        ks_distance: ks,
        trials,
        histogram,
        aborted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// Serialization shared by the experiment reports.
pub trait ExperimentReport: Serialize + for<'de> Deserialize<'de> {
    const NAME: &'static str;

    fn config(&self) -> &ExperimentConfig;

    /// `(trial, seed, n, norm_or_ks, exceeded)` per completed trial.
    fn rows(&self) -> Vec<[String; 5]>;

    fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// One `#` comment line with the config echo, a column header, then one row per trial.
    fn to_csv(&self) -> String {
        #[derive(Serialize)]
        struct Echo<'a> {
            schema_version: u32,
            report: &'static str,
            config: &'a ExperimentConfig,
        }
        let echo = serde_json::to_string(&Echo {
            schema_version: REPORT_SCHEMA_VERSION,
            report: Self::NAME,
            config: self.config(),
        })
        .expect("config serializes");
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["trial", "seed", "n", "norm_or_ks", "exceeded"])
            .expect("in-memory write");
        for row in self.rows() {
            w.write_record(&row).expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8");
        format!("# {echo}\n{body}")
    }

    fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

impl ExperimentReport for SripReport {
    const NAME: &'static str = "srip";

    fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    fn rows(&self) -> Vec<[String; 5]> {
        self.trials
            .iter()
            .map(|t| {
                [
                    t.trial.to_string(),
                    t.seed.to_string(),
                    t.n.to_string(),
                    t.deviation.norm.to_string(),
                    t.exceeded.to_string(),
                ]
            })
            .collect()
    }
}

impl ExperimentReport for SemicircleReport {
    const NAME: &'static str = "semicircle";

    fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    fn rows(&self) -> Vec<[String; 5]> {
        self.trials
            .iter()
            .map(|t| {
                [
                    t.trial.to_string(),
                    t.seed.to_string(),
                    t.n.to_string(),
                    t.ks.to_string(),
                    String::new(),
                ]
            })
            .collect()
    }
}

pub fn export_report<R: ExperimentReport>(report: &R, format: ReportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Csv => report.to_csv(),
    };
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(text.as_bytes()).map_err(io)?;
    Ok(())
}

pub fn import_report<R: ExperimentReport>(path: &Path) -> Result<R> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    R::from_json(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}
