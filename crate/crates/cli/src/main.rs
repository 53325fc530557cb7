//! `srip`: build dictionaries, audit coherence, inspect Gram submatrices and
//! run the SRIP and semicircle experiments.
//!
//! Exit codes: 0 success, 2 usage or domain error, 3 resource budget,
//! 4 numeric failure or aborted experiment.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use srip_core::dictionary::{
    coherence_with_budget, gram_submatrix, CoherenceMode, CoherenceReport, DEFAULT_PAIR_BUDGET,
};
use srip_core::exec::with_threads;
use srip_core::experiments::{
    export_report, run_semicircle_on, run_srip_on, sample_subset, ExperimentConfig, ReportFormat,
};
use srip_core::heisenberg::build_heisenberg_dictionary;
use srip_core::manifest::DictionaryManifest;
use srip_core::spectral::RipDeviation;
use srip_core::weil::{build_extended_oscillator_dictionary, build_oscillator_dictionary};
use srip_core::{AtomId, Error, PrimeModulus, SubsetSelection};

const PAIR_BUDGET_ENV: &str = "SRIP_PAIR_BUDGET";

#[derive(Parser)]
#[command(name = "srip", version, about = "Structured dictionaries and random sub-dictionary experiments over F_p")]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a dictionary and write its manifest.
    Build(BuildArgs),
    /// Audit the coherence of a dictionary.
    Coherence(CoherenceArgs),
    /// Print the spectrum of one Gram submatrix.
    Gram(GramArgs),
    /// Run the statistical RIP experiment.
    Srip(ExperimentArgs),
    /// Run the semicircle-law experiment.
    Semicircle(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Heisenberg,
    Oscillator,
    Extended,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long = "dict", value_enum)]
    family: Family,
    #[arg(long)]
    p: u64,
    /// Comma-separated torus ids (oscillator families only).
    #[arg(long, value_delimiter = ',')]
    tori: Option<Vec<usize>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CoherenceArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Examine every distinct pair.
    #[arg(long, conflicts_with_all = ["pairs", "seed"])]
    exhaustive: bool,
    /// Number of uniformly drawn pairs.
    #[arg(long, requires = "seed")]
    pairs: Option<u64>,
    #[arg(long, requires = "pairs")]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GramArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Atoms as `basis:vector`, comma-separated.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["n", "seed"])]
    atoms: Option<Vec<String>>,
    /// Draw this many atoms uniformly at random.
    #[arg(long, requires = "seed")]
    n: Option<usize>,
    #[arg(long, requires = "n")]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    epsilon: f64,
    #[arg(long)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    /// Subset size (default: ceil(p^(1 - epsilon))).
    #[arg(long)]
    n: Option<usize>,
    /// JSON report path; the CSV goes next to it with a `.csv` extension.
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Core(Error),
    Aborted(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(Error::BudgetExceeded { .. }) => 3,
            Failure::Core(Error::Numeric(_)) | Failure::Aborted(_) => 4,
            Failure::Core(_) => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = cli.command;
    match with_threads(cli.threads, || run(command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Core(e) => eprintln!("error: {e}"),
                Failure::Aborted(msg) => eprintln!("error: experiment aborted: {msg}"),
            }
            ExitCode::from(f.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Build(a) => cmd_build(a),
        Command::Coherence(a) => cmd_coherence(a),
        Command::Gram(a) => cmd_gram(a),
        Command::Srip(a) => cmd_srip(a),
        Command::Semicircle(a) => cmd_semicircle(a),
    }
}

fn cmd_build(a: BuildArgs) -> Result<(), Failure> {
    let p = PrimeModulus::new(a.p)?;
    let tori = a.tori.as_deref();
    let dict = match a.family {
        Family::Heisenberg => {
            if tori.is_some() {
                return Err(Error::Domain("--tori applies only to oscillator dictionaries".into()).into());
            }
            build_heisenberg_dictionary(p)
        }
        Family::Oscillator => build_oscillator_dictionary(p, tori)?,
        Family::Extended => build_extended_oscillator_dictionary(p, tori)?,
    };
    dict.manifest().write(&a.out)?;
    println!(
        "bases={} atoms={} mu={}",
        dict.basis_count(),
        dict.atom_count(),
        dict.coherence_mu()
    );
    Ok(())
}

#[derive(Serialize)]
struct CoherenceFile<'a> {
    manifest: &'a DictionaryManifest,
    report: &'a CoherenceReport,
}

fn pair_budget() -> Result<u128, Error> {
    match std::env::var(PAIR_BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("{PAIR_BUDGET_ENV}={v:?} is not a pair count"))),
        Err(_) => Ok(DEFAULT_PAIR_BUDGET),
    }
}

fn cmd_coherence(a: CoherenceArgs) -> Result<(), Failure> {
    let manifest = DictionaryManifest::read(&a.manifest)?;
    let dict = manifest.build()?;
    let mode = match (a.pairs, a.seed) {
        (Some(pairs), Some(seed)) => CoherenceMode::Sampled { pairs, seed },
        _ => CoherenceMode::Exhaustive,
    };
    let report = coherence_with_budget(&dict, mode, pair_budget()?)?;
    write_json(
        &a.out,
        &CoherenceFile {
            manifest: &manifest,
            report: &report,
        },
    )?;
    let argmax = match report.argmax {
        Some((x, y)) => format!("{x}-{y}"),
        None => "none".into(),
    };
    println!(
        "mu_hat={:.12} argmax={} pairs={} declared={} {}",
        report.mu_hat,
        argmax,
        report.pairs_examined,
        report.declared_mu,
        if report.pass { "PASS" } else { "FAIL" }
    );
    if report.degenerate.pair.is_some() {
        println!(
            "regular_mu_hat={:.12} degenerate_mu_hat={:.12}",
            report.regular.mu, report.degenerate.mu
        );
    }
    Ok(())
}

fn parse_atom(s: &str) -> Result<AtomId, Error> {
    let bad = || Error::Domain(format!("atom {s:?} is not of the form basis:vector"));
    let (b, v) = s.trim().split_once(':').ok_or_else(bad)?;
    Ok(AtomId::new(
        b.parse().map_err(|_| bad())?,
        v.parse().map_err(|_| bad())?,
    ))
}

#[derive(Serialize)]
struct GramFile<'a> {
    manifest: &'a DictionaryManifest,
    atoms: &'a [AtomId],
    subset_hash: String,
    eigenvalues: Vec<f64>,
    deviation: RipDeviation,
}

fn cmd_gram(a: GramArgs) -> Result<(), Failure> {
    let manifest = DictionaryManifest::read(&a.manifest)?;
    let dict = manifest.build()?;
    let sel = match (a.atoms, a.n, a.seed) {
        (Some(atoms), _, _) => {
            let ids = atoms.iter().map(|s| parse_atom(s)).collect::<Result<_, _>>()?;
            SubsetSelection::new(&dict, ids)?
        }
        (None, Some(n), Some(seed)) => sample_subset(&dict, n, seed)?,
        _ => return Err(Error::Domain("give either --atoms or --n with --seed".into()).into()),
    };
    let eigenvalues = gram_submatrix(&sel).eigenvalues()?;
    let deviation = RipDeviation::from_eigenvalues(&eigenvalues);
    println!(
        "n={} norm={:.12} lower={:.12} upper={:.12}",
        sel.len(),
        deviation.norm,
        deviation.lower,
        deviation.upper
    );
    let listed: Vec<String> = eigenvalues.iter().map(|x| format!("{x:.12}")).collect();
    println!("eigenvalues={}", listed.join(","));
    if let Some(out) = &a.out {
        write_json(
            out,
            &GramFile {
                manifest: &manifest,
                atoms: sel.atom_ids(),
                subset_hash: sel.subset_hash(),
                eigenvalues,
                deviation,
            },
        )?;
    }
    Ok(())
}

fn experiment(a: &ExperimentArgs) -> Result<(ExperimentConfig, srip_core::Dictionary), Error> {
    let manifest = DictionaryManifest::read(&a.manifest)?;
    let mut config = ExperimentConfig::new(manifest, a.epsilon, a.trials, a.seed);
    if let Some(n) = a.n {
        config = config.with_n(n);
    }
    config.validate()?;
    let dict = config.dictionary.build()?;
    Ok((config, dict))
}

/// JSON at `out`, CSV beside it.
fn report_paths(out: &Path) -> (PathBuf, PathBuf) {
    if out.extension().is_some_and(|e| e == "csv") {
        (out.with_extension("json"), out.to_path_buf())
    } else {
        (out.to_path_buf(), out.with_extension("csv"))
    }
}

fn cmd_srip(a: ExperimentArgs) -> Result<(), Failure> {
    let (config, dict) = experiment(&a)?;
    let report = run_srip_on(&dict, &config)?;
    let (json, csv) = report_paths(&a.out);
    export_report(&report, ReportFormat::Json, &json)?;
    export_report(&report, ReportFormat::Csv, &csv)?;
    let median = report
        .norm_quantiles
        .map_or_else(|| "nan".to_string(), |q| format!("{:.6}", q.median));
    println!(
        "exceedance={:.3} n={} threshold={:.6} median_norm={} trials={}",
        report.exceedance_rate,
        report.n,
        report.threshold,
        median,
        report.trials.len()
    );
    match report.aborted {
        Some(abort) => Err(Failure::Aborted(format!("trial {}: {}", abort.trial, abort.message))),
        None => Ok(()),
    }
}

fn cmd_semicircle(a: ExperimentArgs) -> Result<(), Failure> {
    let (config, dict) = experiment(&a)?;
    let report = run_semicircle_on(&dict, &config)?;
    let (json, csv) = report_paths(&a.out);
    export_report(&report, ReportFormat::Json, &json)?;
    export_report(&report, ReportFormat::Csv, &csv)?;
    println!(
        "ks={:.6} n={} pooled={} trials={} outside_2={:.4}",
        report.ks_distance,
        report.n,
        report.pooled_count,
        report.trials.len(),
        report.histogram.fraction_outside(2.0)
    );
    match report.aborted {
        Some(abort) => Err(Failure::Aborted(format!("trial {}: {}", abort.trial, abort.message))),
        None => Ok(()),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value).expect("report serializes") + "\n";
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
