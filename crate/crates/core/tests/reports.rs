use srip_core::dictionary::{coherence, CoherenceMode};
use srip_core::experiments::{
    export_report, import_report, run_semicircle, run_srip, ExperimentConfig, ExperimentReport, ReportFormat,
    SemicircleReport, SripReport,
};
use srip_core::heisenberg::build_heisenberg_dictionary;
use srip_core::manifest::DictionaryManifest;
use srip_core::weil::{build_extended_oscillator_dictionary, build_oscillator_dictionary};
use srip_core::{Dictionary, FiniteField, PrimeModulus, SignalVector};

fn config(p: u64, eps: f64, trials: usize) -> ExperimentConfig {
    let dict = build_heisenberg_dictionary(PrimeModulus::new(p).unwrap());
    ExperimentConfig::new(dict.manifest(), eps, trials, 11)
}

#[test]
fn srip_report_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_srip(&config(29, 0.5, 12)).unwrap();
    let json = dir.path().join("r.json");
    let csv = dir.path().join("r.csv");
    export_report(&report, ReportFormat::Json, &json).unwrap();
    export_report(&report, ReportFormat::Csv, &csv).unwrap();
    let back: SripReport = import_report(&json).unwrap();
    assert_eq!(back, report);
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 12 + 2);
    // A re-run from the echoed config reproduces the file.
    let again = run_srip(&back.config).unwrap();
    assert_eq!(again.to_json(), std::fs::read_to_string(&json).unwrap());
}

#[test]
fn semicircle_report_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_semicircle(&config(29, 0.3, 5)).unwrap();
    let json = dir.path().join("s.json");
    export_report(&report, ReportFormat::Json, &json).unwrap();
    let back: SemicircleReport = import_report(&json).unwrap();
    assert_eq!(back, report);
    assert_eq!(back.pooled_count, 5 * report.n);
    assert_eq!(report.histogram.total(), back.pooled_count as u64);
    let csv = report.to_csv();
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(csv.as_bytes());
    assert_eq!(rdr.headers().unwrap(), vec!["trial", "seed", "n", "norm_or_ks", "exceeded"]);
    assert_eq!(rdr.records().count(), 5);
}

#[test]
fn manifests_rebuild_identical_atoms() {
    let p = PrimeModulus::new(5).unwrap();
    let dicts: Vec<Dictionary> = vec![
        build_heisenberg_dictionary(p),
        build_oscillator_dictionary(p, None).unwrap(),
        build_extended_oscillator_dictionary(p, Some(&[2, 20])).unwrap(),
    ];
    let dir = tempfile::tempdir().unwrap();
    for d in dicts {
        let path = dir.path().join(format!("{}.json", d.kind()));
        d.manifest().write(&path).unwrap();
        let rebuilt = DictionaryManifest::read(&path).unwrap().build().unwrap();
        assert_eq!(rebuilt.atom_count(), d.atom_count());
        for flat in (0..d.atom_count()).step_by(7) {
            let id = srip_core::AtomId::from_flat(flat, 5);
            assert_eq!(rebuilt.atom(id).unwrap(), d.atom(id).unwrap());
        }
    }
}

#[test]
fn oscillator_p7_exhaustive_within_declared_coherence() {
    let d = build_oscillator_dictionary(PrimeModulus::new(7).unwrap(), None).unwrap();
    let r = coherence(&d, CoherenceMode::Exhaustive).unwrap();
    assert_eq!(r.pairs_examined, 343 * 342 / 2);
    assert!(r.mu_hat <= 4.0 + 1e-9, "{}", r.mu_hat);
    assert!(r.pass);
}

#[test]
fn extended_oscillator_sampled_within_declared_coherence() {
    let d = build_extended_oscillator_dictionary(PrimeModulus::new(7).unwrap(), None).unwrap();
    assert_eq!(d.atom_count(), 7usize.pow(5));
    let r = coherence(&d, CoherenceMode::Sampled { pairs: 1_000_000, seed: 3 }).unwrap();
    assert_eq!(r.pairs_examined, 1_000_000);
    assert!(r.mu_hat <= 4.0 + 1e-6, "{}", r.mu_hat);
}

#[test]
fn single_basis_dictionary_is_incoherence_free() {
    let field = FiniteField::with_prime(7).unwrap();
    let basis = (0..7).map(|k| SignalVector::delta(7, k)).collect();
    let d = Dictionary::custom(field, vec![basis], 1.0).unwrap();
    let r = coherence(&d, CoherenceMode::Exhaustive).unwrap();
    assert_eq!(r.mu_hat, 0.0);
    assert!(r.pass);
}
