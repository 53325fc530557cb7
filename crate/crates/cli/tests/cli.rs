use std::path::Path;
use std::process::{Command, Output};

fn srip(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srip"))
        .args(args)
        .current_dir(dir)
        .env_remove("SRIP_PAIR_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn build(dir: &Path, family: &str, p: &str, out: &str) {
    let o = srip(&["build", "--dict", family, "--p", p, "--out", out], dir);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn build_prints_counts() {
    let dir = tempfile::tempdir().unwrap();
    let o = srip(&["build", "--dict", "heisenberg", "--p", "5", "--out", "h.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "bases=6 atoms=30 mu=1");
    let o = srip(&["build", "--dict", "oscillator", "--p", "5", "--out", "o.json"], dir.path());
    assert_eq!(stdout(&o).trim(), "bases=25 atoms=125 mu=4");
    let o = srip(&["build", "--dict", "extended", "--p", "5", "--tori", "0,3", "--out", "e.json"], dir.path());
    assert_eq!(stdout(&o).trim(), "bases=50 atoms=250 mu=4");
}

#[test]
fn build_rejects_composite_modulus() {
    let dir = tempfile::tempdir().unwrap();
    let o = srip(&["build", "--dict", "heisenberg", "--p", "6", "--out", "x.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("6 is not prime"));
    assert!(!dir.path().join("x.json").exists());
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = srip(&["build", "--dict", "sparse", "--p", "5", "--out", "x.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = srip(&["coherence", "--manifest", "missing.json", "--exhaustive", "--out", "c.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exhaustive_heisenberg_coherence_passes() {
    let dir = tempfile::tempdir().unwrap();
    build(dir.path(), "heisenberg", "13", "h.json");
    let o = srip(&["coherence", "--manifest", "h.json", "--exhaustive", "--out", "c.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o);
    assert!(line.contains("PASS"), "{line}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("c.json")).unwrap()).unwrap();
    let mu = report["report"]["mu_hat"].as_f64().unwrap();
    assert!((mu - 1.0).abs() < 1e-9, "{mu}");
    assert_eq!(report["manifest"]["p"], 13);
}

#[test]
fn exhaustive_over_budget_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    build(dir.path(), "heisenberg", "5", "h.json");
    let o = Command::new(env!("CARGO_BIN_EXE_srip"))
        .args(["coherence", "--manifest", "h.json", "--exhaustive", "--out", "c.json"])
        .current_dir(dir.path())
        .env("SRIP_PAIR_BUDGET", "100")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--pairs"));
    let o = srip(&["coherence", "--manifest", "h.json", "--pairs", "50", "--seed", "9", "--out", "c.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn srip_single_atom_never_exceeds() {
    let dir = tempfile::tempdir().unwrap();
    build(dir.path(), "heisenberg", "13", "h.json");
    let o = srip(
        &["srip", "--manifest", "h.json", "--epsilon", "0.5", "--trials", "10", "--seed", "4", "--n", "1", "--out", "r.json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("exceedance=0.000"), "{}", stdout(&o));
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert_eq!(csv.lines().count(), 10 + 2);
}

#[test]
fn invalid_epsilon_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    build(dir.path(), "heisenberg", "5", "h.json");
    for eps in ["0", "1", "-0.2", "1.5"] {
        let o = srip(
            &["semicircle", "--manifest", "h.json", "--epsilon", eps, "--trials", "2", "--seed", "1", "--out", "s.json"],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(2), "epsilon {eps}");
    }
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    build(dir.path(), "heisenberg", "29", "h.json");
    for cmd in ["srip", "semicircle"] {
        let run = |out: &str, threads: &str| {
            let o = srip(
                &[cmd, "--manifest", "h.json", "--epsilon", "0.4", "--trials", "16", "--seed", "77", "--out", out, "--threads", threads],
                dir.path(),
            );
            assert_eq!(o.status.code(), Some(0));
            stdout(&o)
        };
        let a = run("a.json", "1");
        let b = run("b.json", "4");
        assert_eq!(a, b);
        for ext in ["json", "csv"] {
            let read = |stem: &str| std::fs::read(dir.path().join(format!("{stem}.{ext}"))).unwrap();
            assert_eq!(read("a"), read("b"), "{cmd} {ext}");
        }
    }
}

#[test]
fn gram_of_two_chirps_from_different_bases() {
    let dir = tempfile::tempdir().unwrap();
    build(dir.path(), "heisenberg", "7", "h.json");
    let o = srip(&["gram", "--manifest", "h.json", "--atoms", "0:1,2:3", "--out", "g.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o);
    let expected = format!("norm={:.12}", 1.0 / 7f64.sqrt());
    assert!(line.contains(&expected), "{line}");
    let o = srip(&["gram", "--manifest", "h.json", "--atoms", "0:1,0:1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
