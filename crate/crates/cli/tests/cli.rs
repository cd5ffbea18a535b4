use std::path::Path;
use std::process::{Command, Output};

use wcouple::config::ExperimentConfig;
use wcouple::run_with_threads;

fn wcouple(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wcouple")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn missing_seed_exits_with_code_two_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"experiment": "gr-lemma"}"#);
    let out = wcouple(&["run", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn unknown_experiment_and_bad_parameters_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"experiment": "nope", "seed": 1}"#);
    assert_eq!(wcouple(&["run", &cfg]).status.code(), Some(2));
    let cfg = write_config(dir.path(), r#"{"experiment": "lipschitz-rate", "seed": 1, "params": {"bogus": 1.0}}"#);
    assert_eq!(wcouple(&["run", &cfg]).status.code(), Some(2));
}

#[test]
fn seed_flag_fills_a_missing_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"experiment": "gr-lemma", "params": {"cases": 10}}"#);
    let out = wcouple(&["run", "--config", &cfg, "--seed", "4", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 4);
}

#[test]
fn list_names_every_experiment() {
    let out = wcouple(&["list"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for e in wcouple::experiments::REGISTRY {
        assert!(text.contains(e.name), "{}", e.name);
    }
}

#[test]
fn selftest_passes() {
    let out = wcouple(&["selftest"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn results_do_not_depend_on_the_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"experiment": "lipschitz-rate", "seed": 11, "n_paths": 500, "grid": {"t_end": 1.0, "n_steps": 256}}"#,
    );
    let mut csv = Vec::new();
    for threads in ["1", "3"] {
        let out_dir = dir.path().join(threads);
        let out = wcouple(&["run", &cfg, "--threads", threads, "--no-timestamp", "--out", out_dir.to_str().unwrap()]);
        assert!(matches!(out.status.code(), Some(0 | 3)), "{}", String::from_utf8_lossy(&out.stderr));
        csv.push(std::fs::read(out_dir.join("results.csv")).unwrap());
    }
    assert_eq!(csv[0], csv[1]);
    assert!(!csv[0].starts_with(b"#"));

    let out_dir = dir.path().join("stamped");
    wcouple(&["run", &cfg, "--out", out_dir.to_str().unwrap()]);
    let stamped = std::fs::read_to_string(out_dir.join("results.csv")).unwrap();
    let (first, rest) = stamped.split_once('\n').unwrap();
    assert!(first.starts_with("# generated_unix="));
    assert_eq!(rest.as_bytes(), csv[0].as_slice());
}

#[test]
fn chaos_identity_with_seed_seven_passes() {
    let mut c = ExperimentConfig::new("chaos-identity", 7);
    c.n_paths = Some(200_000);
    let out = run_with_threads(&c, None).unwrap();
    assert_eq!(out.claims.len(), 15);
    assert!(out.pass(), "{:#?}", out.claims.iter().filter(|c| !c.pass).collect::<Vec<_>>());
    // W_1²−1 at r = 1/2: exactly 1.
    let exact = out
        .records
        .iter()
        .find(|r| r.name == "coupled_second_moment_exact" && r.parameters["order"] == 2.0 && r.parameters["r"] == 0.5)
        .unwrap();
    assert!((exact.value - 1.0).abs() < 1e-12);
}

#[test]
fn lipschitz_rate_fits_one_half() {
    let mut c = ExperimentConfig::new("lipschitz-rate", 5);
    c.n_paths = Some(20_000);
    let out = run_with_threads(&c, None).unwrap();
    assert!(out.pass(), "{:#?}", out.claims);
    assert!((out.rate_fits[0].fit.slope - 0.5).abs() <= 0.05);
}
