use std::path::Path;
use std::process::{Command, Output};

fn cbdecode(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbdecode"))
        .args(args)
        .current_dir(dir)
        .env_remove("CBDECODE_SEED")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// The summary line without its timing fields.
fn counts(line: &str) -> String {
    line.split_whitespace()
        .filter(|f| !f.contains("decode_us"))
        .collect::<Vec<_>>()
        .join(" ")
}

const RUN: &str = "code = \"bb72\"\nnoise = \"data-qubit\"\ndecoder = \"bp+cb\"\nmax_gr = 6\nmax_br = 10\nshots = 300\nseed = 3\n";

#[test]
fn build_code_prints_parameters_and_writes_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let out = cbdecode(&["build-code", "bb72", "-o", "mats"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("n=72 k=12"), "{text}");
    assert!(text.contains("hx: 36x72 row weight 6 column weight 3"), "{text}");
    let hx = std::fs::read_to_string(dir.path().join("mats/hx.txt")).unwrap();
    assert!(!hx.is_empty());
    assert!(dir.path().join("mats/hz.txt").exists());
}

#[test]
fn degenerate_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("tiny.toml"),
        "l = 1\nm = 1\na_terms = [\"x^3\", \"y\", \"y^2\"]\nb_terms = [\"y^3\", \"x\", \"x^2\"]\n",
    )
    .unwrap();
    let out = cbdecode(&["build-code", "tiny.toml"], dir.path());
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("n=2 k=0"));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cbdecode(&["build-code", "missing.toml"], dir.path()).status.code(), Some(2));
    std::fs::write(dir.path().join("bad.dem"), "error 0.1 D0\nerror nope D1\n").unwrap();
    let out = cbdecode(&["dem-info", "bad.dem"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.dem:2"));
    std::fs::write(
        dir.path().join("empty.toml"),
        format!("probabilities = []\noutput = \"s.csv\"\n[[run]]\n{RUN}"),
    )
    .unwrap();
    assert_eq!(cbdecode(&["sweep", "empty.toml"], dir.path()).status.code(), Some(2));
    assert_eq!(cbdecode(&["run", "nope.toml"], dir.path()).status.code(), Some(2));
}

#[test]
fn zero_noise_run_has_no_failures() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), format!("p = 0\n{RUN}")).unwrap();
    let out = cbdecode(&["run", "run.toml"], dir.path());
    assert!(out.status.success());
    assert!(stdout(&out).contains("shots=300 failures=0"));
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn single_point_sweep_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), format!("p = 0.05\n{RUN}")).unwrap();
    std::fs::write(
        dir.path().join("sweep.toml"),
        format!("probabilities = [0.05]\noutput = \"sweep.csv\"\n[[run]]\n{RUN}"),
    )
    .unwrap();
    let run = cbdecode(&["run", "run.toml", "--csv", "run.csv"], dir.path());
    let sweep = cbdecode(&["sweep", "sweep.toml"], dir.path());
    assert!(run.status.success() && sweep.status.success());
    let sweep_text = stdout(&sweep);
    assert_eq!(counts(stdout(&run).lines().next().unwrap()), counts(sweep_text.lines().next().unwrap()));
    assert!(sweep_text.contains("pseudothreshold bb72_0"));
    assert!(dir.path().join("sweep_bb72_0.dat").exists());
}

#[test]
fn seed_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), format!("p = 0.07\n{RUN}")).unwrap();
    let with_env = |seed: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_cbdecode"))
            .args(["run", "run.toml"])
            .current_dir(dir.path())
            .env("CBDECODE_SEED", seed)
            .output()
            .unwrap();
        counts(&stdout(&out))
    };
    let flag = counts(&stdout(&cbdecode(&["run", "run.toml", "--seed", "11"], dir.path())));
    assert_eq!(with_env("11"), flag);
    assert_eq!(with_env("11"), with_env("11"));
}

#[test]
fn noise_model_round_trips_through_dem_info() {
    let dir = tempfile::tempdir().unwrap();
    let out = cbdecode(
        &["build-noise", "--code", "bb72", "--noise", "phenomenological", "--p", "0.01", "--rounds", "2", "-o", "m.dem"],
        dir.path(),
    );
    assert!(out.status.success());
    let info = stdout(&cbdecode(&["dem-info", "m.dem"], dir.path()));
    assert!(info.contains("detectors=72 mechanisms=180 observables=12"), "{info}");
}
