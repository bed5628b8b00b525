use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
grid.R = 8.0
grid.N = 16
gamma = -1.0

source.profile = "conservative"
source.tau_kind = "exp"
source.params = [1.0]

time.T = 0.5
time.snapshot_times = [0.125]

ladder.kmax = 6
ladder.eval_times = [0.125, 0.25, 0.5]

verify.ensemble_size = 8
verify.identity_samples = 1000
"#;

fn landau(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_landau"))
        .args(args)
        .current_dir(dir)
        .env("LANDAU_CACHE", dir.join("cache"))
        .env("RUST_LOG", "info")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) {
    fs::write(dir.join("run.toml"), text).unwrap();
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn kernel_suite_passes_and_writes_its_report() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), SMALL);
    let o = landau(tmp.path(), &["verify", "--config", "run.toml", "--suite", "kernel", "--out", "o"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("o/report-kernel.json")).unwrap()).unwrap();
    assert_eq!(report["suite"], "kernel");
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["verdict"] == true));
    assert!(tmp.path().join("o/meta-verify.json").exists());
}

#[test]
fn config_errors_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), &SMALL.replace("gamma = -1.0", "gamma = -3.5"));
    let o = landau(tmp.path(), &["coeffs", "--config", "run.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("error[config]"), "{}", stderr(&o));
    assert!(stderr(&o).contains("soft potential range"));

    write_config(tmp.path(), &SMALL.replace("[0.125, 0.25, 0.5]", "[0.0, 0.25, 0.5]"));
    let o = landau(tmp.path(), &["ladder", "--config", "run.toml"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let o = landau(tmp.path(), &["coeffs", "--config", "missing.toml"]);
    assert_eq!(o.status.code(), Some(2));

    write_config(tmp.path(), SMALL);
    let o = landau(tmp.path(), &["verify", "--config", "run.toml", "--suite", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn second_run_hits_the_coefficient_cache() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), SMALL);
    let first = landau(tmp.path(), &["coeffs", "--config", "run.toml"]);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    assert!(stderr(&first).contains("coefficient cache written"));
    let second = landau(tmp.path(), &["coeffs", "--config", "run.toml"]);
    assert!(stderr(&second).contains("coefficient cache hit"), "{}", stderr(&second));
    let a = fs::read(tmp.path().join("out/report-coeffs.json")).unwrap();
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("out/meta-coeffs.json")).unwrap()).unwrap();
    assert_eq!(meta["cache_hit"], true);
    assert!(!a.is_empty());
}

#[test]
fn ladder_reuses_matching_evolution_output() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), SMALL);
    let o = landau(tmp.path(), &["evolve", "--config", "run.toml"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let energy = fs::read_to_string(tmp.path().join("out/energy.csv")).unwrap();
    assert!(energy.starts_with("# config "));
    assert!(energy.lines().nth(1) == Some("t,l2sq,asq,gf,lff"));
    let o = landau(tmp.path(), &["ladder", "--config", "run.toml"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(!stderr(&o).contains("evolving first"));
    for t in ["0.125", "0.25", "0.5"] {
        let text = fs::read_to_string(tmp.path().join(format!("out/ladder-t{t}.csv"))).unwrap();
        // comment, header and k = 0..=6
        assert_eq!(text.lines().count(), 9, "{text}");
    }

    // a different source invalidates the stored trajectory
    write_config(tmp.path(), &SMALL.replace("source.params = [1.0]", "source.params = [2.0]"));
    let o = landau(tmp.path(), &["ladder", "--config", "run.toml"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("evolving first"));
}

#[test]
fn report_summarizes_written_reports() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), SMALL);
    let o = landau(tmp.path(), &["verify", "--config", "run.toml", "--suite", "kernel", "--suite", "coefficients"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = landau(tmp.path(), &["report", "--config", "run.toml"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = fs::read_to_string(tmp.path().join("out/summary.md")).unwrap();
    assert!(summary.contains("kernel") && summary.contains("coefficients"), "{summary}");
}
