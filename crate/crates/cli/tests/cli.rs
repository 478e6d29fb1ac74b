use std::path::Path;
use std::process::{Command, Output};

fn hydrounit(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hydrounit")).arg("--out").arg(out).args(args).output().expect("binary runs")
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hydrounit(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(hydrounit(dir.path(), &["--version"]).status.code(), Some(0));
}

#[test]
fn bad_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["nonsense"],
        &["stability", "--grid", "0.9:0.5:10"],
        &["simulate", "--scenario", "custom"],
        &["simulate", "--t-end", "-1"],
        &["amplitude", "--betas", "0.9,0.8"],
        &["--jobs", "0", "check"],
        &["--config", "/definitely/not/here.json", "check"],
    ];
    for args in cases {
        let o = hydrounit(dir.path(), args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn invalid_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"calibration": {"sigma": "five"}}"#).unwrap();
    let o = hydrounit(&dir.path().join("out"), &["--config", cfg.to_str().unwrap(), "equilibria"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("calibration.sigma"));
}

#[test]
fn partial_config_changes_the_digest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("z.json");
    std::fs::write(&cfg, r#"{"gov": {"z": 0.0}}"#).unwrap();
    assert!(hydrounit(&dir.path().join("a"), &["equilibria", "--grid", "0.8:1.0:3"]).status.success());
    assert!(hydrounit(&dir.path().join("b"), &["--config", cfg.to_str().unwrap(), "equilibria", "--grid", "0.8:1.0:3"]).status.success());
    let a = read_json(&dir.path().join("a/manifest.json"));
    let b = read_json(&dir.path().join("b/manifest.json"));
    assert_ne!(a["config_sha256"], b["config_sha256"]);
    assert_eq!(read_json(&dir.path().join("b/config.json"))["gov"]["z"], 0.0);
}

#[test]
fn equilibria_writes_versioned_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = hydrounit(dir.path(), &["equilibria", "--grid", "0.5:1.1:7"]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("equilibria.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# hydrounit "));
    assert_eq!(lines.next().unwrap(), "gamma,mu0,saturated,theta,power,residual");
    assert_eq!(lines.count(), 7);
    let m = read_json(&dir.path().join("manifest.json"));
    assert_eq!(m["command"], "equilibria");
    let files: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|o| o["file"].as_str().unwrap()).collect();
    assert!(files.contains(&"equilibria.csv") && files.contains(&"config.json") && files.contains(&"theta.svg"));
}

#[test]
fn stability_reports_windows_for_both_methods() {
    let dir = tempfile::tempdir().unwrap();
    assert!(hydrounit(dir.path(), &["stability", "--grid", "0.7:1.0:31"]).status.success());
    let s = read_json(&dir.path().join("stability.json"));
    for m in ["routh_hurwitz", "eigen_bound"] {
        let w = &s[m]["windows"][0];
        assert!(w["gamma_1"].as_f64().unwrap() < 0.89 && w["gamma_2"].as_f64().unwrap() > 0.89, "{m}");
    }
    assert!(hydrounit(&dir.path().join("p"), &["stability", "--published", "--grid", "0.7:1.0:4"]).status.success());
}

#[test]
fn simulate_custom_run_records_regime() {
    let dir = tempfile::tempdir().unwrap();
    let o = hydrounit(dir.path(), &["simulate", "--scenario", "custom", "--gamma", "1.0", "--perturb", "1e-4", "--t-end", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&dir.path().join("regime.json"));
    assert_eq!(r["gamma"], 1.0);
    assert!(r["report"]["kind"].is_string());
    let header = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap().lines().nth(1).unwrap().to_string();
    assert_eq!(header.split(',').count(), 10);
}

#[test]
fn seed_changes_perturbed_runs_only() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        assert!(hydrounit(&out, &["--seed", seed, "simulate", "--scenario", "custom", "--gamma", "0.95", "--perturb", "1e-3", "--t-end", "1"]).status.success());
        std::fs::read(out.join("trajectory.csv")).unwrap()
    };
    assert_eq!(run("a", "3"), run("b", "3"));
    assert_ne!(run("c", "3"), run("d", "4"));
}

#[test]
fn check_lists_published_jacobian_flags() {
    let dir = tempfile::tempdir().unwrap();
    assert!(hydrounit(dir.path(), &["check", "--points", "2"]).status.success());
    let flags = std::fs::read_to_string(dir.path().join("jacobian_flags.csv")).unwrap();
    assert!(flags.lines().any(|l| l.contains(",published,9,2,")));
    let c = read_json(&dir.path().join("check.json"));
    assert!(c["flux_roundtrip_residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(c["coefficient_discrepancies"].as_array().unwrap().len(), 13);
}
