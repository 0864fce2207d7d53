use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

fn uavh(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uavh"))
        .args(args)
        .env("UAVH_OUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn strip_configs(dir: &Path) {
    for entry in fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        if path.extension().is_some_and(|x| x == "toml") && !text.contains("2d") {
            fs::copy(&path, dir.join(path.file_name().unwrap())).unwrap();
        }
    }
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_csv_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let config = configs().join("coverage_strip.toml");
    let o = uavh(
        &["run", "coverage", "--config", config.to_str().unwrap(), "--trials", "2000", "--verify"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(tmp.path().join("coverage.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("tau,analytic,analytic_err,mc_mean,mc_se,trials,seed"));
    assert_eq!(lines.count(), 7);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["trials"], 2000);
    assert!(manifest["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert_eq!(manifest["configs"].as_array().unwrap().len(), 1);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["run", "figure:3", "--trials", "500", "--sweep", "alpha=3", "--sweep", "s=log:0.01:1:4"];
    let mut bodies = Vec::new();
    for sub in ["a", "b"] {
        let out = tmp.path().join(sub);
        let o = uavh(&[&args[..], &["--out", out.to_str().unwrap()]].concat(), tmp.path());
        assert!(o.status.success(), "{}", stderr(&o));
        bodies.push(fs::read(out.join("laplace_shot_noise.csv")).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
}

#[test]
fn invalid_sweeps_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let config = configs().join("coverage_strip.toml");
    for sweep in ["tau=", "tau=3,2,1", "tau=1,1", "tau=lin:1:2:0"] {
        let o = uavh(&["run", "coverage", "--config", config.to_str().unwrap(), "--sweep", sweep], tmp.path());
        assert!(!o.status.success(), "{sweep} accepted");
        assert!(!stderr(&o).is_empty());
        assert!(!stderr(&o).contains("panicked"), "{}", stderr(&o));
    }
    let o = uavh(&["run", "figure:12"], tmp.path());
    assert!(!o.status.success());
    let o = uavh(&["run", "coverage"], tmp.path());
    assert!(!o.status.success(), "a bare experiment needs a config");
}

#[test]
fn corrupted_config_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let good = fs::read_to_string(configs().join("coverage_strip.toml")).unwrap();
    let bad: String = good
        .lines()
        .filter(|l| !l.trim_start().starts_with("alpha"))
        .chain(["alpha = 0.5"])
        .collect::<Vec<_>>()
        .join("\n");
    fs::write(dir.path().join("a_good.toml"), good).unwrap();
    fs::write(dir.path().join("b_bad.toml"), bad).unwrap();
    let o = uavh(&["verify-all", dir.path().to_str().unwrap(), "--trials", "200"], out.path());
    assert!(!o.status.success());
    assert!(!stderr(&o).contains("panicked"), "{}", stderr(&o));
    let report = fs::read_to_string(out.path().join("verify_all.csv")).unwrap();
    let bad_rows: Vec<&str> = report.lines().filter(|l| l.starts_with("b_bad,")).collect();
    assert_eq!(bad_rows.len(), 1);
    assert!(bad_rows[0].starts_with("b_bad,validate,") && bad_rows[0].contains(",fail,"));
    assert!(report.lines().filter(|l| l.starts_with("a_good,")).all(|l| l.contains(",pass,")));
}

#[test]
fn quick_mode_on_the_strip_suite() {
    let dir = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    strip_configs(dir.path());
    let start = Instant::now();
    let o = uavh(&["verify-all", dir.path().to_str().unwrap(), "--trials", "100"], out.path());
    let secs = start.elapsed().as_secs_f64();
    assert!(o.status.success(), "{}{}", String::from_utf8_lossy(&o.stdout), stderr(&o));
    assert!(secs < 10.0, "quick mode took {secs:.1} s");
}

#[test]
fn verify_flag_reports_disagreement() {
    let tmp = tempfile::tempdir().unwrap();
    let config = configs().join("coverage_strip.toml");
    let c = config.to_str().unwrap();
    let o = uavh(&["run", "coverage", "--config", c, "--trials", "2000", "--verify"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    // a simulator truncated to its own window sees no interference at all
    let o = uavh(
        &["run", "coverage", "--config", c, "--trials", "20000", "--k-sim", "0", "--verify"],
        tmp.path(),
    );
    assert!(!o.status.success());
    assert!(stderr(&o).contains("disagreement: coverage"), "{}", stderr(&o));
}

#[test]
fn subcommands_print_their_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let config = configs().join("harvest_strip.toml");
    let c = config.to_str().unwrap();
    let o = uavh(&["transport", "--config", c, "--trials", "1000"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("quantity,") && stdout.contains("ratio,"), "{stdout}");
    let o = uavh(&["optimize", "--config", c, "--trials", "200"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("w_star,"), "{stdout}");
}
