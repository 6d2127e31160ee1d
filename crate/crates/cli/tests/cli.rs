use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fairgame(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairgame")).args(args).arg("--out").arg(out).output().unwrap()
}

fn ok(args: &[&str], out: &Path) {
    let o = fairgame(args, out);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn missing_output_directory_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope");
    let o = fairgame(&["curves", "--scenario", "gaussian_g1"], &missing);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope"));
}

#[test]
fn unknown_policy_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = fairgame(&["equilibria", "--scenario", "gaussian_g1", "--policies", "lf,quota"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn conflicting_sources_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"model": "m.csv"}"#).unwrap();
    let o = fairgame(&["curves", "--config", cfg.to_str().unwrap(), "--scenario", "example1"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("only one of"));
}

#[test]
fn symmetric_scenario_gives_identical_group_curves() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["curves", "--scenario", "gaussian_g1"], dir.path());
    assert_eq!(read(dir.path(), "curves_s0.csv"), read(dir.path(), "curves_s1.csv"));
    assert!(read(dir.path(), "frontier.csv").starts_with("p,fp,tp\n"));
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "curves.json")).unwrap();
    assert_eq!(json["response"].as_array().unwrap().len(), 2);
}

#[test]
fn noisy_group_has_a_weaker_applicant_response() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["curves", "--scenario", "example2", "--format", "csv"], dir.path());
    let max = |name| column(&read(dir.path(), name), "ar").into_iter().fold(0.0, f64::max);
    assert!(max("curves_s1.csv") < max("curves_s0.csv"));
    assert!(!dir.path().join("curves.json").exists());
}

#[test]
fn eo_equilibria_report_equal_beliefs() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["equilibria", "--scenario", "gaussian_g1", "--policies", "eo"], dir.path());
    let table = read(dir.path(), "equilibria.csv");
    assert_eq!(column(&table, "pi0"), column(&table, "pi1"));
    assert!(table.lines().skip(1).all(|l| l.ends_with(",true")));
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "equilibria_eo.json")).unwrap();
    assert!(json["equilibria"][0]["residuals"]["pi_gap"].is_number());
}

#[test]
fn compare_table_columns_and_disparities() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["compare", "--scenario", "example2", "--policies", "lf,cb,eo"], dir.path());
    let table = read(dir.path(), "compare.csv");
    assert!(table.starts_with("policy,disparity,sw,fw,aw,theta0,theta1,pi0,pi1\n"));
    let d = column(&table, "disparity");
    assert!(d[0] > 0.0 && d[1] > 0.1);
    assert_eq!(d[2], 0.0);

    ok(&["compare", "--scenario", "gaussian_g1", "--policies", "lf,cb,eo", "--format", "csv"], dir.path());
    let d = column(&read(dir.path(), "compare.csv"), "disparity");
    assert!(d.iter().all(|x| *x < 1e-9), "{d:?}");
}

#[test]
fn literal_applicant_welfare_is_larger() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    ok(&["compare", "--scenario", "gaussian_g1", "--policies", "lf"], a.path());
    ok(&["compare", "--scenario", "gaussian_g1", "--policies", "lf", "--aw-literal"], b.path());
    let aw = |d: &Path| column(&read(d, "compare.csv"), "aw")[0];
    assert!(aw(b.path()) > aw(a.path()));
}

#[test]
fn generate_then_fit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["generate", "--scenario", "example2", "--seed", "4"], dir.path());
    assert!(read(dir.path(), "samples.csv").starts_with("s,e,x1,x2\n"));
    let scenario: serde_json::Value = serde_json::from_str(&read(dir.path(), "scenario.json")).unwrap();
    assert_eq!(scenario["scenario"]["kind"], "example2");

    let samples = dir.path().join("samples.csv");
    ok(&["fit", "--input", samples.to_str().unwrap()], dir.path());
    assert!(read(dir.path(), "scored.csv").starts_with("s,e,theta\n"));
    let model = dir.path().join("model.csv");
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, format!(r#"{{"model": {:?}, "policies": ["lf"]}}"#, model.to_str().unwrap())).unwrap();
    ok(&["equilibria", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(read(dir.path(), "equilibria.csv").lines().count() > 1);
}

#[test]
fn reruns_are_byte_identical() {
    let cases: [&[&str]; 4] = [
        &["curves", "--scenario", "example1"],
        &["equilibria", "--scenario", "patronizing", "--policies", "lf,dp,eopp"],
        &["fit", "--scenario", "gaussian_g1", "--seed", "2"],
        &["generate", "--scenario", "dp_welfare_gain", "--seed", "2"],
    ];
    for args in cases {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        ok(args, a.path());
        ok(args, b.path());
        let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(!names.is_empty());
        for n in names {
            assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{args:?} {n:?}");
        }
    }
}

#[test]
fn seed_changes_generated_samples() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    ok(&["generate", "--scenario", "gaussian_g1", "--seed", "1"], a.path());
    ok(&["generate", "--scenario", "gaussian_g1", "--seed", "2"], b.path());
    assert_ne!(read(a.path(), "samples.csv"), read(b.path(), "samples.csv"));
}
