use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use plurigauss::coding::truncate;
use plurigauss::io;
use plurigauss::random_fields::simulate_independent_grfs;
use plurigauss::{build_pair_groups, empirical_underlying_variogram, CovarianceModel, LagSpec, SiteSet};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plurigauss"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn fails_with(args: &[&str], needle: &str) {
    let out = run(args);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    assert!(err.contains(needle), "{args:?}: `{needle}` not in {err}");
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const THIRDS: &str = r#"{"K": 3, "q": 1, "rule": "sequential", "proportions": [0.3333333333333333, 0.3333333333333333, 0.3333333333333334]}"#;

#[test]
fn pgs_pipeline_matches_in_process_run() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    fs::write(p("coding.json"), THIRDS).unwrap();
    ok(&["simulate", "--grid", "300", "--model", "exponential:20", "--seed", "5", "--out", s(&p("grf.csv"))]);
    ok(&["truncate", "--grf", s(&p("grf.csv")), "--coding", s(&p("coding.json")), "--out", s(&p("cat.csv"))]);
    ok(&[
        "vario-pgs",
        "--categories",
        s(&p("cat.csv")),
        "--coding",
        s(&p("coding.json")),
        "--n-lags",
        "40",
        "--lag-width",
        "1",
        "--out",
        s(&p("pl.csv")),
        "--tracks",
        s(&p("tracks.csv")),
    ]);

    let sites = SiteSet::regular_grid_1d(300, 1.0).unwrap();
    let y = simulate_independent_grfs(&sites, &[CovarianceModel::c1()], 5).unwrap();
    let coding = io::load_coding(&p("coding.json")).unwrap();
    let f = truncate(&y, &coding).unwrap();
    let groups = build_pair_groups(&sites, &LagSpec::regular(40, 1.0, None).unwrap()).unwrap();
    let v = empirical_underlying_variogram(&f, &coding, &groups).unwrap();
    let mut expected = Vec::new();
    io::write_pl_results(&mut expected, &v).unwrap();
    assert_eq!(fs::read(p("pl.csv")).unwrap(), expected);

    // Close the loop: fit the track, then map it back to indicator variograms.
    ok(&["fit", "--variogram", s(&p("tracks.csv")), "--track", "grf_1", "--kind", "exponential", "--out", s(&p("fit.json"))]);
    let fit: serde_json::Value = serde_json::from_slice(&fs::read(p("fit.json")).unwrap()).unwrap();
    assert_eq!(fit["sill"], 1.0);
    assert!(fit["range"].as_f64().unwrap() > 0.0);
    ok(&[
        "vario-model",
        "--model",
        s(&p("fit.json")),
        "--coding",
        s(&p("coding.json")),
        "--sites",
        s(&p("cat.csv")),
        "--n-lags",
        "40",
        "--lag-width",
        "1",
        "--out",
        s(&p("model.csv")),
    ]);
    let tracks = io::read_variograms(fs::File::open(p("model.csv")).unwrap()).unwrap();
    assert_eq!(tracks.len(), 9);
    for a in 0..40 {
        for l in 0..3 {
            let sum: f64 = (0..3).map(|k| tracks[k * 3 + l].lags[a].estimate.unwrap()).sum();
            assert!(sum.abs() < 1e-8);
        }
    }
}

#[test]
fn indicator_variograms_from_flag_rule() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    fs::write(p("flag.json"), r#"{"rule": "flag2", "thresholds": [0, 0]}"#).unwrap();
    fs::write(p("lags.json"), r#"{"n_lags": 10, "lag_width": 5}"#).unwrap();
    ok(&[
        "simulate", "--uniform", "200", "--side", "100", "--model", "exp:20", "--model", "gaussian:40", "--out",
        s(&p("grf.csv")),
    ]);
    ok(&["truncate", "--grf", s(&p("grf.csv")), "--coding", s(&p("flag.json")), "--out", s(&p("cat.csv"))]);
    ok(&["vario-indicator", "--categories", s(&p("cat.csv")), "--lags", s(&p("lags.json")), "--out", s(&p("ind.csv"))]);
    let text = fs::read_to_string(p("ind.csv")).unwrap();
    assert!(text.starts_with("track,lag,estimate,npairs\n"));
    assert_eq!(text.lines().count(), 1 + 9 * 10);
    assert!(text.contains("ind_3_3,"));
    ok(&["vario-pgs", "--categories", s(&p("cat.csv")), "--coding", s(&p("flag.json")), "--lags", s(&p("lags.json")), "--out", s(&p("pl.csv"))]);
    assert_eq!(fs::read_to_string(p("pl.csv")).unwrap().lines().count(), 1 + 2 * 10);
}

#[test]
fn mc_study_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("study");
    ok(&["mc-study", "--kind", "mono-c1-constant", "--sims", "10", "--seed", "3", "--threads", "2", "--out", s(&out)]);
    let text = fs::read_to_string(out.join("summary.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "lag,grf,estimator,mean,p5,p25,p75,p95,truth,n_missing");
    let pl: Vec<&str> = lines.filter(|l| l.split(',').nth(2) == Some("pl")).collect();
    assert_eq!(pl.len(), 150);
    let cfg: serde_json::Value = serde_json::from_slice(&fs::read(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(cfg["n_sims"], 10);
    assert_eq!(cfg["kind"], "mono-c1-constant");

    // Same study through a config file gives the same bytes.
    let again = dir.path().join("again");
    ok(&["mc-study", "--config", s(&out.join("config.json")), "--threads", "1", "--out", s(&again)]);
    assert_eq!(fs::read(again.join("summary.csv")).unwrap(), text.as_bytes());
}

#[test]
fn configuration_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    fails_with(&["mc-study", "--kind", "mono-c3", "--out", s(&p("x"))], "mono-c3");
    fails_with(&["mc-study", "--kind", "bigaussian", "--sims", "0", "--out", s(&p("x"))], "n_sims");

    fs::write(p("bad.json"), r#"{"K": 4, "rule": "sequential", "thresholds": [0.0]}"#).unwrap();
    fs::write(p("grf.csv"), "x1,y1\n0,0.5\n1,-0.5\n").unwrap();
    fails_with(&["truncate", "--grf", s(&p("grf.csv")), "--coding", s(&p("bad.json")), "--out", s(&p("c.csv"))], "`K`");

    fs::write(p("cat.csv"), "x1,category\n0,1\n1,2\n").unwrap();
    fs::write(p("lags.json"), r#"{"n_lags": 3, "lag_width": 1, "tolerance": 0.9}"#).unwrap();
    fails_with(&["vario-indicator", "--categories", s(&p("cat.csv")), "--lags", s(&p("lags.json")), "--out", s(&p("v.csv"))], "tolerance");
}

#[test]
fn malformed_csv_reports_row() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    fs::write(p("coding.json"), THIRDS).unwrap();
    fs::write(p("grf.csv"), "x1,y1\n0,0.5\n1,abc\n").unwrap();
    fails_with(&["truncate", "--grf", s(&p("grf.csv")), "--coding", s(&p("coding.json")), "--out", s(&p("c.csv"))], "row 3");
    fs::write(p("grf.csv"), "x1,y1\n0,0.5\n1\n").unwrap();
    fails_with(&["truncate", "--grf", s(&p("grf.csv")), "--coding", s(&p("coding.json")), "--out", s(&p("c.csv"))], "row 3");
}
