use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn rmtcorr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmtcorr")).args(args).output().expect("run rmtcorr")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth_regime(dir: &Path) -> std::path::PathBuf {
    let out = rmtcorr(&[
        "synth",
        "--n",
        "23",
        "--rows",
        "250",
        "--rho",
        "0.1",
        "--rho-after",
        "0.6",
        "--break-row",
        "125",
        "--seed",
        "11",
        "--out",
        p(dir),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    dir.join("returns.csv")
}

const META: &str = "symbol,name,country,region,weekend,eastern
AAA,Alpha,USA,NorthAmerica,SatSun,false
BBB,Beta,UK,Europe,SatSun,false
CCC,Gamma,Japan,Asia,SatSun,true
";

fn prices() -> String {
    let mut s = String::from("date,symbol,close\n");
    let dates = [
        "2008-01-02",
        "2008-01-03",
        "2008-01-04",
        "2008-01-07",
        "2008-01-08",
        "2008-01-09",
        "2008-01-10",
        "2008-01-11",
    ];
    for (t, d) in dates.iter().enumerate() {
        for (j, sym) in ["AAA", "BBB", "CCC"].iter().enumerate() {
            // CCC misses one day, which is forward-filled
            if *sym == "CCC" && t == 3 {
                continue;
            }
            let close = 100.0 + (t * (j + 2)) as f64 + ((t * 7 + j * 3) % 5) as f64;
            s.push_str(&format!("{d},{sym},{close}\n"));
        }
    }
    s
}

#[test]
fn mp_sim_is_byte_identical_for_a_seed() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = rmtcorr(&["mp-sim", "--n", "10", "--l", "100", "--seed", "7", "--out", p(out)]);
        assert!(o.status.success());
    }
    for f in ["mp_sim.json", "mp_histogram.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let c = dir.path().join("c");
    rmtcorr(&["mp-sim", "--n", "10", "--l", "100", "--seed", "8", "--out", p(&c)]);
    assert_ne!(fs::read(a.join("mp_sim.json")).unwrap(), fs::read(c.join("mp_sim.json")).unwrap());
}

#[test]
fn report_on_regime_fixture() {
    let dir = TempDir::new().unwrap();
    let returns = synth_regime(dir.path());
    let before = fs::read(&returns).unwrap();
    let out = dir.path().join("report");
    let o = rmtcorr(&["report", "--returns", p(&returns), "--window", "30", "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(&returns).unwrap(), before);

    let v: Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    for key in ["config", "alignment", "correlation", "spectrum", "market_mode", "normality"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let bulk = &v["spectrum"]["bulk"];
    let total: u64 = ["below", "inside", "above"].iter().map(|k| bulk[k].as_u64().unwrap()).sum();
    assert_eq!(total, 23);
    assert!(bulk["above"].as_u64().unwrap() >= 1);
    let ef = v["spectrum"]["explained_fraction"].as_f64().unwrap();
    assert!(ef > 1.0 / 23.0 && ef < 1.0);
    assert!(v["market_mode"]["comovement_correlation"].as_f64().unwrap() > 0.5);
    assert_eq!(v["config"]["window"], 30);
    assert_eq!(v["config"]["method"], "Pearson");
    let full = v["normality"]["periods"].as_array().unwrap().iter().find(|p| p["period"] == "full").unwrap();
    assert_eq!(full["n"], 253);

    for f in ["correlation.csv", "eigenvectors.csv", "comovement.csv", "rolling_skewness.csv", "market_mode.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let cov = fs::read_to_string(out.join("comovement.csv")).unwrap();
    assert!(cov.starts_with("end_date,mean_correlation,volatility,mean_volatility,covariance,"));
    assert_eq!(cov.lines().count(), 1 + 250 - 30 + 1);
}

#[test]
fn window_longer_than_panel_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let returns = synth_regime(dir.path());
    let o = rmtcorr(&["corr", "--returns", p(&returns), "--window", "400", "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("400") && err.contains("250"), "{err}");
}

#[test]
fn invalid_flags_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let returns = synth_regime(dir.path());
    let r = p(&returns);
    for args in [
        vec!["rolling", "--returns", r, "--window", "2"],
        vec!["corr", "--returns", r, "--drop-threshold", "1.5"],
        vec!["corr", "--returns", r, "--coef-bin", "0"],
        vec!["corr", "--returns", r, "--method", "kendall"],
        vec!["corr"],
        vec!["corr", "--returns", "/nonexistent/returns.csv"],
        vec!["frobnicate"],
    ] {
        let o = rmtcorr(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(rmtcorr(&["--help"]).status.code(), Some(0));
}

#[test]
fn degenerate_co_movement_is_a_numerical_failure() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("twins.csv");
    // two identical columns: every window has mean correlation 1
    let mut s = String::from("date,A,B\n");
    for (t, d) in rmtcorr::synth::synthetic_dates(40).iter().enumerate() {
        let x = ((t * 37 % 11) as f64 - 5.0) / 3.0;
        s.push_str(&format!("{d},{x},{x}\n"));
    }
    fs::write(&path, s).unwrap();
    let o = rmtcorr(&["mode", "--returns", p(&path), "--window", "10", "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn price_pipeline_from_files() {
    let dir = TempDir::new().unwrap();
    let meta = dir.path().join("meta.csv");
    let px = dir.path().join("prices.csv");
    fs::write(&meta, META).unwrap();
    fs::write(&px, prices()).unwrap();
    let out = dir.path().join("out");

    // one of three markets missing is above the default 30% threshold
    let o = rmtcorr(&["align", "--prices", p(&px), "--meta", p(&meta), "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a: Value = serde_json::from_slice(&fs::read(out.join("alignment.json")).unwrap()).unwrap();
    assert_eq!((a["n_dates"].as_u64(), a["filled_cells"].as_u64()), (Some(7), Some(0)));
    assert_eq!(a["dropped_dates"][0], "2008-01-07");

    let o = rmtcorr(&["align", "--prices", p(&px), "--meta", p(&meta), "--drop-threshold", "0.5", "--out", p(&out)]);
    assert!(o.status.success());
    let mask = fs::read_to_string(out.join("fill_mask.csv")).unwrap();
    assert_eq!(mask.lines().nth(4).unwrap(), "2008-01-07,0,0,1");
    let a: Value = serde_json::from_slice(&fs::read(out.join("alignment.json")).unwrap()).unwrap();
    assert_eq!((a["n_dates"].as_u64(), a["filled_cells"].as_u64()), (Some(8), Some(1)));

    let o = rmtcorr(&["align", "--prices", p(&px), "--meta", p(&meta), "--phase-east", "--out", p(&out)]);
    assert!(o.status.success());
    let a: Value = serde_json::from_slice(&fs::read(out.join("alignment.json")).unwrap()).unwrap();
    assert_eq!((a["n_dates"].as_u64(), a["phased"].as_bool()), (Some(6), Some(true)));

    let o = rmtcorr(&["returns", "--prices", p(&px), "--meta", p(&meta), "--out", p(&out)]);
    assert!(o.status.success());
    let r = fs::read_to_string(out.join("returns.csv")).unwrap();
    assert_eq!(r.lines().count(), 7);
    assert!(r.starts_with("date,AAA,BBB,CCC\n2008-01-03,"));

    let o = rmtcorr(&["scan", "--prices", p(&px), "--meta", p(&meta), "--count", "2", "--out", p(&out)]);
    assert!(o.status.success());
    let c: Value = serde_json::from_slice(&fs::read(out.join("crashes.json")).unwrap()).unwrap();
    assert_eq!(c["events"].as_array().unwrap().len(), 6);
    assert_eq!(c["yearly_counts"]["2008"], 6);

    let o = rmtcorr(&["spectrum", "--prices", p(&px), "--meta", p(&meta), "--method", "spearman", "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s: Value = serde_json::from_slice(&fs::read(out.join("spectrum.json")).unwrap()).unwrap();
    let sum: f64 = s["eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
    assert!((sum - 3.0).abs() < 1e-6);
}

#[test]
fn malformed_price_row_names_file_and_line() {
    let dir = TempDir::new().unwrap();
    let meta = dir.path().join("meta.csv");
    let px = dir.path().join("prices.csv");
    fs::write(&meta, META).unwrap();
    fs::write(&px, "date,symbol,close\n2008-01-02,AAA,10\n2008-01-03,AAA,-4\n").unwrap();
    let o = rmtcorr(&["align", "--prices", p(&px), "--meta", p(&meta), "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("prices.csv") && err.contains("line 3") && err.contains("non-positive close"), "{err}");
}

#[test]
fn run_returns_exit_status_in_process() {
    assert_eq!(rmtcorr::cli::run(["rmtcorr", "mp-sim", "--n", "5", "--l", "3"]), 1);
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(rmtcorr::cli::run(["rmtcorr", "mp-sim", "--n", "5", "--l", "30", "--replicates", "2", "--out", out]), 0);
}
