// End-to-end runs of the gevmc binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn gevmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gevmc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn port_pirie() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/portpirie.csv")
}

fn simulate_ar(dir: &Path) -> PathBuf {
    let out = dir.join("ar.csv");
    let o = gevmc(&[
        "simulate",
        "--model",
        "gev-ar",
        "--mu",
        "-1",
        "--theta",
        "0.8",
        "--sigma",
        "1",
        "--xi",
        "0.3",
        "--n",
        "120",
        "--seed",
        "4",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn simulate_is_deterministic_and_records_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = gevmc(&[
            "simulate",
            "--model",
            "gev",
            "--mu",
            "2",
            "--sigma",
            "0.5",
            "--xi",
            "-0.1",
            "--n",
            "100",
            "--seed",
            "9",
            "--out",
            s(&out),
        ]);
        assert_eq!(code(&o), 0);
        fs::read(out).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().next(), Some("value"));
    assert_eq!(text.lines().count(), 101);
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("a.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["outputs"][0], "a.csv");
}

#[test]
fn simulate_rejects_shape_outside_the_ar_range() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = gevmc(&[
        "simulate",
        "--model",
        "gev-ar",
        "--mu",
        "0",
        "--theta",
        "0.5",
        "--sigma",
        "1",
        "--xi",
        "0.6",
        "--n",
        "50",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("xi"));
    assert!(!out.exists());
}

#[test]
fn fit_writes_three_files_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = gevmc(&[
            "fit",
            s(&port_pirie()),
            "--iters",
            "800",
            "--burnin",
            "200",
            "--tune-eps",
            "--out",
            s(&out),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let a = run("a");
    let b = run("b");
    let mut names: Vec<_> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names, ["chain.csv", "manifest.json", "summary.json"]);
    for f in ["chain.csv", "manifest.json", "summary.json"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f} differs"
        );
    }
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["chain"]["draws"], 600);
    let mu = summary["parameters"][0]["mean"].as_f64().unwrap();
    assert!((3.7..4.0).contains(&mu), "{mu}");
}

#[test]
fn fit_output_feeds_diagnose_and_forecast() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate_ar(dir.path());
    let fit = dir.path().join("fit");
    let o = gevmc(&[
        "fit",
        s(&data),
        "--model",
        "gev-ar",
        "--p",
        "1",
        "--sampler",
        "rmhmc",
        "--eps",
        "0.06",
        "--steps",
        "11",
        "--iters",
        "1500",
        "--burnin",
        "300",
        "--holdout",
        "3",
        "--out",
        s(&fit),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let held = fs::read_to_string(fit.join("forecasts.csv")).unwrap();
    assert_eq!(held.lines().count(), 4);
    let chain = fit.join("chain.csv");

    let diag = dir.path().join("diag");
    let o = gevmc(&[
        "diagnose",
        s(&chain),
        "--burnin-extra",
        "200",
        "--max-lag",
        "20",
        "--out",
        s(&diag),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let acf = fs::read_to_string(diag.join("acf.csv")).unwrap();
    let lines: Vec<&str> = acf.lines().collect();
    assert_eq!(lines[0], "lag,mu,theta1,sigma,xi");
    assert_eq!(lines.len(), 1 + 21);
    assert!(lines[1]
        .split(',')
        .skip(1)
        .all(|v| v.parse::<f64>().unwrap() == 1.0));
    let ess: serde_json::Value =
        serde_json::from_slice(&fs::read(diag.join("ess.json")).unwrap()).unwrap();
    assert_eq!(ess["draws"], 1000);

    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = gevmc(&[
            "forecast",
            s(&chain),
            s(&data),
            "--horizon",
            "3",
            "--seed",
            "5",
            "--out",
            s(&out),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        fs::read_to_string(out).unwrap()
    };
    let f = run("f1.csv");
    assert_eq!(f, run("f2.csv"));
    let rows: Vec<&str> = f.lines().collect();
    assert_eq!(rows[0], "step,point,lower,upper");
    assert_eq!(rows.len(), 4);
    for r in &rows[1..] {
        let v: Vec<f64> = r.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(v[2] < v[1] && v[1] < v[3], "{r}");
    }
}

#[test]
fn malformed_data_names_the_line_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    fs::write(&data, "value\n1.2\n3.4\n5.6\nnot-a-number\n").unwrap();
    let out = dir.path().join("out");
    let o = gevmc(&["fit", s(&data), "--out", s(&out)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 5"));
    assert!(!out.exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    // unknown protocol and unknown flags are usage errors
    assert_eq!(
        code(&gevmc(&["study", "--protocol", "table7", "--out", s(&out)])),
        1
    );
    assert_eq!(
        code(&gevmc(&[
            "fit",
            s(&port_pirie()),
            "--bogus",
            "--out",
            s(&out)
        ])),
        1
    );
    assert_eq!(code(&gevmc(&["--help"])), 0);
    // a missing input is an I/O error
    assert_eq!(
        code(&gevmc(&["fit", "/nonexistent/data.csv", "--out", s(&out)])),
        3
    );
    assert_eq!(
        code(&gevmc(&[
            "diagnose",
            "/nonexistent/chain.csv",
            "--out",
            s(&out)
        ])),
        3
    );
    // a chain too short for the requested lags is a numerical failure
    let chain = dir.path().join("chain.csv");
    fs::write(&chain, "a\n1\n2\n3\n").unwrap();
    assert_eq!(
        code(&gevmc(&[
            "diagnose",
            s(&chain),
            "--max-lag",
            "10",
            "--out",
            s(&out)
        ])),
        2
    );
    assert!(!out.exists());
}

#[test]
fn study_smoke_run_has_the_protocol_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t4");
    let o = gevmc(&[
        "study",
        "--protocol",
        "table4",
        "--replications",
        "1",
        "--sizes",
        "60",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("result.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "design,n,parameter,truth,hmc_bias,hmc_mse,hmc_ok,hmc_failed,rmhmc_bias,rmhmc_mse,rmhmc_ok,rmhmc_failed"
    );
    // M1, M2 and M3 have 4, 5 and 6 parameters
    assert_eq!(lines.len(), 1 + 4 + 5 + 6);
    for f in ["result.json", "timings.json", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
}
