use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_complex::Complex64;
use serde_json::Value;
use tempfile::TempDir;

use rlattract_core::special::{gamma, ml_scalar, MlIndex};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rlattract"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Data rows of a CSV file, skipping metadata and the header.
fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn ml_value(out: &str) -> f64 {
    let v = out.split_whitespace().next().unwrap().trim_start_matches("value=");
    v.split(',').next().unwrap().parse().unwrap()
}

// Fast scan settings shared by the certification tests.
const SCAN: &str = r#""scan": {"t_min": 0.01, "t_max": 1000, "per_decade": 10, "inner_N": 256}"#;

#[test]
fn ml_eval_values() {
    let o = run(&["ml-eval", "--alpha", "1", "--beta", "1", "--z", "1,0"]);
    assert_eq!(code(&o), 0);
    assert!((ml_value(&stdout(&o)) - std::f64::consts::E).abs() < 1e-14);

    let o = run(&["ml-eval", "--alpha", "0.7", "--beta", "2.5", "--z", "0,0"]);
    assert!((ml_value(&stdout(&o)) - 1.0 / gamma(2.5).unwrap()).abs() < 1e-15);

    // e^{x²} erfc(x) at x = 2, from a tabulated erfc(2) = 4.677734981047266e-3.
    let o = run(&["ml-eval", "--alpha", "0.5", "--beta", "1", "--z", "-2,0"]);
    let want = 4.0f64.exp() * 4.677734981047266e-3;
    assert!((ml_value(&stdout(&o)) - want).abs() < 1e-12, "{}", stdout(&o));
    assert!(stdout(&o).contains("error_estimate="));
}

#[test]
fn ml_eval_exit_codes() {
    assert_eq!(code(&run(&["ml-eval", "--alpha", "0.5", "--beta", "1"])), 2);
    assert_eq!(
        code(&run(&["ml-eval", "--alpha", "0.5", "--beta", "1", "--z", "1;2"])),
        2
    );
    assert_eq!(code(&run(&["ml-eval", "--alpha", "-1", "--beta", "1", "--z", "1"])), 2);
    let o = run(&[
        "ml-eval", "--alpha", "0.5", "--beta", "1", "--z", "-2", "--tol", "1e-30",
    ]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn solve_linear_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "lin.json",
        r#"{"alpha": 0.5, "A": [[-1]], "mesh": {"T": 10, "N": 512}}"#,
    );
    let out = dir.path().join("traj.csv");
    let o = run(&["solve", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# config_sha256 = "));
    assert!(text.lines().any(|l| l == "t,y_1,x_1,residual"));
    let idx = MlIndex::new(0.5, 0.5).unwrap();
    let g = gamma(0.5).unwrap();
    for r in rows(&text).iter().skip(1) {
        let t = r[0];
        let exact = g * t.powf(-0.5) * ml_scalar(idx, Complex64::new(-t.sqrt(), 0.0), 1e-12).unwrap().value.re;
        assert!(
            (r[2] - exact).abs() <= 1e-2 * t.powf(-0.5),
            "t={t}: {} vs {exact}",
            r[2]
        );
    }
}

#[test]
fn solve_zero_rhs_keeps_y_constant() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "zero.json",
        r#"{"alpha": 0.3, "A": [[0, 0], [0, 0]], "rhs": "zero", "x0": [2, -1], "mesh": {"T": 5, "N": 64}}"#,
    );
    let o = run(&["solve", s(&cfg)]);
    assert_eq!(code(&o), 0);
    for r in rows(&stdout(&o)) {
        assert_eq!((r[1], r[2]), (2.0, -1.0));
    }
}

#[test]
fn solve_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.json",
        r#"{"alpha": 0.6, "A": [[-1, 0.5], [0, -2]], "g": ["sin(t)", "1"], "mesh": {"T": 3, "N": 128}}"#,
    );
    let a = run(&["solve", s(&cfg)]);
    let b = run(&["solve", s(&cfg)]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    // Equivalent config with defaults spelled out hashes identically.
    let expanded = write(
        &dir,
        "d.json",
        r#"{"alpha": 0.6, "A": [[-1, 0.5], [0, -2]], "Q": [["0", "0"], ["0", "0"]], "g": ["sin(t)", "1"],
            "x0": [1, 1], "mesh": {"T": 3, "N": 128}, "norm": "2"}"#,
    );
    assert_eq!(run(&["solve", s(&expanded)]).stdout, a.stdout);
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let src = "{\"alpha\": 0.5,\n \"A\": [[-1]],,}";
    let bad = write(&dir, "bad.json", src);
    let o = run(&["solve", s(&bad)]);
    assert_eq!(code(&o), 2);
    let at = src.find(",,").unwrap() + 1;
    assert!(stderr(&o).contains(&format!("byte {at} ")), "{}", stderr(&o));

    let typo = write(
        &dir,
        "typo.json",
        r#"{"alpha": 0.5, "A": [[-1]], "mesh": {"T": 1, "n": 8}}"#,
    );
    let o = run(&["certify", s(&typo)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("unknown field"));

    let expr = write(&dir, "expr.json", r#"{"alpha": 0.5, "A": [[-1]], "Q": [["1 +* t"]]}"#);
    assert_eq!(code(&run(&["solve", s(&expr)])), 2);
    assert_eq!(code(&run(&["solve", s(&dir.path().join("missing.json"))])), 2);
}

#[test]
fn solver_failures_exit_4() {
    let dir = TempDir::new().unwrap();
    let stiff = write(
        &dir,
        "stiff.json",
        r#"{"alpha": 0.5, "A": [[-1]], "rhs": "negative_cube", "x0": [50], "mesh": {"T": 10, "N": 64},
            "tolerances": {"max_inner": 2, "solver": 1e-14}}"#,
    );
    let out = dir.path().join("partial.csv");
    let o = run(&["solve", s(&stiff), "--out", s(&out)]);
    assert_eq!(code(&o), 4);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().last().unwrap().starts_with("# FAILED: "));

    let unresolved = write(
        &dir,
        "q.json",
        r#"{"alpha": 0.5, "A": [[-1]], "Q": [["1000"]], "method": "voc", "mesh": {"T": 100, "N": 256}}"#,
    );
    assert_eq!(code(&run(&["solve", s(&unresolved)])), 4);
}

fn certificate(dir: &TempDir, body: &str) -> (i32, Value) {
    certificate_with(dir, body, SCAN)
}

fn certificate_with(dir: &TempDir, body: &str, scan: &str) -> (i32, Value) {
    let cfg = write(dir, "cert_cfg.json", &format!("{{{body}, {scan}}}"));
    let out = dir.path().join("cert.json");
    let o = run(&["certify", s(&cfg), "--out", s(&out)]);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    (code(&o), v)
}

fn keys(v: &Value) -> Vec<&str> {
    v.as_object().unwrap().keys().map(String::as_str).collect()
}

#[test]
fn certify_example_variant() {
    let dir = TempDir::new().unwrap();
    // The forcing bound for this g settles only after t ≈ 10³.
    let (c, v) = certificate_with(
        &dir,
        r#""alpha": 0.5, "A": [[-1]], "Q": [["0.9"]], "g": ["1/(1+sqrt(t))"]"#,
        r#""scan": {"t_max": 10000, "per_decade": 10, "inner_N": 256}"#,
    );
    assert_eq!(c, 0);
    assert_eq!(v["verdict"], "certified_thm2");
    let mut want = vec![
        "G_sup",
        "Q_threshold",
        "convention_notes",
        "g_bound",
        "lemma_M",
        "q",
        "scan",
        "sector",
        "theorem3",
        "verdict",
    ];
    want.sort();
    assert_eq!(keys(&v), want);
    assert_eq!(keys(&v["sector"]), vec!["eigenvalues", "in_sector", "margin"]);
    assert_eq!(keys(&v["lemma_M"]), vec!["M", "t0"]);
    assert_eq!(keys(&v["theorem3"]), vec!["K", "T", "decay_verified"]);
    assert_eq!(keys(&v["scan"]), vec!["per_decade", "stabilized", "t_max", "t_min"]);
    let q = v["q"].as_f64().unwrap();
    assert!((q - 0.9 * v["G_sup"].as_f64().unwrap()).abs() < 1e-8);
}

#[test]
fn certify_rejections_exit_1() {
    let dir = TempDir::new().unwrap();
    let (c, v) = certificate(&dir, r#""alpha": 0.5, "A": [[-1]], "Q": [["2"]]"#);
    assert_eq!(c, 1);
    assert_eq!(v["verdict"], "not_certified");
    assert!((v["q"].as_f64().unwrap() - 2.0).abs() < 0.1);

    let (c, v) = certificate(&dir, r#""alpha": 0.5, "A": [[1]]"#);
    assert_eq!(c, 1);
    assert_eq!(v["sector"]["in_sector"], false);
    assert_eq!(v["G_sup"], Value::Null);
    assert_eq!(v["convention_notes"][0], "failing stage: sector");
}

#[test]
fn scan_kernel_limits() {
    let dir = TempDir::new().unwrap();
    for (a, limit) in [(-1.0, 1.0), (-2.0, 0.5)] {
        let cfg = write(
            &dir,
            "k.json",
            &format!(r#"{{"alpha": 0.5, "A": [[{a}]], "scan": {{"t_max": 10000, "per_decade": 5, "inner_N": 256}}}}"#),
        );
        let o = run(&["scan-kernel", s(&cfg)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let text = stdout(&o);
        assert!(text.lines().any(|l| l == "t,tail_bound,G"));
        let last = rows(&text).last().unwrap()[2];
        assert!((last - limit).abs() < 0.02 * limit, "A={a}: G(t_max) = {last}");
    }
    let cfg = write(&dir, "up.json", r#"{"alpha": 0.5, "A": [[0.5]]}"#);
    let o = run(&["scan-kernel", s(&cfg)]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("not in sector"));
}

#[test]
fn repro_writes_scenario_files() {
    let dir = TempDir::new().unwrap();
    let o = run(&["repro", "qin", "--dir", s(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let base = dir.path().join("repro_qin");
    for f in ["cert.json", "config.json", "trajectory.csv", "g_scan.csv", "qin.csv"] {
        assert!(base.join(f).exists(), "{f}");
    }
    let qin = rows(&std::fs::read_to_string(base.join("qin.csv")).unwrap());
    // t = 1e-6: t^{-1/2}/Γ(1/2) = 1000/√π.
    assert!((qin[0][1] / (1000.0 / std::f64::consts::PI.sqrt()) - 1.0).abs() < 0.01);
    for w in qin.windows(2).filter(|w| w[1][0] <= 1e-3) {
        assert!((w[0][1] / w[1][1] / 2.0 - 1.0).abs() < 0.02);
    }
    assert_eq!(code(&run(&["repro", "nonsense", "--dir", s(dir.path())])), 2);
}

#[test]
fn repro_cong_grows() {
    let dir = TempDir::new().unwrap();
    let o = run(&["repro", "cong", "--dir", s(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("verdict not_certified"));
    let traj = rows(&std::fs::read_to_string(dir.path().join("repro_cong/trajectory.csv")).unwrap());
    let at = |t: f64| traj.iter().rev().find(|r| r[0] <= t).unwrap()[2].abs();
    assert!(at(20.0) > 10.0 * at(5.0));
}

#[test]
fn thread_setting() {
    let ok = bin()
        .env("RLATTRACT_THREADS", "1")
        .args(["ml-eval", "--alpha", "1", "--beta", "1", "--z", "0"])
        .output()
        .unwrap();
    assert_eq!(code(&ok), 0);
    let bad = bin()
        .env("RLATTRACT_THREADS", "zero")
        .args(["ml-eval", "--alpha", "1", "--beta", "1", "--z", "0"])
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}
