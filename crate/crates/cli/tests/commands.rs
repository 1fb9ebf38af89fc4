use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn reflext(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reflext")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn error_kind(o: &Output) -> String {
    let line = String::from_utf8_lossy(&o.stderr);
    let v: Value = serde_json::from_str(line.trim()).expect("stderr is a JSON record");
    v["error"].as_str().unwrap().to_string()
}

#[test]
fn vandermonde_pair() {
    let tmp = tempfile::tempdir().unwrap();
    let o = reflext(tmp.path(), &["coeffs", "gen", "--kind", "vandermonde", "--nodes", "1,2", "--out", "v"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let file = json(&tmp.path().join("v/coeffs.json"));
    let a: Vec<f64> = file["entries"].as_array().unwrap().iter().map(|e| e["a"].as_str().unwrap().parse().unwrap()).collect();
    assert_eq!(a.len(), 2);
    assert!((a[0] - 3.0).abs() < 1e-12 && (a[1] + 2.0).abs() < 1e-12);

    let check = reflext(tmp.path(), &["coeffs", "check", "--file", "v/coeffs.json", "--out", "c"]);
    assert_eq!(code(&check), 0);
    assert!(tmp.path().join("c/moments.json").exists());
}

#[test]
fn low_precision_is_a_computation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = reflext(tmp.path(), &["coeffs", "gen", "--kind", "two-sided", "--bits", "64", "--out", "x"]);
    assert_eq!(code(&o), 1);
    assert_eq!(error_kind(&o), "computation");
}

#[test]
fn usage_and_io_errors() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&reflext(tmp.path(), &["frobnicate"])), 1);
    assert_eq!(code(&reflext(tmp.path(), &["--help"])), 0);

    let missing = reflext(tmp.path(), &["coeffs", "check", "--file", "nope.json"]);
    assert_eq!(code(&missing), 1);
    assert_eq!(error_kind(&missing), "io");

    let bad = reflext(tmp.path(), &["probe", "lp", "--p", "2", "--functions", "99"]);
    assert_eq!(code(&bad), 1);
    assert_eq!(error_kind(&bad), "usage");
}

#[test]
fn extend_reproduces_a_quadratic() {
    let tmp = tempfile::tempdir().unwrap();
    let o = reflext(tmp.path(), &["extend", "--f", "builtin:poly:2", "--h", "0.25", "--range", "-1:1", "--out", "e"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(tmp.path().join("e/extend.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# dim=1"));
    assert_eq!(lines.next().unwrap(), "x_n,value");
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (x, v) = l.split_once(',').unwrap();
            (x.parse().unwrap(), v.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 9);
    for (x, v) in rows {
        assert!((v - x * x).abs() < 1e-12, "{x} -> {v}");
    }
}

#[test]
fn extend_a_half_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let mut csv = String::from("# dim=1, h=1e-1, origin=0e0, half\nx_n,value\n");
    for i in 0..=80 {
        let x = i as f64 * 0.1;
        csv.push_str(&format!("{x:e},{:e}\n", (-x).exp()));
    }
    fs::write(tmp.path().join("half.csv"), csv).unwrap();
    let strict = reflext(tmp.path(), &["extend", "--input", "half.csv", "--neg", "5", "--out", "s"]);
    assert_eq!(code(&strict), 1);
    let o = reflext(tmp.path(), &["extend", "--input", "half.csv", "--neg", "5", "--policy", "decay:1", "--out", "g"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let record = json(&tmp.path().join("g/extend.json"));
    assert_eq!(record["normal_nodes"], 86);
}

#[test]
fn empty_probe_report_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = reflext(tmp.path(), &["probe", "sobolev", "--k", "", "--out", "p"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&tmp.path().join("p/probe-sobolev.json")), Value::Array(vec![]));
}

#[test]
fn dilation_slope_for_l2() {
    let tmp = tempfile::tempdir().unwrap();
    let o = reflext(tmp.path(), &["probe", "dilation", "--functions", "3", "--norm", "lp:2", "--out", "d"]);
    assert_eq!(code(&o), 0);
    let v = json(&tmp.path().join("d/probe-dilation.json"));
    let slope: f64 = v.pointer("/0/slope/value").unwrap().as_str().unwrap().parse().unwrap();
    assert!((slope + 0.5).abs() < 0.02);
}

#[test]
fn domain_depend_and_reach_refusal() {
    let tmp = tempfile::tempdir().unwrap();
    let o = reflext(tmp.path(), &["domain", "depend", "--shape", "ellipse", "--cases", "5", "--out", "d"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&tmp.path().join("d/domain-depend.json"));
    assert_eq!(report["pass"], true);
    assert_eq!(report["dependence"].as_array().unwrap().len(), 5);

    fs::write(tmp.path().join("wide.json"), r#"{"fourier_coefficients": {"x_cos": [0, 1], "y_sin": [0, 1]}, "t_max": 1.2}"#).unwrap();
    let wide = reflext(tmp.path(), &["domain", "depend", "--spec", "wide.json", "--out", "w"]);
    assert_eq!(code(&wide), 1);
    assert_eq!(error_kind(&wide), "computation");
}

#[test]
fn domain_field_has_every_mask() {
    let tmp = tempfile::tempdir().unwrap();
    let o = reflext(tmp.path(), &["domain", "extend", "--shape", "star", "--n", "21", "--out", "f"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(tmp.path().join("f/domain-field.csv")).unwrap();
    let masks: Vec<&str> = text.lines().skip(2).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(masks.len(), 21 * 21);
    for m in ["inside", "tube", "outside"] {
        assert!(masks.contains(&m), "no {m} samples");
    }
}

#[test]
fn reports_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = reflext(tmp.path(), &["domain", "depend", "--shape", "star", "--cases", "4", "--out", out]);
        assert_eq!(code(&o), 0);
        let o = reflext(tmp.path(), &["probe", "lp", "--functions", "0,5", "--p", "1,2", "--out", out]);
        assert_eq!(code(&o), 0);
    }
    for name in ["domain-depend.json", "probe-lp.json", "probe-lp.csv"] {
        let a = fs::read(tmp.path().join("a").join(name)).unwrap();
        let b = fs::read(tmp.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
}

#[test]
fn busy_output_directory_is_refused() {
    let tmp = tempfile::tempdir().unwrap();
    fs::create_dir(tmp.path().join("o")).unwrap();
    fs::write(tmp.path().join("o/.reflext.lock"), "").unwrap();
    let o = reflext(tmp.path(), &["probe", "sobolev", "--k", "", "--out", "o"]);
    assert_eq!(code(&o), 1);
}
