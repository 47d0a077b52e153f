use std::path::Path;
use std::process::{Command, Output};

use fibermod::io::{family_to_json, to_pretty};
use fibermod_core::family::hat_family;
use fibermod_core::rational::ratio;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fibermod"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).expect("JSON output")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn module_csv_from_family_file() {
    let dir = tempfile::tempdir().unwrap();
    let hat = write(dir.path(), "hat.json", &to_pretty(&family_to_json(&hat_family())));
    let o = run(&["module", "--family", &hat, "--degree", "0", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("a,b,c,dim\n"));
    assert!(text.lines().any(|l| l == "0,1,1,1"));
}

#[test]
fn missing_file_is_an_input_error() {
    let o = run(&["module", "--family", "/nonexistent/family.json", "--degree", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn bad_json_and_bad_precondition() {
    let dir = tempfile::tempdir().unwrap();
    let garbage = write(dir.path(), "bad.json", "{ not json");
    assert_eq!(run(&["module", "--family", &garbage]).status.code(), Some(2));
    let bad_times = write(
        dir.path(),
        "times.json",
        r#"{"base":{"n_vertices":1,"maximal_simplices":[[0]]},"time_breakpoints":["0","2"],"vertex_values":[["0"],["1"]]}"#,
    );
    assert_eq!(run(&["module", "--family", &bad_times]).status.code(), Some(3));
    assert_eq!(run(&["module", "--example", "cylinder:2"]).status.code(), Some(3));
    assert_eq!(run(&["module", "--example", "torus"]).status.code(), Some(2));
}

#[test]
fn cylinder_degree_one() {
    let o = run(&["module", "--example", "cylinder", "--degree", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    for p in v["dims"].as_array().unwrap() {
        let c: f64 = match p["c"].as_str().unwrap().split_once('/') {
            Some((n, d)) => n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap(),
            None => p["c"].as_str().unwrap().parse().unwrap(),
        };
        assert_eq!(p["dim"].as_u64().unwrap(), u64::from(c >= 1.0));
    }
}

#[test]
fn family_round_trip_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let first = run(&["module", "--example", "wrinkled-cylinder", "--emit-family"]);
    let path = write(dir.path(), "w.json", &stdout(&first));
    let second = run(&["module", "--family", &path, "--emit-family"]);
    assert_eq!(stdout(&first), stdout(&second));
    let a = run(&["module", "--family", &path, "--max-degree", "1"]);
    let b = run(&["module", "--family", &path, "--max-degree", "1"]);
    assert_eq!(a.stdout, b.stdout);
    let report = json(&a);
    assert_eq!(report["max_degree"], 1);
}

#[test]
fn wrinkled_cerf_svg() {
    let o = run(&["cerf", "--example", "wrinkled-cylinder", "--format", "svg"]);
    assert_eq!(o.status.code(), Some(0));
    let svg = stdout(&o);
    assert_eq!(svg.matches(r#"<polyline class="curve""#).count(), 2);
    assert_eq!(svg.matches(r#"<polyline class="lens""#).count(), 1);
    assert_eq!(svg.matches("<circle").count(), 2);
}

#[test]
fn hat_strip_crosses_twice() {
    let o = run(&["cerf", "--example", "hat", "--strip", "0,1,0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let crossings: Vec<&str> = v["strip"]["crossings"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["t"].as_str().unwrap())
        .collect();
    assert_eq!(crossings, ["1/4", "3/4"]);
    let svg = stdout(&run(&["cerf", "--example", "hat", "--strip", "0,1,0.5", "--format", "svg"]));
    assert!(svg.contains(r#"class="strip""#));
}

#[test]
fn empty_family_gives_axes_only() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(
        dir.path(),
        "empty.json",
        r#"{"base":{"n_vertices":0,"maximal_simplices":[]},"time_breakpoints":["0","1"],"vertex_values":[[],[]]}"#,
    );
    let o = run(&["cerf", "--family", &empty, "--format", "svg"]);
    assert_eq!(o.status.code(), Some(0));
    let svg = stdout(&o);
    assert_eq!(svg.matches(r#"class="axis""#).count(), 2);
    assert!(!svg.contains("<polyline"));
}

fn max_h0_on_diagonal(v: &Value) -> Vec<u64> {
    let times = v["times"].as_array().unwrap();
    times
        .iter()
        .map(|t| {
            v["dims"]
                .as_array()
                .unwrap()
                .iter()
                .filter(|p| p["a"] == *t && p["b"] == *t)
                .map(|p| p["dim"].as_u64().unwrap())
                .max()
                .unwrap()
        })
        .collect()
}

#[test]
fn kde_two_clusters_merge() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "x.csv", "x\n-1\n1\n");
    let o = run(&["kde", "--input", &csv, "--bandwidth", "0.2:2", "--tres", "10", "--xres", "41"]);
    assert_eq!(o.status.code(), Some(0));
    let counts = max_h0_on_diagonal(&json(&o));
    assert_eq!(counts.first(), Some(&2));
    assert_eq!(counts.last(), Some(&1));
    assert!(counts.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn kde_single_point_and_empty() {
    let dir = tempfile::tempdir().unwrap();
    let one = write(dir.path(), "one.csv", "0.5\n");
    for kernel in ["gaussian", "epanechnikov", "triangular"] {
        let o = run(&["kde", "--input", &one, "--kernel", kernel, "--tres", "4", "--xres", "17"]);
        assert_eq!(o.status.code(), Some(0), "{kernel}");
        let v = json(&o);
        assert!(v["dims"].as_array().unwrap().iter().all(|p| p["dim"].as_u64().unwrap() <= 1));
    }
    let empty = write(dir.path(), "empty.csv", "");
    assert_eq!(run(&["kde", "--input", &empty]).status.code(), Some(2));
    let header_only = write(dir.path(), "header.csv", "x\n");
    assert_eq!(run(&["kde", "--input", &header_only]).status.code(), Some(2));
    assert_eq!(
        run(&["kde", "--input", &one, "--bandwidth", "0:1"]).status.code(),
        Some(3)
    );
}

#[test]
fn regression_constant_response() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "xy.csv", "x,y\n0,3\n1,3\n2,3\n");
    let o = run(&["regress", "--input", &csv, "--tres", "3", "--xres", "9", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    for line in stdout(&o).lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let c: f64 = cols[2].parse().unwrap_or(f64::NAN);
        if c.is_finite() {
            assert_eq!(cols[3], if c >= 3.0 { "1" } else { "0" });
        }
    }
}

#[test]
fn stability_against_shift() {
    let dir = tempfile::tempdir().unwrap();
    let shifted = hat_family().shifted(&ratio(1, 4));
    let g = write(dir.path(), "g.json", &to_pretty(&family_to_json(&shifted)));
    let o = run(&["stability", "--example", "hat", "--family2", &g, "--degree", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["epsilon"], "1/4");
    assert_eq!(v["overall"], true);
    let tight = run(&["stability", "--example", "hat", "--family2", &g, "--epsilon", "1/8"]);
    assert_eq!(tight.status.code(), Some(1));
    let reports = json(&tight);
    assert!(reports.as_array().unwrap().iter().any(|r| r["overall"] == false));
}

#[test]
fn verify_suite() {
    let o = run(&["verify"]);
    assert_eq!(o.status.code(), Some(0));
    let two = json(&o);
    assert_eq!(two["overall"], true);
    let three = json(&run(&["verify", "--field", "3"]));
    assert_eq!(two["checks"], three["checks"]);
    let t = run(&["verify", "--tamper"]);
    assert_eq!(t.status.code(), Some(1));
    let v = json(&t);
    let failed: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["hat_grid"]);
    assert!(String::from_utf8_lossy(&t.stderr).contains("FAIL hat_grid"));
}
