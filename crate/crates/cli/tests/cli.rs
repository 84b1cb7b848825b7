use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_parcoh"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// `p` columns of seeded Gaussian-ish noise with an AR coupling from column 0
/// into column 1.
fn write_series(dir: &Path, name: &str, n: usize, p: usize, header: bool) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut text = String::new();
    if header {
        let names: Vec<String> = (0..p).map(|j| format!("ch{j}")).collect();
        text.push_str(&names.join(","));
        text.push('\n');
    }
    let mut prev = vec![0.0; p];
    for _ in 0..n {
        let mut row: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0) + rng.random_range(-1.0..1.0)).collect();
        row[1] += 0.8 * prev[0];
        text.push_str(&row.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(","));
        text.push('\n');
        prev = row;
    }
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn analyze_writes_json_and_dot() {
    let dir = TempDir::new().unwrap();
    let input = write_series(dir.path(), "x.csv", 512, 3, true);
    let json = dir.path().join("r.json");
    let dot = dir.path().join("r.dot");
    let out = run(&[
        "analyze",
        "--input",
        input.to_str().unwrap(),
        "--output",
        json.to_str().unwrap(),
        "--dot",
        dot.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = read_json(&json);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["input"]["columns"][0], "ch0");
    assert_eq!(v["testing"]["q"], 3);
    let d = v["tuning"]["d"].as_u64().unwrap() as usize;
    assert_eq!(v["tuning"]["grid"].as_array().unwrap().len(), d);
    assert!(v["tuning"]["truncation_lag"].as_u64().unwrap() >= 4);
    assert!(v["tuning"]["var"]["order"].as_u64().unwrap() == 3);
    let pairs = v["pairs"].as_array().unwrap();
    let listed: Vec<(u64, u64)> = pairs.iter().map(|p| (p["u"].as_u64().unwrap(), p["v"].as_u64().unwrap())).collect();
    assert_eq!(listed, vec![(1, 2), (1, 3), (2, 3)]);
    let f0 = &pairs[0]["frequencies"][0];
    assert!(f0["rho_de"]["re"].is_f64() && f0["rho_de"]["im"].is_f64());
    // the strong lag-one coupling is found
    let edges = v["rejected_edges"].as_array().unwrap();
    assert!(edges.iter().any(|e| e[0] == 1 && e[1] == 2));

    let dot_text = fs::read_to_string(&dot).unwrap();
    assert!(dot_text.starts_with("graph partial_coherence {"));
    let max12 = pairs[0]["max_abs_rho_de"].as_f64().unwrap();
    assert!(dot_text.contains(&format!("1 -- 2 [label=\"{max12:.3}\"]")));
}

#[test]
fn hz_band_is_converted_and_echoed() {
    let dir = TempDir::new().unwrap();
    let input = write_series(dir.path(), "x.csv", 512, 3, false);
    let json = dir.path().join("r.json");
    let out = run(&[
        "analyze",
        "--input",
        input.to_str().unwrap(),
        "--band",
        "14:100Hz",
        "--sampling-rate",
        "256",
        "--bandwidth",
        "16",
        "--output",
        json.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = read_json(&json);
    let band = &v["config"]["bands_radians"][0];
    assert!((band[0].as_f64().unwrap() - 2.0 * PI * 14.0 / 256.0).abs() < 1e-15);
    assert!((band[1].as_f64().unwrap() - 2.0 * PI * 100.0 / 256.0).abs() < 1e-15);
    assert_eq!(v["config"]["band_unit"], "Hz");
    assert_eq!(v["input"]["columns"][0], "X1");
    for g in v["tuning"]["grid"].as_array().unwrap() {
        let w = g["omega"].as_f64().unwrap();
        let band = 2.0 * PI * 14.0 / 256.0 - 1e-12..=2.0 * PI * 100.0 / 256.0 + 1e-12;
        assert!(band.contains(&w));
    }
}

#[test]
fn analyze_is_deterministic_across_runs_and_workers() {
    let dir = TempDir::new().unwrap();
    let input = write_series(dir.path(), "x.csv", 400, 4, true);
    let mut outputs = Vec::new();
    for (i, workers) in ["1", "4", "4"].iter().enumerate() {
        let json = dir.path().join(format!("r{i}.json"));
        let out = run(&[
            "--workers",
            workers,
            "analyze",
            "--input",
            input.to_str().unwrap(),
            "--output",
            json.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        outputs.push(fs::read(&json).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}

#[test]
fn config_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let input = write_series(dir.path(), "x.csv", 128, 2, false);
    let path = input.to_str().unwrap();
    for extra in [
        vec!["--delta", "1.0"],
        vec!["--alpha", "0"],
        vec!["--band", "2:1"],
        vec!["--band", "1:2Hz"],
        vec!["--kernel", "parzen"],
        vec!["--inverse", "nodewise"],
        vec!["--lambda", "-3"],
        vec!["--prewhiten", "maybe"],
        vec!["--pairs", "1-3"],
        vec!["--bogus"],
    ] {
        let mut args = vec!["analyze", "--input", path];
        args.extend(extra.iter());
        let out = run(&args);
        assert_eq!(code(&out), 1, "{extra:?}: {}", stderr(&out));
    }
    assert_eq!(code(&run(&["--workers", "0", "analyze", "--input", path])), 1);
}

#[test]
fn malformed_input_exits_two_with_line() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.csv");
    let mut text = String::from("a,b\n");
    for t in 0..100 {
        if t == 41 {
            text.push_str("1.0,abc\n");
        } else {
            text.push_str(&format!("{}.5,{}\n", t % 7, t % 5));
        }
    }
    fs::write(&bad, text).unwrap();
    let out = run(&["analyze", "--input", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 43"), "{}", stderr(&out));

    let short = write_series(dir.path(), "short.csv", 30, 3, false);
    assert_eq!(code(&run(&["analyze", "--input", short.to_str().unwrap()])), 2);
    let one = dir.path().join("one.csv");
    fs::write(&one, (0..100).map(|t| format!("{t}\n")).collect::<String>()).unwrap();
    assert_eq!(code(&run(&["analyze", "--input", one.to_str().unwrap()])), 2);
    let missing = dir.path().join("missing.csv");
    assert_eq!(code(&run(&["analyze", "--input", missing.to_str().unwrap()])), 2);
}

#[test]
fn numeric_failure_exits_three_with_stage() {
    let dir = TempDir::new().unwrap();
    let input = write_series(dir.path(), "x.csv", 80, 2, false);
    let out = run(&["analyze", "--input", input.to_str().unwrap(), "--bandwidth", "60"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("stage bandwidth"), "{}", stderr(&out));
}

#[test]
fn list_kinds() {
    let out = run(&["simulate", "--list-kinds"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "varma11\nvma5\n");
    assert_eq!(code(&run(&["simulate", "--kind", "var3"])), 1);
}

#[test]
fn simulate_smoke_and_determinism() {
    let dir = TempDir::new().unwrap();
    let mut reports = Vec::new();
    for (i, workers) in ["1", "3"].iter().enumerate() {
        let json = dir.path().join(format!("s{i}.json"));
        let table = dir.path().join(format!("s{i}.txt"));
        let start = std::time::Instant::now();
        let out = run(&[
            "--workers",
            workers,
            "simulate",
            "--kind",
            "varma11",
            "--p",
            "6",
            "--n",
            "256",
            "--reps",
            "2",
            "--seed",
            "5",
            "--output",
            json.to_str().unwrap(),
            "--table",
            table.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert!(start.elapsed().as_secs() < 30);
        let t = fs::read_to_string(&table).unwrap();
        assert!(t.contains("testing") && t.contains("regularizing") && t.contains("FDR(sd)"));
        reports.push(fs::read(&json).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    let v: Value = serde_json::from_slice(&reports[0]).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["replications"], 2);
    for pair in v["alternatives"].as_array().unwrap() {
        assert!(pair[0].as_u64().unwrap() >= 1 && pair[1].as_u64().unwrap() <= 6);
    }
}

#[test]
fn simulate_single_method() {
    let dir = TempDir::new().unwrap();
    let json = dir.path().join("s.json");
    let table = dir.path().join("s.txt");
    let out = run(&[
        "simulate",
        "--kind",
        "vma5",
        "--p",
        "5",
        "--n",
        "256",
        "--reps",
        "1",
        "--method",
        "regularizing",
        "--output",
        json.to_str().unwrap(),
        "--table",
        table.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = read_json(&json);
    let methods = v["methods"].as_array().unwrap();
    assert_eq!(methods.len(), 1);
    assert_eq!(methods[0]["method"], "regularizing");
    assert_eq!(code(&run(&["simulate", "--kind", "vma5", "--method", "both"])), 1);
}
