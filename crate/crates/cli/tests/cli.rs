use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn geneo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geneo"))
        .args(args)
        .env_remove("GENEO_SEED")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write_diagram(dir: &Path, name: &str, args: &[&str]) -> String {
    let mut full = vec!["diagram"];
    full.extend_from_slice(args);
    let out = geneo(&full);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let path = dir.join(name);
    fs::write(&path, &out.stdout).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn diagram_of_abs_sin() {
    let v = stdout_json(&geneo(&["diagram", "--builtin", "abs_sin", "--n", "12"]));
    assert_eq!(v["finite"], serde_json::json!([[0.0, 1.0]]));
    assert_eq!(v["essential"], serde_json::json!([0.0]));
}

#[test]
fn diagram_csv_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("plot.csv");
    let out = geneo(&[
        "diagram",
        "--builtin",
        "sin_sq",
        "--n",
        "12",
        "--format",
        "csv",
        "--plot-data",
        plot.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "birth,death\n0,1\n0,inf\n"
    );
    assert_eq!(
        fs::read_to_string(plot).unwrap(),
        "birth,death,essential\n0,1,0\n0,1,1\n"
    );
}

#[test]
fn missing_input_is_a_usage_error() {
    let out = geneo(&["diagram", "--input", "/definitely/not/here.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no such file"));
}

#[test]
fn function_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    let out = geneo(&[
        "apply",
        "id",
        "--builtin",
        "abs_sin",
        "--n",
        "8",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&geneo(&["diagram", "--input", path.to_str().unwrap()]));
    assert_eq!(v["finite"], serde_json::json!([[0.0, 1.0]]));
    let out = geneo(&["diagram", "--input", path.to_str().unwrap(), "--n", "12"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn matching_distances() {
    let dir = tempfile::tempdir().unwrap();
    let op = "Mp(1; id, rot(pi/2))";
    let a = write_diagram(dir.path(), "a.json", &["--builtin", "abs_sin", "--op", op]);
    let b = write_diagram(dir.path(), "b.json", &["--builtin", "sin_sq", "--op", op]);
    let same = stdout_json(&geneo(&["match", &a, &a]));
    assert_eq!(same["distance"], 0.0);
    let v = stdout_json(&geneo(&["match", &a, &b]));
    assert_eq!(v["distance"], 0.103553390593);

    let raw = write_diagram(dir.path(), "raw.json", &["--builtin", "abs_sin"]);
    let c = dir.path().join("c.csv");
    fs::write(&c, "birth,death\n0,1\n").unwrap();
    let v = stdout_json(&geneo(&["match", &raw, c.to_str().unwrap()]));
    assert_eq!(v["distance"], "inf");
}

#[test]
fn malformed_diagram_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"finite\": [[1, 0]], \"essential\": []}").unwrap();
    let out = geneo(&["match", bad.to_str().unwrap(), bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn natural_pseudo_distance() {
    let v = stdout_json(&geneo(&[
        "dg",
        "--builtin",
        "abs_sin",
        "--builtin",
        "sin_sq",
    ]));
    assert_eq!(v["d_g"], 0.25);
    assert_eq!(v["witness"]["identity"], true);
    let v = stdout_json(&geneo(&[
        "dg",
        "--builtin",
        "abs_sin",
        "--builtin",
        "abs_sin",
    ]));
    assert_eq!(v["d_g"], 0.0);
    let out = geneo(&["dg", "--builtin", "abs_sin"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_exit_codes() {
    let v = stdout_json(&geneo(&["validate", "id", "--n", "36"]));
    assert_eq!(v["equivariance"]["max_violation"], 0.0);
    assert_eq!(v["nonexpansivity"]["max_excess"], 0.0);
    assert_eq!(v["pass"], true);

    let v = stdout_json(&geneo(&["validate", "Mp(3; id, rot(pi/2))", "--n", "36"]));
    assert_eq!(v["pass"], true);

    let out = geneo(&["validate", "unchecked Mp(0.5; id, rot(pi))", "--n", "36"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["nonexpansivity"]["max_excess"].as_f64().unwrap() > 1e-12);

    let out = geneo(&["validate", "Mp(0.5; id, rot(pi))", "--n", "36"]);
    assert_eq!(out.status.code(), Some(2));
    let out = geneo(&["validate", "Mp(1; id, rot(pi/7))"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("byte 10"));
}

#[test]
fn strict_apply_reports_closure_violation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tall.csv");
    fs::write(&path, "index,value\n0,0\n1,2\n2,2\n3,0\n").unwrap();
    let input = path.to_str().unwrap();
    let out = geneo(&["apply", "rot(pi/2)", "--input", input, "--strict"]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = geneo(&["apply", "rot(pi/2)", "--input", input]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "index,value\n0,2\n1,2\n2,0\n3,0\n"
    );
}

#[test]
fn reproduce_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("bundle");
    let out = geneo(&[
        "reproduce-paper",
        "--out",
        out_dir.to_str().unwrap(),
        "--n",
        "120",
    ]);
    let summary = stdout_json(&out);
    assert_eq!(summary["pass"], true);
    let case1 = &summary["cases"][0];
    assert_eq!(case1["d_g"], 0.25);
    assert_eq!(case1["distances"]["Mp"], 0.103553390593);
    for stage in ["raw", "F1", "F2"] {
        assert_eq!(case1["distances"][stage], 0.0);
    }
    assert!(summary["cases"][1]["distances"]["Mp"].as_f64().unwrap() > 1e-9);
    for file in [
        "summary.json",
        "functions.csv",
        "case1/curves.csv",
        "case1/diagrams.json",
        "case1/diagram_points.csv",
        "case1/distances.json",
        "case2/curves.csv",
    ] {
        assert!(out_dir.join(file).is_file(), "missing {file}");
    }
    let on_disk: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(on_disk, summary);

    let out = geneo(&[
        "reproduce-paper",
        "--out",
        out_dir.to_str().unwrap(),
        "--n",
        "30",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

fn gap_args() -> Vec<&'static str> {
    vec![
        "gap",
        "--builtin",
        "abs_sin",
        "--builtin",
        "sin_sq",
        "--n",
        "36",
        "--include",
        "Mp(1; id, rot(pi/2))",
        "--sizes",
        "1,3",
        "--max-depth",
        "2",
    ]
}

#[test]
fn gap_output_is_deterministic() {
    let first = geneo(&gap_args());
    let second = geneo(&gap_args());
    assert_eq!(
        first.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    assert_eq!(first.stdout, second.stdout);
    let v: Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(v["seed"], 0);
    assert_eq!(v["family_sizes"], serde_json::json!([1, 3]));
    let records = v["records"].as_array().unwrap();
    assert_eq!(records.len(), 2);
    for r in records {
        let (bound, d_g) = (r["bound"].as_f64().unwrap(), r["d_g"].as_f64().unwrap());
        assert!(bound <= d_g + 1e-12);
    }
}

#[test]
fn seed_flag_and_environment() {
    let mut with_flag = gap_args();
    with_flag.extend(["--seed", "7"]);
    let flagged = geneo(&with_flag);
    let env = Command::new(env!("CARGO_BIN_EXE_geneo"))
        .args(gap_args())
        .env("GENEO_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(flagged.stdout, env.stdout);
    let v: Value = serde_json::from_slice(&env.stdout).unwrap();
    assert_eq!(v["seed"], 7);
}

#[test]
fn gap_writes_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = gap_args();
    let out = dir.path().join("report");
    args.extend(["--out", out.to_str().unwrap()]);
    assert_eq!(geneo(&args).status.code(), Some(0));
    let csv = fs::read_to_string(out.join("gap_report.csv")).unwrap();
    assert!(csv.starts_with("family_size,"), "{csv}");
    assert_eq!(csv.lines().count(), 3);
    assert!(out.join("gap_report.json").is_file());
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let function = dir.path().join("f.csv");
    let out = geneo(&[
        "apply",
        "id",
        "--builtin",
        "sin_sq",
        "--n",
        "36",
        "--out",
        function.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let config = dir.path().join("experiment.toml");
    fs::write(
        &config,
        "n = 36\nseed = 5\nfamily_sizes = [2]\nmax_depth = 2\ncorpus = [\"f.csv\"]\noperators = [\"rot(pi/2)\"]\n",
    )
    .unwrap();
    let v = stdout_json(&geneo(&[
        "gap",
        "--config",
        config.to_str().unwrap(),
        "--builtin",
        "abs_sin",
    ]));
    assert_eq!(v["seed"], 5);
    assert_eq!(v["grid"], 36);
    assert_eq!(v["family_sizes"], serde_json::json!([2]));
    assert_eq!(v["records"][0]["d_g"], 0.25);

    fs::write(&config, "colour = 1\n").unwrap();
    let out = geneo(&["validate", "id", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
