use std::process::{Command, Output};

use serde_json::Value;

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynspan-bench"))
        .args(args)
        .output()
        .expect("run dynspan-bench")
}

fn json_lines(bytes: &[u8]) -> Vec<Value> {
    String::from_utf8_lossy(bytes)
        .lines()
        .map(|l| serde_json::from_str(l).expect("json line"))
        .collect()
}

fn strip_times(v: &mut Value) {
    if let Value::Object(m) = v {
        m.retain(|k, _| !k.contains("time_ns"));
        for inner in m.values_mut() {
            strip_times(inner);
        }
    }
}

#[test]
fn same_seed_same_output() {
    let args = ["--n", "40", "--ops", "mixed:0.4", "--seed", "7", "--check", "none"];
    let mut a = json_lines(&bench(&args).stdout);
    let mut b = json_lines(&bench(&args).stdout);
    assert_eq!(a.len(), 40 + 80 + 1);
    a.iter_mut().for_each(strip_times);
    b.iter_mut().for_each(strip_times);
    assert_eq!(a, b);
}

#[test]
fn update_lines_have_the_documented_fields() {
    let out = bench(&["--scenario", "path", "--n", "4"]);
    assert!(out.status.success());
    let lines = json_lines(&out.stdout);
    let first = lines[0].as_object().unwrap();
    let mut keys: Vec<&str> = first.keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(keys, ["added", "id", "op", "removed", "time_ns"]);
    assert_eq!(first["op"], "insert");
    assert_eq!(lines[1]["added"], 1);
    assert_eq!(lines.last().unwrap()["summary"]["edge_count"], 3);
}

#[test]
fn empty_stream_gives_zero_summary() {
    let out = bench(&["--scenario", "path", "--n", "0", "--check", "every-update"]);
    assert!(out.status.success());
    let lines = json_lines(&out.stdout);
    assert_eq!(lines.len(), 1);
    let s = &lines[0]["summary"];
    for key in ["updates", "edge_count", "max_recourse", "violation_count"] {
        assert_eq!(s[key], 0, "{key}");
    }
    for key in ["lightness", "max_stretch", "total_weight", "mean_time_ns"] {
        assert_eq!(s[key], 0.0, "{key}");
    }
}

#[test]
fn path_64_exact_every_update_is_clean() {
    let out = bench(&["--scenario", "path", "--n", "64", "--mode", "exact", "--check", "every-update"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stderr.is_empty());
}

#[test]
fn disabled_recompute_is_caught() {
    for fault in ["never-add", "always-add"] {
        let out = bench(&[
            "--scenario", "path", "--n", "64", "--check", "every-update", "--inject-fault", fault,
        ]);
        assert_eq!(out.status.code(), Some(1), "{fault}");
        let violations = json_lines(&out.stderr);
        assert!(!violations.is_empty());
        assert!(violations.iter().any(|v| v["kind"] == "invariant"));
    }
}

#[test]
fn fault_goes_unnoticed_without_checks() {
    let out = bench(&["--scenario", "path", "--n", "16", "--check", "none", "--inject-fault", "never-add"]);
    assert!(out.status.success());
}

#[test]
fn fast_mode_mixed_run_is_clean() {
    let out = bench(&[
        "--n", "32", "--phi", "128", "--mode", "fast", "--ops", "mixed:0.4", "--check", "every-update",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn point_file_is_replayed() {
    let dir = tempfile::tempdir().unwrap();
    let points = dir.path().join("pts.txt");
    std::fs::write(&points, "# square\n10 0 0\n11 3 0\n12 0 3\n13 3 3\n").unwrap();
    let log = dir.path().join("log.jsonl");
    let out = bench(&[
        "--scenario", "file",
        "--points", points.to_str().unwrap(),
        "--check", "every-update",
        "--out", log.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let lines = json_lines(&std::fs::read(&log).unwrap());
    assert_eq!(lines.len(), 5);
    let s = &lines[4]["summary"];
    assert_eq!(s["phi"], 8.0);
    assert_eq!(s["final_points"], 4);
    assert_eq!(s["mst_weight"], 9.0);
}

#[test]
fn unbounded_point_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let points = dir.path().join("pts.txt");
    std::fs::write(&points, "1 0\n2 0.5\n").unwrap();
    let out = bench(&["--scenario", "file", "--points", points.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("distance"));
}

#[test]
fn bad_arguments_are_errors() {
    assert!(!bench(&["--ops", "mixed:2"]).status.success());
    assert!(!bench(&["--check", "every-k:0"]).status.success());
    assert_eq!(bench(&["--phi", "100"]).status.code(), Some(2));
    assert_eq!(bench(&["--n", "500", "--phi", "8"]).status.code(), Some(2));
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = bench(&["--scenario", "path", "--sweep", "2,8", "--csv", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let rows = json_lines(&out.stdout);
    assert_eq!(rows[0]["net_tree_lightness"], 1.0);
    assert_eq!(rows[0]["light_lightness"], 1.0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("n,"));
    assert!(lines[1].starts_with("2,"));
}
