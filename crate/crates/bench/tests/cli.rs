use std::fs;
use std::path::Path;
use std::process::Command;

fn bench(args: &[&str], out: &Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_bench"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .output()
        .expect("bench binary runs");
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stderr).into_owned())
}

const SMALL: &str = r#"{
    "function": "example-2d",
    "rotated": true,
    "rotation_degrees": 30.0,
    "frame_scales": [2.0, 1.0],
    "domains": ["gradient-transform", "minmax"],
    "kinds": ["rbf", "ge-rbf"],
    "sample_counts": [8, 12],
    "repeats": 3,
    "test_points": 500,
    "seed": 4
}"#;

#[test]
fn run_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, SMALL).unwrap();
    let out = dir.path().join("out");
    let (code, err) = bench(&["run", spec.to_str().unwrap()], &out);
    assert_eq!(code, 0, "{err}");

    let csv = fs::read_to_string(out.join("rmse.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "domain,kind,p,repeat,rmse,log10_rmse,failure");
    assert_eq!(rows.len(), 1 + 2 * 2 * 2 * 3);
    assert!(rows[1].starts_with("gradient-transform,rbf,8,0,"));

    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["summary"]["variance_convention"], "population");
    assert_eq!(summary["summary"]["cells"].as_array().unwrap().len(), 8);
    assert_eq!(summary["spec"]["seed"], 4);

    // two domains, two sample counts, three repeats
    let transforms = fs::read_dir(out.join("transforms")).unwrap().count();
    assert_eq!(transforms, 12);
    let t = fs::read_to_string(out.join("transforms/minmax_p8_r0.json")).unwrap();
    isoframe::transform::DomainTransform::from_json(&t).unwrap();
}

#[test]
fn seed_flag_overrides_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, SMALL).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(bench(&["run", spec.to_str().unwrap()], &a).0, 0);
    assert_eq!(bench(&["run", spec.to_str().unwrap(), "--seed", "5"], &b).0, 0);
    let ca = fs::read_to_string(a.join("rmse.csv")).unwrap();
    let cb = fs::read_to_string(b.join("rmse.csv")).unwrap();
    assert_ne!(ca, cb);
}

#[test]
fn spec_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let bad = dir.path().join("bad.json");
    fs::write(&bad, SMALL.replace("\"seed\"", "\"sed\"")).unwrap();
    for args in [
        vec!["run", bad.to_str().unwrap()],
        vec!["run", "--preset", "5d"],
        vec!["run"],
        vec!["run", "/nonexistent/spec.json"],
    ] {
        let (code, err) = bench(&args, &out);
        assert_eq!(code, 2, "{args:?}: {err}");
    }
}

#[test]
fn cell_failures_exit_with_three() {
    // two samples cannot support a quadratic fit in 2D
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(
        &spec,
        r#"{"function": "example-2d", "domains": ["function-transform"], "kinds": ["rbf"],
            "sample_counts": [2], "repeats": 1, "test_points": 10}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let (code, err) = bench(&["run", spec.to_str().unwrap()], &out);
    assert_eq!(code, 3, "{err}");
    let csv = fs::read_to_string(out.join("rmse.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    assert!(row.starts_with("function-transform,rbf,2,0,,,transform: "), "{row}");
}

#[test]
fn lines_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(
        &spec,
        r#"{"function": "sinusoid", "dim": 4, "rotated": true,
            "domains": ["gradient-transform", "minmax"], "kinds": ["ge-rbf"],
            "sample_counts": [20], "repeats": 1, "test_points": 10, "seed": 11}"#,
    )
    .unwrap();
    let runs: Vec<Vec<String>> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let (code, err) = bench(&["lines", spec.to_str().unwrap(), "--lines", "4", "--points", "200"], &out);
            assert_eq!(code, 0, "{err}");
            (0..4).map(|k| fs::read_to_string(out.join(format!("lines_{k}.csv"))).unwrap()).collect()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    for csv in &runs[0] {
        assert_eq!(csv.lines().count(), 1 + 2 * 200);
    }
}
