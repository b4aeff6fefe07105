use std::fs;
use std::process::Command;

fn brakefall(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_brakefall")).args(args).env_remove("BRAKEFALL_TOL").output().unwrap()
}

#[test]
fn exit_codes_follow_the_run_status() {
    assert_eq!(brakefall(&["drop", "-s", "hooke-mode"]).status.code(), Some(0));
    assert_eq!(brakefall(&["drop", "-s", "lagrange"]).status.code(), Some(2));
    assert_eq!(brakefall(&["drop", "-s", "pythagorean"]).status.code(), Some(3));
    let bad = brakefall(&["drop", "-s", "no-such-thing"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("no-such-thing"));
}

#[test]
fn list_scenarios_prints_every_builtin() {
    let out = brakefall(&["list-scenarios"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().collect::<Vec<_>>(), brakefall::BUILTIN);
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    fs::write(&path, brakefall::scenario::to_toml(&brakefall::builtin("hooke-mode").unwrap())).unwrap();
    let out = brakefall(&["analyze", "--config", path.to_str().unwrap(), "--tol", "1e-3", "--masses", "1,2,3"]);
    assert_eq!(out.status.code(), Some(0));
    let s: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(s["name"], "hooke-mode");
    assert_eq!(s["tol"], 1e-14);
    assert_eq!(s["symmetry_class"], "Rotation(180)");
}

#[test]
fn env_tolerance_applies_to_cli_runs() {
    let out = Command::new(env!("CARGO_BIN_EXE_brakefall"))
        .args(["drop", "-s", "hooke-mode"])
        .env("BRAKEFALL_TOL", "1e-10")
        .output()
        .unwrap();
    let s: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(s["tol"], 1e-10);
}

#[test]
fn flags_build_a_scenario() {
    let out = brakefall(&[
        "drop",
        "--masses",
        "1,1,1",
        "--positions",
        "-1,0,1,0,0,1.5",
        "--force",
        "hooke",
        "--t-max",
        "1",
        "--tol",
        "1e-12",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let s: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(s["tol"], 1e-12);
    assert_eq!(s["t_end"], 1.0);
}

#[test]
fn drop_writes_outputs_to_a_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = brakefall(&["drop", "-s", "lagrange", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    for f in ["trajectory.csv", "events.jsonl", "summary.json", "shape.csv", "paths.svg"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
}

#[test]
fn cc_reports_a_certified_collinear_configuration() {
    let out = brakefall(&["cc", "--masses", "3,4,5", "--ordering", "2,1,3"]);
    assert_eq!(out.status.code(), Some(0));
    let s: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(s["certified"], true);
    assert!(s["residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(brakefall(&["cc", "--masses", "3,4"]).status.code(), Some(1));
}

#[test]
fn shape_prints_csv() {
    let out = brakefall(&["shape", "-s", "hooke-mode", "--samples", "11"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t,w1,w2,w3,I\n"));
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn ingest_writes_a_summary_table() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("orbits.csv");
    fs::write(
        &table,
        "name,m1,m2,m3,x1,y1,x2,y2,x3,y3,expected_period\nmode,1,1,1,0.9,0.1,-0.4,0.7,-0.5,-0.8,2.5650996603287\n",
    )
    .unwrap();
    let out =
        brakefall(&["ingest", table.to_str().unwrap(), "--force", "hooke", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(summary.contains("Rotation(180)"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1 of 1"));
}
