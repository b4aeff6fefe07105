use std::f64::consts::PI;
use std::fs;

use brakefall::output::{events_jsonl, summary_json, svg, trajectory_csv};
use brakefall::scenario::{parse_spec, to_json, to_toml, Format};
use brakefall::*;
use serde_json::Value;

fn run(name: &str) -> ReportBundle {
    run_scenario(&builtin(name).unwrap()).unwrap()
}

fn summary(bundle: &ReportBundle) -> Value {
    serde_json::from_str(&summary_json(bundle)).unwrap()
}

#[test]
fn builtins_round_trip_through_json_and_toml() {
    for name in BUILTIN {
        let spec = builtin(name).unwrap();
        assert_eq!(parse_spec(&to_json(&spec), Format::Json, name).unwrap(), spec, "{name} json");
        assert_eq!(parse_spec(&to_toml(&spec), Format::Toml, name).unwrap(), spec, "{name} toml");
    }
}

#[test]
fn toml_errors_name_the_field() {
    let text = "name = \"x\"\nmasses = [1.0, 1.0, 1.0]\n[triangle]\nkind = \"equilateral\"\nside = 1.0\n[output]\nsamples = \"many\"\n";
    let Err(Error::Spec { field, .. }) = parse_spec(text, Format::Toml, "t.toml") else { panic!() };
    assert_eq!(field, "output.samples");
    let text = "name = \"x\"\nmasses = [1.0]\n[triangle]\nkind = \"hexagon\"\n";
    let Err(Error::Spec { field, .. }) = parse_spec(text, Format::Toml, "t.toml") else { panic!() };
    assert_eq!(field, "triangle.kind");
}

#[test]
fn load_spec_reads_files_and_reports_missing_ones() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hooke.toml");
    let spec = builtin("hooke-mode").unwrap();
    fs::write(&path, to_toml(&spec)).unwrap();
    assert_eq!(load_spec(&path).unwrap(), spec);
    let missing = dir.path().join("nope.json");
    let err = load_spec(&missing).unwrap_err();
    assert!(err.to_string().contains("nope.json"), "{err}");
}

#[test]
fn lagrange_collides_with_constant_shape() {
    let bundle = run("lagrange");
    assert_eq!(bundle.exit_code(), 2);
    let s = summary(&bundle);
    assert_eq!(s["status"], "CollisionStop");
    let shape = bundle.shape.as_ref().unwrap();
    // equal masses: the equilateral shape is a pole of the sphere
    for (_, w) in shape.iter().filter(|(_, w)| w.inertia > 1e-6 * shape[0].1.inertia) {
        assert!(w.w[0].hypot(w.w[1]) < 1e-8 * w.norm());
    }
    let collapse = s["central"]["collapse_time"].as_f64().unwrap();
    let stop = s["stop_time"].as_f64().unwrap();
    assert!((stop - collapse).abs() < 1e-6 * collapse);
}

#[test]
fn pythagorean_escapes_with_a_binary() {
    let bundle = run("pythagorean");
    assert_eq!(bundle.exit_code(), 3);
    let s = summary(&bundle);
    assert_eq!(s["status"], "EscapeStop");
    assert_eq!(s["escape"]["binary"], serde_json::json!([2, 3]));
    assert_eq!(s["escape"]["single"], 1);
    assert!(s["escape"]["binary_energy"].as_f64().unwrap() < 0.0);
    assert!(s["escape"]["relative_energy"].as_f64().unwrap() > 0.0);
}

#[test]
fn hooke_mode_is_a_half_turn() {
    let bundle = run("hooke-mode");
    assert_eq!(bundle.exit_code(), 0);
    let text = summary_json(&bundle);
    let compact = serde_json::to_string(&serde_json::from_str::<Value>(&text).unwrap()).unwrap();
    assert!(compact.contains(r#""symmetry_class":"Rotation(180)""#));
    let s = summary(&bundle);
    assert_eq!(s["periodic"], true);
    let period = s["period"].as_f64().unwrap();
    assert!((period - 2.0 * PI / 6f64.sqrt()).abs() < 1e-10);
    assert_eq!(s["symmetry"]["permutation"], "id");
    assert_eq!(s["symmetry"]["involution"], "Holds(180)");
    assert_eq!(s["distinctness"], "SameLabelledShape");
}

#[test]
fn outputs_are_bit_identical_across_runs() {
    for name in ["hooke-mode", "lagrange-123"] {
        let (a, b) = (run(name), run(name));
        assert_eq!(trajectory_csv(&a), trajectory_csv(&b));
        assert_eq!(events_jsonl(&a), events_jsonl(&b));
        assert_eq!(summary_json(&a), summary_json(&b));
        assert_eq!(svg(&a), svg(&b));
    }
}

#[test]
fn csv_cells_round_trip_exactly() {
    let bundle = run("hooke-mode");
    let csv = trajectory_csv(&bundle);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,x1,y1,vx1,vy1,x2,y2,vx2,vy2,x3,y3,vx3,vy3,E,L");
    let samples = bundle.trajectory.sample_uniform(bundle.spec.output.samples);
    assert_eq!(lines.clone().count(), samples.len());
    for (line, s) in lines.zip(&samples) {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells[0].to_bits(), s.time.to_bits());
        assert_eq!(cells[1].to_bits(), s.positions()[0].x.to_bits());
        assert_eq!(cells[12].to_bits(), s.velocities[2].y.to_bits());
    }
}

#[test]
fn energy_column_of_a_completed_run_stays_put() {
    let bundle = run("hooke-mode");
    let csv = trajectory_csv(&bundle);
    let energies: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(13).unwrap().parse().unwrap()).collect();
    let e0 = energies[0];
    let drift = energies.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max);
    assert!(drift <= 100.0 * bundle.spec.integrator.tol * e0.abs(), "{drift}");
}

#[test]
fn events_are_one_json_object_per_line() {
    let bundle = run("pythagorean");
    let text = events_jsonl(&bundle);
    let events: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(events.len(), bundle.trajectory.events().len());
    for e in &events {
        for key in ["kind", "time", "state", "detail"] {
            assert!(e.get(key).is_some(), "{key} missing in {e}");
        }
    }
    assert_eq!(events[0]["kind"], "Brake");
    assert_eq!(events.last().unwrap()["kind"], "Escape");
    let times: Vec<f64> = events.iter().map(|e| e["time"].as_f64().unwrap()).collect();
    assert!(times.windows(2).all(|w| w[0] <= w[1]));
}

fn check_svg(text: &str, expect_labels: &[&str]) -> usize {
    let doc = roxmltree::Document::parse(text).unwrap();
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "svg");
    let mut polylines = 0;
    for node in root.descendants().filter(|n| n.is_element() && *n != root) {
        let tag = node.tag_name().name();
        assert!(["polyline", "circle", "text"].contains(&tag), "unexpected element {tag}");
        if tag == "polyline" {
            polylines += 1;
            for pair in node.attribute("points").unwrap().split_whitespace() {
                let (x, y) = pair.split_once(',').unwrap();
                assert!(x.parse::<f64>().unwrap().is_finite() && y.parse::<f64>().unwrap().is_finite());
            }
        }
    }
    let labels: Vec<&str> = root.descendants().filter(|n| n.has_tag_name("text")).filter_map(|n| n.text()).collect();
    assert_eq!(labels, expect_labels);
    polylines
}

#[test]
fn svg_uses_the_declared_subset() {
    // three paths plus the first brake triangle
    assert_eq!(check_svg(&svg(&run("lagrange")), &["A", "B", "C"]), 4);
    // both brake triangles are drawn and labelled
    assert_eq!(check_svg(&svg(&run("hooke-mode")), &["A", "B", "C", "A\u{2032}", "B\u{2032}", "C\u{2032}"]), 5);
}

#[test]
fn lagrange_paths_are_straight_lines_into_the_centroid() {
    let bundle = run("lagrange");
    let doc_text = svg(&bundle);
    let doc = roxmltree::Document::parse(&doc_text).unwrap();
    for line in doc.descendants().filter(|n| n.has_tag_name("polyline")).take(3) {
        let pts: Vec<(f64, f64)> = line
            .attribute("points")
            .unwrap()
            .split_whitespace()
            .map(|p| {
                let (x, y) = p.split_once(',').unwrap();
                (x.parse().unwrap(), y.parse().unwrap())
            })
            .collect();
        let (a, b) = (pts[0], *pts.last().unwrap());
        let len = (b.0 - a.0).hypot(b.1 - a.1);
        for p in &pts {
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            // svg coordinates are rounded to 1e-3 pixels
            assert!((cross / len).abs() < 5e-3);
        }
    }
}

#[test]
fn emit_outputs_writes_every_file() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = run("hooke-mode");
    let written = emit_outputs(&bundle, &dir.path().join("out")).unwrap();
    let names: Vec<String> = written.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["trajectory.csv", "events.jsonl", "summary.json", "shape.csv", "paths.svg"]);
    let shape = fs::read_to_string(dir.path().join("out/shape.csv")).unwrap();
    assert!(shape.starts_with("t,w1,w2,w3,I\n"));
}

#[test]
fn unwritable_output_path_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let err = emit_outputs(&run("lagrange"), &blocker.join("sub")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.to_string().contains("sub"), "{err}");
}

const HOOKE_ROW: &str = "hooke,1,1,1,0.9,0.1,-0.4,0.7,-0.5,-0.8,2.5650996603287";

fn hooke_options() -> IngestOptions {
    IngestOptions { force: scenario::ForceSpec::Hooke { k: 1.0, springs: None }, ..IngestOptions::default() }
}

#[test]
fn empty_table_gives_no_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    fs::write(&path, "").unwrap();
    assert!(ingest_orbit_table(&path, &IngestOptions::default()).unwrap().is_empty());
    fs::write(&path, "name,m1,m2,m3,x1,y1,x2,y2,x3,y3,expected_period\n").unwrap();
    assert!(ingest_orbit_table(&path, &IngestOptions::default()).unwrap().is_empty());
    assert!(ingest_orbit_table(&dir.path().join("absent.csv"), &IngestOptions::default()).is_err());
}

#[test]
fn malformed_rows_are_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let body = format!(
        "name,m1,m2,m3,x1,y1,x2,y2,x3,y3,expected_period\n{HOOKE_ROW}\nshort,1,1\nbad,1,1,x,0,0,1,0,0,1\nneg,-1,1,1,0,0,1,0,0,1\n# comment\nnoperiod,1,2,3,0,0,1,0,0,1\n"
    );
    fs::write(&path, body).unwrap();
    let specs = ingest_orbit_table(&path, &hooke_options()).unwrap();
    let names: Vec<&str> = specs.iter().map(|s| s.name.as_str()).collect();
    assert_eq!(names, ["hooke", "noperiod"]);
    assert!((specs[0].integrator.t_max - 1.1 * 2.5650996603287).abs() < 1e-12);
    assert_eq!(specs[1].integrator.t_max, 100.0);
    assert!(specs.iter().all(|s| s.analyses.symmetry));
}

#[test]
fn hooke_row_is_classified_as_a_half_turn() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    fs::write(&path, format!("{HOOKE_ROW}\n")).unwrap();
    let rows = run_table(&ingest_orbit_table(&path, &hooke_options()).unwrap());
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert!(r.second_brake && r.periodic);
    assert_eq!(r.class.as_deref(), Some("Rotation(180)"));
    assert_eq!(r.predicted_quarter.as_deref(), Some("TotalCollision"));
    assert_eq!(r.observed_quarter.as_deref(), Some("TotalCollision"));
    assert_eq!(r.quarter_match, Some(true));
    assert_eq!(ingest::congruence_ratio(&rows), (1, 1));
    let table = table_csv(&rows);
    assert_eq!(table.lines().count(), 2);
    assert!(table.lines().nth(1).unwrap().starts_with("hooke,Completed,true,"));
}

#[test]
fn equilateral_row_reports_no_second_brake() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let h = 3f64.sqrt() / 2.0;
    fs::write(&path, format!("tri,1,1,1,0,0,1,0,0.5,{h}\n")).unwrap();
    let options = IngestOptions { t_max: 5.0, ..IngestOptions::default() };
    let rows = run_table(&ingest_orbit_table(&path, &options).unwrap());
    assert_eq!(rows[0].status, "CollisionStop");
    assert!(!rows[0].second_brake);
    assert!(!rows[0].periodic);
    assert_eq!(rows[0].class, None);
}

#[test]
fn run_table_preserves_row_order() {
    let names = ["lagrange", "hooke-mode", "lagrange-123", "euler"];
    let specs: Vec<ScenarioSpec> = names.iter().map(|n| builtin(n).unwrap()).collect();
    let rows = run_table(&specs);
    let got: Vec<&str> = rows.iter().map(|r| r.name.as_str()).collect();
    assert_eq!(got, names);
}

#[test]
fn env_override_sets_the_tolerance() {
    // the only test touching the variable
    std::env::set_var(scenario::TOL_ENV, "1e-9");
    let mut spec = builtin("lagrange").unwrap();
    spec.apply_env_overrides().unwrap();
    assert_eq!(spec.integrator.tol, 1e-9);
    std::env::set_var(scenario::TOL_ENV, "soon");
    assert!(spec.apply_env_overrides().is_err());
    std::env::remove_var(scenario::TOL_ENV);
}
