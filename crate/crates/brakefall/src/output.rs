//! File outputs of a run: trajectory and shape tables, event log, summary and
//! an SVG path plot.
//!
//! Every writer is a pure function of the bundle, so identical runs give
//! byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use brakefall_core::{conserved_quantities, EventKind, EventRecord, PhaseState, Vec2};
use serde::Serialize;
use serde_json::json;

use crate::error::{io_err, Result};
use crate::run::ReportBundle;

/// Full-precision float for CSV cells (17 significant digits).
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trajectory_csv(bundle: &ReportBundle) -> String {
    let n = bundle.system.n();
    let mut out = String::from("t");
    for a in 1..=n {
        write!(out, ",x{a},y{a},vx{a},vy{a}").unwrap();
    }
    out.push_str(",E,L\n");
    for s in bundle.trajectory.sample_uniform(bundle.spec.output.samples) {
        // the last sample of a collision stop can sit on the singularity
        let (e, l) = match conserved_quantities(&s, &bundle.system) {
            Ok(c) => (c.energy, c.angular_momentum),
            Err(_) => (f64::NAN, f64::NAN),
        };
        out.push_str(&num(s.time));
        for (p, v) in s.positions().iter().zip(&s.velocities) {
            for x in [p.x, p.y, v.x, v.y] {
                out.push(',');
                out.push_str(&num(x));
            }
        }
        writeln!(out, ",{},{}", num(e), num(l)).unwrap();
    }
    out
}

/// `t,w1,w2,w3,I`; `None` when the shape analysis was not run.
pub fn shape_csv(bundle: &ReportBundle) -> Option<String> {
    let shape = bundle.shape.as_ref()?;
    let mut out = String::from("t,w1,w2,w3,I\n");
    for (t, w) in shape {
        writeln!(out, "{},{},{},{},{}", num(*t), num(w.w[0]), num(w.w[1]), num(w.w[2]), num(w.inertia)).unwrap();
    }
    Some(out)
}

#[derive(Serialize)]
struct StateJson {
    positions: Vec<[f64; 2]>,
    velocities: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct EventJson {
    kind: &'static str,
    time: f64,
    state: StateJson,
    detail: serde_json::Value,
}

fn pairs(xs: &[Vec2]) -> Vec<[f64; 2]> {
    xs.iter().map(|p| [p.x, p.y]).collect()
}

fn event_json(e: &EventRecord) -> EventJson {
    let detail = match e.kind {
        EventKind::Brake => json!({ "kinetic_energy": e.value }),
        EventKind::Syzygy { collinear } => json!({ "signed_area": e.value, "collinear_throughout": collinear }),
        EventKind::CloseApproach { pair } => json!({ "pair": [pair.0 + 1, pair.1 + 1], "distance": e.value }),
        EventKind::Escape { binary, single, binary_energy, relative_energy } => json!({
            "binary": [binary.0 + 1, binary.1 + 1],
            "single": single + 1,
            "binary_energy": binary_energy,
            "relative_energy": relative_energy,
            "separation": e.value,
        }),
        EventKind::TotalCollisionProximity => json!({ "inertia": e.value }),
    };
    EventJson {
        kind: e.kind.name(),
        time: e.time,
        state: StateJson { positions: pairs(e.state.positions()), velocities: pairs(&e.state.velocities) },
        detail,
    }
}

pub fn events_jsonl(bundle: &ReportBundle) -> String {
    let mut out = String::new();
    for e in bundle.trajectory.events() {
        out.push_str(&serde_json::to_string(&event_json(e)).expect("events serialize"));
        out.push('\n');
    }
    out
}

pub fn summary_json(bundle: &ReportBundle) -> String {
    let mut s = serde_json::to_string_pretty(&bundle.summary).expect("summary serializes");
    s.push('\n');
    s
}

const COLORS: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const VERTEX_LABELS: [&str; 6] = ["A", "B", "C", "D", "E", "F"];

/// Path plot in the style of the brake-orbit figures: one polyline per body,
/// the first brake triangle labelled `A, B, C` and the second `A′, B′, C′`.
/// Uses only `polyline`, `circle` and `text` elements.
pub fn svg(bundle: &ReportBundle) -> String {
    let samples: Vec<PhaseState> = bundle.trajectory.sample_uniform(bundle.spec.output.samples.max(2));
    let first = bundle.trajectory.initial().positions().to_vec();
    let second: Option<Vec<Vec2>> =
        bundle.orbit.as_ref().and_then(|o| o.pair.as_ref()).map(|p| p.b.positions().to_vec());

    let all = samples.iter().flat_map(|s| s.positions().iter()).chain(first.iter()).chain(second.iter().flatten());
    let (mut lo, mut hi) = (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for p in all.filter(|p| p.is_finite()) {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-12);
    let (size, margin) = (800.0, 40.0);
    let scale = (size - 2.0 * margin) / span;
    let center = (lo + hi) * 0.5;
    let map =
        |p: Vec2| -> (f64, f64) { (size / 2.0 + (p.x - center.x) * scale, size / 2.0 - (p.y - center.y) * scale) };
    let pt = |p: Vec2| {
        let (x, y) = map(p);
        format!("{x:.3},{y:.3}")
    };

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    )
    .unwrap();
    for a in 0..bundle.system.n() {
        let path: Vec<String> = samples.iter().map(|s| s.positions()[a]).filter(|p| p.is_finite()).map(pt).collect();
        writeln!(
            out,
            r#"  <polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            COLORS[a % COLORS.len()],
            path.join(" ")
        )
        .unwrap();
    }
    let mut triangle = |verts: &[Vec2], prime: &str, dash: &str| {
        let mut ring: Vec<String> = verts.iter().map(|&p| pt(p)).collect();
        ring.push(pt(verts[0]));
        writeln!(
            out,
            r#"  <polyline fill="none" stroke="black" stroke-width="1" stroke-dasharray="{dash}" points="{}"/>"#,
            ring.join(" ")
        )
        .unwrap();
        for (a, &p) in verts.iter().enumerate() {
            let (x, y) = map(p);
            writeln!(out, r#"  <circle cx="{x:.3}" cy="{y:.3}" r="4" fill="{}"/>"#, COLORS[a % COLORS.len()]).unwrap();
            let label = VERTEX_LABELS.get(a).copied().unwrap_or("?");
            writeln!(
                out,
                r#"  <text x="{:.3}" y="{:.3}" font-family="serif" font-size="16">{label}{prime}</text>"#,
                x + 6.0,
                y - 6.0
            )
            .unwrap();
        }
    };
    triangle(&first, "", "none");
    if let Some(b) = &second {
        triangle(b, "\u{2032}", "4 3");
    }
    out.push_str("</svg>\n");
    out
}

/// Write every output file of `bundle` into `dir` (created if needed) and
/// return the written paths.
pub fn emit_outputs(bundle: &ReportBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut files: Vec<(&str, String)> = vec![
        ("trajectory.csv", trajectory_csv(bundle)),
        ("events.jsonl", events_jsonl(bundle)),
        ("summary.json", summary_json(bundle)),
    ];
    if let Some(s) = shape_csv(bundle) {
        files.push(("shape.csv", s));
    }
    if bundle.spec.output.svg {
        files.push(("paths.svg", svg(bundle)));
    }
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}
