//! Tables of externally published brake initial conditions.
//!
//! One row per orbit: `name,m1,m2,m3,x1,y1,x2,y2,x3,y3[,expected_period]`.
//! A header row (first cell `name`) is optional; blank lines and lines starting
//! with `#` are ignored. Each row becomes a drop scenario with symmetry
//! analysis switched on.

use std::fmt::Write as _;
use std::fs::File;
use std::path::Path;

use brakefall_core::shape::shape_point;
use brakefall_core::symmetry::FixedSet;
use brakefall_core::Configuration;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{io_err, Error, Result};
use crate::run::{run_scenario, status_name};
use crate::scenario::{Analyses, ForceSpec, ScenarioSpec, TriangleSpec};

/// Settings shared by every row of a table.
#[derive(Clone, Debug, PartialEq)]
pub struct IngestOptions {
    pub force: ForceSpec,
    pub tol: f64,
    /// Integration span for rows without an expected period.
    pub t_max: f64,
    /// With an expected period `T`, integrate to `margin · T`.
    pub period_margin: f64,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions { force: ForceSpec::default(), tol: 1e-14, t_max: 100.0, period_margin: 1.1 }
    }
}

fn parse_row(record: &csv::StringRecord, options: &IngestOptions) -> std::result::Result<ScenarioSpec, String> {
    if !(10..=11).contains(&record.len()) {
        return Err(format!("expected 10 or 11 columns, found {}", record.len()));
    }
    let name = record[0].trim().to_string();
    if name.is_empty() {
        return Err("empty name".into());
    }
    let mut nums = Vec::with_capacity(10);
    for (i, cell) in record.iter().enumerate().skip(1) {
        let cell = cell.trim();
        if i == 10 && cell.is_empty() {
            continue;
        }
        let x: f64 = cell.parse().map_err(|_| format!("column {}: `{cell}` is not a number", i + 1))?;
        if !x.is_finite() {
            return Err(format!("column {}: not finite", i + 1));
        }
        nums.push(x);
    }
    let masses = nums[0..3].to_vec();
    let positions = vec![[nums[3], nums[4]], [nums[5], nums[6]], [nums[7], nums[8]]];
    let expected_period = nums.get(9).copied();
    if let Some(t) = expected_period {
        if !(t > 0.0) {
            return Err("expected period must be positive".into());
        }
    }
    let t_max = expected_period.map_or(options.t_max, |t| options.period_margin * t);
    let mut spec = ScenarioSpec::new(name, masses, TriangleSpec::Explicit { positions }, t_max);
    spec.force = options.force.clone();
    spec.integrator.tol = options.tol;
    spec.analyses = Analyses { symmetry: true, ..Analyses::default() };
    spec.expected_period = expected_period;
    // validate now so bad rows are skipped rather than failing later
    spec.system().map_err(|e| e.to_string())?;
    spec.configuration().map_err(|e| e.to_string())?;
    Ok(spec)
}

/// Read a table into scenarios. Malformed rows are skipped with a warning.
pub fn ingest_orbit_table(path: &Path, options: &IngestOptions) -> Result<Vec<ScenarioSpec>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut specs = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|source| Error::Csv { path: path.to_path_buf(), source })?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        if i == 0 && record.get(0).is_some_and(|c| c.eq_ignore_ascii_case("name")) {
            continue;
        }
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        match parse_row(&record, options) {
            Ok(spec) => specs.push(spec),
            Err(msg) => log::warn!("{}:{line}: skipping row: {msg}", path.display()),
        }
    }
    Ok(specs)
}

/// One line of the batch summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitRow {
    pub name: String,
    pub status: String,
    pub second_brake: bool,
    pub period: Option<f64>,
    pub expected_period: Option<f64>,
    pub periodicity_residual: Option<f64>,
    pub periodic: bool,
    /// Fitted element as `O∘σ`: class plus permutation.
    pub element: Option<String>,
    pub class: Option<String>,
    pub predicted_quarter: Option<String>,
    pub observed_quarter: Option<String>,
    pub quarter_deviation: Option<f64>,
    /// The quarter-period configuration lies in the predicted fixed set.
    pub quarter_match: Option<bool>,
    pub congruent: Option<bool>,
    pub error: Option<String>,
}

/// Coarse description of a configuration, comparable with the fixed set
/// predicted for the quarter period.
pub fn observed_class(config: &Configuration, masses: &[f64], reference_inertia: f64) -> &'static str {
    let Ok(w) = shape_point(config, masses) else { return "Unknown" };
    let r = w.norm();
    if w.inertia < 1e-6 * reference_inertia {
        return "TotalCollision";
    }
    if let Some(((_, _), d)) = config.min_distance() {
        if d * d < 1e-12 * w.inertia {
            return "BinaryCollision";
        }
    }
    if w.w[2].abs() < 1e-6 * r {
        return "Collinear";
    }
    if w.w[0].hypot(w.w[1]) < 1e-6 * r && masses.windows(2).all(|m| m[0] == m[1]) {
        return "Equilateral";
    }
    if config.n() == 3 {
        let d = [config.distance(1, 2), config.distance(0, 2), config.distance(0, 1)];
        let scale = d.iter().fold(0.0f64, |a, &b| a.max(b));
        for i in 0..3 {
            if (d[(i + 1) % 3] - d[(i + 2) % 3]).abs() < 1e-6 * scale {
                return "Isosceles";
            }
        }
    }
    "Generic"
}

/// Relative distance from the fixed set below which the quarter-period
/// configuration counts as lying in it.
pub const QUARTER_TOLERANCE: f64 = 1e-6;

fn predicted_label(f: &FixedSet) -> String {
    f.name().to_string()
}

/// Run every scenario (in parallel) and summarize each row.
pub fn run_table(specs: &[ScenarioSpec]) -> Vec<OrbitRow> {
    specs.par_iter().map(run_row).collect()
}

fn run_row(spec: &ScenarioSpec) -> OrbitRow {
    let mut row = OrbitRow {
        name: spec.name.clone(),
        status: "Error".into(),
        second_brake: false,
        period: None,
        expected_period: spec.expected_period,
        periodicity_residual: None,
        periodic: false,
        element: None,
        class: None,
        predicted_quarter: None,
        observed_quarter: None,
        quarter_deviation: None,
        quarter_match: None,
        congruent: None,
        error: None,
    };
    let bundle = match run_scenario(spec) {
        Ok(b) => b,
        Err(e) => {
            log::warn!("{}: {e}", spec.name);
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.status = status_name(bundle.trajectory.status()).into();
    let Some(orbit) = &bundle.orbit else { return row };
    row.second_brake = orbit.pair.is_some();
    row.period = orbit.period;
    row.periodicity_residual = orbit.periodicity_residual;
    row.periodic = orbit.periodic;
    if let (Some(sym), Some(pair), Some(period)) = (&orbit.symmetry, &orbit.pair, orbit.period) {
        let f = &sym.fit.element;
        row.element = Some(format!("{}", f.perm));
        row.class = Some(sym.class.to_string());
        row.predicted_quarter = Some(predicted_label(&sym.fixed_set));
        row.quarter_deviation = Some(sym.quarter_deviation);
        row.quarter_match = Some(sym.quarter_deviation < QUARTER_TOLERANCE);
        let masses = bundle.system.masses();
        let i0 = pair.a.config.moment_of_inertia(masses);
        let quarter = bundle
            .trajectory
            .dense_eval(bundle.trajectory.t_start() + 0.25 * period)
            .ok()
            .map(|s| observed_class(&s.config, masses, i0).to_string());
        row.observed_quarter = quarter;
        row.congruent = bundle.summary.symmetry.as_ref().map(|s| s.congruent);
    }
    row
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| format!("{v:.16e}"))
}

/// Summary table as CSV.
pub fn table_csv(rows: &[OrbitRow]) -> String {
    let mut out = String::from(
        "name,status,second_brake,period,expected_period,periodicity_residual,periodic,element,class,predicted_quarter,observed_quarter,quarter_deviation,quarter_match,congruent,error\n",
    );
    for r in rows {
        let text = |s: &Option<String>| s.as_deref().map(quote).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            quote(&r.name),
            r.status,
            r.second_brake,
            opt(r.period),
            opt(r.expected_period),
            opt(r.periodicity_residual),
            r.periodic,
            text(&r.element),
            text(&r.class),
            text(&r.predicted_quarter),
            text(&r.observed_quarter),
            opt(r.quarter_deviation),
            r.quarter_match.map_or(String::new(), |c| c.to_string()),
            r.congruent.map_or(String::new(), |c| c.to_string()),
            text(&r.error),
        )
        .unwrap();
    }
    out
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Periodic rows whose two brake triangles are congruent, out of all
/// periodic rows.
pub fn congruence_ratio(rows: &[OrbitRow]) -> (usize, usize) {
    let periodic: Vec<&OrbitRow> = rows.iter().filter(|r| r.periodic).collect();
    (periodic.iter().filter(|r| r.congruent == Some(true)).count(), periodic.len())
}
