//! Running a scenario end to end: drop, events, brake-orbit and symmetry
//! analysis, shape projection and the central-configuration check.

use std::collections::BTreeMap;

use brakefall_core::brake::{analyze_brake_orbit, drop_with, BrakeOrbitReport, Distinctness, FundamentalPeriod};
use brakefall_core::central::{central_residual, homothetic_collapse_time, CERTIFICATION_THRESHOLD};
use brakefall_core::shape::{shape_trajectory, ShapePoint};
use brakefall_core::symmetry::{fit_isometry, InvolutionKind, InvolutionReport};
use brakefall_core::{Configuration, EventKind, MassSystem, Status, Trajectory};
use serde::Serialize;

use crate::error::Result;
use crate::scenario::ScenarioSpec;

/// Everything produced by one run.
#[derive(Clone, Debug)]
pub struct ReportBundle {
    pub spec: ScenarioSpec,
    pub system: MassSystem,
    pub start: Configuration,
    pub trajectory: Trajectory,
    pub orbit: Option<BrakeOrbitReport>,
    pub shape: Option<Vec<(f64, ShapePoint)>>,
    pub summary: Summary,
}

impl ReportBundle {
    /// Process exit code for the run's status: 0 completed, 2 collision, 3 escape.
    pub fn exit_code(&self) -> i32 {
        match self.trajectory.status() {
            Status::Completed => 0,
            Status::CollisionStop { .. } => 2,
            Status::EscapeStop { .. } => 3,
        }
    }
}

/// Machine-readable run summary. Body labels are one-based.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub name: String,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collision_pair: Option<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub escape: Option<EscapeSummary>,
    pub t_end: f64,
    pub steps: usize,
    pub tol: f64,
    pub initial_energy: f64,
    pub max_relative_energy_error: f64,
    pub max_momentum: f64,
    pub event_counts: BTreeMap<&'static str, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub brake_pair: Option<BrakePairSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_period: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub periodicity_residual: Option<f64>,
    pub periodic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distinctness: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fundamental_period: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetry_class: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<SymmetrySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub central: Option<CentralSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EscapeSummary {
    pub binary: [usize; 2],
    pub single: usize,
    pub binary_energy: f64,
    pub relative_energy: f64,
    pub time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BrakePairSummary {
    pub half_period: f64,
    pub a: Vec<[f64; 2]>,
    pub b: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetrySummary {
    /// Relabelling in cycle notation (`id` for none).
    pub permutation: String,
    pub det: f64,
    /// Rotation angle, or the reflection axis angle, in degrees.
    pub angle_deg: f64,
    pub fit_residual: f64,
    pub halfperiod_deviation: f64,
    pub quarter_period_fixed_set: &'static str,
    pub quarter_period_deviation: f64,
    pub involution: String,
    /// Brake triangles congruent up to any isometry and relabelling.
    pub congruent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CentralSummary {
    pub lambda: f64,
    pub residual: f64,
    pub certified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collapse_time: Option<f64>,
}

fn one_based(pair: (usize, usize)) -> [usize; 2] {
    [pair.0 + 1, pair.1 + 1]
}

fn points(c: &Configuration) -> Vec<[f64; 2]> {
    c.positions.iter().map(|p| [p.x, p.y]).collect()
}

pub fn status_name(s: Status) -> &'static str {
    match s {
        Status::Completed => "Completed",
        Status::CollisionStop { .. } => "CollisionStop",
        Status::EscapeStop { .. } => "EscapeStop",
    }
}

/// Drop the scenario's triangle and run every requested analysis.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<ReportBundle> {
    let system = spec.system()?;
    let start = spec.configuration()?;
    let settings = spec.settings();
    log::info!(
        "{}: dropping {} bodies, t_max {}, tol {:e}",
        spec.name,
        system.n(),
        spec.integrator.t_max,
        settings.tol
    );
    let trajectory = drop_with(&start, &system, spec.integrator.t_max, &settings, &spec.event_spec())?;
    log::info!("{}: {} after {} steps", spec.name, status_name(trajectory.status()), trajectory.steps().len());

    let orbit = if spec.analyses.symmetry {
        Some(analyze_brake_orbit(&trajectory, &settings, spec.analyses.periodicity_tol)?)
    } else {
        None
    };
    let shape = if spec.analyses.shape && system.n() == 3 {
        Some(shape_trajectory(&trajectory, spec.output.samples)?)
    } else {
        None
    };
    let central = if spec.analyses.central { Some(central_summary(&start, &system)?) } else { None };
    let summary = summarize(spec, &system, &trajectory, orbit.as_ref(), central)?;
    Ok(ReportBundle { spec: spec.clone(), system, start, trajectory, orbit, shape, summary })
}

fn central_summary(start: &Configuration, system: &MassSystem) -> Result<CentralSummary> {
    let c = central_residual(start, system)?;
    let certified = c.residual < CERTIFICATION_THRESHOLD;
    Ok(CentralSummary {
        lambda: c.lambda,
        residual: c.residual,
        certified,
        collapse_time: if certified { Some(homothetic_collapse_time(start, system)?) } else { None },
    })
}

fn summarize(
    spec: &ScenarioSpec,
    system: &MassSystem,
    traj: &Trajectory,
    orbit: Option<&BrakeOrbitReport>,
    central: Option<CentralSummary>,
) -> Result<Summary> {
    let mut event_counts = BTreeMap::new();
    for e in traj.events() {
        *event_counts.entry(e.kind.name()).or_insert(0) += 1;
    }
    let escape = traj.events().iter().find_map(|e| match e.kind {
        EventKind::Escape { binary, single, binary_energy, relative_energy } => Some(EscapeSummary {
            binary: one_based(binary),
            single: single + 1,
            binary_energy,
            relative_energy,
            time: e.time,
        }),
        _ => None,
    });
    let (stop_time, collision_pair) = match traj.status() {
        Status::Completed => (None, None),
        Status::CollisionStop { pair, time } => (Some(time), Some(one_based(pair))),
        Status::EscapeStop { time } => (Some(time), None),
    };
    let e0 = traj.initial_energy();
    let mut summary = Summary {
        name: spec.name.clone(),
        status: status_name(traj.status()),
        stop_time,
        collision_pair,
        escape,
        t_end: traj.t_end(),
        steps: traj.steps().len(),
        tol: spec.integrator.tol,
        initial_energy: e0,
        max_relative_energy_error: traj.max_energy_error() / if e0 != 0.0 { e0.abs() } else { 1.0 },
        max_momentum: traj.max_momentum(),
        event_counts,
        brake_pair: None,
        period: None,
        expected_period: spec.expected_period,
        periodicity_residual: None,
        periodic: false,
        distinctness: None,
        fundamental_period: None,
        symmetry_class: None,
        symmetry: None,
        central,
    };
    let Some(orbit) = orbit else { return Ok(summary) };
    if let Some(pair) = &orbit.pair {
        summary.brake_pair = Some(BrakePairSummary {
            half_period: pair.half_period,
            a: points(&pair.a.config),
            b: points(&pair.b.config),
        });
    }
    summary.period = orbit.period;
    summary.periodicity_residual = orbit.periodicity_residual;
    summary.periodic = orbit.periodic;
    summary.distinctness = orbit.distinctness.map(|d| match d {
        Distinctness::Distinct => "Distinct",
        Distinctness::SameLabelledShape => "SameLabelledShape",
    });
    summary.fundamental_period = orbit.fundamental.map(|f| match f {
        FundamentalPeriod::Distinct => "Distinct".to_string(),
        FundamentalPeriod::TotalCollisionException { time, .. } => format!("TotalCollisionException(t={time})"),
        FundamentalPeriod::Anomaly { time, .. } => format!("Anomaly(t={time})"),
    });
    if let (Some(sym), Some(pair)) = (&orbit.symmetry, &orbit.pair) {
        let masses = system.masses();
        let congruent = {
            let a = pair.a.config.centered(masses);
            let b = pair.b.config.centered(masses);
            let fit = fit_isometry(&a, &b, masses)?;
            let size = a.moment_of_inertia(masses).max(b.moment_of_inertia(masses));
            fit.residual.sqrt() <= 1e-6 * size.sqrt()
        };
        let f = &sym.fit.element;
        let angle = f.raw_angle().to_degrees();
        summary.symmetry_class = Some(sym.class.to_string());
        summary.symmetry = Some(SymmetrySummary {
            permutation: f.perm.to_string(),
            det: f.det(),
            angle_deg: if f.is_rotation() { angle } else { 0.5 * angle },
            fit_residual: sym.fit.residual,
            halfperiod_deviation: sym.halfperiod_deviation,
            quarter_period_fixed_set: sym.fixed_set.name(),
            quarter_period_deviation: sym.quarter_deviation,
            involution: match sym.involution {
                InvolutionReport::Holds(InvolutionKind::Trivial) => "Holds(0)".to_string(),
                InvolutionReport::Holds(InvolutionKind::HalfTurn) => "Holds(180)".to_string(),
                InvolutionReport::Holds(InvolutionKind::Reflection) => "Holds(reflection)".to_string(),
                InvolutionReport::Violation { deviation } => format!("Violation({deviation:e})"),
            },
            congruent,
        });
    }
    Ok(summary)
}
