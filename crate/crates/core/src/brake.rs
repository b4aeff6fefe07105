//! Drop experiments: start at rest, look for the next brake instant, and use
//! time reversal to turn a brake pair into a periodic orbit.
//!
//! A solution through a brake state is symmetric under `t ↦ -t` about that
//! instant. Two brake instants `0` and `t*` therefore force period `2 t*`, with
//! the motion shuttling between the brake triangles `A` and `B`.

use alloc::vec::Vec;

use crate::dynamics::{mass_norm, reduce_to_center_of_mass, Configuration, MassSystem, PhaseState};
use crate::integrator::{integrate, EventKind, EventSpec, IntegratorSettings, Status, Trajectory};
use crate::symmetry::{
    classify, fit_isometry, fit_labelled, fixed_point_deviation, involution_check, predict_fixed_set,
    verify_halfperiod_relation, FixedSet, InvolutionReport, IsometryFit, SymmetryClass, SymmetryElement,
};
use crate::{Error, Result, Vec2};

/// Relative distance (mass metric) under which two labelled shapes count as
/// the same.
pub const SAME_SHAPE_TOLERANCE: f64 = 1e-6;

/// Drop `triangle` from rest with every event enabled.
pub fn drop(triangle: &Configuration, sys: &MassSystem, t_max: f64, tol: f64) -> Result<Trajectory> {
    drop_with(triangle, sys, t_max, &IntegratorSettings::with_tol(tol), &EventSpec::all())
}

pub fn drop_with(
    triangle: &Configuration,
    sys: &MassSystem,
    t_max: f64,
    settings: &IntegratorSettings,
    events: &EventSpec,
) -> Result<Trajectory> {
    let start = reduce_to_center_of_mass(&PhaseState::at_rest(triangle.clone(), 0.0), sys);
    integrate(&start, sys, t_max, settings, events)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BrakePair {
    pub a: PhaseState,
    pub b: PhaseState,
    /// Time from `A` to `B`.
    pub half_period: f64,
}

impl BrakePair {
    pub fn period(&self) -> f64 {
        2.0 * self.half_period
    }
}

/// The first brake event after the (braked) start of `traj`.
pub fn detect_brake_pair(traj: &Trajectory) -> Option<BrakePair> {
    let t0 = traj.t_start();
    let min_gap = 1e-9 * (traj.t_end() - t0).abs().max(1.0);
    let b = traj.events().iter().find(|e| matches!(e.kind, EventKind::Brake) && e.time - t0 > min_gap)?;
    Some(BrakePair { a: traj.initial().clone(), b: b.state.clone(), half_period: b.time - t0 })
}

/// Largest per-body mismatch `√m_a (|Δq_a| + |Δv_a|)` between two states.
pub fn state_mismatch(x: &PhaseState, y: &PhaseState, masses: &[f64]) -> f64 {
    (0..masses.len())
        .map(|a| {
            let dq = (x.config.positions[a] - y.config.positions[a]).norm();
            let dv = (x.velocities[a] - y.velocities[a]).norm();
            libm::sqrt(masses[a]) * (dq + dv)
        })
        .fold(0.0, f64::max)
}

/// Mismatch between the start of `traj` and its state one period later.
pub fn verify_periodicity(traj: &Trajectory, period: f64) -> Result<f64> {
    if period == 0.0 {
        return Ok(0.0);
    }
    let t = traj.t_start() + period;
    if t > traj.t_end() {
        return Err(Error::IntegrationStopped { status: traj.status(), reached: traj.t_end() });
    }
    let later = traj.dense_eval(t)?;
    Ok(state_mismatch(traj.initial(), &later, traj.system().masses()))
}

/// Integrate a fresh copy of `start` over one period and compare.
pub fn verify_periodicity_by_rerun(
    start: &PhaseState,
    sys: &MassSystem,
    period: f64,
    settings: &IntegratorSettings,
) -> Result<f64> {
    if period == 0.0 {
        return Ok(0.0);
    }
    let traj = integrate(start, sys, start.time + period, settings, &EventSpec::none())?;
    if traj.status() != Status::Completed {
        return Err(Error::IntegrationStopped { status: traj.status(), reached: traj.t_end() });
    }
    verify_periodicity(&traj, period)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Distinctness {
    Distinct,
    /// Some rotation maps `A` onto `B` label by label.
    SameLabelledShape,
}

/// Whether `b` is `a` rotated (labels kept), together with the best such
/// rotation fit.
pub fn distinctness_check(a: &Configuration, b: &Configuration, masses: &[f64]) -> Result<(Distinctness, IsometryFit)> {
    let (a, b) = (a.centered(masses), b.centered(masses));
    let fit = fit_labelled(&a, &b, masses, true)?;
    let scale = mass_norm(masses, &a.positions).max(mass_norm(masses, &b.positions));
    let same = libm::sqrt(fit.residual) <= SAME_SHAPE_TOLERANCE * scale;
    Ok((if same { Distinctness::SameLabelledShape } else { Distinctness::Distinct }, fit))
}

/// Outcome of the fundamental-period argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FundamentalPeriod {
    /// `A` and `B` differ as labelled shapes: `2 t*` is fundamental.
    Distinct,
    /// `B = R A` for a non-trivial rotation `R`. Reversibility then pins the
    /// midpoint `q(t*/2)` to the fixed set of `R`, which is total collision.
    TotalCollisionException { time: f64, inertia_ratio: f64 },
    /// `B` matches `A` but the midpoint is not a total collision: a brake was
    /// missed or the orbit is not what it seems.
    Anomaly { time: f64, inertia_ratio: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryReport {
    /// Best element with `F(A) = B`.
    pub fit: IsometryFit,
    pub class: SymmetryClass,
    /// `max_t ‖q(t + T/2) - F q(t)‖ / ‖A‖`.
    pub halfperiod_deviation: f64,
    pub fixed_set: FixedSet,
    /// `‖F q(T/4) - q(T/4)‖ / ‖A‖`.
    pub quarter_deviation: f64,
    pub involution: InvolutionReport,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BrakeOrbitReport {
    pub pair: Option<BrakePair>,
    pub period: Option<f64>,
    pub periodicity_residual: Option<f64>,
    /// Periodicity residual relative to the initial state's scale is below the
    /// requested tolerance.
    pub periodic: bool,
    pub distinctness: Option<Distinctness>,
    pub fundamental: Option<FundamentalPeriod>,
    pub symmetry: Option<SymmetryReport>,
}

impl BrakeOrbitReport {
    fn empty() -> Self {
        BrakeOrbitReport {
            pair: None,
            period: None,
            periodicity_residual: None,
            periodic: false,
            distinctness: None,
            fundamental: None,
            symmetry: None,
        }
    }
}

/// Samples used for the half-period relation check.
const RELATION_SAMPLES: usize = 200;

/// Full brake-orbit analysis of a drop. The period claimed by a brake pair is
/// always checked: over `traj` when it is long enough, else by integrating a
/// full period from the start with `settings`.
pub fn analyze_brake_orbit(
    traj: &Trajectory,
    settings: &IntegratorSettings,
    periodicity_tol: f64,
) -> Result<BrakeOrbitReport> {
    let mut report = BrakeOrbitReport::empty();
    let Some(pair) = detect_brake_pair(traj) else {
        return Ok(report);
    };
    let sys = traj.system();
    let masses = sys.masses();
    let period = pair.period();
    let scale = state_scale(traj.initial(), masses);

    let full;
    let span = if traj.t_end() >= traj.t_start() + period {
        traj
    } else {
        let t1 = traj.t_start() + period;
        full = integrate(traj.initial(), sys, t1, settings, &EventSpec::none())?;
        if full.status() != Status::Completed {
            report.period = Some(period);
            report.pair = Some(pair);
            return Ok(report);
        }
        &full
    };
    let residual = verify_periodicity(span, period)?;
    report.periodic = residual <= periodicity_tol * scale;
    report.periodicity_residual = Some(residual);
    report.period = Some(period);

    let (distinct, rot) = distinctness_check(&pair.a.config, &pair.b.config, masses)?;
    report.distinctness = Some(distinct);
    report.fundamental = Some(match distinct {
        Distinctness::Distinct => FundamentalPeriod::Distinct,
        Distinctness::SameLabelledShape => {
            let time = traj.t_start() + 0.5 * pair.half_period;
            let mid = span.dense_eval(time)?;
            let inertia_ratio = mid.config.moment_of_inertia(masses) / pair.a.config.moment_of_inertia(masses);
            let trivial = matches!(classify(&rot.element), SymmetryClass::Identity);
            if !trivial && inertia_ratio < 1e-6 {
                FundamentalPeriod::TotalCollisionException { time, inertia_ratio }
            } else {
                FundamentalPeriod::Anomaly { time, inertia_ratio }
            }
        }
    });

    report.symmetry = Some(symmetry_report(span, &pair, period)?);
    report.pair = Some(pair);
    Ok(report)
}

fn state_scale(s: &PhaseState, masses: &[f64]) -> f64 {
    let q = mass_norm(masses, &s.config.positions);
    let v = mass_norm(masses, &s.velocities);
    let scale = q + v;
    if scale > 0.0 {
        scale
    } else {
        1.0
    }
}

/// Fit `F` with `F(A) = B` and test the half-period relation, the
/// quarter-period fixed point and the involution property on `span`, which
/// must cover one full period.
pub fn symmetry_report(span: &Trajectory, pair: &BrakePair, period: f64) -> Result<SymmetryReport> {
    let masses = span.system().masses();
    let a = pair.a.config.centered(masses);
    let b = pair.b.config.centered(masses);
    let fit = fit_isometry(&a, &b, masses)?;
    let size = mass_norm(masses, &a.positions);
    let size = if size > 0.0 { size } else { 1.0 };
    let f: &SymmetryElement = &fit.element;
    let halfperiod_deviation = verify_halfperiod_relation(span, period, f, RELATION_SAMPLES)? / size;
    let quarter = span.dense_eval(span.t_start() + 0.25 * period)?;
    let quarter_deviation = fixed_point_deviation(f, &quarter.config, masses) / size;
    Ok(SymmetryReport {
        class: classify(f),
        fixed_set: predict_fixed_set(f),
        halfperiod_deviation,
        quarter_deviation,
        involution: involution_check(f, &a, 1e-6),
        fit,
    })
}

/// Mirror check for a drop: integrating `τ` forward and, from the same start
/// with negated velocities, `τ` forward again must give the same
/// configurations. Returns the largest mass-metric position gap over
/// `samples` times, relative to the initial size.
pub fn reversal_mismatch(
    start: &PhaseState,
    sys: &MassSystem,
    tau: f64,
    settings: &IntegratorSettings,
    samples: usize,
) -> Result<f64> {
    let fwd = integrate(start, sys, start.time + tau, settings, &EventSpec::none())?;
    let back = integrate(&start.reversed(), sys, start.time + tau, settings, &EventSpec::none())?;
    let end = fwd.t_end().min(back.t_end());
    let masses = sys.masses();
    let size = mass_norm(masses, &start.config.positions);
    let samples = samples.max(2);
    let mut worst = 0.0f64;
    for i in 0..samples {
        let t = if i + 1 == samples { end } else { start.time + (end - start.time) * i as f64 / (samples - 1) as f64 };
        let (x, y) = (fwd.dense_eval(t)?, back.dense_eval(t)?);
        let diff: Vec<Vec2> = x.positions().iter().zip(y.positions()).map(|(&p, &q)| p - q).collect();
        worst = worst.max(mass_norm(masses, &diff));
    }
    Ok(worst / if size > 0.0 { size } else { 1.0 })
}
