//! Adaptive Taylor integration with dense output and root-located events.

use alloc::vec::Vec;

use crate::dynamics::{potential_energy, Configuration, MassSystem, PhaseState};
use crate::taylor::{step_capped, Kinematics, StepControl, TaylorStep};
use crate::{Error, Result, Vec2};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorSettings {
    /// Taylor order `p`.
    pub order: usize,
    /// Per-step truncation tolerance, relative to the state's length scale.
    pub tol: f64,
    pub safety: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings { order: 25, tol: 1e-14, safety: 0.9, max_step: f64::INFINITY, max_steps: 20_000_000 }
    }
}

impl IntegratorSettings {
    pub fn with_tol(tol: f64) -> Self {
        IntegratorSettings { tol, ..Self::default() }
    }

    fn step_control(&self, length_floor: f64) -> StepControl {
        StepControl { order: self.order, tol: self.tol, safety: self.safety, max_step: self.max_step, length_floor }
    }
}

/// Which events to detect, and the thresholds that define them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventSpec {
    pub brake: bool,
    pub syzygy: bool,
    pub total_collision: bool,
    /// Close-approach distance as a fraction of the initial size (largest
    /// initial separation).
    pub close_approach: Option<f64>,
    /// Time over which an escaping configuration must keep separating before
    /// the run is stopped.
    pub escape_horizon: Option<f64>,
    /// Brake threshold on kinetic energy, as a fraction of `|E(0)|`.
    pub brake_threshold: f64,
    /// Collision stop distance as a fraction of the initial size.
    pub collision_threshold: f64,
    /// Total-collision proximity threshold on `I / I(0)`.
    pub total_collision_threshold: f64,
    /// Sub-intervals per step scanned for sign changes.
    pub samples_per_step: usize,
}

impl EventSpec {
    /// No events; collisions still stop the run.
    pub fn none() -> Self {
        EventSpec {
            brake: false,
            syzygy: false,
            total_collision: false,
            close_approach: None,
            escape_horizon: None,
            brake_threshold: 1e-12,
            collision_threshold: 1e-9,
            total_collision_threshold: 1e-6,
            samples_per_step: 8,
        }
    }

    /// Everything a drop experiment wants.
    pub fn all() -> Self {
        EventSpec {
            brake: true,
            syzygy: true,
            total_collision: true,
            close_approach: Some(1e-2),
            escape_horizon: Some(10.0),
            ..EventSpec::none()
        }
    }
}

impl Default for EventSpec {
    fn default() -> Self {
        EventSpec::all()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EventKind {
    /// All bodies momentarily at rest.
    Brake,
    /// The three bodies are collinear. `collinear` marks a step over which the
    /// signed area vanishes identically; such steps report once, at their start.
    Syzygy {
        collinear: bool,
    },
    CloseApproach {
        pair: (usize, usize),
    },
    /// A bound pair and a single body on a hyperbolic relative orbit.
    Escape {
        binary: (usize, usize),
        single: usize,
        binary_energy: f64,
        relative_energy: f64,
    },
    /// Local minimum of the moment of inertia below the proximity threshold.
    TotalCollisionProximity,
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Brake => "Brake",
            EventKind::Syzygy { .. } => "Syzygy",
            EventKind::CloseApproach { .. } => "CloseApproach",
            EventKind::Escape { .. } => "Escape",
            EventKind::TotalCollisionProximity => "TotalCollisionProximity",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EventRecord {
    pub kind: EventKind,
    pub time: f64,
    pub state: PhaseState,
    /// Diagnostic value at the event: kinetic energy for brakes, signed area for
    /// syzygies, separation for close approaches, `I` for total collision,
    /// the third body's separation for escapes.
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Status {
    Completed,
    CollisionStop { pair: (usize, usize), time: f64 },
    EscapeStop { time: f64 },
}

/// Dense trajectory: contiguous Taylor steps plus the events found on them.
#[derive(Clone, Debug)]
pub struct Trajectory {
    sys: MassSystem,
    initial: PhaseState,
    steps: Vec<TaylorStep>,
    events: Vec<EventRecord>,
    status: Status,
    energy0: f64,
    size0: f64,
    max_energy_error: f64,
    max_momentum: f64,
}

impl Trajectory {
    /// Build a trajectory from externally produced steps. Steps must tile a
    /// time interval contiguously.
    pub fn from_steps(sys: MassSystem, steps: Vec<TaylorStep>) -> Result<Self> {
        let first = steps.first().ok_or(Error::NoRoot)?;
        for w in steps.windows(2) {
            if w[1].t0 != w[0].t_end() || !(w[1].dt > 0.0) {
                return Err(Error::OutOfRange { t: w[1].t0, start: w[0].t0, end: w[0].t_end() });
            }
            if w[1].n() != sys.n() {
                return Err(Error::BodyCountMismatch { expected: sys.n(), found: w[1].n() });
            }
        }
        let initial = first.state_at(0.0);
        let energy0 = energy(&initial, &sys)?;
        let size0 = initial.config.max_distance();
        Ok(Trajectory {
            sys,
            initial,
            steps,
            events: Vec::new(),
            status: Status::Completed,
            energy0,
            size0,
            max_energy_error: 0.0,
            max_momentum: 0.0,
        })
    }

    pub fn system(&self) -> &MassSystem {
        &self.sys
    }

    pub fn initial(&self) -> &PhaseState {
        &self.initial
    }

    pub fn steps(&self) -> &[TaylorStep] {
        &self.steps
    }

    pub fn events(&self) -> &[EventRecord] {
        &self.events
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn t_start(&self) -> f64 {
        self.initial.time
    }

    pub fn t_end(&self) -> f64 {
        self.steps.last().map_or(self.initial.time, |s| s.t_end())
    }

    pub fn initial_energy(&self) -> f64 {
        self.energy0
    }

    /// Largest separation in the initial configuration.
    pub fn initial_size(&self) -> f64 {
        self.size0
    }

    /// `max |E(t) - E(0)|` over step boundaries.
    pub fn max_energy_error(&self) -> f64 {
        self.max_energy_error
    }

    /// Largest linear or angular momentum magnitude seen at step boundaries.
    pub fn max_momentum(&self) -> f64 {
        self.max_momentum
    }

    pub fn events_of<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a EventRecord> + 'a {
        self.events.iter().filter(move |e| e.kind.name() == name)
    }

    /// Index of the step containing `t`.
    pub fn step_index(&self, t: f64) -> Result<usize> {
        let (start, end) = (self.t_start(), self.t_end());
        if !(t >= start && t <= end) || self.steps.is_empty() {
            return Err(Error::OutOfRange { t, start, end });
        }
        let idx = self.steps.partition_point(|s| s.t_end() < t);
        Ok(idx.min(self.steps.len() - 1))
    }

    /// State at time `t` from the containing step's polynomials.
    pub fn dense_eval(&self, t: f64) -> Result<PhaseState> {
        if self.steps.is_empty() && t == self.initial.time {
            return Ok(self.initial.clone());
        }
        let step = &self.steps[self.step_index(t)?];
        let mut s = step.state_at(t - step.t0);
        s.time = t;
        Ok(s)
    }

    /// `samples` states on a uniform grid over the span (endpoints included).
    pub fn sample_uniform(&self, samples: usize) -> Vec<PhaseState> {
        let (a, b) = (self.t_start(), self.t_end());
        if samples < 2 || self.steps.is_empty() {
            return alloc::vec![self.initial.clone()];
        }
        (0..samples)
            .map(|i| {
                let t = if i + 1 == samples { b } else { a + (b - a) * i as f64 / (samples - 1) as f64 };
                self.dense_eval(t).expect("grid lies inside the span")
            })
            .collect()
    }
}

fn energy(state: &PhaseState, sys: &MassSystem) -> Result<f64> {
    Ok(state.kinetic_energy(sys.masses()) + potential_energy(&state.config, sys)?)
}

fn momenta(state: &PhaseState, sys: &MassSystem) -> f64 {
    let mut p = Vec2::ZERO;
    let mut l = 0.0;
    for ((&q, &v), &m) in state.positions().iter().zip(&state.velocities).zip(sys.masses()) {
        p += v * m;
        l += m * q.wedge(v);
    }
    p.norm().max(l.abs())
}

// Event functions evaluated on dense kinematics.

fn kinetic_rate(k: &Kinematics, masses: &[f64]) -> f64 {
    k.velocities.iter().zip(&k.accelerations).zip(masses).map(|((v, a), &m)| m * v.dot(*a)).sum()
}

fn kinetic(k: &Kinematics, masses: &[f64]) -> f64 {
    0.5 * k.velocities.iter().zip(masses).map(|(v, &m)| m * v.norm_sq()).sum::<f64>()
}

fn signed_area(k: &Kinematics) -> f64 {
    let p = &k.positions;
    (p[1] - p[0]).wedge(p[2] - p[0])
}

fn max_sep(k: &Kinematics) -> f64 {
    Configuration { positions: k.positions.clone() }.max_distance()
}

fn inertia_parts(k: &Kinematics, masses: &[f64]) -> (f64, f64) {
    let total: f64 = masses.iter().sum();
    let mut c = Vec2::ZERO;
    let mut v = Vec2::ZERO;
    for ((&q, &u), &m) in k.positions.iter().zip(&k.velocities).zip(masses) {
        c += q * m;
        v += u * m;
    }
    c = c / total;
    v = v / total;
    let mut inertia = 0.0;
    let mut rate = 0.0;
    for ((&q, &u), &m) in k.positions.iter().zip(&k.velocities).zip(masses) {
        inertia += m * (q - c).norm_sq();
        rate += 2.0 * m * (q - c).dot(u - v);
    }
    (inertia, rate)
}

/// Root of `f` on `[a, b]` (step-local times) given a sign change, by
/// bisection down to rounding level followed by one secant polish inside the
/// final bracket.
fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, mut fa: f64, t0: f64) -> f64 {
    let mut fb = f(b);
    let floor = (b - a) * f64::EPSILON;
    for _ in 0..200 {
        if b - a <= 4.0 * f64::EPSILON * (t0 + b).abs() || b - a <= floor {
            break;
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    if fb != fa {
        let s = a - fa * (b - a) / (fb - fa);
        if s >= a && s <= b {
            return s;
        }
    }
    0.5 * (a + b)
}

/// First sign change of `f` on a step, root-located on the step polynomials.
/// Returns the absolute event time, or `None` when `f` keeps its sign.
pub fn locate_event<F: Fn(&Kinematics) -> f64>(step: &TaylorStep, f: F) -> Option<f64> {
    const SAMPLES: usize = 8;
    let g = |tau: f64| f(&step.kinematics(tau));
    let mut ta = 0.0;
    let mut ga = g(0.0);
    for i in 1..=SAMPLES {
        let tb = step.dt * i as f64 / SAMPLES as f64;
        let gb = g(tb);
        if ga == 0.0 && i == 1 {
            return Some(step.t0);
        }
        if ga * gb < 0.0 || (gb == 0.0 && ga != 0.0) {
            return Some(step.t0 + bisect(&g, ta, tb, ga, step.t0));
        }
        ta = tb;
        ga = gb;
    }
    None
}

#[derive(Clone, Copy, PartialEq)]
enum Crossing {
    /// `-` to `+` (or zero): a local minimum of the integrand's antiderivative.
    Rising,
    /// Any strict sign change, or landing exactly on zero.
    Any,
    /// `+` to `-` (or zero).
    Falling,
}

fn crosses(ga: f64, gb: f64, kind: Crossing) -> bool {
    match kind {
        Crossing::Rising => ga < 0.0 && gb >= 0.0,
        Crossing::Falling => ga > 0.0 && gb <= 0.0,
        Crossing::Any => ga * gb < 0.0 || (gb == 0.0 && ga != 0.0),
    }
}

type MakeEvent<'a> = dyn Fn(f64, &PhaseState) -> Option<(EventKind, f64)> + 'a;

struct EventScanner<'a> {
    spec: &'a EventSpec,
    masses: &'a [f64],
    brake_eps: f64,
    inertia_eps: f64,
    close_eps: Option<f64>,
    three: bool,
}

impl EventScanner<'_> {
    fn scan(&self, step: &TaylorStep, out: &mut Vec<EventRecord>) {
        let m = self.spec.samples_per_step.max(1);
        let taus: Vec<f64> = (0..=m).map(|i| if i == m { step.dt } else { step.dt * i as f64 / m as f64 }).collect();
        let kin: Vec<Kinematics> = taus.iter().map(|&t| step.kinematics(t)).collect();
        let first = out.len();
        let masses = self.masses;

        let find =
            |g: &dyn Fn(&Kinematics) -> f64, kind: Crossing, out: &mut Vec<EventRecord>, make: &MakeEvent<'_>| {
                let vals: Vec<f64> = kin.iter().map(g).collect();
                for i in 0..m {
                    if crosses(vals[i], vals[i + 1], kind) {
                        let h = |tau: f64| g(&step.kinematics(tau));
                        let tau = bisect(&h, taus[i], taus[i + 1], vals[i], step.t0);
                        let state = step.state_at(tau);
                        if let Some((ek, value)) = make(tau, &state) {
                            out.push(EventRecord { kind: ek, time: state.time, state, value });
                        }
                    }
                }
            };

        if self.spec.brake {
            let kr = |k: &Kinematics| kinetic_rate(k, masses);
            let eps = self.brake_eps;
            find(&kr, Crossing::Rising, out, &|tau, _s| {
                let ke = kinetic(&step.kinematics(tau), masses);
                (ke < eps).then_some((EventKind::Brake, ke))
            });
        }

        if self.spec.syzygy && self.three {
            let areas: Vec<f64> = kin.iter().map(signed_area).collect();
            let flat = kin.iter().zip(&areas).all(|(k, &a)| {
                a.abs()
                    <= 1e-13 * {
                        let s = max_sep(k);
                        s * s
                    }
            });
            if flat {
                let state = step.state_at(0.0);
                out.push(EventRecord {
                    kind: EventKind::Syzygy { collinear: true },
                    time: step.t0,
                    state,
                    value: areas[0],
                });
            } else {
                find(&signed_area, Crossing::Any, out, &|_tau, s| {
                    Some((EventKind::Syzygy { collinear: false }, s.config.signed_area().unwrap_or(0.0)))
                });
            }
        }

        if self.spec.total_collision {
            let rate = |k: &Kinematics| inertia_parts(k, masses).1;
            let eps = self.inertia_eps;
            find(&rate, Crossing::Rising, out, &|_tau, s| {
                let i = s.config.moment_of_inertia(masses);
                (i < eps).then_some((EventKind::TotalCollisionProximity, i))
            });
        }

        if let Some(eps) = self.close_eps {
            let n = masses.len();
            for a in 0..n {
                for b in a + 1..n {
                    let g = move |k: &Kinematics| (k.positions[a] - k.positions[b]).norm() - eps;
                    find(&g, Crossing::Falling, out, &|_tau, s| {
                        Some((EventKind::CloseApproach { pair: (a, b) }, s.config.distance(a, b)))
                    });
                }
            }
        }

        out[first..].sort_by(|x, y| x.time.total_cmp(&y.time));
    }
}

/// Tracks a candidate binary + single split until it has kept separating for
/// the confirmation horizon.
struct EscapeTracker {
    horizon: f64,
    candidate: Option<((usize, usize), usize)>,
    since: f64,
    last_sep: f64,
}

struct Split {
    binary: (usize, usize),
    single: usize,
    binary_energy: f64,
    relative_energy: f64,
    separation: f64,
    hierarchy: f64,
}

fn escape_split(state: &PhaseState, sys: &MassSystem) -> Option<Split> {
    let g = match sys.force() {
        crate::ForceModel::Newtonian { g } => *g,
        crate::ForceModel::Hooke { .. } => return None,
    };
    let q = state.positions();
    let v = &state.velocities;
    let mut best: Option<Split> = None;
    for c in 0..3 {
        let (a, b) = match c {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let (ma, mb, mc) = (sys.mass(a), sys.mass(b), sys.mass(c));
        let m_pair = ma + mb;
        let r = (q[b] - q[a]).norm();
        let binary_energy = 0.5 * ma * mb / m_pair * (v[b] - v[a]).norm_sq() - g * ma * mb / r;
        let center = (q[a] * ma + q[b] * mb) / m_pair;
        let center_v = (v[a] * ma + v[b] * mb) / m_pair;
        let dq = q[c] - center;
        let dv = v[c] - center_v;
        let d = dq.norm();
        let mu = mc * m_pair / (mc + m_pair);
        let relative_energy = 0.5 * mu * dv.norm_sq() - g * mc * m_pair / d;
        let escaping = binary_energy < 0.0 && relative_energy > 0.0 && d > r && dq.dot(dv) > 0.0;
        if escaping && best.as_ref().is_none_or(|s| d / r > s.hierarchy) {
            best = Some(Split {
                binary: (a, b),
                single: c,
                binary_energy,
                relative_energy,
                separation: d,
                hierarchy: d / r,
            });
        }
    }
    best
}

impl EscapeTracker {
    fn update(&mut self, state: &PhaseState, sys: &MassSystem) -> Option<(EventKind, f64)> {
        let Some(split) = escape_split(state, sys) else {
            self.candidate = None;
            return None;
        };
        let key = (split.binary, split.single);
        if self.candidate != Some(key) || split.separation < self.last_sep {
            self.candidate = Some(key);
            self.since = state.time;
            self.last_sep = split.separation;
            return None;
        }
        self.last_sep = split.separation;
        if state.time - self.since >= self.horizon {
            Some((
                EventKind::Escape {
                    binary: split.binary,
                    single: split.single,
                    binary_energy: split.binary_energy,
                    relative_energy: split.relative_energy,
                },
                split.separation,
            ))
        } else {
            None
        }
    }
}

/// Integrate from `state` to `t_end` (or until a collision or confirmed
/// escape stops the run), collecting the requested events.
pub fn integrate(
    state: &PhaseState,
    sys: &MassSystem,
    t_end: f64,
    settings: &IntegratorSettings,
    events: &EventSpec,
) -> Result<Trajectory> {
    if state.n() != sys.n() {
        return Err(Error::BodyCountMismatch { expected: sys.n(), found: state.n() });
    }
    if settings.order < 2 {
        return Err(Error::InvalidOrder(settings.order));
    }
    if !(settings.tol > 0.0) {
        return Err(Error::InvalidTolerance(settings.tol));
    }
    if !t_end.is_finite() || t_end < state.time {
        return Err(Error::OutOfRange { t: t_end, start: state.time, end: f64::INFINITY });
    }
    let masses = sys.masses();
    let energy0 = energy(state, sys)?;
    let size0 = state.config.max_distance();
    let inertia0 = state.config.moment_of_inertia(masses);
    let ctrl = settings.step_control(1e-6 * size0);
    let collision_eps = if sys.is_newtonian() { events.collision_threshold * size0 } else { 0.0 };
    let brake_eps = events.brake_threshold * if energy0 != 0.0 { energy0.abs() } else { 1.0 };

    let scanner = EventScanner {
        spec: events,
        masses,
        brake_eps,
        inertia_eps: events.total_collision_threshold * inertia0,
        close_eps: events.close_approach.map(|f| f * size0),
        three: sys.n() == 3,
    };
    let mut escape = events.escape_horizon.filter(|_| sys.n() == 3 && sys.is_newtonian()).map(|h| EscapeTracker {
        horizon: h,
        candidate: None,
        since: state.time,
        last_sep: 0.0,
    });

    let mut traj = Trajectory {
        sys: sys.clone(),
        initial: state.clone(),
        steps: Vec::new(),
        events: Vec::new(),
        status: Status::Completed,
        energy0,
        size0,
        max_energy_error: 0.0,
        max_momentum: momenta(state, sys),
    };

    if events.brake && state.kinetic_energy(masses) < brake_eps {
        traj.events.push(EventRecord {
            kind: EventKind::Brake,
            time: state.time,
            state: state.clone(),
            value: state.kinetic_energy(masses),
        });
    }

    let mut current = state.clone();
    loop {
        let remaining = t_end - current.time;
        if remaining <= 4.0 * f64::EPSILON * t_end.abs() {
            break;
        }
        if traj.steps.len() >= settings.max_steps {
            return Err(Error::IntegrationStopped { status: traj.status, reached: current.time });
        }
        if let Some(((a, b), r)) = current.config.min_distance() {
            if r < collision_eps {
                traj.status = Status::CollisionStop { pair: (a, b), time: current.time };
                break;
            }
        }
        let (step, next) = match step_capped(&current, sys, &ctrl, remaining) {
            Ok(x) => x,
            Err(Error::Collision { a, b }) => {
                traj.status = Status::CollisionStop { pair: (a, b), time: current.time };
                break;
            }
            Err(e) => return Err(e),
        };
        scanner.scan(&step, &mut traj.events);

        match energy(&next, sys) {
            Ok(e) => traj.max_energy_error = traj.max_energy_error.max((e - energy0).abs()),
            Err(Error::Collision { a, b }) => {
                traj.status = Status::CollisionStop { pair: (a, b), time: current.time };
                break;
            }
            Err(e) => return Err(e),
        }
        traj.max_momentum = traj.max_momentum.max(momenta(&next, sys));
        traj.steps.push(step);
        current = next;

        if let Some(tracker) = escape.as_mut() {
            if let Some((kind, value)) = tracker.update(&current, sys) {
                traj.events.push(EventRecord { kind, time: current.time, state: current.clone(), value });
                traj.status = Status::EscapeStop { time: current.time };
                break;
            }
        }
    }

    if let Status::CollisionStop { .. } = traj.status {
        let inertia = current.config.moment_of_inertia(masses);
        if events.total_collision && inertia < scanner.inertia_eps {
            traj.events.push(EventRecord {
                kind: EventKind::TotalCollisionProximity,
                time: current.time,
                state: current.clone(),
                value: inertia,
            });
        }
    }
    Ok(traj)
}
