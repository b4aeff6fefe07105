//! Configurations, phase states, the two force models and the conserved
//! quantities of the planar N-body problem.
//!
//! Gradients are taken in the mass inner product `<u, v> = Σ m_a u_a·v_a`, so
//! the acceleration of body `a` is `-(1/m_a) ∂V/∂q_a`.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result, Vec2};

/// Pair potential selector.
#[derive(Clone, Debug, PartialEq)]
pub enum ForceModel {
    /// `V = -G Σ_{a<b} m_a m_b / r_ab`.
    Newtonian { g: f64 },
    /// `V = Σ_{a<b} k_ab r_ab²`. `springs` is the symmetric `n × n` matrix of
    /// spring constants, row-major; the diagonal is ignored.
    Hooke { springs: Vec<f64> },
}

impl ForceModel {
    pub fn is_newtonian(&self) -> bool {
        matches!(self, ForceModel::Newtonian { .. })
    }
}

/// Masses plus the force model acting between them.
#[derive(Clone, Debug, PartialEq)]
pub struct MassSystem {
    masses: Vec<f64>,
    force: ForceModel,
}

impl MassSystem {
    pub fn new(masses: Vec<f64>, force: ForceModel) -> Result<Self> {
        for (index, &value) in masses.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidMass { index, value });
            }
        }
        let n = masses.len();
        match &force {
            ForceModel::Newtonian { g } => {
                if !(*g > 0.0 && g.is_finite()) {
                    return Err(Error::InvalidForceModel("G must be positive"));
                }
            }
            ForceModel::Hooke { springs } => {
                if springs.len() != n * n {
                    return Err(Error::InvalidForceModel("spring matrix must be n x n"));
                }
                for a in 0..n {
                    for b in 0..n {
                        if a == b {
                            continue;
                        }
                        let k = springs[a * n + b];
                        if !(k > 0.0 && k.is_finite()) {
                            return Err(Error::InvalidForceModel("spring constants must be positive"));
                        }
                        if k != springs[b * n + a] {
                            return Err(Error::InvalidForceModel("spring matrix must be symmetric"));
                        }
                    }
                }
            }
        }
        Ok(MassSystem { masses, force })
    }

    /// Newtonian gravity with `G = 1`.
    pub fn gravitational(masses: Vec<f64>) -> Result<Self> {
        MassSystem::new(masses, ForceModel::Newtonian { g: 1.0 })
    }

    /// Hooke springs with the same constant `k` between every pair.
    pub fn uniform_hooke(masses: Vec<f64>, k: f64) -> Result<Self> {
        let n = masses.len();
        MassSystem::new(masses, ForceModel::Hooke { springs: vec![k; n * n] })
    }

    pub fn n(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass(&self, a: usize) -> f64 {
        self.masses[a]
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn force(&self) -> &ForceModel {
        &self.force
    }

    pub fn is_newtonian(&self) -> bool {
        self.force.is_newtonian()
    }

    /// Spring constant `k_ab`, or `None` for gravity.
    pub fn spring(&self, a: usize, b: usize) -> Option<f64> {
        match &self.force {
            ForceModel::Hooke { springs } => Some(springs[a * self.n() + b]),
            ForceModel::Newtonian { .. } => None,
        }
    }

    fn check_len(&self, found: usize) -> Result<()> {
        if found == self.n() {
            Ok(())
        } else {
            Err(Error::BodyCountMismatch { expected: self.n(), found })
        }
    }
}

/// Labelled positions of the bodies.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub positions: Vec<Vec2>,
}

impl Configuration {
    pub fn new(positions: Vec<Vec2>) -> Result<Self> {
        if positions.iter().all(|p| p.is_finite()) {
            Ok(Configuration { positions })
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn from_xy(points: &[(f64, f64)]) -> Result<Self> {
        Configuration::new(points.iter().map(|&(x, y)| Vec2::new(x, y)).collect())
    }

    /// Equilateral triangle with the given side, centroid at the origin and
    /// body 1 on the positive y axis. Bodies run counter-clockwise.
    pub fn equilateral(side: f64) -> Self {
        let r = side / libm::sqrt(3.0);
        let positions =
            (0..3).map(|k| Vec2::new(0.0, r).rotated(2.0 * core::f64::consts::PI * k as f64 / 3.0)).collect();
        Configuration { positions }
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        (self.positions[a] - self.positions[b]).norm()
    }

    /// Closest pair and its separation. `None` for fewer than two bodies.
    pub fn min_distance(&self) -> Option<((usize, usize), f64)> {
        let mut best: Option<((usize, usize), f64)> = None;
        for a in 0..self.n() {
            for b in a + 1..self.n() {
                let r = self.distance(a, b);
                if best.is_none_or(|(_, rb)| r < rb) {
                    best = Some(((a, b), r));
                }
            }
        }
        best
    }

    pub fn max_distance(&self) -> f64 {
        let mut best = 0.0f64;
        for a in 0..self.n() {
            for b in a + 1..self.n() {
                best = best.max(self.distance(a, b));
            }
        }
        best
    }

    /// Twice the signed area `(q2 - q1) ∧ (q3 - q1)` of a triangle; zero at a
    /// syzygy.
    pub fn signed_area(&self) -> Result<f64> {
        if self.n() != 3 {
            return Err(Error::NeedsThreeBodies { found: self.n() });
        }
        let p = &self.positions;
        Ok((p[1] - p[0]).wedge(p[2] - p[0]))
    }

    pub fn center_of_mass(&self, masses: &[f64]) -> Vec2 {
        weighted_mean(&self.positions, masses)
    }

    pub fn centered(&self, masses: &[f64]) -> Configuration {
        let c = self.center_of_mass(masses);
        Configuration { positions: self.positions.iter().map(|&p| p - c).collect() }
    }

    /// `Σ m_a |q_a - c|²` about the center of mass.
    pub fn moment_of_inertia(&self, masses: &[f64]) -> f64 {
        let c = self.center_of_mass(masses);
        self.positions.iter().zip(masses).map(|(&p, &m)| m * (p - c).norm_sq()).sum()
    }

    pub fn scaled(&self, s: f64) -> Configuration {
        Configuration { positions: self.positions.iter().map(|&p| p * s).collect() }
    }

    pub fn translated(&self, d: Vec2) -> Configuration {
        Configuration { positions: self.positions.iter().map(|&p| p + d).collect() }
    }

    pub fn rotated(&self, angle: f64) -> Configuration {
        Configuration { positions: self.positions.iter().map(|p| p.rotated(angle)).collect() }
    }

    /// Apply a 2x2 linear map to every position.
    pub fn transformed(&self, m: &[[f64; 2]; 2]) -> Configuration {
        Configuration { positions: self.positions.iter().map(|p| p.transformed(m)).collect() }
    }
}

/// Positions, velocities and time.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseState {
    pub config: Configuration,
    pub velocities: Vec<Vec2>,
    pub time: f64,
}

impl PhaseState {
    pub fn new(config: Configuration, velocities: Vec<Vec2>, time: f64) -> Result<Self> {
        if config.n() != velocities.len() {
            return Err(Error::BodyCountMismatch { expected: config.n(), found: velocities.len() });
        }
        if !velocities.iter().all(|v| v.is_finite()) || !time.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(PhaseState { config, velocities, time })
    }

    /// Brake (dropped) initial condition: all velocities zero.
    pub fn at_rest(config: Configuration, time: f64) -> Self {
        let n = config.n();
        PhaseState { config, velocities: vec![Vec2::ZERO; n], time }
    }

    pub fn n(&self) -> usize {
        self.config.n()
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.config.positions
    }

    pub fn kinetic_energy(&self, masses: &[f64]) -> f64 {
        0.5 * self.velocities.iter().zip(masses).map(|(v, &m)| m * v.norm_sq()).sum::<f64>()
    }

    /// True when every speed is at most `tol`.
    pub fn is_braked(&self, tol: f64) -> bool {
        self.velocities.iter().all(|v| v.norm() <= tol)
    }

    /// Same positions, velocities negated: the time-reversed initial condition.
    pub fn reversed(&self) -> PhaseState {
        PhaseState {
            config: self.config.clone(),
            velocities: self.velocities.iter().map(|&v| -v).collect(),
            time: self.time,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConservedQuantities {
    pub energy: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub linear_momentum: Vec2,
    pub angular_momentum: f64,
}

fn weighted_mean(points: &[Vec2], masses: &[f64]) -> Vec2 {
    let mut acc = Vec2::ZERO;
    let mut total = 0.0;
    for (&p, &m) in points.iter().zip(masses) {
        acc += p * m;
        total += m;
    }
    acc / total
}

/// Mass-metric norm `sqrt(Σ m_a |x_a|²)`.
pub fn mass_norm(masses: &[f64], xs: &[Vec2]) -> f64 {
    libm::sqrt(xs.iter().zip(masses).map(|(x, &m)| m * x.norm_sq()).sum())
}

/// Mass inner product `Σ m_a x_a·y_a`.
pub fn mass_inner(masses: &[f64], xs: &[Vec2], ys: &[Vec2]) -> f64 {
    xs.iter().zip(ys).zip(masses).map(|((x, y), &m)| m * x.dot(*y)).sum()
}

pub fn potential_energy(config: &Configuration, sys: &MassSystem) -> Result<f64> {
    sys.check_len(config.n())?;
    let n = config.n();
    let q = &config.positions;
    let mut v = 0.0;
    match sys.force() {
        ForceModel::Newtonian { g } => {
            for a in 0..n {
                for b in a + 1..n {
                    let r = (q[a] - q[b]).norm();
                    if r == 0.0 {
                        return Err(Error::Collision { a, b });
                    }
                    v -= g * sys.mass(a) * sys.mass(b) / r;
                }
            }
        }
        ForceModel::Hooke { springs } => {
            for a in 0..n {
                for b in a + 1..n {
                    v += springs[a * n + b] * (q[a] - q[b]).norm_sq();
                }
            }
        }
    }
    Ok(v)
}

/// `-∇V` in the mass metric: one acceleration vector per body.
pub fn accelerations(config: &Configuration, sys: &MassSystem) -> Result<Vec<Vec2>> {
    sys.check_len(config.n())?;
    let n = config.n();
    let q = &config.positions;
    let mut acc = vec![Vec2::ZERO; n];
    match sys.force() {
        ForceModel::Newtonian { g } => {
            for a in 0..n {
                for b in a + 1..n {
                    let d = q[b] - q[a];
                    let r2 = d.norm_sq();
                    if r2 == 0.0 {
                        return Err(Error::Collision { a, b });
                    }
                    let w = d / (r2 * libm::sqrt(r2));
                    acc[a] += w * (g * sys.mass(b));
                    acc[b] -= w * (g * sys.mass(a));
                }
            }
        }
        ForceModel::Hooke { springs } => {
            for a in 0..n {
                for b in a + 1..n {
                    let f = (q[b] - q[a]) * (2.0 * springs[a * n + b]);
                    acc[a] += f / sys.mass(a);
                    acc[b] -= f / sys.mass(b);
                }
            }
        }
    }
    Ok(acc)
}

pub fn conserved_quantities(state: &PhaseState, sys: &MassSystem) -> Result<ConservedQuantities> {
    sys.check_len(state.n())?;
    let potential = potential_energy(&state.config, sys)?;
    let kinetic = state.kinetic_energy(sys.masses());
    let mut linear_momentum = Vec2::ZERO;
    let mut angular_momentum = 0.0;
    for ((&q, &v), &m) in state.positions().iter().zip(&state.velocities).zip(sys.masses()) {
        linear_momentum += v * m;
        angular_momentum += m * q.wedge(v);
    }
    Ok(ConservedQuantities { energy: kinetic + potential, kinetic, potential, linear_momentum, angular_momentum })
}

/// Subtract the mass-weighted mean position and velocity.
pub fn reduce_to_center_of_mass(state: &PhaseState, sys: &MassSystem) -> PhaseState {
    let masses = sys.masses();
    let c = weighted_mean(state.positions(), masses);
    let v = weighted_mean(&state.velocities, masses);
    PhaseState {
        config: Configuration { positions: state.positions().iter().map(|&p| p - c).collect() },
        velocities: state.velocities.iter().map(|&u| u - v).collect(),
        time: state.time,
    }
}
