//! High-order Taylor steps for `q̈ = -∇V(q)`.
//!
//! Position coefficients are generated order by order with the usual
//! automatic-differentiation recurrence. For gravity every pair carries two
//! auxiliary series, `s = |q_b - q_a|²` and `u = s^(-3/2)`, so each new order
//! costs a couple of Cauchy products. Hooke forces are linear and need none.

use alloc::vec;
use alloc::vec::Vec;

use crate::dynamics::{Configuration, ForceModel, MassSystem, PhaseState};
use crate::{Error, Result, Vec2};

/// Position Taylor polynomials for one integration step, expanded about `t0`.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorStep {
    pub t0: f64,
    pub dt: f64,
    order: usize,
    n: usize,
    /// `coeffs[(body * (order + 1)) + k]` is the k-th coefficient of body's position.
    coeffs: Vec<Vec2>,
}

/// Positions, velocities and accelerations read off a step's polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct Kinematics {
    pub positions: Vec<Vec2>,
    pub velocities: Vec<Vec2>,
    pub accelerations: Vec<Vec2>,
}

impl TaylorStep {
    /// Assemble a step from raw coefficients laid out body-major, `order + 1`
    /// coefficients per body.
    pub fn from_parts(t0: f64, dt: f64, order: usize, coeffs: Vec<Vec2>) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidOrder(order));
        }
        if !coeffs.len().is_multiple_of(order + 1) {
            return Err(Error::BodyCountMismatch { expected: order + 1, found: coeffs.len() });
        }
        let n = coeffs.len() / (order + 1);
        Ok(TaylorStep { t0, dt, order, n, coeffs })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.dt
    }

    pub fn coefficients(&self) -> &[Vec2] {
        &self.coeffs
    }

    /// The `order + 1` coefficients of one body's position.
    pub fn body_coefficients(&self, body: usize) -> &[Vec2] {
        let w = self.order + 1;
        &self.coeffs[body * w..(body + 1) * w]
    }

    /// Largest coordinate magnitude among the k-th coefficients.
    pub fn coefficient_norm(&self, k: usize) -> f64 {
        (0..self.n).map(|a| self.body_coefficients(a)[k].max_abs()).fold(0.0, f64::max)
    }

    /// Position, velocity and acceleration of `body` at `tau` past `t0`.
    pub fn eval_body(&self, body: usize, tau: f64) -> (Vec2, Vec2, Vec2) {
        let c = self.body_coefficients(body);
        let mut p = Vec2::ZERO;
        let mut v = Vec2::ZERO;
        let mut a = Vec2::ZERO;
        for k in (0..=self.order).rev() {
            a = a * tau + v * 2.0;
            v = v * tau + p;
            p = p * tau + c[k];
        }
        (p, v, a)
    }

    pub fn kinematics(&self, tau: f64) -> Kinematics {
        let mut positions = Vec::with_capacity(self.n);
        let mut velocities = Vec::with_capacity(self.n);
        let mut accelerations = Vec::with_capacity(self.n);
        for body in 0..self.n {
            let (p, v, a) = self.eval_body(body, tau);
            positions.push(p);
            velocities.push(v);
            accelerations.push(a);
        }
        Kinematics { positions, velocities, accelerations }
    }

    /// Dense state at `t0 + tau`.
    pub fn state_at(&self, tau: f64) -> PhaseState {
        let k = self.kinematics(tau);
        PhaseState { config: Configuration { positions: k.positions }, velocities: k.velocities, time: self.t0 + tau }
    }
}

/// Taylor coefficients through `order` of the solution passing through `state`.
/// The returned step has `dt = 0`.
pub fn taylor_coefficients(state: &PhaseState, sys: &MassSystem, order: usize) -> Result<TaylorStep> {
    if order < 2 {
        return Err(Error::InvalidOrder(order));
    }
    let n = sys.n();
    if state.n() != n {
        return Err(Error::BodyCountMismatch { expected: n, found: state.n() });
    }
    let w = order + 1;
    let mut x = vec![Vec2::ZERO; n * w];
    for a in 0..n {
        x[a * w] = state.positions()[a];
        x[a * w + 1] = state.velocities[a];
    }

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let np = pairs.len();
    let mut d = vec![Vec2::ZERO; np * w];
    let mut s = vec![0.0; np * w];
    let mut u = vec![0.0; np * w];
    let mut acc = vec![Vec2::ZERO; n];

    const ALPHA: f64 = -1.5;

    for k in 0..=order - 2 {
        acc.iter_mut().for_each(|v| *v = Vec2::ZERO);
        for (pi, &(a, b)) in pairs.iter().enumerate() {
            let base = pi * w;
            d[base + k] = x[b * w + k] - x[a * w + k];
            match sys.force() {
                ForceModel::Newtonian { g } => {
                    let dk = &d[base..base + k + 1];
                    let mut sk = 0.0;
                    for j in 0..=k {
                        sk += dk[j].dot(dk[k - j]);
                    }
                    s[base + k] = sk;
                    let s0 = s[base];
                    if k == 0 {
                        if s0 == 0.0 {
                            return Err(Error::Collision { a, b });
                        }
                        u[base] = 1.0 / (s0 * libm::sqrt(s0));
                    } else {
                        let mut sum = 0.0;
                        for j in 0..k {
                            sum += (ALPHA * (k - j) as f64 - j as f64) * s[base + k - j] * u[base + j];
                        }
                        u[base + k] = sum / (k as f64 * s0);
                    }
                    let mut wk = Vec2::ZERO;
                    for j in 0..=k {
                        wk += d[base + j] * u[base + k - j];
                    }
                    acc[a] += wk * (g * sys.mass(b));
                    acc[b] -= wk * (g * sys.mass(a));
                }
                ForceModel::Hooke { springs } => {
                    let f = d[base + k] * (2.0 * springs[a * n + b]);
                    acc[a] += f / sys.mass(a);
                    acc[b] -= f / sys.mass(b);
                }
            }
        }
        let denom = ((k + 1) * (k + 2)) as f64;
        for a in 0..n {
            x[a * w + k + 2] = acc[a] / denom;
        }
    }

    Ok(TaylorStep { t0: state.time, dt: 0.0, order, n, coeffs: x })
}

/// Order, tolerance and step-size heuristic parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    pub order: usize,
    /// Truncation tolerance, relative to the length scale of the state.
    pub tol: f64,
    pub safety: f64,
    pub max_step: f64,
    /// Lower bound for the length scale the tolerance is measured against.
    pub length_floor: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl { order: 25, tol: 1e-14, safety: 0.9, max_step: f64::INFINITY, length_floor: 0.0 }
    }
}

impl StepControl {
    /// Length scale the tolerance is relative to: the closest separation for
    /// gravity (so close encounters are resolved in relative terms), the widest
    /// one for springs.
    pub fn length_scale(&self, config: &Configuration, sys: &MassSystem) -> f64 {
        let raw = match sys.force() {
            ForceModel::Newtonian { .. } => config.min_distance().map_or(1.0, |(_, r)| r),
            ForceModel::Hooke { .. } => config.max_distance(),
        };
        let scale = raw.max(self.length_floor);
        if scale > 0.0 {
            scale
        } else {
            1.0
        }
    }

    /// `safety · min_{k ∈ {p-1, p}} (tol_abs / |c_k|)^(1/k)`, capped at `max_step`.
    pub fn step_size(&self, step: &TaylorStep, length_scale: f64) -> f64 {
        let tol_abs = self.tol * length_scale;
        let p = step.order();
        let mut h = f64::INFINITY;
        for k in [p - 1, p] {
            let c = step.coefficient_norm(k);
            if c > 0.0 {
                h = h.min(libm::pow(tol_abs / c, 1.0 / k as f64));
            }
        }
        (self.safety * h).min(self.max_step)
    }
}

/// One adaptive step from `state`. Returns the step (with its `dt` filled in)
/// and the state at its end. A step that underflows the time resolution is
/// reported as a collision of the closest pair.
pub fn adaptive_step(state: &PhaseState, sys: &MassSystem, ctrl: &StepControl) -> Result<(TaylorStep, PhaseState)> {
    step_capped(state, sys, ctrl, f64::INFINITY)
}

pub(crate) fn step_capped(
    state: &PhaseState,
    sys: &MassSystem,
    ctrl: &StepControl,
    cap: f64,
) -> Result<(TaylorStep, PhaseState)> {
    if !(ctrl.tol > 0.0) {
        return Err(Error::InvalidTolerance(ctrl.tol));
    }
    let mut step = taylor_coefficients(state, sys, ctrl.order)?;
    let scale = ctrl.length_scale(&state.config, sys);
    let mut dt = ctrl.step_size(&step, scale);
    if !dt.is_finite() {
        // all high-order coefficients vanish: only the cap limits the step
        dt = if cap.is_finite() { cap } else { ctrl.max_step };
    }
    let capped = dt >= cap;
    let dt = dt.min(cap);
    let t = state.time;
    let underflow = !(dt > 0.0) || t + dt == t || dt < 4.0 * f64::EPSILON * t.abs();
    if underflow && !capped {
        let (a, b) = state.config.min_distance().map_or((0, 0), |(p, _)| p);
        return Err(Error::Collision { a, b });
    }
    step.dt = dt;
    let mut next = step.state_at(dt);
    next.time = step.t_end();
    Ok((step, next))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::accelerations;

    fn sample_state() -> (PhaseState, MassSystem) {
        let sys = MassSystem::gravitational(vec![1.0, 2.0, 3.0]).unwrap();
        let cfg = Configuration::from_xy(&[(0.1, -0.4), (1.2, 0.3), (-0.5, 0.9)]).unwrap();
        let vel = vec![Vec2::new(0.2, 0.1), Vec2::new(-0.3, 0.05), Vec2::new(0.1, -0.2)];
        (PhaseState::new(cfg, vel, 0.0).unwrap(), sys)
    }

    #[test]
    fn low_order_coefficients_match_state_and_force() {
        let (state, sys) = sample_state();
        let step = taylor_coefficients(&state, &sys, 12).unwrap();
        let acc = accelerations(&state.config, &sys).unwrap();
        for (a, acc_a) in acc.iter().enumerate() {
            let c = step.body_coefficients(a);
            assert_eq!(c[0], state.positions()[a]);
            assert_eq!(c[1], state.velocities[a]);
            assert!((c[2] * 2.0 - *acc_a).norm() < 1e-14);
        }
    }

    #[test]
    fn third_coefficient_matches_finite_difference_of_acceleration() {
        // c3 = jerk / 6; jerk = d/dt acc(q + t v)
        let (state, sys) = sample_state();
        let step = taylor_coefficients(&state, &sys, 6).unwrap();
        let h = 1e-5;
        let shift = |s: f64| {
            let pos = state.positions().iter().zip(&state.velocities).map(|(&q, &v)| q + v * s).collect();
            accelerations(&Configuration::new(pos).unwrap(), &sys).unwrap()
        };
        let (ap, am) = (shift(h), shift(-h));
        for a in 0..3 {
            let jerk = (ap[a] - am[a]) / (2.0 * h);
            assert!((step.body_coefficients(a)[3] * 6.0 - jerk).norm() < 1e-7);
        }
    }

    #[test]
    fn hooke_two_body_mode_matches_cosine_series() {
        // q1 = -x, q2 = x with m = k = 1: ẍ = -4x, x(t) = x0 cos(2t)
        let sys = MassSystem::uniform_hooke(vec![1.0, 1.0], 1.0).unwrap();
        let x0 = 0.75;
        let cfg = Configuration::from_xy(&[(-x0, 0.0), (x0, 0.0)]).unwrap();
        let p = 20;
        let step = taylor_coefficients(&PhaseState::at_rest(cfg, 0.0), &sys, p).unwrap();
        let omega: f64 = 2.0;
        let mut fact = 1.0;
        for k in 0..=p {
            if k > 0 {
                fact *= k as f64;
            }
            let expected = if k % 2 == 0 {
                let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
                sign * x0 * omega.powi(k as i32) / fact
            } else {
                0.0
            };
            let got = step.body_coefficients(1)[k];
            assert!((got.x - expected).abs() <= 1e-15 * expected.abs().max(1e-300), "k={k}");
            assert_eq!(got.y, 0.0);
            assert_eq!(step.body_coefficients(0)[k].x, -got.x);
        }
    }

    #[test]
    fn order_below_two_is_rejected() {
        let (state, sys) = sample_state();
        assert_eq!(taylor_coefficients(&state, &sys, 1), Err(Error::InvalidOrder(1)));
    }

    #[test]
    fn collision_state_is_rejected() {
        let sys = MassSystem::gravitational(vec![1.0; 3]).unwrap();
        let cfg = Configuration::from_xy(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]).unwrap();
        assert_eq!(taylor_coefficients(&PhaseState::at_rest(cfg, 0.0), &sys, 5), Err(Error::Collision { a: 0, b: 1 }));
    }

    #[test]
    fn dense_eval_at_zero_reproduces_state() {
        let (state, sys) = sample_state();
        let (step, next) = adaptive_step(&state, &sys, &StepControl::default()).unwrap();
        assert_eq!(step.state_at(0.0), state);
        assert!(step.dt > 0.0);
        assert_eq!(next.time, step.t0 + step.dt);
    }

    #[test]
    fn higher_order_does_not_shrink_step() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let sys = MassSystem::gravitational(vec![1.0, 1.0, 1.0]).unwrap();
        for _ in 0..50 {
            let pos: Vec<Vec2> =
                (0..3).map(|_| Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let cfg = Configuration::new(pos).unwrap();
            if cfg.min_distance().unwrap().1 < 0.2 {
                continue;
            }
            let vel = (0..3).map(|_| Vec2::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))).collect();
            let state = PhaseState::new(cfg, vel, 0.0).unwrap();
            let lo = StepControl { order: 12, ..StepControl::default() };
            let hi = StepControl { order: 24, ..StepControl::default() };
            let (s_lo, _) = adaptive_step(&state, &sys, &lo).unwrap();
            let (s_hi, _) = adaptive_step(&state, &sys, &hi).unwrap();
            assert!(s_hi.dt >= s_lo.dt, "{} < {}", s_hi.dt, s_lo.dt);
        }
    }

    #[test]
    fn free_fall_step_scales_like_kepler_time() {
        // Two bodies at rest a distance r apart: the time scale is r^{3/2}.
        let sys = MassSystem::gravitational(vec![1.0, 1.0]).unwrap();
        let ctrl = StepControl::default();
        let dt_at = |r: f64| {
            let cfg = Configuration::from_xy(&[(-r / 2.0, 0.0), (r / 2.0, 0.0)]).unwrap();
            adaptive_step(&PhaseState::at_rest(cfg, 0.0), &sys, &ctrl).unwrap().0.dt
        };
        let ref_ratio = dt_at(1.0);
        for r in [1e-1, 1e-2, 1e-4, 1e-6] {
            let ratio = dt_at(r) / r.powf(1.5);
            assert!(ratio <= ref_ratio * (1.0 + 1e-6), "r={r}: {ratio} vs {ref_ratio}");
        }
    }
}
