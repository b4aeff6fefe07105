//! Central configurations: shapes whose acceleration field is a negative
//! multiple of the (centered) position field, so a drop collapses them
//! homothetically.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::dynamics::{accelerations, mass_inner, mass_norm, Configuration, ForceModel, MassSystem};
use crate::{Error, Result, Vec2};

/// Normalized residual below which a configuration counts as central.
pub const CERTIFICATION_THRESHOLD: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CentralResidual {
    /// Best `λ` in `acc ≈ -λ q`.
    pub lambda: f64,
    /// `‖acc + λ q‖ / ‖acc‖` in the mass metric.
    pub residual: f64,
}

impl CentralResidual {
    pub fn is_certified(&self) -> bool {
        self.residual < CERTIFICATION_THRESHOLD
    }
}

pub fn central_residual(config: &Configuration, sys: &MassSystem) -> Result<CentralResidual> {
    let masses = sys.masses();
    let q = config.centered(masses);
    let qq = mass_inner(masses, &q.positions, &q.positions);
    if qq == 0.0 {
        return Err(Error::ZeroConfiguration);
    }
    let acc = accelerations(&q, sys)?;
    let lambda = -mass_inner(masses, &acc, &q.positions) / qq;
    let miss: Vec<Vec2> = acc.iter().zip(&q.positions).map(|(&a, &p)| a + p * lambda).collect();
    let scale = mass_norm(masses, &acc);
    let residual = if scale > 0.0 { mass_norm(masses, &miss) / scale } else { 0.0 };
    Ok(CentralResidual { lambda, residual })
}

/// Signed mismatch of the collinear central condition with bodies at
/// `0, 1, 1 + x` along a line (labels from `ordering`, middle body second).
/// Zero exactly at Euler's spacing ratio.
pub fn collinear_condition(masses: &[f64], ordering: [usize; 3], x: f64) -> f64 {
    let xs = [0.0, 1.0, 1.0 + x];
    let m = [masses[ordering[0]], masses[ordering[1]], masses[ordering[2]]];
    let mut acc = [0.0; 3];
    for a in 0..3 {
        for b in 0..3 {
            if a != b {
                let d = xs[b] - xs[a];
                acc[a] += m[b] * d.signum() / (d * d);
            }
        }
    }
    (acc[1] - acc[0]) - (acc[2] - acc[1]) / x
}

/// Euler's collinear central configuration for `ordering` (the middle entry is
/// the body between the other two), centered and scaled to unit moment of
/// inertia, laid out along the x axis.
pub fn find_collinear_cc(masses: &[f64], ordering: [usize; 3]) -> Result<Configuration> {
    if masses.len() != 3 {
        return Err(Error::NeedsThreeBodies { found: masses.len() });
    }
    let mut seen = [false; 3];
    for &i in &ordering {
        if i >= 3 || seen[i] {
            return Err(Error::BodyCountMismatch { expected: 3, found: i });
        }
        seen[i] = true;
    }
    let x = euler_ratio(masses, ordering)?;
    let mut positions = alloc::vec![Vec2::ZERO; 3];
    positions[ordering[0]] = Vec2::new(0.0, 0.0);
    positions[ordering[1]] = Vec2::new(1.0, 0.0);
    positions[ordering[2]] = Vec2::new(1.0 + x, 0.0);
    let cfg = Configuration { positions }.centered(masses);
    let cfg = cfg.scaled(1.0 / libm::sqrt(cfg.moment_of_inertia(masses)));

    let sys = MassSystem::gravitational(masses.to_vec())?;
    let check = central_residual(&cfg, &sys)?;
    if !check.is_certified() {
        return Err(Error::NotCentral { residual: check.residual });
    }
    Ok(cfg)
}

/// Spacing ratio `|q_k - q_j| / |q_j - q_i|` solving the collinear condition,
/// by bisection in `ln x`. The condition is positive as `x → 0` and negative as
/// `x → ∞` for positive masses.
pub fn euler_ratio(masses: &[f64], ordering: [usize; 3]) -> Result<f64> {
    let f = |u: f64| collinear_condition(masses, ordering, libm::exp(u));
    let (mut lo, mut hi) = (-30.0f64, 30.0f64);
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo > 0.0 && fhi < 0.0) {
        return Err(Error::NoRoot);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(libm::exp(0.5 * (lo + hi)))
}

/// Time for a dropped central configuration to collapse to total collision.
///
/// The scale factor obeys `r̈ = -λ/r²` (gravity) or `r̈ = -λ r` (springs) with
/// `r(0) = 1`, giving `(π/2)/√(2λ)` and `(π/2)/√λ` respectively.
pub fn homothetic_collapse_time(config: &Configuration, sys: &MassSystem) -> Result<f64> {
    let c = central_residual(config, sys)?;
    if !c.is_certified() {
        return Err(Error::NotCentral { residual: c.residual });
    }
    Ok(match sys.force() {
        ForceModel::Newtonian { .. } => FRAC_PI_2 / libm::sqrt(2.0 * c.lambda),
        ForceModel::Hooke { .. } => FRAC_PI_2 / libm::sqrt(c.lambda),
    })
}
