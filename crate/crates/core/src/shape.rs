//! Shape-sphere coordinates for three bodies.
//!
//! Jacobi vectors `z1 = μ1 (q2 - q1)` and `z2 = μ2 (q3 - c12)` (with `c12` the
//! barycenter of the first pair) are read as complex numbers. The Hopf map
//! `w = ((|z1|² - |z2|²)/2, Re(z̄1 z2), Im(z̄1 z2))` is invariant under
//! simultaneous rotation, and `|w| = I/2` where `I = |z1|² + |z2|²` is the
//! moment of inertia about the center of mass. `w = 0` is total collision,
//! `w3 = 0` is the collinear (syzygy) locus.

use alloc::vec::Vec;

use crate::dynamics::Configuration;
use crate::integrator::Trajectory;
use crate::{Error, Result, Vec2};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapePoint {
    pub w: [f64; 3],
    /// Moment of inertia `I`.
    pub inertia: f64,
}

impl ShapePoint {
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.w.iter().map(|x| x * x).sum())
    }

    /// Point on the unit shape sphere; `None` at total collision.
    pub fn direction(&self) -> Option<[f64; 3]> {
        let r = self.norm();
        (r > 0.0).then(|| [self.w[0] / r, self.w[1] / r, self.w[2] / r])
    }
}

/// Jacobi vectors of a three-body configuration (the (12)-3 splitting).
/// Translation invariant, so centering is not required.
pub fn jacobi_coordinates(config: &Configuration, masses: &[f64]) -> Result<(Vec2, Vec2)> {
    if config.n() != 3 || masses.len() != 3 {
        return Err(Error::NeedsThreeBodies { found: config.n() });
    }
    let q = &config.positions;
    let (m1, m2, m3) = (masses[0], masses[1], masses[2]);
    let m12 = m1 + m2;
    let mu1 = libm::sqrt(m1 * m2 / m12);
    let mu2 = libm::sqrt(m3 * m12 / (m12 + m3));
    let c12 = (q[0] * m1 + q[1] * m2) / m12;
    Ok(((q[1] - q[0]) * mu1, (q[2] - c12) * mu2))
}

pub fn hopf_project(z1: Vec2, z2: Vec2) -> ShapePoint {
    let (a, b) = (z1.norm_sq(), z2.norm_sq());
    let p = z1.conj_mul(z2);
    ShapePoint { w: [0.5 * (a - b), p.x, p.y], inertia: a + b }
}

pub fn shape_point(config: &Configuration, masses: &[f64]) -> Result<ShapePoint> {
    let (z1, z2) = jacobi_coordinates(config, masses)?;
    Ok(hopf_project(z1, z2))
}

/// Shape points at `samples` uniform times over the trajectory.
pub fn shape_trajectory(traj: &Trajectory, samples: usize) -> Result<Vec<(f64, ShapePoint)>> {
    let masses = traj.system().masses();
    traj.sample_uniform(samples).iter().map(|s| Ok((s.time, shape_point(&s.config, masses)?))).collect()
}
