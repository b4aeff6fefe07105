//! Isometry-plus-relabelling symmetries between configurations.
//!
//! An element `F = O ∘ σ` acts on centered configurations by
//! `(F q)_a = O q_{σ⁻¹(a)}`. Fitting runs the closed-form planar Procrustes
//! solution for every admissible relabelling and both orientation classes and
//! keeps the global minimum.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::dynamics::{mass_norm, Configuration, PhaseState};
use crate::integrator::Trajectory;
use crate::permutation::Permutation;
use crate::taylor::TaylorStep;
use crate::{Error, Result, Vec2};

/// Angles closer than this (radians) to a special value are treated as equal.
const ANGLE_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryElement {
    /// Row-major orthogonal 2x2 matrix.
    pub ortho: [[f64; 2]; 2],
    pub perm: Permutation,
}

impl SymmetryElement {
    pub fn identity(n: usize) -> Self {
        Self::rotation(0.0, Permutation::identity(n))
    }

    /// Counter-clockwise rotation by `angle` radians composed with `perm`.
    pub fn rotation(angle: f64, perm: Permutation) -> Self {
        let (s, c) = libm::sincos(angle);
        SymmetryElement { ortho: [[c, -s], [s, c]], perm }
    }

    /// Reflection across the line through the origin at `axis` radians.
    pub fn reflection(axis: f64, perm: Permutation) -> Self {
        let (s, c) = libm::sincos(2.0 * axis);
        SymmetryElement { ortho: [[c, s], [s, -c]], perm }
    }

    /// `q_a ↦ -q_a`.
    pub fn central_inversion(n: usize) -> Self {
        SymmetryElement { ortho: [[-1.0, 0.0], [0.0, -1.0]], perm: Permutation::identity(n) }
    }

    pub fn det(&self) -> f64 {
        let o = &self.ortho;
        o[0][0] * o[1][1] - o[0][1] * o[1][0]
    }

    /// `max |OᵀO - I|` entrywise.
    pub fn orthogonality_error(&self) -> f64 {
        let o = &self.ortho;
        let m00 = o[0][0] * o[0][0] + o[1][0] * o[1][0] - 1.0;
        let m11 = o[0][1] * o[0][1] + o[1][1] * o[1][1] - 1.0;
        let m01 = o[0][0] * o[0][1] + o[1][0] * o[1][1];
        m00.abs().max(m11.abs()).max(m01.abs())
    }

    pub fn is_valid(&self) -> bool {
        self.orthogonality_error() < 1e-12 && (self.det().abs() - 1.0).abs() < 1e-12
    }

    pub fn is_rotation(&self) -> bool {
        self.det() > 0.0
    }

    fn act<T: Copy>(&self, xs: &[T], f: impl Fn(T) -> T) -> Vec<T> {
        let inv = self.perm.inverse();
        (0..xs.len()).map(|a| f(xs[inv.apply(a)])).collect()
    }

    pub fn apply_vectors(&self, xs: &[Vec2]) -> Vec<Vec2> {
        self.act(xs, |v| v.transformed(&self.ortho))
    }

    pub fn apply(&self, q: &Configuration) -> Configuration {
        Configuration { positions: self.apply_vectors(&q.positions) }
    }

    pub fn apply_state(&self, s: &PhaseState) -> PhaseState {
        PhaseState { config: self.apply(&s.config), velocities: self.apply_vectors(&s.velocities), time: s.time }
    }

    /// Image of a whole Taylor step (the map is linear, so coefficients map
    /// one by one), shifted to start at `t0`.
    pub fn apply_step(&self, step: &TaylorStep, t0: f64) -> TaylorStep {
        let w = step.order() + 1;
        let inv = self.perm.inverse();
        let mut coeffs = Vec::with_capacity(step.coefficients().len());
        for a in 0..step.n() {
            let src = step.body_coefficients(inv.apply(a));
            coeffs.extend(src.iter().map(|c| c.transformed(&self.ortho)));
        }
        debug_assert_eq!(coeffs.len(), w * step.n());
        TaylorStep::from_parts(t0, step.dt, step.order(), coeffs).expect("same layout")
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SymmetryElement) -> SymmetryElement {
        let (a, b) = (&self.ortho, &other.ortho);
        let mut o = [[0.0; 2]; 2];
        for (i, row) in o.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        SymmetryElement { ortho: o, perm: self.perm.compose(&other.perm) }
    }

    /// Rotation angle (radians, in `(-π, π]`) for proper elements; for
    /// reflections the doubled axis angle.
    pub fn raw_angle(&self) -> f64 {
        normalize_angle(libm::atan2(self.ortho[1][0], self.ortho[0][0]))
    }
}

fn normalize_angle(mut a: f64) -> f64 {
    while a <= -PI {
        a += 2.0 * PI;
    }
    while a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Map `(-180, 180]` degrees, snapping values within `tol_deg` of 0/±180.
fn snap_deg(deg: f64, tol_deg: f64) -> f64 {
    if deg.abs() <= tol_deg {
        0.0
    } else if (deg.abs() - 180.0).abs() <= tol_deg {
        180.0
    } else {
        deg
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SymmetryClass {
    Identity,
    /// Angle in degrees, `(-180, 180]`. `Rotation(180)` is central inversion.
    Rotation(f64),
    /// Axis angle in degrees, `(-90, 90]`.
    Reflection(f64),
    RotationWithSwap(f64, Permutation),
    ReflectionWithSwap(f64, Permutation),
}

fn fmt_deg(f: &mut fmt::Formatter<'_>, deg: f64) -> fmt::Result {
    let rounded = libm::round(deg * 1e6) / 1e6;
    if rounded == libm::trunc(rounded) {
        write!(f, "{}", rounded as i64)
    } else {
        write!(f, "{rounded}")
    }
}

/// `Identity`, `Rotation(180)`, `Reflection(90)`, `RotationWithSwap(180,(23))`, ...
impl fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymmetryClass::Identity => f.write_str("Identity"),
            SymmetryClass::Rotation(d) => {
                f.write_str("Rotation(")?;
                fmt_deg(f, *d)?;
                f.write_str(")")
            }
            SymmetryClass::Reflection(d) => {
                f.write_str("Reflection(")?;
                fmt_deg(f, *d)?;
                f.write_str(")")
            }
            SymmetryClass::RotationWithSwap(d, p) => {
                f.write_str("RotationWithSwap(")?;
                fmt_deg(f, *d)?;
                write!(f, ",{p})")
            }
            SymmetryClass::ReflectionWithSwap(d, p) => {
                f.write_str("ReflectionWithSwap(")?;
                fmt_deg(f, *d)?;
                write!(f, ",{p})")
            }
        }
    }
}

/// Classify with angles compared to 0 and 180 degrees at `tol_deg`.
pub fn classify_with_tolerance(f: &SymmetryElement, tol_deg: f64) -> SymmetryClass {
    let raw = f.raw_angle().to_degrees();
    let swap = !f.perm.is_identity();
    if f.is_rotation() {
        let deg = snap_deg(raw, tol_deg);
        match (swap, deg == 0.0) {
            (false, true) => SymmetryClass::Identity,
            (false, false) => SymmetryClass::Rotation(deg),
            (true, _) => SymmetryClass::RotationWithSwap(deg, f.perm.clone()),
        }
    } else {
        // axis angle is half the matrix angle; lines live in (-90, 90]
        let mut axis = raw / 2.0;
        if axis <= -90.0 + tol_deg {
            axis += 180.0;
        }
        if (axis - 90.0).abs() <= tol_deg {
            axis = 90.0;
        } else if axis.abs() <= tol_deg {
            axis = 0.0;
        }
        if swap {
            SymmetryClass::ReflectionWithSwap(axis, f.perm.clone())
        } else {
            SymmetryClass::Reflection(axis)
        }
    }
}

/// Classify with a tight (1e-9 rad) angle tolerance.
pub fn classify(f: &SymmetryElement) -> SymmetryClass {
    classify_with_tolerance(f, ANGLE_EPS.to_degrees())
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsometryFit {
    pub element: SymmetryElement,
    /// `Σ m_a |(F A)_a - B_a|²`.
    pub residual: f64,
}

/// Relabellings that only exchange bodies of equal mass.
pub fn admissible_permutations(masses: &[f64]) -> Vec<Permutation> {
    Permutation::all(masses.len())
        .into_iter()
        .filter(|p| {
            (0..masses.len()).all(|i| {
                let (a, b) = (masses[i], masses[p.apply(i)]);
                (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
            })
        })
        .collect()
}

fn residual(masses: &[f64], p: &[Vec2], b: &[Vec2], o: &[[f64; 2]; 2]) -> f64 {
    p.iter().zip(b).zip(masses).map(|((x, y), &m)| m * (x.transformed(o) - *y).norm_sq()).sum()
}

/// Best proper and improper orthogonal maps sending `p` onto `b` (labels
/// already matched).
pub fn procrustes(masses: &[f64], p: &[Vec2], b: &[Vec2]) -> [(SymmetryElement, f64); 2] {
    let n = masses.len();
    let (mut dot, mut cross, mut rc, mut rs) = (0.0, 0.0, 0.0, 0.0);
    for ((x, y), &m) in p.iter().zip(b).zip(masses) {
        dot += m * x.dot(*y);
        cross += m * x.wedge(*y);
        rc += m * (y.x * x.x - y.y * x.y);
        rs += m * (y.x * x.y + y.y * x.x);
    }
    let rot = SymmetryElement::rotation(libm::atan2(cross, dot), Permutation::identity(n));
    let refl = SymmetryElement::reflection(0.5 * libm::atan2(rs, rc), Permutation::identity(n));
    let r_rot = residual(masses, p, b, &rot.ortho);
    let r_refl = residual(masses, p, b, &refl.ortho);
    [(rot, r_rot), (refl, r_refl)]
}

fn preference(e: &SymmetryElement) -> (u8, u8, f64) {
    let class_rank = match classify(e) {
        SymmetryClass::Identity => 0,
        _ if e.perm.is_identity() => 1,
        _ => 2,
    };
    (class_rank, u8::from(!e.is_rotation()), e.raw_angle().abs())
}

/// Global minimizer over admissible relabellings and both orientation classes
/// of `Σ m_a |O a_{σ⁻¹(a)} - b_a|²`. Both inputs must be centered.
pub fn fit_isometry(a: &Configuration, b: &Configuration, masses: &[f64]) -> Result<IsometryFit> {
    fit_over(a, b, masses, admissible_permutations(masses), true)
}

/// Fit restricted to the identity relabelling and, when `proper_only`, to
/// rotations.
pub fn fit_labelled(a: &Configuration, b: &Configuration, masses: &[f64], proper_only: bool) -> Result<IsometryFit> {
    fit_over(a, b, masses, alloc::vec![Permutation::identity(masses.len())], !proper_only)
}

fn fit_over(
    a: &Configuration,
    b: &Configuration,
    masses: &[f64],
    perms: Vec<Permutation>,
    allow_reflection: bool,
) -> Result<IsometryFit> {
    let n = masses.len();
    for c in [a, b] {
        if c.n() != n {
            return Err(Error::BodyCountMismatch { expected: n, found: c.n() });
        }
    }
    let (na, nb) = (mass_norm(masses, &a.positions), mass_norm(masses, &b.positions));
    let scale = na * na + nb * nb;
    let tie = 1e-12 * scale + 1e-300;
    let mut best: Option<IsometryFit> = None;
    for perm in perms {
        let relabel = SymmetryElement { ortho: [[1.0, 0.0], [0.0, 1.0]], perm: perm.clone() };
        let p = relabel.apply_vectors(&a.positions);
        for (k, (o, r)) in procrustes(masses, &p, &b.positions).into_iter().enumerate() {
            if k == 1 && !allow_reflection {
                continue;
            }
            let cand = IsometryFit { element: SymmetryElement { ortho: o.ortho, perm: perm.clone() }, residual: r };
            let replace = match &best {
                None => true,
                Some(cur) if cand.residual < cur.residual - tie => true,
                Some(cur) if cand.residual <= cur.residual + tie => {
                    preference(&cand.element) < preference(&cur.element)
                }
                Some(_) => false,
            };
            if replace {
                best = Some(cand);
            }
        }
    }
    best.ok_or(Error::NoRoot)
}

/// `max_t ‖q(t + T/2) - F q(t)‖` (mass metric) over `samples` times spanning
/// the first half period.
pub fn verify_halfperiod_relation(traj: &Trajectory, period: f64, f: &SymmetryElement, samples: usize) -> Result<f64> {
    let t0 = traj.t_start();
    if traj.t_end() < t0 + period {
        return Err(Error::OutOfRange { t: t0 + period, start: t0, end: traj.t_end() });
    }
    let masses = traj.system().masses();
    let samples = samples.max(2);
    let mut worst = 0.0f64;
    for i in 0..samples {
        let t = t0 + 0.5 * period * i as f64 / (samples - 1) as f64;
        let later = traj.dense_eval((t + 0.5 * period).min(traj.t_end()))?;
        let image = f.apply(&traj.dense_eval(t)?.config);
        let diff: Vec<Vec2> = later.positions().iter().zip(&image.positions).map(|(&x, &y)| x - y).collect();
        worst = worst.max(mass_norm(masses, &diff));
    }
    Ok(worst)
}

/// What the quarter-period configuration must look like given the element
/// relating the two brake triangles: the fixed-point set of `F`.
#[derive(Clone, Debug, PartialEq)]
pub enum FixedSet {
    /// `F` is the identity; no constraint.
    Unconstrained,
    /// Every body on the reflection axis (a syzygy on that line).
    SyzygyOnAxis { axis_deg: f64 },
    /// Collinear, with `middle` at the midpoint of the swapped pair.
    EulerConfiguration { middle: usize, swapped: (usize, usize) },
    /// Swapped pair mirrored across the axis, remaining body on it.
    MirrorPair { axis_deg: f64, on_axis: usize, swapped: (usize, usize) },
    /// Equilateral triangle (rotation by ±120 degrees with a 3-cycle).
    Equilateral,
    /// The swapped pair coincides.
    BinaryCollision { pair: (usize, usize) },
    /// Only `q = 0` is fixed. Impossible for gravity.
    TotalCollision,
}

impl FixedSet {
    /// Whether a collision-free gravitational orbit can realize this.
    pub fn possible_without_collision(&self) -> bool {
        !matches!(self, FixedSet::TotalCollision | FixedSet::BinaryCollision { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            FixedSet::Unconstrained => "Unconstrained",
            FixedSet::SyzygyOnAxis { .. } => "SyzygyOnAxis",
            FixedSet::EulerConfiguration { .. } => "EulerConfiguration",
            FixedSet::MirrorPair { .. } => "MirrorPair",
            FixedSet::Equilateral => "Equilateral",
            FixedSet::BinaryCollision { .. } => "BinaryCollision",
            FixedSet::TotalCollision => "TotalCollision",
        }
    }
}

/// Fixed-point set of `F` on centered three-body configurations.
pub fn predict_fixed_set(f: &SymmetryElement) -> FixedSet {
    let tol = 1e-6;
    let cycles = f.perm.cycles();
    match classify_with_tolerance(f, tol) {
        SymmetryClass::Identity => FixedSet::Unconstrained,
        SymmetryClass::Rotation(_) => FixedSet::TotalCollision,
        SymmetryClass::Reflection(axis_deg) => FixedSet::SyzygyOnAxis { axis_deg },
        SymmetryClass::RotationWithSwap(deg, perm) => match (perm.as_transposition(), deg) {
            (Some(pair), 0.0) => FixedSet::BinaryCollision { pair },
            (Some(pair), 180.0) => {
                let middle = perm.fixed_points().first().copied().unwrap_or(0);
                FixedSet::EulerConfiguration { middle, swapped: pair }
            }
            (None, d) if cycles.len() == 1 && cycles[0].len() == 3 && (d.abs() - 120.0).abs() <= tol => {
                FixedSet::Equilateral
            }
            _ => FixedSet::TotalCollision,
        },
        SymmetryClass::ReflectionWithSwap(axis_deg, perm) => match perm.as_transposition() {
            Some(pair) => {
                let on_axis = perm.fixed_points().first().copied().unwrap_or(0);
                FixedSet::MirrorPair { axis_deg, on_axis, swapped: pair }
            }
            None => FixedSet::TotalCollision,
        },
    }
}

/// `‖F q - q‖` in the mass metric: how far `q` is from being fixed by `F`.
pub fn fixed_point_deviation(f: &SymmetryElement, q: &Configuration, masses: &[f64]) -> f64 {
    let image = f.apply(q);
    let diff: Vec<Vec2> = image.positions.iter().zip(&q.positions).map(|(&x, &y)| x - y).collect();
    mass_norm(masses, &diff)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InvolutionKind {
    /// `O = I`.
    Trivial,
    /// `O = -I`: rotation by 180 degrees.
    HalfTurn,
    Reflection,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InvolutionReport {
    Holds(InvolutionKind),
    /// `F²(q0) ≠ q0`, or it holds only because `O² ≠ I` fixes `q0` anyway.
    Violation {
        deviation: f64,
    },
}

/// Check `F²(q0) = q0` (relative to the size of `q0`), then that `O² = I`.
pub fn involution_check(f: &SymmetryElement, q0: &Configuration, tol: f64) -> InvolutionReport {
    let f2 = f.compose(f);
    let image = f2.apply(q0);
    let size = q0.positions.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let deviation = image.positions.iter().zip(&q0.positions).map(|(&x, &y)| (x - y).norm()).fold(0.0, f64::max)
        / if size > 0.0 { size } else { 1.0 };
    if deviation > tol {
        return InvolutionReport::Violation { deviation };
    }
    let o2 = &f2.ortho;
    let square_error = (o2[0][0] - 1.0).abs().max((o2[1][1] - 1.0).abs()).max(o2[0][1].abs()).max(o2[1][0].abs());
    if square_error > 1e-9 {
        return InvolutionReport::Violation { deviation: square_error };
    }
    if !f.is_rotation() {
        InvolutionReport::Holds(InvolutionKind::Reflection)
    } else if f.ortho[0][0] < 0.0 {
        InvolutionReport::Holds(InvolutionKind::HalfTurn)
    } else {
        InvolutionReport::Holds(InvolutionKind::Trivial)
    }
}
