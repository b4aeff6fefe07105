use core::fmt;

use crate::integrator::Status;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the dynamics and analysis routines.
///
/// Body indices are stored zero-based and displayed one-based.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    InvalidMass {
        index: usize,
        value: f64,
    },
    InvalidForceModel(&'static str),
    BodyCountMismatch {
        expected: usize,
        found: usize,
    },
    NonFinite,
    /// Two bodies coincide (or are closer than the collision threshold).
    Collision {
        a: usize,
        b: usize,
    },
    /// The configuration is the total collision `q = 0`.
    ZeroConfiguration,
    OutOfRange {
        t: f64,
        start: f64,
        end: f64,
    },
    InvalidOrder(usize),
    InvalidTolerance(f64),
    /// A routine that needs exactly three bodies was handed `found`.
    NeedsThreeBodies {
        found: usize,
    },
    NotCentral {
        residual: f64,
    },
    NoRoot,
    /// Integration stopped before reaching the requested time.
    IntegrationStopped {
        status: Status,
        reached: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidMass { index, value } => {
                write!(f, "mass of body {} must be positive and finite, got {value}", index + 1)
            }
            Error::InvalidForceModel(why) => write!(f, "invalid force model: {why}"),
            Error::BodyCountMismatch { expected, found } => {
                write!(f, "expected {expected} bodies, found {found}")
            }
            Error::NonFinite => f.write_str("non-finite coordinate"),
            Error::Collision { a, b } => write!(f, "bodies {} and {} collide", a + 1, b + 1),
            Error::ZeroConfiguration => f.write_str("configuration is the total collision"),
            Error::OutOfRange { t, start, end } => {
                write!(f, "time {t} outside trajectory span [{start}, {end}]")
            }
            Error::InvalidOrder(p) => write!(f, "Taylor order must be at least 2, got {p}"),
            Error::InvalidTolerance(tol) => write!(f, "tolerance must be positive, got {tol}"),
            Error::NeedsThreeBodies { found } => {
                write!(f, "operation requires exactly 3 bodies, found {found}")
            }
            Error::NotCentral { residual } => {
                write!(f, "configuration is not central (normalized residual {residual:e})")
            }
            Error::NoRoot => f.write_str("no root in the search interval"),
            Error::IntegrationStopped { status, reached } => {
                write!(f, "integration stopped at t = {reached} ({status:?})")
            }
        }
    }
}

impl core::error::Error for Error {}
