//! Planar N-body "drop" dynamics and brake-orbit analysis.
//!
//! Bodies released from rest under Newtonian gravity (or Hooke springs) are
//! integrated with a high-order Taylor method that keeps per-step polynomial
//! dense output. On top of the integrator sit event detection (brake instants,
//! syzygies, close approaches, escapes), brake-pair extraction, isometry plus
//! label-permutation fitting between brake triangles, the shape-sphere
//! projection and central-configuration tools.
//!
//! The crate is `no_std` and only needs an allocator.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod brake;
pub mod central;
pub mod dynamics;
mod error;
pub mod integrator;
pub mod permutation;
pub mod shape;
pub mod symmetry;
pub mod taylor;
mod vector;

pub use error::{Error, Result};
pub use vector::Vec2;

pub use dynamics::{
    accelerations, conserved_quantities, potential_energy, reduce_to_center_of_mass, Configuration,
    ConservedQuantities, ForceModel, MassSystem, PhaseState,
};
pub use integrator::{
    integrate, locate_event, EventKind, EventRecord, EventSpec, IntegratorSettings, Status, Trajectory,
};
pub use permutation::Permutation;
pub use taylor::{adaptive_step, taylor_coefficients, StepControl, TaylorStep};
