//! Desk-scale simulator and control library for a flapping-wing vehicle
//! suspended by elastic bands inside a six-thruster stabilization guard.
//!
//! The crate couples four pieces and closes the loop around them:
//!
//! - [`geom`]: small fixed-size spatial math (rotations, hat map, rate maps).
//! - [`aero`]: unsteady lifting-line aerodynamics on spanwise strips with a
//!   Fourier-parameterized circulation distribution and per-strip indicial
//!   lag states marched as a linear state space.
//! - [`vehicle`]: guard Newton-Euler dynamics with thruster mixing, the
//!   wing-vehicle articulated dynamics driven by a prescribed flapping gait,
//!   and the elastic-band coupling between the two bodies.
//! - [`control`]: an extended-state observer for the wrench the vehicle
//!   transmits to the guard, a feedback-linearizing hover controller, and
//!   minimum-norm thruster allocation.
//!
//! [`sim`] orchestrates plant integration at a fine step with the
//! observer/controller ticking at a lower rate, and writes CSV trajectory
//! logs with a JSON metadata sidecar. [`verify`] hosts the independent
//! numerical oracles (Duhamel quadrature, energy audits, convergence and
//! round-trip checks) and a name-keyed registry of verification suites that
//! both the CLI and the acceptance tests run.

// Validation deliberately writes `!(x > 0.0)` so NaN fails closed; the
// suggested `x <= 0.0` would let NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aero;
pub mod control;
pub mod geom;
pub mod sim;
pub mod vehicle;
pub mod verify;

pub use geom::{EulerAngles, Mat3, Mat4x6, Mat6, Vec3, Vec6};

/// git describe of the build, embedded for log metadata.
pub const GIT_DESCRIBE: &str = env!("AEROBAT_GIT_DESCRIBE");
