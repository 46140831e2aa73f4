//! Extended-state observer and feedback-linearizing hover control.
//!
//! The guard abstraction tracks x1 = (position, Euler attitude), x2 = x1_dot,
//! and an extended state x3: the generalized acceleration the guard receives
//! through the band suspension (vehicle weight, flapping recoil, aerodynamic
//! forces) that its own sensors cannot attribute. The observer estimates x3
//! from the pose measurement alone; the controller cancels the known drift
//! g1 and the estimated disturbance and allocates the remaining wrench to
//! the six thrusters.

mod alloc;
mod law;
mod observer;
mod plant;

pub use alloc::{Allocation, Allocator};
pub use law::{
    cancellation_law, control_law, hover_setpoint_error, ControlOutput, ControllerConfig,
};
pub use observer::{
    error_dynamics_matrix, observer_step, tune_observer, ObserverConfig, ObserverGains,
    ObserverState,
};
pub use plant::GuardAbstraction;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ControlError {
    #[error("control effectiveness is ill-conditioned: {0}")]
    IllConditioned(String),
    #[error("observer tuning failed: {0}")]
    Tuning(String),
    #[error("thruster mixing matrix is rank deficient")]
    AllocationRank,
    #[error("observer diverged: output error norm {0:.3e} exceeds ceiling {1:.3e}")]
    ObserverDivergence(f64, f64),
    #[error(transparent)]
    Geometry(#[from] crate::geom::GeomError),
}
