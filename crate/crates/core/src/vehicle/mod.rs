//! Coupled rigid-body dynamics: guard Newton-Euler equations with the
//! thruster wrench map, the articulated wing-vehicle driven by a prescribed
//! gait, and the elastic-band coupling between them.

mod aerobat;
mod elastic;
mod guard;
mod params;

pub use aerobat::{
    aerobat_accelerations, angular_momentum_about, com_position, gravity_potential,
    gravity_wrench, kinetic_energy, linear_momentum, partitioned_terms, relative_state,
    strip_velocity_jacobian, wing_strip_states, AerobatRelState, AerobatState, ExternalWrench,
    PartitionedTerms, Side, WingJointState, WingStripStates,
};
pub use elastic::{band_equilibrium_offset, elastic_wrench, ElasticWrench};
pub use guard::{
    guard_derivatives, guard_derivatives_full, guard_kinetic_energy, inertial_force,
    mixing_matrix, saturate, thruster_mixing, BodyWrench, GuardDerivative, GuardState,
    ThrusterCommand,
};
pub use params::{AerobatParams, BandParams, GuardParams, WingParams, DEFAULT_GRAVITY};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum VehicleError {
    #[error("invalid vehicle parameters: {0}")]
    Params(String),
    #[error("vehicle inertia matrix is singular at the current configuration")]
    SingularInertia,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}
