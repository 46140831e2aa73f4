//! Scenario orchestration: configuration, gait, time integration of the
//! coupled plant at a fine step with the observer/controller ticking at the
//! control rate, trajectory logging, and summary metrics.

mod config;
mod figures;
mod gait;
mod integrator;
mod log;
mod metrics;
mod model;
mod scenario;

pub use config::{InitialConditions, SensorConfig, SimConfig};
pub use figures::{plot_series, tidy_csv_bytes, Figure};
pub use gait::{gait, GaitParams};
pub use integrator::rk4_step;
pub use log::{controller_from_metadata, write_atomic, RunMetadata, TrajectoryLog};
pub use metrics::{dominant_frequency, frequency_resolution, SummaryMetrics};
pub use model::{CoupledModel, CoupledState, EnergyBreakdown, Evaluation, WingOutputs};
pub use scenario::{
    initial_state, passive_energy_audit, run_scenario, run_to_files, EnergyAudit, ScenarioOutcome,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("integration failure at t = {t:.6} s (non-finite state or derivative)")]
    IntegrationFailure { t: f64 },
    #[error("observer divergence at t = {t:.6} s: {detail}")]
    ObserverDivergence { t: f64, detail: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Aero(#[from] crate::aero::AeroError),
    #[error(transparent)]
    Vehicle(#[from] crate::vehicle::VehicleError),
    #[error(transparent)]
    Control(#[from] crate::control::ControlError),
    #[error(transparent)]
    Geometry(#[from] crate::geom::GeomError),
}
