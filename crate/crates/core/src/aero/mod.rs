//! Unsteady lifting-line aerodynamics.
//!
//! Each wing is discretized into spanwise strips. The bound circulation over
//! the span is a truncated Fourier sine series in the transformed coordinate
//! theta = arccos(s / l); the indicial (Wagner-type) response of each strip
//! is carried by a pair of first-order lag states, so the whole wing model is
//! one linear state space marched alongside the rigid-body dynamics.

mod forces;
mod strips;
mod system;
mod wagner;

pub use forces::{strip_forces, StripFlow, StripForces};
pub use strips::{build_strips, circulation, induced_kinematics, ChordProfile, StripGeometry};
pub use system::{
    AeroDerivative, AeroState, AeroSystemMatrices, HarmonicBasis, LagRealization, StripKinematics,
};
pub use wagner::{wagner_phi, WagnerCoefficients, WagnerForm};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AeroError {
    #[error("invalid strip geometry: {0}")]
    Geometry(String),
    #[error("invalid Wagner coefficients: {0}")]
    Wagner(String),
    #[error("aerodynamic system configuration: {0}")]
    Configuration(String),
    #[error("singular stacked circulation matrix (collinear strip stations)")]
    SingularSystem,
    #[error("aerodynamic state-space is unstable (eigenvalue with real part {0:.3e})")]
    UnstableSystem(f64),
    #[error("non-finite value in aerodynamic {0}")]
    NonFinite(&'static str),
}

/// Aerodynamics configuration block; one instance describes one wing pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AeroConfig {
    /// Strips per wing.
    pub strips: usize,
    /// Fourier order of the circulation series (must equal `strips`).
    pub fourier_order: usize,
    /// Semi-wingspan per wing in meters.
    pub semi_span: f64,
    /// Chord profile along the span.
    pub chord: ChordProfile,
    pub wagner: WagnerCoefficients,
    pub realization: LagRealization,
    pub harmonics: HarmonicBasis,
    /// Air density in kg/m^3.
    pub rho: f64,
    /// Master switch; disabled wings produce zero force and frozen states.
    pub enabled: bool,
}

impl Default for AeroConfig {
    fn default() -> Self {
        Self {
            strips: 8,
            fourier_order: 8,
            semi_span: 0.15,
            chord: ChordProfile::Constant { chord: 0.05 },
            wagner: WagnerCoefficients::jones(),
            realization: LagRealization::Autonomous,
            harmonics: HarmonicBasis::Odd,
            rho: 1.225,
            enabled: true,
        }
    }
}

impl AeroConfig {
    pub fn build_system(&self) -> Result<AeroSystemMatrices, AeroError> {
        let geom = build_strips(self.strips, self.semi_span, &self.chord)?;
        AeroSystemMatrices::assemble(
            geom,
            self.wagner.clone(),
            self.fourier_order,
            self.realization,
            self.harmonics,
        )
    }
}
