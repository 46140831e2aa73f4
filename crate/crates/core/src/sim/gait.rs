//! Prescribed flapping gait.
//!
//! Proximal flap and distal fold are phase-shifted sinusoids; with a quarter
//! period of fold lead the distal segment folds during the upstroke and
//! extends for the downstroke. Mean offsets bias the stroke so the two half
//! strokes are aerodynamically distinct.

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::vehicle::{WingJointState, WingParams};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaitParams {
    pub frequency_hz: f64,
    /// Proximal flap amplitude, rad.
    pub proximal_amplitude: f64,
    /// Distal fold amplitude, rad.
    pub distal_amplitude: f64,
    /// Phase lead of the fold relative to the flap, rad.
    pub fold_phase: f64,
    pub proximal_mean: f64,
    pub distal_mean: f64,
}

impl Default for GaitParams {
    fn default() -> Self {
        Self {
            frequency_hz: 5.0,
            proximal_amplitude: 0.61,
            distal_amplitude: 0.79,
            fold_phase: std::f64::consts::FRAC_PI_2,
            proximal_mean: 0.2,
            distal_mean: -0.15,
        }
    }
}

impl GaitParams {
    /// Frozen wings at the mean angles.
    pub fn frozen(&self) -> Self {
        Self { proximal_amplitude: 0.0, distal_amplitude: 0.0, ..self.clone() }
    }

    pub fn validate(&self, wing: &WingParams) -> Result<(), SimError> {
        if !(self.frequency_hz > 0.0) {
            return Err(SimError::Config(format!(
                "gait.frequency_hz must be positive, got {}",
                self.frequency_hz
            )));
        }
        let p_max = self.proximal_mean.abs() + self.proximal_amplitude.abs();
        let d_max = self.distal_mean.abs() + self.distal_amplitude.abs();
        if p_max > wing.joint_limit || d_max > wing.joint_limit {
            return Err(SimError::Config(format!(
                "gait amplitudes exceed the joint limit of {} rad (proximal reaches {p_max:.3}, distal {d_max:.3})",
                wing.joint_limit
            )));
        }
        Ok(())
    }
}

/// Joint angles, rates and accelerations at time t.
pub fn gait(t: f64, p: &GaitParams) -> WingJointState {
    let w = 2.0 * std::f64::consts::PI * p.frequency_hz;
    let (sp, cp) = (w * t).sin_cos();
    let (sd, cd) = (w * t + p.fold_phase).sin_cos();
    WingJointState {
        alpha3: p.proximal_mean + p.proximal_amplitude * sp,
        alpha4: p.distal_mean + p.distal_amplitude * sd,
        alpha3_dot: p.proximal_amplitude * w * cp,
        alpha4_dot: p.distal_amplitude * w * cd,
        alpha3_ddot: -p.proximal_amplitude * w * w * sp,
        alpha4_ddot: -p.distal_amplitude * w * w * sd,
    }
}
