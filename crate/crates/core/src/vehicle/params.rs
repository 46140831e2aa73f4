//! Physical parameter blocks for the guard and the suspended vehicle.
//!
//! Guard mass, inertia and arm lengths are documented placeholders at desk
//! scale; the vehicle totals 40 g with a 30 cm wingspan. Everything here is
//! config-exposed.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::VehicleError;
use crate::geom::{Mat3, Vec3};

pub const DEFAULT_GRAVITY: f64 = 9.8;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GuardParams {
    /// Guard mass, kg.
    pub mass: f64,
    /// Principal body inertia diagonal, kg m^2.
    pub inertia_diag: [f64; 3],
    /// Thruster moment arms, m: roll pair (f2/f4), pitch pair (f1/f3),
    /// yaw pair (f5/f6) on the long axis.
    pub arm_x: f64,
    pub arm_y: f64,
    pub arm_z: f64,
    /// Per-thruster force limits, N.
    pub f_min: f64,
    pub f_max: f64,
    /// When true the yaw pair also contributes to total vertical thrust.
    pub yaw_thrusters_vertical: bool,
}

impl Default for GuardParams {
    fn default() -> Self {
        Self {
            mass: 0.10,
            inertia_diag: [2.5e-3, 2.5e-3, 4.0e-3],
            arm_x: 0.15,
            arm_y: 0.15,
            arm_z: 0.25,
            f_min: 0.0,
            f_max: 0.6,
            yaw_thrusters_vertical: true,
        }
    }
}

impl GuardParams {
    pub fn inertia(&self) -> Mat3 {
        Matrix3::from_diagonal(&Vec3::new(
            self.inertia_diag[0],
            self.inertia_diag[1],
            self.inertia_diag[2],
        ))
    }

    pub fn inertia_inv(&self) -> Mat3 {
        Matrix3::from_diagonal(&Vec3::new(
            1.0 / self.inertia_diag[0],
            1.0 / self.inertia_diag[1],
            1.0 / self.inertia_diag[2],
        ))
    }

    pub fn validate(&self) -> Result<(), VehicleError> {
        if !(self.mass > 0.0) {
            return Err(VehicleError::Params("guard mass must be positive".into()));
        }
        if self.inertia_diag.iter().any(|&j| !(j > 0.0)) {
            return Err(VehicleError::Params("guard inertia must be positive definite".into()));
        }
        if !(self.arm_x > 0.0 && self.arm_y > 0.0 && self.arm_z > 0.0) {
            return Err(VehicleError::Params("thruster arms must be positive".into()));
        }
        if !(self.f_min >= 0.0 && self.f_min < self.f_max) {
            return Err(VehicleError::Params(format!(
                "thruster bounds need 0 <= f_min < f_max, got [{}, {}]",
                self.f_min, self.f_max
            )));
        }
        Ok(())
    }
}

/// Elastic suspension between the guard and the vehicle torso: four linear
/// bands between fixed attachment points. With `rest_length` zero the band
/// potential is the pure quadratic of the relative displacement; pretension
/// comes from the geometric stretch of the attachment pattern.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandParams {
    /// Total elastic coefficient K, N/m, split evenly over the four bands.
    pub stiffness: f64,
    /// Total linear damping, N s/m, split evenly; zero keeps the suspension
    /// conservative for energy audits.
    pub damping: f64,
    /// Band rest length, m.
    pub rest_length: f64,
    /// Attachment points in the guard frame.
    pub guard_points: [[f64; 3]; 4],
    /// Attachment points in the torso frame.
    pub vehicle_points: [[f64; 3]; 4],
    pub enabled: bool,
}

impl Default for BandParams {
    fn default() -> Self {
        Self {
            stiffness: 12.0,
            damping: 0.2,
            rest_length: 0.0,
            guard_points: [
                [0.12, 0.12, 0.0],
                [0.12, -0.12, 0.0],
                [-0.12, 0.12, 0.0],
                [-0.12, -0.12, 0.0],
            ],
            vehicle_points: [
                [0.03, 0.02, 0.0],
                [0.03, -0.02, 0.0],
                [-0.03, 0.02, 0.0],
                [-0.03, -0.02, 0.0],
            ],
            enabled: true,
        }
    }
}

impl BandParams {
    pub fn guard_point(&self, i: usize) -> Vec3 {
        Vec3::from_row_slice(&self.guard_points[i])
    }

    pub fn vehicle_point(&self, i: usize) -> Vec3 {
        Vec3::from_row_slice(&self.vehicle_points[i])
    }

    pub fn per_band_stiffness(&self) -> f64 {
        self.stiffness / 4.0
    }

    pub fn per_band_damping(&self) -> f64 {
        self.damping / 4.0
    }

    pub fn validate(&self) -> Result<(), VehicleError> {
        if self.stiffness < 0.0 || self.damping < 0.0 || self.rest_length < 0.0 {
            return Err(VehicleError::Params("band parameters must be non-negative".into()));
        }
        Ok(())
    }
}

/// Articulated wing geometry: one proximal and one distal rod segment per
/// side, hinged on fore-aft axes so flap and fold both move in the y-z plane
/// of the torso frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WingParams {
    /// Shoulder joint offset from the torso origin, m.
    pub shoulder_y: f64,
    pub shoulder_z: f64,
    pub proximal_length: f64,
    pub distal_length: f64,
    pub proximal_mass: f64,
    pub distal_mass: f64,
    /// Mechanical joint limits, rad.
    pub joint_limit: f64,
}

impl Default for WingParams {
    fn default() -> Self {
        Self {
            shoulder_y: 0.02,
            shoulder_z: 0.01,
            proximal_length: 0.06,
            distal_length: 0.09,
            proximal_mass: 0.004,
            distal_mass: 0.002,
            joint_limit: 1.4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AerobatParams {
    pub torso_mass: f64,
    pub torso_inertia_diag: [f64; 3],
    pub wing: WingParams,
    pub bands: BandParams,
}

impl Default for AerobatParams {
    fn default() -> Self {
        Self {
            torso_mass: 0.028,
            torso_inertia_diag: [1.0e-5, 2.0e-5, 2.5e-5],
            wing: WingParams::default(),
            bands: BandParams::default(),
        }
    }
}

impl AerobatParams {
    /// Total vehicle mass, torso plus both wings.
    pub fn total_mass(&self) -> f64 {
        self.torso_mass + 2.0 * (self.wing.proximal_mass + self.wing.distal_mass)
    }

    pub fn torso_inertia(&self) -> Mat3 {
        Matrix3::from_diagonal(&Vec3::new(
            self.torso_inertia_diag[0],
            self.torso_inertia_diag[1],
            self.torso_inertia_diag[2],
        ))
    }

    pub fn validate(&self) -> Result<(), VehicleError> {
        if !(self.torso_mass > 0.0) {
            return Err(VehicleError::Params("torso mass must be positive".into()));
        }
        if self.torso_inertia_diag.iter().any(|&j| !(j > 0.0)) {
            return Err(VehicleError::Params("torso inertia must be positive definite".into()));
        }
        let w = &self.wing;
        if !(w.proximal_length > 0.0
            && w.distal_length > 0.0
            && w.proximal_mass > 0.0
            && w.distal_mass > 0.0)
        {
            return Err(VehicleError::Params("wing segment geometry must be positive".into()));
        }
        self.bands.validate()
    }
}
