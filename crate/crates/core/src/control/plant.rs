//! Guard plant abstraction in output coordinates.
//!
//! With x1 = [p; q] (world position, Z-Y-X Euler attitude) and x2 = x1_dot,
//! the guard dynamics in these coordinates read x2_dot = g1 + g2 u + g3 x3:
//!
//! - g1 collects gravity and the Euler-equation bias,
//!   g1 = [-g e3; W J^-1 (-omega x J omega) + Wdot omega];
//! - g2 maps the six thruster forces through the mixing matrix, the current
//!   attitude (translation) and the rate map (rotation);
//! - g3 (identity by default) injects the extended state x3, the generalized
//!   acceleration transmitted by the suspension.
//!
//! Everything is computed from the measured (x1, x2) each control tick.

use nalgebra::SMatrix;

use super::ControlError;
use crate::geom::{
    body_rate_matrix, euler_rate_matrix, euler_rate_matrix_dot, euler_to_rotation, EulerAngles,
    Mat3, Mat6, Vec3, Vec6,
};
use crate::vehicle::{mixing_matrix, BodyWrench, GuardParams};

/// Plant terms evaluated at one measurement.
#[derive(Debug, Clone)]
pub struct GuardAbstraction {
    pub g1: Vec6,
    pub g3: Mat6,
    /// Body wrench (f, m) to generalized acceleration, 6x4.
    wrench_map: SMatrix<f64, 6, 4>,
    /// Thruster command to generalized acceleration, g2 = wrench_map * mixing.
    g2: Mat6,
    rotation: Mat3,
    rate_matrix: Mat3,
    omega_body: Vec3,
}

impl GuardAbstraction {
    /// Build the abstraction from a pose/rate measurement.
    pub fn from_measurement(
        x1: &Vec6,
        x2: &Vec6,
        params: &GuardParams,
        gravity: f64,
        g3: Mat6,
    ) -> Result<Self, ControlError> {
        let q = EulerAngles::new(x1[3], x1[4], x1[5]);
        let qdot = Vec3::new(x2[3], x2[4], x2[5]);
        let rotation = euler_to_rotation(&q)?;
        let w = euler_rate_matrix(&q)?;
        let w_dot = euler_rate_matrix_dot(&q, &qdot)?;
        let t = body_rate_matrix(&q)?;
        let omega_body = t * qdot;

        let j = params.inertia();
        let j_inv = params.inertia_inv();
        let mut g1 = Vec6::zeros();
        g1[2] = -gravity;
        let rot_bias = w * (j_inv * -(omega_body.cross(&(j * omega_body)))) + w_dot * omega_body;
        g1.fixed_rows_mut::<3>(3).copy_from(&rot_bias);

        let mut wrench_map = SMatrix::<f64, 6, 4>::zeros();
        let thrust_dir = rotation * Vec3::z() / params.mass;
        wrench_map.fixed_view_mut::<3, 1>(0, 0).copy_from(&thrust_dir);
        let ang = w * j_inv;
        wrench_map.fixed_view_mut::<3, 3>(3, 1).copy_from(&ang);

        let g2 = {
            let mix = mixing_matrix(params);
            let mut out = Mat6::zeros();
            let prod = wrench_map * mix;
            out.copy_from(&prod);
            out
        };
        Ok(Self { g1, g3, wrench_map, g2, rotation, rate_matrix: w, omega_body })
    }

    /// Generalized acceleration of an applied body wrench: g2-term evaluated
    /// at the wrench level, (f, m) -> x2_dot contribution.
    pub fn wrench_accel(&self, w: &BodyWrench) -> Vec6 {
        let v = SMatrix::<f64, 4, 1>::new(w.force_z, w.moment.x, w.moment.y, w.moment.z);
        self.wrench_map * v
    }

    /// Full thruster-to-acceleration map g2 (rank 4 by construction: the six
    /// thrusters span one force and three moment channels).
    pub fn g2(&self) -> &Mat6 {
        &self.g2
    }

    /// Invert the rotational channels: moment producing a requested Euler
    /// angular acceleration, m = J W^-1 qddot.
    pub fn moment_for_euler_accel(&self, qddot: &Vec3, params: &GuardParams) -> Result<Vec3, ControlError> {
        let w_inv = self
            .rate_matrix
            .try_inverse()
            .ok_or_else(|| ControlError::IllConditioned("Euler rate map not invertible".into()))?;
        Ok(params.inertia() * (w_inv * qddot))
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn omega_body(&self) -> &Vec3 {
        &self.omega_body
    }

    /// True extended state implied by a measured acceleration: x3 such that
    /// x2_dot = g1 + wrench_accel + g3 x3. Diagnostic for logs and tests.
    pub fn implied_x3(&self, x2_dot: &Vec6, applied: &BodyWrench) -> Option<Vec6> {
        let resid = x2_dot - self.g1 - self.wrench_accel(applied);
        self.g3.try_inverse().map(|inv| inv * resid)
    }
}
