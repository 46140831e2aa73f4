//! Minimal spatial-math kernel shared by every other module: Euler-angle
//! rotations (Z-Y-X yaw-pitch-roll), the skew/hat operator, the body-rate to
//! Euler-rate maps, and rotation re-orthonormalization.
//!
//! Attitude is integrated on the rotation matrix and re-orthonormalized each
//! step; Euler angles are derived outputs. The pitch guard below only fires
//! when converting to or from the angle representation.

use nalgebra::{Matrix3, Matrix4x6, Matrix6, Vector3, Vector6};
use thiserror::Error;

/// 3-vector of f64, the working scalar type everywhere.
pub type Vec3 = Vector3<f64>;
/// 3x3 matrix.
pub type Mat3 = Matrix3<f64>;
/// 6-vector (generalized pose / wrench / acceleration blocks).
pub type Vec6 = Vector6<f64>;
/// 6x6 matrix.
pub type Mat6 = Matrix6<f64>;
/// 4x6 thruster mixing matrix shape.
pub type Mat4x6 = Matrix4x6<f64>;

/// Pitch angles closer than this to +-pi/2 are rejected.
pub const GIMBAL_MARGIN: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum GeomError {
    #[error("pitch {0} rad is within {GIMBAL_MARGIN} of +-pi/2; Euler conversion is ill-conditioned")]
    GimbalProximity(f64),
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
}

/// Z-Y-X (yaw-pitch-roll) Euler angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerAngles {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl EulerAngles {
    pub fn new(roll: f64, pitch: f64, yaw: f64) -> Self {
        Self { roll, pitch, yaw }
    }

    pub fn as_vec3(&self) -> Vec3 {
        Vec3::new(self.roll, self.pitch, self.yaw)
    }

    pub fn from_vec3(v: &Vec3) -> Self {
        Self::new(v.x, v.y, v.z)
    }

    fn check_pitch(&self) -> Result<(), GeomError> {
        if !(self.roll.is_finite() && self.pitch.is_finite() && self.yaw.is_finite()) {
            return Err(GeomError::NonFinite("EulerAngles"));
        }
        if self.pitch.abs() >= std::f64::consts::FRAC_PI_2 - GIMBAL_MARGIN {
            return Err(GeomError::GimbalProximity(self.pitch));
        }
        Ok(())
    }
}

/// Body-to-world rotation R = Rz(yaw) * Ry(pitch) * Rx(roll).
pub fn euler_to_rotation(q: &EulerAngles) -> Result<Mat3, GeomError> {
    q.check_pitch()?;
    let (sr, cr) = q.roll.sin_cos();
    let (sp, cp) = q.pitch.sin_cos();
    let (sy, cy) = q.yaw.sin_cos();
    Ok(Mat3::new(
        cy * cp,
        cy * sp * sr - sy * cr,
        cy * sp * cr + sy * sr,
        sy * cp,
        sy * sp * sr + cy * cr,
        sy * sp * cr - cy * sr,
        -sp,
        cp * sr,
        cp * cr,
    ))
}

/// Inverse of [`euler_to_rotation`]: extract Z-Y-X angles from a proper rotation.
pub fn rotation_to_euler(r: &Mat3) -> Result<EulerAngles, GeomError> {
    let sp = -r[(2, 0)];
    if sp.abs() >= 1.0 - GIMBAL_MARGIN {
        return Err(GeomError::GimbalProximity(sp.asin()));
    }
    let pitch = sp.asin();
    let roll = r[(2, 1)].atan2(r[(2, 2)]);
    let yaw = r[(1, 0)].atan2(r[(0, 0)]);
    Ok(EulerAngles::new(roll, pitch, yaw))
}

/// Gimbal-tolerant variant of [`rotation_to_euler`] for logging paths: pitch
/// saturates at +-pi/2 instead of erroring, losing roll/yaw separation there.
pub fn rotation_to_euler_clamped(r: &Mat3) -> EulerAngles {
    match rotation_to_euler(r) {
        Ok(e) => e,
        Err(_) => {
            let sp = (-r[(2, 0)]).clamp(-1.0, 1.0);
            EulerAngles::new(r[(2, 1)].atan2(r[(2, 2)]), sp.asin(), r[(1, 0)].atan2(r[(0, 0)]))
        }
    }
}

/// Skew-symmetric hat map: hat(w) * v == w x v.
pub fn hat(w: &Vec3) -> Mat3 {
    Mat3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Map body angular velocity to Z-Y-X Euler-angle rates:
/// qdot = W(roll, pitch) * omega_body.
pub fn euler_rate_matrix(q: &EulerAngles) -> Result<Mat3, GeomError> {
    q.check_pitch()?;
    let (sr, cr) = q.roll.sin_cos();
    let (sp, cp) = q.pitch.sin_cos();
    let tp = sp / cp;
    Ok(Mat3::new(
        1.0,
        sr * tp,
        cr * tp,
        0.0,
        cr,
        -sr,
        0.0,
        sr / cp,
        cr / cp,
    ))
}

/// Inverse of [`euler_rate_matrix`]: omega_body = T(roll, pitch) * qdot.
pub fn body_rate_matrix(q: &EulerAngles) -> Result<Mat3, GeomError> {
    q.check_pitch()?;
    let (sr, cr) = q.roll.sin_cos();
    let (sp, cp) = q.pitch.sin_cos();
    Ok(Mat3::new(
        1.0,
        0.0,
        -sp,
        0.0,
        cr,
        sr * cp,
        0.0,
        -sr,
        cr * cp,
    ))
}

/// Euler-angle rates from body angular velocity.
pub fn euler_rates_from_body_omega(q: &EulerAngles, omega: &Vec3) -> Result<Vec3, GeomError> {
    Ok(euler_rate_matrix(q)? * omega)
}

/// Time derivative of [`euler_rate_matrix`] along (qdot); the Euler-equation
/// bias in the guard abstraction needs d/dt (W(q) omega) = W qdot_omega + Wdot omega.
pub fn euler_rate_matrix_dot(q: &EulerAngles, qdot: &Vec3) -> Result<Mat3, GeomError> {
    q.check_pitch()?;
    let (sr, cr) = q.roll.sin_cos();
    let (sp, cp) = q.pitch.sin_cos();
    let tp = sp / cp;
    let sec2 = 1.0 / (cp * cp);
    let (rd, pd) = (qdot.x, qdot.y);
    Ok(Mat3::new(
        0.0,
        cr * rd * tp + sr * pd * sec2,
        -sr * rd * tp + cr * pd * sec2,
        0.0,
        -sr * rd,
        -cr * rd,
        0.0,
        (cr * rd * cp + sr * sp * pd) * sec2,
        (-sr * rd * cp + cr * sp * pd) * sec2,
    ))
}

/// Re-orthonormalize a drifting rotation matrix toward the nearest proper
/// rotation (polar decomposition via Newton iteration on R <- (R + R^-T)/2).
pub fn orthonormalize(r: &Mat3) -> Mat3 {
    let mut m = *r;
    for _ in 0..4 {
        if let Some(inv_t) = m.try_inverse() {
            m = (m + inv_t.transpose()) * 0.5;
        } else {
            break;
        }
    }
    m
}

/// Frobenius distance of R^T R from the identity; orthonormality diagnostic.
pub fn orthonormality_error(r: &Mat3) -> f64 {
    (r.transpose() * r - Mat3::identity()).norm()
}

/// Wrap an angle to (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut x = a % two_pi;
    if x > std::f64::consts::PI {
        x -= two_pi;
    } else if x <= -std::f64::consts::PI {
        x += two_pi;
    }
    x
}
