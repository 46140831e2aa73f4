//! Minimum-norm thruster allocation with saturation.
//!
//! The mixing rows are mutually orthogonal by construction, so the
//! pseudo-inverse reduces to M^T (M M^T)^-1 with a diagonal Gram matrix.
//! Saturation clamps per thruster; the achieved wrench is reported back so
//! the observer integrates what was actually applied.

use nalgebra::SMatrix;

use super::ControlError;
use crate::geom::Mat4x6;
use crate::vehicle::{mixing_matrix, saturate, BodyWrench, GuardParams, ThrusterCommand};

#[derive(Debug, Clone)]
pub struct Allocator {
    mixing: Mat4x6,
    pinv: SMatrix<f64, 6, 4>,
    params: GuardParams,
}

#[derive(Debug, Clone)]
pub struct Allocation {
    pub command: ThrusterCommand,
    pub requested: BodyWrench,
    pub achieved: BodyWrench,
    pub saturated: bool,
    /// Whether the achieved wrench matches the request (no clamping loss).
    pub achievable: bool,
}

impl Allocator {
    pub fn new(params: &GuardParams) -> Result<Self, ControlError> {
        let mixing = mixing_matrix(params);
        let gram = mixing * mixing.transpose();
        let gram_inv = gram.try_inverse().ok_or(ControlError::AllocationRank)?;
        if !gram_inv.iter().all(|v| v.is_finite()) {
            return Err(ControlError::AllocationRank);
        }
        Ok(Self { mixing, pinv: mixing.transpose() * gram_inv, params: params.clone() })
    }

    pub fn mixing(&self) -> &Mat4x6 {
        &self.mixing
    }

    /// Unclamped minimum-norm solution of M u = wrench.
    pub fn min_norm(&self, w: &BodyWrench) -> ThrusterCommand {
        let v = SMatrix::<f64, 4, 1>::new(w.force_z, w.moment.x, w.moment.y, w.moment.z);
        let u = self.pinv * v;
        ThrusterCommand([u[0], u[1], u[2], u[3], u[4], u[5]])
    }

    /// Wrench realized by a command through the mixing map.
    pub fn wrench_of(&self, u: &ThrusterCommand) -> BodyWrench {
        let v = self.mixing * SMatrix::<f64, 6, 1>::from_row_slice(&u.0);
        BodyWrench { force_z: v[0], moment: crate::geom::Vec3::new(v[1], v[2], v[3]) }
    }

    pub fn allocate(&self, requested: &BodyWrench) -> Allocation {
        let raw = self.min_norm(requested);
        let (command, saturated) = saturate(&raw, &self.params);
        let achieved = self.wrench_of(&command);
        let err = (achieved.force_z - requested.force_z).abs()
            + (achieved.moment - requested.moment).norm();
        Allocation {
            command,
            requested: *requested,
            achieved,
            saturated,
            achievable: err < 1e-9,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;
    use approx::assert_relative_eq;

    fn allocator() -> Allocator {
        Allocator::new(&GuardParams::default()).unwrap()
    }

    #[test]
    fn zero_wrench_zero_command() {
        let a = allocator();
        let out = a.allocate(&BodyWrench::zero());
        assert_eq!(out.command, ThrusterCommand::default());
        assert!(out.achievable && !out.saturated);
    }

    #[test]
    fn pseudo_inverse_roundtrip() {
        let a = allocator();
        let w = BodyWrench { force_z: 1.3, moment: Vec3::new(0.02, -0.04, 0.01) };
        let u = a.min_norm(&w);
        let back = a.wrench_of(&u);
        assert_relative_eq!(back.force_z, w.force_z, epsilon = 1e-12);
        assert_relative_eq!(back.moment, w.moment, epsilon = 1e-12);
    }

    #[test]
    fn pure_yaw_moment_uses_only_the_yaw_pair() {
        let a = allocator();
        let u = a.min_norm(&BodyWrench { force_z: 0.0, moment: Vec3::new(0.0, 0.0, 0.05) });
        for i in 0..4 {
            assert!(u.0[i].abs() < 1e-14, "thruster {i} engaged: {}", u.0[i]);
        }
        assert_relative_eq!(u.0[4], -u.0[5], epsilon = 1e-14);
        assert!(u.0[5] > 0.0);
    }

    #[test]
    fn saturation_reports_unachievable() {
        let a = allocator();
        let out = a.allocate(&BodyWrench { force_z: 100.0, moment: Vec3::zeros() });
        assert!(out.saturated && !out.achievable);
        assert!(out.command.0.iter().all(|&f| f <= GuardParams::default().f_max));
    }

    #[test]
    fn in_bounds_min_norm_commands_pass_through() {
        let a = allocator();
        let w = BodyWrench { force_z: 1.2, moment: Vec3::new(0.01, 0.02, -0.01) };
        let u = a.min_norm(&w);
        assert!(u.0.iter().all(|&f| (0.0..=0.6).contains(&f)), "fixture not in bounds: {u:?}");
        let out = a.allocate(&w);
        assert!(!out.saturated);
        for i in 0..6 {
            assert_relative_eq!(out.command.0[i], u.0[i], epsilon = 1e-14);
        }
    }
}
