//! Hover control law.
//!
//! The thrusters span four generalized channels (collective body-z force and
//! three moments), so the cancellation u = g2^-1 (u0 - g1 - g3 x3_hat) is
//! applied on that actuated subspace, and lateral position control is routed
//! through the attitude setpoint the way a multirotor does it: the outer
//! position loop produces a desired world force (with gravity and the
//! estimated disturbance folded in), whose direction becomes the commanded
//! tilt and whose projection on the current body axis becomes the
//! collective. `cancellation_law` keeps the square-plant form for abstraction
//! tests.

use serde::{Deserialize, Serialize};

use super::{Allocator, ControlError, GuardAbstraction};
use crate::geom::{wrap_angle, EulerAngles, Mat6, Vec3, Vec6};
use crate::vehicle::{BodyWrench, GuardParams, ThrusterCommand};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerConfig {
    /// Position loop gains (poles at -2 per axis by default).
    pub kp_pos: f64,
    pub kd_pos: f64,
    /// Attitude loop gains (poles at -8 per axis by default).
    pub kp_att: f64,
    pub kd_att: f64,
    pub setpoint_position: [f64; 3],
    pub setpoint_yaw: f64,
    /// Tilt command limit, rad.
    pub max_tilt: f64,
    /// Norm bound applied to the disturbance estimate before cancellation.
    pub disturbance_bound: f64,
    pub enabled: bool,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            kp_pos: 4.0,
            kd_pos: 4.0,
            kp_att: 64.0,
            kd_att: 16.0,
            setpoint_position: [0.0; 3],
            setpoint_yaw: 0.0,
            max_tilt: 0.5,
            disturbance_bound: 50.0,
            enabled: true,
        }
    }
}

impl ControllerConfig {
    pub fn setpoint(&self) -> Vec3 {
        Vec3::from_row_slice(&self.setpoint_position)
    }
}

/// Position and attitude error: roll/pitch referenced to level, yaw wrapped
/// to the shortest path.
pub fn hover_setpoint_error(x1: &Vec6, cfg: &ControllerConfig) -> Vec6 {
    let mut e = Vec6::zeros();
    let sp = cfg.setpoint();
    for i in 0..3 {
        e[i] = sp[i] - x1[i];
    }
    e[3] = -x1[3];
    e[4] = -x1[4];
    e[5] = wrap_angle(cfg.setpoint_yaw - x1[5]);
    e
}

/// The square-plant cancellation u = g2^-1 (u0 - g1 - g3 x3_hat).
pub fn cancellation_law(
    u0: &Vec6,
    g1: &Vec6,
    g2: &Mat6,
    g3: &Mat6,
    x3_hat: &Vec6,
) -> Result<Vec6, ControlError> {
    let inv = g2
        .try_inverse()
        .filter(|m| m.iter().all(|v| v.is_finite()))
        .ok_or_else(|| ControlError::IllConditioned("g2 not invertible".into()))?;
    Ok(inv * (u0 - g1 - g3 * x3_hat))
}

#[derive(Debug, Clone)]
pub struct ControlOutput {
    /// Requested body wrench before allocation.
    pub wrench: BodyWrench,
    pub command: ThrusterCommand,
    pub achieved: BodyWrench,
    pub saturated: bool,
    pub achievable: bool,
    pub attitude_setpoint: EulerAngles,
    /// Generalized-acceleration contribution cancelling the known drift g1.
    pub contrib_inertial: Vec6,
    /// Contribution cancelling the estimated disturbance g3 x3_hat.
    pub contrib_aero: Vec6,
}

/// Compute the thruster command for the current measurement and estimates.
pub fn control_law(
    x1: &Vec6,
    x2: &Vec6,
    x3_hat: &Vec6,
    plant: &GuardAbstraction,
    cfg: &ControllerConfig,
    guard: &GuardParams,
    allocator: &Allocator,
) -> Result<ControlOutput, ControlError> {
    let mut x3 = *x3_hat;
    let n = x3.norm();
    if n > cfg.disturbance_bound {
        x3 *= cfg.disturbance_bound / n;
    }
    let dist = plant.g3 * x3;
    let err = hover_setpoint_error(x1, cfg);

    // outer position loop in world coordinates
    let e_pos: Vec3 = err.fixed_rows::<3>(0).into();
    let v: Vec3 = x2.fixed_rows::<3>(0).into();
    let a_cmd = cfg.kp_pos * e_pos - cfg.kd_pos * v;
    let g1_lin: Vec3 = plant.g1.fixed_rows::<3>(0).into();
    let dist_lin: Vec3 = dist.fixed_rows::<3>(0).into();
    let f_des = guard.mass * (a_cmd - g1_lin - dist_lin);

    // desired tilt from the force direction, de-yawed
    let attitude_setpoint = if f_des.norm() > 1e-9 {
        let b = f_des.normalize();
        let (sy, cy) = cfg.setpoint_yaw.sin_cos();
        let b_dy = Vec3::new(cy * b.x + sy * b.y, -sy * b.x + cy * b.y, b.z);
        let roll = (-b_dy.y).clamp(-1.0, 1.0).asin().clamp(-cfg.max_tilt, cfg.max_tilt);
        let pitch = b_dy.x.atan2(b_dy.z).clamp(-cfg.max_tilt, cfg.max_tilt);
        EulerAngles::new(roll, pitch, cfg.setpoint_yaw)
    } else {
        EulerAngles::new(0.0, 0.0, cfg.setpoint_yaw)
    };

    // collective: projection of the desired force on the current thrust axis
    let body_z = plant.rotation() * Vec3::z();
    let force_z = f_des.dot(&body_z);

    // inner attitude loop with rotational cancellation
    let e_att = Vec3::new(
        attitude_setpoint.roll - x1[3],
        attitude_setpoint.pitch - x1[4],
        wrap_angle(attitude_setpoint.yaw - x1[5]),
    );
    let qdot: Vec3 = x2.fixed_rows::<3>(3).into();
    let qddot_cmd = cfg.kp_att * e_att - cfg.kd_att * qdot;
    let g1_rot: Vec3 = plant.g1.fixed_rows::<3>(3).into();
    let dist_rot: Vec3 = dist.fixed_rows::<3>(3).into();
    let moment = plant.moment_for_euler_accel(&(qddot_cmd - g1_rot - dist_rot), guard)?;

    let wrench = BodyWrench { force_z, moment };
    let allocation = allocator.allocate(&wrench);
    Ok(ControlOutput {
        wrench,
        command: allocation.command,
        achieved: allocation.achieved,
        saturated: allocation.saturated,
        achievable: allocation.achievable,
        attitude_setpoint,
        contrib_inertial: -plant.g1,
        contrib_aero: -dist,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn setpoint_error_cases() {
        let cfg = ControllerConfig::default();
        assert_eq!(hover_setpoint_error(&Vec6::zeros(), &cfg), Vec6::zeros());

        let mut x1 = Vec6::zeros();
        x1[2] = -0.01;
        assert_relative_eq!(hover_setpoint_error(&x1, &cfg)[2], 0.01, epsilon = 1e-15);

        let mut x1 = Vec6::zeros();
        x1[5] = 2.0 * std::f64::consts::PI - 0.01;
        assert_relative_eq!(hover_setpoint_error(&x1, &cfg)[5], 0.01, epsilon = 1e-12);
    }

    #[test]
    fn cancellation_zero_case() {
        let u = cancellation_law(&Vec6::zeros(), &Vec6::zeros(), &Mat6::identity(), &Mat6::identity(), &Vec6::zeros()).unwrap();
        assert_eq!(u, Vec6::zeros());
    }

    #[test]
    fn cancellation_closes_the_loop_exactly() {
        // synthetic square plant: x2dot = g1 + g2 u + g3 x3
        let mut g2 = Mat6::identity();
        g2[(0, 3)] = 0.4;
        g2[(2, 1)] = -0.7;
        g2[(5, 5)] = 2.0;
        let g3 = Mat6::from_diagonal(&Vec6::new(1.0, 0.5, 2.0, 1.0, 1.0, 0.3));
        let g1 = Vec6::new(0.0, 0.0, -9.8, 0.1, -0.2, 0.05);
        let x3 = Vec6::new(0.5, -1.2, 3.3, 0.02, 0.0, -0.4);
        let u0 = Vec6::new(0.3, 0.1, -0.2, 0.0, 0.4, -0.1);
        let u = cancellation_law(&u0, &g1, &g2, &g3, &x3).unwrap();
        let x2_dot = g1 + g2 * u + g3 * x3;
        assert_relative_eq!(x2_dot, u0, epsilon = 1e-10);
    }

    #[test]
    fn doubling_disturbance_doubles_cancellation_component() {
        let g2 = Mat6::identity() * 2.0;
        let g3 = Mat6::identity();
        let x3 = Vec6::new(0.1, 0.0, -0.4, 0.0, 0.2, 0.0);
        let base = cancellation_law(&Vec6::zeros(), &Vec6::zeros(), &g2, &g3, &Vec6::zeros()).unwrap();
        let one = cancellation_law(&Vec6::zeros(), &Vec6::zeros(), &g2, &g3, &x3).unwrap();
        let two = cancellation_law(&Vec6::zeros(), &Vec6::zeros(), &g2, &g3, &(2.0 * x3)).unwrap();
        assert_relative_eq!(two - base, 2.0 * (one - base), epsilon = 1e-12);
    }

    #[test]
    fn singular_g2_rejected() {
        let g2 = Mat6::zeros();
        assert!(matches!(
            cancellation_law(&Vec6::zeros(), &Vec6::zeros(), &g2, &Mat6::identity(), &Vec6::zeros()),
            Err(ControlError::IllConditioned(_))
        ));
    }

    #[test]
    fn hover_trim_collective_supports_both_weights() {
        // at the setpoint with the band pull estimated, the commanded
        // collective equals total weight
        let guard = GuardParams::default();
        let cfg = ControllerConfig::default();
        let plant = GuardAbstraction::from_measurement(&Vec6::zeros(), &Vec6::zeros(), &guard, 9.8, Mat6::identity()).unwrap();
        let allocator = Allocator::new(&guard).unwrap();
        let vehicle_weight = 0.040 * 9.8;
        let mut x3 = Vec6::zeros();
        x3[2] = -vehicle_weight / guard.mass;
        let out = control_law(&Vec6::zeros(), &Vec6::zeros(), &x3, &plant, &cfg, &guard, &allocator).unwrap();
        assert_relative_eq!(out.wrench.force_z, guard.mass * 9.8 + vehicle_weight, epsilon = 1e-10);
        assert!(out.wrench.moment.norm() < 1e-12);
        assert_eq!(out.attitude_setpoint, EulerAngles::new(0.0, 0.0, 0.0));
        assert!(!out.saturated);
    }

    #[test]
    fn lateral_error_commands_tilt_toward_target() {
        let guard = GuardParams::default();
        let cfg = ControllerConfig::default();
        let plant = GuardAbstraction::from_measurement(&Vec6::zeros(), &Vec6::zeros(), &guard, 9.8, Mat6::identity()).unwrap();
        let allocator = Allocator::new(&guard).unwrap();
        // vehicle sits 10 cm west of the setpoint: accelerate +x, pitch forward
        let mut x1 = Vec6::zeros();
        x1[0] = -0.1;
        let out = control_law(&x1, &Vec6::zeros(), &Vec6::zeros(), &plant, &cfg, &guard, &allocator).unwrap();
        assert!(out.attitude_setpoint.pitch > 0.0);
        assert!(out.attitude_setpoint.roll.abs() < 1e-12);
        // and the attitude loop raises a pitch moment
        assert!(out.wrench.moment.y > 0.0);
    }

    #[test]
    fn below_setpoint_commands_extra_collective() {
        let guard = GuardParams::default();
        let cfg = ControllerConfig::default();
        let plant = GuardAbstraction::from_measurement(&Vec6::zeros(), &Vec6::zeros(), &guard, 9.8, Mat6::identity()).unwrap();
        let allocator = Allocator::new(&guard).unwrap();
        let mut x1 = Vec6::zeros();
        x1[2] = -0.05;
        let out = control_law(&x1, &Vec6::zeros(), &Vec6::zeros(), &plant, &cfg, &guard, &allocator).unwrap();
        assert!(out.wrench.force_z > guard.mass * 9.8);
    }
}
