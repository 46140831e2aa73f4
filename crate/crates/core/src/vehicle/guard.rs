//! Guard rigid-body dynamics and the thruster wrench map.
//!
//! The six thrusters produce a scalar body-z force and three body moments:
//!
//! ```text
//!   f   = f1 + f2 + f3 + f4 + f5 + f6 + f_e
//!   m_x = L_x (f4 - f2) + m_e_x
//!   m_y = L_y (f3 - f1) + m_e_y
//!   m_z = L_z (f6 - f5) + m_e_z
//! ```
//!
//! and the guard translates under F = R (0, 0, f) and gravity while the
//! attitude follows Rdot = R hat(omega), J omega_dot + omega x J omega = m.

use serde::{Deserialize, Serialize};

use super::GuardParams;
use crate::geom::{hat, orthonormality_error, rotation_to_euler, EulerAngles, GeomError, Mat3, Mat4x6, Vec3};

/// Guard state: world position/velocity, body-to-world rotation, body-frame
/// angular velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct GuardState {
    pub position: Vec3,
    pub rotation: Mat3,
    pub velocity: Vec3,
    /// Body-frame angular velocity, rad/s.
    pub omega: Vec3,
}

impl GuardState {
    pub fn at_rest(position: Vec3) -> Self {
        Self { position, rotation: Mat3::identity(), velocity: Vec3::zeros(), omega: Vec3::zeros() }
    }

    pub fn euler(&self) -> Result<EulerAngles, GeomError> {
        rotation_to_euler(&self.rotation)
    }

    /// World-frame angular velocity.
    pub fn omega_world(&self) -> Vec3 {
        self.rotation * self.omega
    }

    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.rotation)
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite())
            && self.rotation.iter().all(|v| v.is_finite())
            && self.velocity.iter().all(|v| v.is_finite())
            && self.omega.iter().all(|v| v.is_finite())
    }
}

/// Six per-thruster forces, N.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ThrusterCommand(pub [f64; 6]);

impl ThrusterCommand {
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().copied()
    }
}

/// Total body-z force plus body moments.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyWrench {
    pub force_z: f64,
    pub moment: Vec3,
}

impl BodyWrench {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_finite(&self) -> bool {
        self.force_z.is_finite() && self.moment.iter().all(|v| v.is_finite())
    }
}

/// Body wrench produced by a thruster command plus an elastic offset wrench.
pub fn thruster_mixing(u: &ThrusterCommand, p: &GuardParams, elastic: &BodyWrench) -> BodyWrench {
    let f = u.0;
    let vertical = if p.yaw_thrusters_vertical {
        f.iter().sum::<f64>()
    } else {
        f[0] + f[1] + f[2] + f[3]
    };
    BodyWrench {
        force_z: vertical + elastic.force_z,
        moment: Vec3::new(
            p.arm_x * (f[3] - f[1]) + elastic.moment.x,
            p.arm_y * (f[2] - f[0]) + elastic.moment.y,
            p.arm_z * (f[5] - f[4]) + elastic.moment.z,
        ),
    }
}

/// Linear form of the thruster map: (f, m_x, m_y, m_z) = M u (+ elastic terms).
pub fn mixing_matrix(p: &GuardParams) -> Mat4x6 {
    let yz = if p.yaw_thrusters_vertical { 1.0 } else { 0.0 };
    Mat4x6::from_rows(&[
        [1.0, 1.0, 1.0, 1.0, yz, yz].into(),
        [0.0, -p.arm_x, 0.0, p.arm_x, 0.0, 0.0].into(),
        [-p.arm_y, 0.0, p.arm_y, 0.0, 0.0, 0.0].into(),
        [0.0, 0.0, 0.0, 0.0, -p.arm_z, p.arm_z].into(),
    ])
}

/// World-frame force of the body-z thrust: F = R (0, 0, f).
pub fn inertial_force(rotation: &Mat3, force_z: f64) -> Vec3 {
    rotation * Vec3::new(0.0, 0.0, force_z)
}

#[derive(Debug, Clone)]
pub struct GuardDerivative {
    pub velocity: Vec3,
    pub acceleration: Vec3,
    pub rotation_dot: Mat3,
    /// Body-frame angular acceleration.
    pub omega_dot: Vec3,
}

/// Guard equations of motion under a thruster/elastic body wrench alone.
pub fn guard_derivatives(s: &GuardState, w: &BodyWrench, p: &GuardParams, gravity: f64) -> GuardDerivative {
    guard_derivatives_full(s, w, &Vec3::zeros(), &Vec3::zeros(), p, gravity)
}

/// Guard equations of motion with an additional external world-frame force
/// and moment (about the guard center), e.g. the band wrench.
pub fn guard_derivatives_full(
    s: &GuardState,
    w: &BodyWrench,
    ext_force_world: &Vec3,
    ext_moment_world: &Vec3,
    p: &GuardParams,
    gravity: f64,
) -> GuardDerivative {
    let thrust_world = inertial_force(&s.rotation, w.force_z);
    let acceleration =
        Vec3::new(0.0, 0.0, -gravity) + (thrust_world + ext_force_world) / p.mass;
    let rotation_dot = s.rotation * hat(&s.omega);
    let moment_body = w.moment + s.rotation.transpose() * ext_moment_world;
    let j = p.inertia();
    let omega_dot = p.inertia_inv() * (moment_body - s.omega.cross(&(j * s.omega)));
    GuardDerivative { velocity: s.velocity, acceleration, rotation_dot, omega_dot }
}

/// Kinetic energy of the guard.
pub fn guard_kinetic_energy(s: &GuardState, p: &GuardParams) -> f64 {
    0.5 * p.mass * s.velocity.norm_squared() + 0.5 * s.omega.dot(&(p.inertia() * s.omega))
}

/// Clamp a command to the per-thruster bounds; returns the clamped command
/// and whether any component saturated.
pub fn saturate(u: &ThrusterCommand, p: &GuardParams) -> (ThrusterCommand, bool) {
    let mut out = *u;
    let mut saturated = false;
    for v in out.0.iter_mut() {
        let c = v.clamp(p.f_min, p.f_max);
        if c != *v {
            saturated = true;
        }
        *v = c;
    }
    (out, saturated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_command_zero_wrench() {
        let w = thruster_mixing(&ThrusterCommand::default(), &GuardParams::default(), &BodyWrench::zero());
        assert_eq!(w, BodyWrench::zero());
    }

    #[test]
    fn balanced_roll_pair_cancels() {
        let p = GuardParams::default();
        let elastic = BodyWrench { force_z: 0.0, moment: Vec3::new(0.7, 0.0, 0.0) };
        let u = ThrusterCommand([0.0, 0.31, 0.0, 0.31, 0.0, 0.0]);
        let w = thruster_mixing(&u, &p, &elastic);
        assert_relative_eq!(w.moment.x, 0.7, epsilon = 1e-15);
    }

    #[test]
    fn yaw_pair_hand_evaluation() {
        let mut p = GuardParams::default();
        p.arm_z = 0.5;
        let u = ThrusterCommand([0.0, 0.0, 0.0, 0.0, 1.0, 2.0]);
        let w = thruster_mixing(&u, &p, &BodyWrench::zero());
        assert_relative_eq!(w.force_z, 3.0, epsilon = 1e-15);
        assert_relative_eq!(w.moment.z, 0.5, epsilon = 1e-15);
        assert_relative_eq!(w.moment.x, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn mixing_matrix_structure() {
        let p = GuardParams::default();
        let m = mixing_matrix(&p);
        let uniform = nalgebra::SVector::<f64, 6>::repeat(1.0);
        let w = m * uniform;
        assert_relative_eq!(w[0], 6.0, epsilon = 1e-15);
        assert_relative_eq!(w[1], 0.0, epsilon = 1e-15);
        assert_relative_eq!(w[2], 0.0, epsilon = 1e-15);
        assert_relative_eq!(w[3], 0.0, epsilon = 1e-15);
        // roll row reads (0, -Lx, 0, Lx, 0, 0)
        assert_eq!(m[(1, 1)], -p.arm_x);
        assert_eq!(m[(1, 3)], p.arm_x);
        assert_eq!(m[(1, 0)], 0.0);
        assert_eq!(m.rank(1e-12), 4);
    }

    #[test]
    fn mixing_matches_matrix_form() {
        let p = GuardParams::default();
        let m = mixing_matrix(&p);
        let u = ThrusterCommand([0.1, -0.2, 0.3, 0.05, 0.0, 0.4]);
        let w = thruster_mixing(&u, &p, &BodyWrench::zero());
        let mv = m * nalgebra::SVector::<f64, 6>::from_row_slice(&u.0);
        assert_relative_eq!(w.force_z, mv[0], epsilon = 1e-15);
        assert_relative_eq!(w.moment.x, mv[1], epsilon = 1e-15);
        assert_relative_eq!(w.moment.y, mv[2], epsilon = 1e-15);
        assert_relative_eq!(w.moment.z, mv[3], epsilon = 1e-15);
    }

    #[test]
    fn inertial_force_cases() {
        assert_relative_eq!(inertial_force(&Mat3::identity(), 1.0), Vec3::z(), epsilon = 1e-15);
        let roll90 = crate::geom::euler_to_rotation(&EulerAngles::new(std::f64::consts::FRAC_PI_2, 0.0, 0.0)).unwrap();
        assert_relative_eq!(inertial_force(&roll90, 1.0), -Vec3::y(), epsilon = 1e-12);
        let any = crate::geom::euler_to_rotation(&EulerAngles::new(0.3, 0.2, -0.8)).unwrap();
        assert_eq!(inertial_force(&any, 0.0), Vec3::zeros());
    }

    #[test]
    fn free_fall_acceleration() {
        let s = GuardState::at_rest(Vec3::zeros());
        let d = guard_derivatives(&s, &BodyWrench::zero(), &GuardParams::default(), 9.8);
        assert_relative_eq!(d.acceleration, Vec3::new(0.0, 0.0, -9.8), epsilon = 1e-15);
        assert_eq!(d.omega_dot, Vec3::zeros());
    }

    #[test]
    fn torque_free_principal_spin_is_steady() {
        let mut s = GuardState::at_rest(Vec3::zeros());
        s.omega = Vec3::new(0.0, 0.0, 3.0);
        let d = guard_derivatives(&s, &BodyWrench::zero(), &GuardParams::default(), 9.8);
        assert_relative_eq!(d.omega_dot, Vec3::zeros(), epsilon = 1e-15);
        s.omega = Vec3::new(2.0, 0.0, 0.0);
        let d = guard_derivatives(&s, &BodyWrench::zero(), &GuardParams::default(), 9.8);
        assert_relative_eq!(d.omega_dot, Vec3::zeros(), epsilon = 1e-15);
    }

    #[test]
    fn saturation_clamps_and_flags() {
        let p = GuardParams::default();
        let (u, sat) = saturate(&ThrusterCommand([0.1, -0.2, 0.9, 0.3, 0.0, 0.2]), &p);
        assert!(sat);
        assert_eq!(u.0[1], p.f_min);
        assert_eq!(u.0[2], p.f_max);
        let (_, sat) = saturate(&ThrusterCommand([0.1; 6]), &p);
        assert!(!sat);
    }

    proptest! {
        /// thruster_mixing(u1 + u2) - mixing(0) equals the sum of the
        /// individual increments, exactly.
        #[test]
        fn mixing_is_affine(
            a in proptest::array::uniform6(-1.0f64..1.0),
            b in proptest::array::uniform6(-1.0f64..1.0),
        ) {
            let p = GuardParams::default();
            let e = BodyWrench { force_z: 0.2, moment: Vec3::new(0.1, -0.3, 0.05) };
            let zero = thruster_mixing(&ThrusterCommand::default(), &p, &e);
            let ua = ThrusterCommand(a);
            let ub = ThrusterCommand(b);
            let sum = ThrusterCommand([a[0]+b[0], a[1]+b[1], a[2]+b[2], a[3]+b[3], a[4]+b[4], a[5]+b[5]]);
            let wa = thruster_mixing(&ua, &p, &e);
            let wb = thruster_mixing(&ub, &p, &e);
            let ws = thruster_mixing(&sum, &p, &e);
            prop_assert!((ws.force_z - zero.force_z - (wa.force_z - zero.force_z) - (wb.force_z - zero.force_z)).abs() < 1e-12);
            prop_assert!((ws.moment - zero.moment - (wa.moment - zero.moment) - (wb.moment - zero.moment)).norm() < 1e-12);
        }
    }
}
