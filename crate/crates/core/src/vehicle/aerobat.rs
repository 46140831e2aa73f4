//! Articulated dynamics of the suspended vehicle: a rigid torso with two rod
//! segments per wing (proximal flap, distal fold), both hinged on fore-aft
//! axes so the wing moves in the torso y-z plane. The joint angles are
//! prescribed by the gait, so the unknowns are the six torso accelerations.
//!
//! The equations solved are the system momentum balances about the torso
//! origin. For a tree with prescribed internal motion these six equations
//! determine the base acceleration exactly, and they expose the same
//! partitioned structure D_u nu_dot + D_ua alpha_ddot + h = Q_ext as a
//! Lagrangian assembly; `partitioned_terms` returns those blocks explicitly.

use nalgebra::SMatrix;

use super::{AerobatParams, GuardState, VehicleError, WingParams};
use crate::aero::{StripFlow, StripGeometry};
use crate::geom::{
    hat, rotation_to_euler_clamped, EulerAngles, Mat3, Mat6, Vec3, Vec6,
};

/// Wing joint angles and their prescribed rates: alpha3 is the proximal flap
/// angle (positive raises the wing), alpha4 the distal fold relative to the
/// proximal segment. Left and right wings share the pair symmetrically.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WingJointState {
    pub alpha3: f64,
    pub alpha4: f64,
    pub alpha3_dot: f64,
    pub alpha4_dot: f64,
    pub alpha3_ddot: f64,
    pub alpha4_ddot: f64,
}

/// Vehicle torso state, world frame. Unlike the guard, the angular velocity
/// here is kept in world components: Rdot = hat(omega) * R.
#[derive(Debug, Clone, PartialEq)]
pub struct AerobatState {
    pub position: Vec3,
    pub rotation: Mat3,
    pub velocity: Vec3,
    pub omega: Vec3,
}

impl AerobatState {
    pub fn at_rest(position: Vec3) -> Self {
        Self { position, rotation: Mat3::identity(), velocity: Vec3::zeros(), omega: Vec3::zeros() }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite())
            && self.rotation.iter().all(|v| v.is_finite())
            && self.velocity.iter().all(|v| v.is_finite())
            && self.omega.iter().all(|v| v.is_finite())
    }
}

/// Vehicle pose and wing state relative to the guard, the representation the
/// logs carry.
#[derive(Debug, Clone, Copy)]
pub struct AerobatRelState {
    /// Position of the torso origin in the guard frame.
    pub position: Vec3,
    /// Relative attitude (guard to torso), Z-Y-X angles.
    pub attitude: EulerAngles,
    /// Guard-frame rate of the relative position.
    pub velocity: Vec3,
    /// Relative angular velocity in the guard frame.
    pub omega: Vec3,
    pub alpha3: f64,
    pub alpha4: f64,
    pub alpha3_dot: f64,
    pub alpha4_dot: f64,
}

/// Relative pose/velocity of the vehicle with respect to the guard.
pub fn relative_state(guard: &GuardState, vehicle: &AerobatState, joints: &WingJointState) -> AerobatRelState {
    let rt = guard.rotation.transpose();
    let p_rel = rt * (vehicle.position - guard.position);
    let r_rel = rt * vehicle.rotation;
    let v_rel = rt * (vehicle.velocity - guard.velocity) - guard.omega.cross(&p_rel);
    let omega_rel = rt * vehicle.omega - guard.omega;
    AerobatRelState {
        position: p_rel,
        attitude: rotation_to_euler_clamped(&r_rel),
        velocity: v_rel,
        omega: omega_rel,
        alpha3: joints.alpha3,
        alpha4: joints.alpha4,
        alpha3_dot: joints.alpha3_dot,
        alpha4_dot: joints.alpha4_dot,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn sign(&self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }

    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];
}

/// Wing rod direction in the torso frame at flap/fold angle theta.
fn dir(sigma: f64, theta: f64) -> Vec3 {
    Vec3::new(0.0, sigma * theta.cos(), theta.sin())
}

fn dir_theta(sigma: f64, theta: f64) -> Vec3 {
    Vec3::new(0.0, -sigma * theta.sin(), theta.cos())
}

fn rot_x(angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

/// Torso-frame kinematics of one constituent body.
struct BodyKin {
    mass: f64,
    /// Inertia about the COM in the segment frame.
    inertia_local: Mat3,
    /// COM position in the torso frame and its prescribed rates.
    r: Vec3,
    r_dot: Vec3,
    r_ddot: Vec3,
    /// Segment-to-torso rotation.
    rot_rel: Mat3,
    /// Relative angular velocity/acceleration, torso frame.
    omega_rel: Vec3,
    omega_rel_dot: Vec3,
}

fn rod_inertia(mass: f64, length: f64) -> Mat3 {
    let i = mass * length * length / 12.0;
    Mat3::from_diagonal(&Vec3::new(i, 0.0, i))
}

fn shoulder(w: &WingParams, sigma: f64) -> Vec3 {
    Vec3::new(0.0, sigma * w.shoulder_y, w.shoulder_z)
}

/// Torso plus four wing segments for the given joint state.
fn constituent_bodies(p: &AerobatParams, j: &WingJointState) -> Vec<BodyKin> {
    let w = &p.wing;
    let mut bodies = Vec::with_capacity(5);
    bodies.push(BodyKin {
        mass: p.torso_mass,
        inertia_local: p.torso_inertia(),
        r: Vec3::zeros(),
        r_dot: Vec3::zeros(),
        r_ddot: Vec3::zeros(),
        rot_rel: Mat3::identity(),
        omega_rel: Vec3::zeros(),
        omega_rel_dot: Vec3::zeros(),
    });
    for side in Side::BOTH {
        let sigma = side.sign();
        let sh = shoulder(w, sigma);
        let (tp, tpd, tpdd) = (j.alpha3, j.alpha3_dot, j.alpha3_ddot);
        let (td, tdd, tddd) = (
            j.alpha3 + j.alpha4,
            j.alpha3_dot + j.alpha4_dot,
            j.alpha3_ddot + j.alpha4_ddot,
        );
        let up = dir(sigma, tp);
        let upt = dir_theta(sigma, tp);
        let ud = dir(sigma, td);
        let udt = dir_theta(sigma, td);

        bodies.push(BodyKin {
            mass: w.proximal_mass,
            inertia_local: rod_inertia(w.proximal_mass, w.proximal_length),
            r: sh + 0.5 * w.proximal_length * up,
            r_dot: 0.5 * w.proximal_length * upt * tpd,
            r_ddot: 0.5 * w.proximal_length * (upt * tpdd - up * tpd * tpd),
            rot_rel: rot_x(sigma * tp),
            omega_rel: Vec3::new(sigma * tpd, 0.0, 0.0),
            omega_rel_dot: Vec3::new(sigma * tpdd, 0.0, 0.0),
        });

        let elbow = sh + w.proximal_length * up;
        let elbow_dot = w.proximal_length * upt * tpd;
        let elbow_ddot = w.proximal_length * (upt * tpdd - up * tpd * tpd);
        bodies.push(BodyKin {
            mass: w.distal_mass,
            inertia_local: rod_inertia(w.distal_mass, w.distal_length),
            r: elbow + 0.5 * w.distal_length * ud,
            r_dot: elbow_dot + 0.5 * w.distal_length * udt * tdd,
            r_ddot: elbow_ddot + 0.5 * w.distal_length * (udt * tddd - ud * tdd * tdd),
            rot_rel: rot_x(sigma * td),
            omega_rel: Vec3::new(sigma * tdd, 0.0, 0.0),
            omega_rel_dot: Vec3::new(sigma * tddd, 0.0, 0.0),
        });
    }
    bodies
}

/// External wrench on the vehicle, world frame, moment about the torso origin.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExternalWrench {
    pub force: Vec3,
    pub moment: Vec3,
}

impl ExternalWrench {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn add_force_at(&mut self, force: Vec3, offset_world: Vec3) {
        self.force += force;
        self.moment += offset_world.cross(&force);
    }
}

/// Partitioned dynamics blocks: D_u nu_dot + D_ua alpha_ddot + bias = Q_ext
/// with nu = (v, omega) the torso quasi-velocities.
#[derive(Debug, Clone)]
pub struct PartitionedTerms {
    pub d_u: Mat6,
    pub d_ua: SMatrix<f64, 6, 2>,
    pub bias: Vec6,
}

struct Assembly {
    d_u: Mat6,
    /// Prescribed-motion and velocity-product forcing: the left-hand side
    /// terms that do not multiply the unknown accelerations.
    forcing: Vec6,
}

fn assemble(state: &AerobatState, bodies: &[BodyKin]) -> Assembly {
    let rot = state.rotation;
    let omega = state.omega;
    let mut mass_total = 0.0;
    let mut moment_first = Vec3::zeros(); // sum m_b rho_b
    let mut inertia_sum = Mat3::zeros();
    let mut force_forcing = Vec3::zeros();
    let mut moment_forcing = Vec3::zeros();
    for b in bodies {
        let rho = rot * b.r;
        let rho_dot = rot * b.r_dot;
        let rho_ddot = rot * b.r_ddot;
        let omega_rel_w = rot * b.omega_rel;
        let omega_b = omega + omega_rel_w;
        let rot_seg = rot * b.rot_rel;
        let inertia_w = rot_seg * b.inertia_local * rot_seg.transpose();

        let kappa = omega.cross(&omega.cross(&rho)) + 2.0 * omega.cross(&rho_dot) + rho_ddot;
        let gamma = rot * b.omega_rel_dot + omega.cross(&omega_rel_w);

        mass_total += b.mass;
        moment_first += b.mass * rho;
        inertia_sum += inertia_w - b.mass * hat(&rho) * hat(&rho);
        force_forcing += b.mass * kappa;
        moment_forcing +=
            rho.cross(&(b.mass * kappa)) + inertia_w * gamma + omega_b.cross(&(inertia_w * omega_b));
    }
    let mut d_u = Mat6::zeros();
    d_u.fixed_view_mut::<3, 3>(0, 0)
        .copy_from(&(mass_total * Mat3::identity()));
    d_u.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-hat(&moment_first)));
    d_u.fixed_view_mut::<3, 3>(3, 0).copy_from(&hat(&moment_first));
    d_u.fixed_view_mut::<3, 3>(3, 3).copy_from(&inertia_sum);
    let mut forcing = Vec6::zeros();
    forcing.fixed_rows_mut::<3>(0).copy_from(&force_forcing);
    forcing.fixed_rows_mut::<3>(3).copy_from(&moment_forcing);
    Assembly { d_u, forcing }
}

/// Solve the torso accelerations for the given joint motion and external
/// wrench (gravity, bands, aerodynamics all folded into `external`).
pub fn aerobat_accelerations(
    state: &AerobatState,
    joints: &WingJointState,
    external: &ExternalWrench,
    p: &AerobatParams,
) -> Result<(Vec3, Vec3), VehicleError> {
    let bodies = constituent_bodies(p, joints);
    let asm = assemble(state, &bodies);
    let mut rhs = Vec6::zeros();
    rhs.fixed_rows_mut::<3>(0).copy_from(&external.force);
    rhs.fixed_rows_mut::<3>(3).copy_from(&external.moment);
    rhs -= asm.forcing;
    let chol = asm
        .d_u
        .cholesky()
        .ok_or(VehicleError::SingularInertia)?;
    let nu_dot = chol.solve(&rhs);
    if !nu_dot.iter().all(|v| v.is_finite()) {
        return Err(VehicleError::NonFinite("torso accelerations"));
    }
    Ok((nu_dot.fixed_rows::<3>(0).into(), nu_dot.fixed_rows::<3>(3).into()))
}

/// Explicit partitioned blocks of the same system, for diagnostics and tests.
pub fn partitioned_terms(
    state: &AerobatState,
    joints: &WingJointState,
    p: &AerobatParams,
) -> PartitionedTerms {
    let frozen = WingJointState { alpha3_ddot: 0.0, alpha4_ddot: 0.0, ..*joints };
    let base = assemble(state, &constituent_bodies(p, &frozen));
    let mut d_ua = SMatrix::<f64, 6, 2>::zeros();
    for k in 0..2 {
        let mut unit = frozen;
        if k == 0 {
            unit.alpha3_ddot = 1.0;
        } else {
            unit.alpha4_ddot = 1.0;
        }
        let col = assemble(state, &constituent_bodies(p, &unit)).forcing - base.forcing;
        d_ua.set_column(k, &col);
    }
    PartitionedTerms { d_u: base.d_u, d_ua, bias: base.forcing }
}

/// Wrench of uniform gravity about the torso origin.
pub fn gravity_wrench(
    state: &AerobatState,
    joints: &WingJointState,
    p: &AerobatParams,
    gravity: f64,
) -> ExternalWrench {
    let bodies = constituent_bodies(p, joints);
    let g = Vec3::new(0.0, 0.0, -gravity);
    let mut w = ExternalWrench::zero();
    for b in &bodies {
        w.add_force_at(b.mass * g, state.rotation * b.r);
    }
    w
}

/// Kinetic energy of torso plus wing segments.
pub fn kinetic_energy(state: &AerobatState, joints: &WingJointState, p: &AerobatParams) -> f64 {
    let bodies = constituent_bodies(p, joints);
    let mut t = 0.0;
    for b in &bodies {
        let rho = state.rotation * b.r;
        let v = state.velocity + state.omega.cross(&rho) + state.rotation * b.r_dot;
        let omega_b = state.omega + state.rotation * b.omega_rel;
        let rot_seg = state.rotation * b.rot_rel;
        let inertia_w = rot_seg * b.inertia_local * rot_seg.transpose();
        t += 0.5 * b.mass * v.norm_squared() + 0.5 * omega_b.dot(&(inertia_w * omega_b));
    }
    t
}

/// Gravitational potential energy relative to z = 0.
pub fn gravity_potential(state: &AerobatState, joints: &WingJointState, p: &AerobatParams, gravity: f64) -> f64 {
    let bodies = constituent_bodies(p, joints);
    bodies
        .iter()
        .map(|b| b.mass * gravity * (state.position + state.rotation * b.r).z)
        .sum()
}

/// Total linear momentum.
pub fn linear_momentum(state: &AerobatState, joints: &WingJointState, p: &AerobatParams) -> Vec3 {
    let bodies = constituent_bodies(p, joints);
    bodies
        .iter()
        .map(|b| {
            b.mass
                * (state.velocity
                    + state.omega.cross(&(state.rotation * b.r))
                    + state.rotation * b.r_dot)
        })
        .sum()
}

/// Angular momentum about a world-frame point.
pub fn angular_momentum_about(
    point: &Vec3,
    state: &AerobatState,
    joints: &WingJointState,
    p: &AerobatParams,
) -> Vec3 {
    let bodies = constituent_bodies(p, joints);
    let mut h = Vec3::zeros();
    for b in &bodies {
        let rho = state.rotation * b.r;
        let x = state.position + rho;
        let v = state.velocity + state.omega.cross(&rho) + state.rotation * b.r_dot;
        let omega_b = state.omega + state.rotation * b.omega_rel;
        let rot_seg = state.rotation * b.rot_rel;
        let inertia_w = rot_seg * b.inertia_local * rot_seg.transpose();
        h += (x - point).cross(&(b.mass * v)) + inertia_w * omega_b;
    }
    h
}

/// System center of mass, world frame.
pub fn com_position(state: &AerobatState, joints: &WingJointState, p: &AerobatParams) -> Vec3 {
    let bodies = constituent_bodies(p, joints);
    let mut num = Vec3::zeros();
    let mut mass = 0.0;
    for b in &bodies {
        num += b.mass * (state.position + state.rotation * b.r);
        mass += b.mass;
    }
    num / mass
}

/// Strip positions in the torso frame with their partials for the joint
/// Jacobian; station measured along the wing from the shoulder.
fn strip_point(w: &WingParams, sigma: f64, j: &WingJointState, station: f64) -> (Vec3, Vec3, Vec3, f64) {
    let sh = shoulder(w, sigma);
    let tp = j.alpha3;
    let td = j.alpha3 + j.alpha4;
    if station <= w.proximal_length {
        let q = sh + station * dir(sigma, tp);
        let dq3 = station * dir_theta(sigma, tp);
        (q, dq3, Vec3::zeros(), tp)
    } else {
        let arm = station - w.proximal_length;
        let q = sh + w.proximal_length * dir(sigma, tp) + arm * dir(sigma, td);
        let dq3 = w.proximal_length * dir_theta(sigma, tp) + arm * dir_theta(sigma, td);
        let dq4 = arm * dir_theta(sigma, td);
        (q, dq3, dq4, td)
    }
}

/// World-frame strip kinematics of one wing for the aerodynamic module.
#[derive(Debug, Clone)]
pub struct WingStripStates {
    /// Strip positions, world.
    pub positions: Vec<Vec3>,
    /// Strip velocities, world.
    pub velocities: Vec<Vec3>,
    /// Position offsets from the torso origin, world (moment arms).
    pub offsets: Vec<Vec3>,
    /// Local flow context per strip.
    pub flows: Vec<StripFlow>,
    /// Quasi-steady inflow normal to the chord, y1.
    pub y1: Vec<f64>,
}

/// Velocity Jacobian of one strip with respect to (v, omega, alpha3_dot,
/// alpha4_dot): v_strip = J * [v; omega; alpha_dot].
pub fn strip_velocity_jacobian(
    side: Side,
    state: &AerobatState,
    joints: &WingJointState,
    station: f64,
    p: &AerobatParams,
) -> SMatrix<f64, 3, 8> {
    let (q, dq3, dq4, _) = strip_point(&p.wing, side.sign(), joints, station);
    let rho = state.rotation * q;
    let mut jac = SMatrix::<f64, 3, 8>::zeros();
    jac.fixed_view_mut::<3, 3>(0, 0).copy_from(&Mat3::identity());
    jac.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-hat(&rho)));
    jac.fixed_view_mut::<3, 1>(0, 6).copy_from(&(state.rotation * dq3));
    jac.fixed_view_mut::<3, 1>(0, 7).copy_from(&(state.rotation * dq4));
    jac
}

/// Evaluate all strips of one wing: positions, velocities, flow context and
/// the quasi-steady inflow y1 (relative-flow component along the chord
/// normal).
pub fn wing_strip_states(
    side: Side,
    state: &AerobatState,
    joints: &WingJointState,
    geom: &StripGeometry,
    p: &AerobatParams,
) -> WingStripStates {
    let sigma = side.sign();
    let m = geom.count();
    let mut out = WingStripStates {
        positions: Vec::with_capacity(m),
        velocities: Vec::with_capacity(m),
        offsets: Vec::with_capacity(m),
        flows: Vec::with_capacity(m),
        y1: Vec::with_capacity(m),
    };
    let body_x = state.rotation * Vec3::x();
    for i in 0..m {
        let (q, dq3, dq4, theta_seg) = strip_point(&p.wing, sigma, joints, geom.station(i));
        let rho = state.rotation * q;
        let q_dot = dq3 * joints.alpha3_dot + dq4 * joints.alpha4_dot;
        let v = state.velocity + state.omega.cross(&rho) + state.rotation * q_dot;
        let seg = state.rotation * rot_x(sigma * theta_seg);
        let normal = seg * Vec3::z();
        let vortex_dir = seg * Vec3::y();
        let u_rel = -v;
        out.y1.push(u_rel.dot(&normal));
        out.positions.push(state.position + rho);
        out.velocities.push(v);
        out.offsets.push(rho);
        out.flows.push(StripFlow { u_rel, vortex_dir, normal, body_x });
    }
    out
}
