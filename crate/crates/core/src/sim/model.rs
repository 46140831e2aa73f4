//! The coupled plant: guard rigid body, articulated vehicle, and the two
//! wing aerodynamic state spaces, integrated as one flat state vector.
//!
//! Layout: guard (p, v, R row-major, omega_body), vehicle (p, v, R row-major,
//! omega_world), then per wing the Fourier coefficients and lag states. Both
//! rotations are integrated directly and re-orthonormalized after every step.

use nalgebra::DVector;

use super::gait::{gait, GaitParams};
use super::integrator::rk4_step;
use super::SimError;
use crate::aero::{
    strip_forces, AeroConfig, AeroState, AeroSystemMatrices, StripForces, StripKinematics,
};
use crate::geom::{hat, orthonormalize, Mat3, Vec3};
use crate::vehicle::{
    aerobat_accelerations, com_position, elastic_wrench, gravity_potential, gravity_wrench,
    guard_derivatives_full, guard_kinetic_energy, kinetic_energy, linear_momentum,
    angular_momentum_about, thruster_mixing, AerobatParams, AerobatState, BodyWrench,
    ElasticWrench, GuardParams, GuardState, Side, ThrusterCommand, WingJointState,
};

#[derive(Debug, Clone)]
pub struct CoupledState {
    pub guard: GuardState,
    pub vehicle: AerobatState,
    pub aero_left: AeroState,
    pub aero_right: AeroState,
}

impl CoupledState {
    pub fn is_finite(&self) -> bool {
        self.guard.is_finite()
            && self.vehicle.is_finite()
            && self.aero_left.is_finite()
            && self.aero_right.is_finite()
    }
}

pub struct CoupledModel {
    pub guard: GuardParams,
    pub aerobat: AerobatParams,
    pub gait: GaitParams,
    pub gravity: f64,
    pub thrusters_enabled: bool,
    pub rho: f64,
    aero: Option<AeroSystemMatrices>,
    chords: Vec<f64>,
    widths: Vec<f64>,
    n: usize,
    m: usize,
}

/// Per-wing quantities of one evaluation instant.
pub struct WingOutputs {
    pub forces: StripForces,
    pub beta: Vec<f64>,
    pub kinematics: StripKinematics,
    pub gamma: Vec<f64>,
    pub gamma_dot: Vec<f64>,
}

/// Energy bookkeeping of the coupled system (gravity potential referenced to
/// z = 0).
#[derive(Debug, Clone, Copy, Default)]
pub struct EnergyBreakdown {
    pub kinetic_guard: f64,
    pub kinetic_vehicle: f64,
    pub potential_bands: f64,
    pub potential_gravity: f64,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.kinetic_guard + self.kinetic_vehicle + self.potential_bands + self.potential_gravity
    }

    pub fn kinetic(&self) -> f64 {
        self.kinetic_guard + self.kinetic_vehicle
    }
}

/// Everything one evaluation of the coupled dynamics produces.
pub struct Evaluation {
    pub derivative: DVector<f64>,
    pub joints: WingJointState,
    pub elastic: ElasticWrench,
    pub thruster_wrench: BodyWrench,
    pub guard_accel: Vec3,
    pub guard_omega_dot: Vec3,
    pub left: Option<WingOutputs>,
    pub right: Option<WingOutputs>,
}

impl CoupledModel {
    pub fn new(
        guard: GuardParams,
        aerobat: AerobatParams,
        gait_params: GaitParams,
        aero_cfg: &AeroConfig,
        gravity: f64,
        thrusters_enabled: bool,
    ) -> Result<Self, SimError> {
        guard.validate()?;
        aerobat.validate()?;
        gait_params.validate(&aerobat.wing)?;
        let aero = if aero_cfg.enabled { Some(aero_cfg.build_system()?) } else { None };
        let (n, m, chords, widths) = match &aero {
            Some(sys) => {
                let g = sys.geometry();
                (
                    sys.fourier_order(),
                    sys.strip_count(),
                    (0..g.count()).map(|i| g.chord(i)).collect(),
                    (0..g.count()).map(|i| g.width(i)).collect(),
                )
            }
            None => (0, 0, Vec::new(), Vec::new()),
        };
        Ok(Self {
            guard,
            aerobat,
            gait: gait_params,
            gravity,
            thrusters_enabled,
            rho: aero_cfg.rho,
            aero,
            chords,
            widths,
            n,
            m,
        })
    }

    pub fn aero_system(&self) -> Option<&AeroSystemMatrices> {
        self.aero.as_ref()
    }

    pub fn state_len(&self) -> usize {
        36 + 2 * (self.n + 2 * self.m)
    }

    pub fn joints_at(&self, t: f64) -> WingJointState {
        gait(t, &self.gait)
    }

    pub fn pack(&self, s: &CoupledState) -> DVector<f64> {
        let mut v = DVector::zeros(self.state_len());
        write_body(&mut v, 0, &s.guard.position, &s.guard.velocity, &s.guard.rotation, &s.guard.omega);
        write_body(&mut v, 18, &s.vehicle.position, &s.vehicle.velocity, &s.vehicle.rotation, &s.vehicle.omega);
        let mut k = 36;
        for xi in [&s.aero_left, &s.aero_right] {
            for i in 0..self.n {
                v[k] = xi.a[i];
                k += 1;
            }
            for i in 0..2 * self.m {
                v[k] = xi.z[i];
                k += 1;
            }
        }
        v
    }

    pub fn unpack(&self, v: &DVector<f64>) -> CoupledState {
        let (gp, gv, gr, go) = read_body(v, 0);
        let (ap, av, ar, ao) = read_body(v, 18);
        let mut k = 36;
        let mut wings = Vec::with_capacity(2);
        for _ in 0..2 {
            let mut xi = AeroState::zeros(self.n, self.m);
            for i in 0..self.n {
                xi.a[i] = v[k];
                k += 1;
            }
            for i in 0..2 * self.m {
                xi.z[i] = v[k];
                k += 1;
            }
            wings.push(xi);
        }
        let aero_right = wings.pop().unwrap();
        let aero_left = wings.pop().unwrap();
        CoupledState {
            guard: GuardState { position: gp, rotation: gr, velocity: gv, omega: go },
            vehicle: AerobatState { position: ap, rotation: ar, velocity: av, omega: ao },
            aero_left,
            aero_right,
        }
    }

    /// Full evaluation at (t, state, held command): derivative plus outputs.
    pub fn evaluate(&self, t: f64, s: &CoupledState, u: &ThrusterCommand) -> Result<Evaluation, SimError> {
        let joints = gait(t, &self.gait);
        let elastic = elastic_wrench(&s.guard, &s.vehicle, &self.aerobat.bands);
        let thruster_wrench = if self.thrusters_enabled {
            thruster_mixing(u, &self.guard, &BodyWrench::zero())
        } else {
            BodyWrench::zero()
        };
        let gd = guard_derivatives_full(
            &s.guard,
            &thruster_wrench,
            &elastic.force_on_guard,
            &elastic.moment_on_guard,
            &self.guard,
            self.gravity,
        );

        let mut wrench = gravity_wrench(&s.vehicle, &joints, &self.aerobat, self.gravity);
        wrench.force += elastic.force_on_vehicle;
        wrench.moment += elastic.moment_on_vehicle;

        let mut left = None;
        let mut right = None;
        let mut aero_deriv = Vec::new();
        if let Some(sys) = &self.aero {
            for (side, xi) in [(Side::Left, &s.aero_left), (Side::Right, &s.aero_right)] {
                let strips = crate::vehicle::wing_strip_states(side, &s.vehicle, &joints, sys.geometry(), &self.aerobat);
                let d = sys.derivative(xi, &strips.y1, t)?;
                let forces = strip_forces(&d.beta, &d.kinematics.y_gamma, &strips.flows, &self.chords, &self.widths, self.rho);
                for (f, off) in forces.forces.iter().zip(&strips.offsets) {
                    wrench.add_force_at(*f, *off);
                }
                let out = WingOutputs {
                    gamma: sys.gamma(xi),
                    gamma_dot: sys.gamma_dot(&d.a_dot),
                    beta: d.beta.clone(),
                    kinematics: d.kinematics.clone(),
                    forces,
                };
                match side {
                    Side::Left => left = Some(out),
                    Side::Right => right = Some(out),
                }
                aero_deriv.push((d.a_dot, d.z_dot));
            }
        }

        let (v_dot, omega_dot) = aerobat_accelerations(&s.vehicle, &joints, &wrench, &self.aerobat)?;

        let mut deriv = DVector::zeros(self.state_len());
        write_body(&mut deriv, 0, &gd.velocity, &gd.acceleration, &gd.rotation_dot, &gd.omega_dot);
        let vehicle_rot_dot = hat(&s.vehicle.omega) * s.vehicle.rotation;
        write_body(&mut deriv, 18, &s.vehicle.velocity, &v_dot, &vehicle_rot_dot, &omega_dot);
        let mut k = 36;
        for (a_dot, z_dot) in &aero_deriv {
            for i in 0..self.n {
                deriv[k] = a_dot[i];
                k += 1;
            }
            for i in 0..2 * self.m {
                deriv[k] = z_dot[i];
                k += 1;
            }
        }
        if !deriv.iter().all(|x| x.is_finite()) {
            return Err(SimError::IntegrationFailure { t });
        }
        Ok(Evaluation {
            derivative: deriv,
            joints,
            elastic,
            thruster_wrench,
            guard_accel: gd.acceleration,
            guard_omega_dot: gd.omega_dot,
            left,
            right,
        })
    }

    /// One plant step with the held thruster command; rotations are repaired
    /// after the step.
    pub fn step(&self, s: &CoupledState, t: f64, dt: f64, u: &ThrusterCommand) -> Result<CoupledState, SimError> {
        let packed = self.pack(s);
        let next = rk4_step(&packed, t, dt, |tau, x| {
            let st = self.unpack(x);
            Ok(self.evaluate(tau, &st, u)?.derivative)
        })?;
        let mut out = self.unpack(&next);
        out.guard.rotation = orthonormalize(&out.guard.rotation);
        out.vehicle.rotation = orthonormalize(&out.vehicle.rotation);
        Ok(out)
    }

    pub fn energy(&self, t: f64, s: &CoupledState) -> EnergyBreakdown {
        let joints = gait(t, &self.gait);
        let elastic = elastic_wrench(&s.guard, &s.vehicle, &self.aerobat.bands);
        EnergyBreakdown {
            kinetic_guard: guard_kinetic_energy(&s.guard, &self.guard),
            kinetic_vehicle: kinetic_energy(&s.vehicle, &joints, &self.aerobat),
            potential_bands: elastic.potential,
            potential_gravity: self.guard.mass * self.gravity * s.guard.position.z
                + gravity_potential(&s.vehicle, &joints, &self.aerobat, self.gravity),
        }
    }

    /// Total linear momentum of guard plus vehicle.
    pub fn total_linear_momentum(&self, t: f64, s: &CoupledState) -> Vec3 {
        let joints = gait(t, &self.gait);
        self.guard.mass * s.guard.velocity + linear_momentum(&s.vehicle, &joints, &self.aerobat)
    }

    /// Total angular momentum about the combined center of mass.
    pub fn total_angular_momentum(&self, t: f64, s: &CoupledState) -> Vec3 {
        let joints = gait(t, &self.gait);
        let m_a = self.aerobat.total_mass();
        let com_a = com_position(&s.vehicle, &joints, &self.aerobat);
        let com = (self.guard.mass * s.guard.position + m_a * com_a) / (self.guard.mass + m_a);
        let guard_inertia_world = s.guard.rotation * self.guard.inertia() * s.guard.rotation.transpose();
        (s.guard.position - com).cross(&(self.guard.mass * s.guard.velocity))
            + guard_inertia_world * s.guard.omega_world()
            + angular_momentum_about(&com, &s.vehicle, &joints, &self.aerobat)
    }
}

fn write_body(v: &mut DVector<f64>, at: usize, p: &Vec3, vel: &Vec3, rot: &Mat3, omega: &Vec3) {
    for i in 0..3 {
        v[at + i] = p[i];
        v[at + 3 + i] = vel[i];
        v[at + 15 + i] = omega[i];
    }
    for r in 0..3 {
        for c in 0..3 {
            v[at + 6 + 3 * r + c] = rot[(r, c)];
        }
    }
}

fn read_body(v: &DVector<f64>, at: usize) -> (Vec3, Vec3, Mat3, Vec3) {
    let p = Vec3::new(v[at], v[at + 1], v[at + 2]);
    let vel = Vec3::new(v[at + 3], v[at + 4], v[at + 5]);
    let mut rot = Mat3::zeros();
    for r in 0..3 {
        for c in 0..3 {
            rot[(r, c)] = v[at + 6 + 3 * r + c];
        }
    }
    let omega = Vec3::new(v[at + 15], v[at + 16], v[at + 17]);
    (p, vel, rot, omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aero::AeroConfig;
    use crate::vehicle::band_equilibrium_offset;
    use approx::assert_relative_eq;

    fn model(aero_on: bool, bands_on: bool, gravity: f64) -> CoupledModel {
        let mut aerobat = AerobatParams::default();
        aerobat.bands.enabled = bands_on;
        aerobat.bands.damping = 0.0;
        let aero_cfg = AeroConfig { enabled: aero_on, ..AeroConfig::default() };
        CoupledModel::new(GuardParams::default(), aerobat, GaitParams::default(), &aero_cfg, gravity, false).unwrap()
    }

    fn hang_state(m: &CoupledModel) -> CoupledState {
        let guard = GuardState::at_rest(Vec3::zeros());
        let off = band_equilibrium_offset(&m.aerobat.bands, m.aerobat.total_mass() * m.gravity);
        CoupledState {
            guard,
            vehicle: AerobatState::at_rest(off),
            aero_left: AeroState::zeros(m.n, m.m),
            aero_right: AeroState::zeros(m.n, m.m),
        }
    }

    #[test]
    fn pack_unpack_roundtrip() {
        let m = model(true, true, 9.8);
        let mut s = hang_state(&m);
        s.guard.velocity = Vec3::new(0.1, -0.2, 0.3);
        s.vehicle.omega = Vec3::new(0.5, 0.4, -0.1);
        s.aero_left.a[2] = 0.7;
        s.aero_right.z[5] = -0.3;
        let v = m.pack(&s);
        let back = m.unpack(&v);
        assert_eq!(back.guard, s.guard);
        assert_eq!(back.vehicle, s.vehicle);
        assert_eq!(back.aero_left, s.aero_left);
        assert_eq!(back.aero_right, s.aero_right);
    }

    #[test]
    fn free_fall_parabola() {
        // everything off and wings frozen: both bodies free-fall,
        // z = z0 - g t^2 / 2 exactly (an active gait would hand the vehicle
        // internal momentum and shift its torso off the naive parabola)
        let mut m = model(false, false, 9.8);
        m.gait = m.gait.frozen();
        let mut s = hang_state(&m);
        let dt = 1e-3;
        for k in 0..500 {
            s = m.step(&s, k as f64 * dt, dt, &ThrusterCommand::default()).unwrap();
        }
        assert_relative_eq!(s.guard.position.z, -4.9 * 0.25, epsilon = 1e-9);
        assert_relative_eq!(s.vehicle.position.z, hang_state(&m).vehicle.position.z - 4.9 * 0.25, epsilon = 1e-9);
    }

    #[test]
    fn active_gait_preserves_com_parabola() {
        // flapping is internal: the system center of mass still free-falls
        // from its initial (gait-induced) momentum
        let m = model(false, false, 9.8);
        let mut s = hang_state(&m);
        let joints0 = m.joints_at(0.0);
        let m_total = m.guard.mass + m.aerobat.total_mass();
        let com0 = (m.guard.mass * s.guard.position
            + m.aerobat.total_mass() * com_position(&s.vehicle, &joints0, &m.aerobat))
            / m_total;
        let p0 = m.total_linear_momentum(0.0, &s);
        let dt = 1e-4;
        let t_end = 0.5;
        for k in 0..5000 {
            s = m.step(&s, k as f64 * dt, dt, &ThrusterCommand::default()).unwrap();
        }
        let joints1 = m.joints_at(t_end);
        let com1 = (m.guard.mass * s.guard.position
            + m.aerobat.total_mass() * com_position(&s.vehicle, &joints1, &m.aerobat))
            / m_total;
        let expected = com0 + (p0 / m_total) * t_end + Vec3::new(0.0, 0.0, -4.9 * t_end * t_end);
        assert_relative_eq!(com1, expected, epsilon = 1e-8);
    }

    #[test]
    fn momentum_conserved_without_gravity_during_flapping() {
        // gravity off, thrusters off, aero off, bands on, gait active:
        // band and wing forces are internal, total momentum stays put
        let m = model(false, true, 0.0);
        let mut s = hang_state(&m);
        s.guard.velocity = Vec3::new(0.02, -0.01, 0.03);
        s.vehicle.velocity = s.guard.velocity;
        let p0 = m.total_linear_momentum(0.0, &s);
        let h0 = m.total_angular_momentum(0.0, &s);
        let dt = 1e-4;
        let mut t = 0.0;
        for _ in 0..10_000 {
            s = m.step(&s, t, dt, &ThrusterCommand::default()).unwrap();
            t += dt;
        }
        let p1 = m.total_linear_momentum(t, &s);
        let h1 = m.total_angular_momentum(t, &s);
        assert!((p1 - p0).norm() < 1e-10, "momentum drift {}", (p1 - p0).norm());
        assert!((h1 - h0).norm() < 1e-9, "angular momentum drift {}", (h1 - h0).norm());
    }

    #[test]
    fn passive_energy_conserved_with_frozen_gait() {
        let mut m = model(false, true, 9.8);
        m.gait = m.gait.frozen();
        let mut s = hang_state(&m);
        s.vehicle.position.z -= 0.02; // stretch release
        s.guard.omega = Vec3::new(0.1, 0.0, 0.05);
        let e0 = m.energy(0.0, &s).total();
        let mut peak_active: f64 = 0.0;
        let dt = 1e-4;
        let mut t = 0.0;
        let mut worst: f64 = 0.0;
        for i in 0..10_000 {
            s = m.step(&s, t, dt, &ThrusterCommand::default()).unwrap();
            t += dt;
            if i % 100 == 0 {
                let e = m.energy(t, &s);
                peak_active = peak_active.max(e.kinetic() + e.potential_bands);
                worst = worst.max((e.total() - e0).abs());
            }
        }
        let rel = worst / peak_active;
        assert!(rel < 1e-6, "relative energy drift {rel}");
    }

    #[test]
    fn guard_rotation_stays_orthonormal() {
        let m = model(true, true, 9.8);
        let mut s = hang_state(&m);
        s.guard.omega = Vec3::new(1.0, -2.0, 0.5);
        let dt = 1e-3;
        let mut t = 0.0;
        for _ in 0..2000 {
            s = m.step(&s, t, dt, &ThrusterCommand::default()).unwrap();
            t += dt;
        }
        assert!(s.guard.orthonormality_error() < 1e-9);
        assert!(crate::geom::orthonormality_error(&s.vehicle.rotation) < 1e-9);
    }
}
