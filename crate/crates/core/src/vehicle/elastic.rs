//! Elastic-band coupling between the guard and the vehicle torso.
//!
//! Four linear bands connect fixed attachment points on both bodies. Forces
//! are the exact gradient of the band potential (plus an optional viscous
//! term on the attachment-point relative velocity), applied at the points, so
//! action and reaction cancel and the conservative part admits an energy
//! audit.

use super::{AerobatState, BandParams};
use crate::geom::Vec3;
use crate::vehicle::GuardState;

/// Band wrench on both bodies, world frame. Moments are taken about the
/// guard center and the torso origin respectively.
#[derive(Debug, Clone, Default)]
pub struct ElasticWrench {
    pub force_on_guard: Vec3,
    pub moment_on_guard: Vec3,
    pub force_on_vehicle: Vec3,
    pub moment_on_vehicle: Vec3,
    /// Elastic potential energy of all bands, J.
    pub potential: f64,
}

/// Evaluate the band wrench for the current states.
pub fn elastic_wrench(guard: &GuardState, vehicle: &AerobatState, p: &BandParams) -> ElasticWrench {
    let mut out = ElasticWrench::default();
    if !p.enabled {
        return out;
    }
    let k = p.per_band_stiffness();
    let c = p.per_band_damping();
    let omega_g = guard.omega_world();
    for i in 0..4 {
        let rg = guard.rotation * p.guard_point(i);
        let ra = vehicle.rotation * p.vehicle_point(i);
        let pg = guard.position + rg;
        let pa = vehicle.position + ra;
        let d = pg - pa;

        let mut f_on_guard = if p.rest_length == 0.0 {
            -k * d
        } else {
            let len = d.norm();
            if len < 1e-12 {
                Vec3::zeros()
            } else {
                -k * (len - p.rest_length) * (d / len)
            }
        };
        if c > 0.0 {
            let vg = guard.velocity + omega_g.cross(&rg);
            let va = vehicle.velocity + vehicle.omega.cross(&ra);
            f_on_guard -= c * (vg - va);
        }

        out.force_on_guard += f_on_guard;
        out.moment_on_guard += rg.cross(&f_on_guard);
        out.force_on_vehicle -= f_on_guard;
        out.moment_on_vehicle += ra.cross(&-f_on_guard);

        out.potential += if p.rest_length == 0.0 {
            0.5 * k * d.norm_squared()
        } else {
            let s = d.norm() - p.rest_length;
            0.5 * k * s * s
        };
    }
    out
}

/// Relative offset (vehicle minus guard position) at which the band forces
/// balance the vehicle weight with aligned attitudes; the static hang point.
pub fn band_equilibrium_offset(p: &BandParams, vehicle_weight: f64) -> Vec3 {
    let mut centroid_gap = Vec3::zeros();
    for i in 0..4 {
        centroid_gap += p.guard_point(i) - p.vehicle_point(i);
    }
    centroid_gap /= 4.0;
    centroid_gap + Vec3::new(0.0, 0.0, -vehicle_weight / p.stiffness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{euler_to_rotation, EulerAngles, Mat3};
    use approx::assert_relative_eq;

    fn undamped() -> BandParams {
        BandParams { damping: 0.0, ..BandParams::default() }
    }

    fn vehicle_at(pos: Vec3) -> AerobatState {
        AerobatState {
            position: pos,
            rotation: Mat3::identity(),
            velocity: Vec3::zeros(),
            omega: Vec3::zeros(),
        }
    }

    #[test]
    fn coincident_centers_carry_no_net_wrench() {
        let g = GuardState::at_rest(Vec3::new(0.3, -0.1, 1.0));
        let a = vehicle_at(g.position);
        let w = elastic_wrench(&g, &a, &undamped());
        assert!(w.force_on_guard.norm() < 1e-12);
        assert!(w.moment_on_guard.norm() < 1e-12);
        assert!(w.force_on_vehicle.norm() < 1e-12);
        // individual bands are pre-tensioned even though the net wrench vanishes
        assert!(w.potential > 0.0);
    }

    #[test]
    fn hooke_restoring_force_along_z() {
        let p = undamped();
        let g = GuardState::at_rest(Vec3::zeros());
        let d = 0.02;
        let a = vehicle_at(Vec3::new(0.0, 0.0, -d));
        let w = elastic_wrench(&g, &a, &p);
        // vehicle displaced down: bands pull it back up with K * d
        assert_relative_eq!(w.force_on_vehicle.z, p.stiffness * d, epsilon = 1e-12);
        assert_relative_eq!(w.force_on_guard.z, -p.stiffness * d, epsilon = 1e-12);
    }

    #[test]
    fn action_reaction_for_random_states() {
        let p = undamped();
        let mut g = GuardState::at_rest(Vec3::new(0.1, 0.2, -0.3));
        g.rotation = euler_to_rotation(&EulerAngles::new(0.2, -0.3, 0.9)).unwrap();
        let mut a = vehicle_at(Vec3::new(0.15, 0.18, -0.36));
        a.rotation = euler_to_rotation(&EulerAngles::new(-0.4, 0.1, 0.5)).unwrap();
        let w = elastic_wrench(&g, &a, &p);
        assert!((w.force_on_guard + w.force_on_vehicle).norm() < 1e-12);
        // total moment about the world origin cancels as well
        let total_moment = (w.moment_on_guard + g.position.cross(&w.force_on_guard))
            + (w.moment_on_vehicle + a.position.cross(&w.force_on_vehicle));
        assert!(total_moment.norm() < 1e-12);
    }

    #[test]
    fn forces_are_potential_gradient() {
        // finite-difference the potential along a displacement direction
        let p = undamped();
        let g = GuardState::at_rest(Vec3::zeros());
        let dir = Vec3::new(0.4, -0.7, 0.2).normalize();
        let base = Vec3::new(0.01, 0.02, -0.04);
        let h = 1e-7;
        let wp = elastic_wrench(&g, &vehicle_at(base + h * dir), &p);
        let wm = elastic_wrench(&g, &vehicle_at(base - h * dir), &p);
        let grad_fd = (wp.potential - wm.potential) / (2.0 * h);
        let w0 = elastic_wrench(&g, &vehicle_at(base), &p);
        assert_relative_eq!(-w0.force_on_vehicle.dot(&dir), grad_fd, epsilon = 1e-6);
    }

    #[test]
    fn damping_opposes_relative_velocity() {
        let p = BandParams { damping: 0.4, ..BandParams::default() };
        let g = GuardState::at_rest(Vec3::zeros());
        let mut a = vehicle_at(Vec3::zeros());
        a.velocity = Vec3::new(0.0, 0.0, 1.0);
        let w = elastic_wrench(&g, &a, &p);
        assert_relative_eq!(w.force_on_vehicle.z, -p.damping, epsilon = 1e-12);
        assert!((w.force_on_guard + w.force_on_vehicle).norm() < 1e-12);
    }

    #[test]
    fn equilibrium_offset_balances_weight() {
        let p = undamped();
        let weight = 0.040 * 9.8;
        let off = band_equilibrium_offset(&p, weight);
        let g = GuardState::at_rest(Vec3::zeros());
        let a = vehicle_at(off);
        let w = elastic_wrench(&g, &a, &p);
        assert_relative_eq!(w.force_on_vehicle.z, weight, epsilon = 1e-12);
        assert!(w.force_on_vehicle.xy().norm() < 1e-12);
        assert!(w.moment_on_vehicle.norm() < 1e-12);
    }

    #[test]
    fn disabled_bands_produce_nothing() {
        let p = BandParams { enabled: false, ..BandParams::default() };
        let g = GuardState::at_rest(Vec3::zeros());
        let a = vehicle_at(Vec3::new(0.0, 0.0, -0.5));
        let w = elastic_wrench(&g, &a, &p);
        assert_eq!(w.force_on_guard, Vec3::zeros());
        assert_eq!(w.potential, 0.0);
    }
}
