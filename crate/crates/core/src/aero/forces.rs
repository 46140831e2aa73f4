//! Per-strip aerodynamic forces from the response outputs.
//!
//! The strip force is a vector Kutta-Joukowski product plus an induced term
//! along the local relative flow:
//!
//! ```text
//!   F_i = rho c_i beta_i w_i [ (gamma_hat_i x u_rel_i) + y_Gamma_i u_hat_i ]
//! ```
//!
//! where gamma_hat is the bound-vortex direction (spanwise, continuous across
//! the body so both wings lift the same way), u_rel the local flow relative
//! to the strip, and u_hat its direction. The (thrust, lift, drag) triple is
//! a logging decomposition: body-x, world-z, and along-flow components.

use crate::geom::Vec3;

/// Local flow context of one strip, world frame.
#[derive(Debug, Clone)]
pub struct StripFlow {
    /// Air velocity relative to the strip (wind minus strip velocity).
    pub u_rel: Vec3,
    /// Bound-vortex (spanwise) direction, unit.
    pub vortex_dir: Vec3,
    /// Chord-normal direction, unit; defines the sign of the inflow y1.
    pub normal: Vec3,
    /// Vehicle body x-axis, unit; thrust component for logging.
    pub body_x: Vec3,
}

#[derive(Debug, Clone, Default)]
pub struct StripForces {
    /// World-frame force per strip, N.
    pub forces: Vec<Vec3>,
    /// Logging decomposition per strip.
    pub thrust: Vec<f64>,
    pub lift: Vec<f64>,
    pub drag: Vec<f64>,
    /// Sum of all strip forces.
    pub total: Vec3,
}

/// Forces for one wing given the response outputs and per-strip flow context.
///
/// `chords`, `widths`, `y_gamma` and `beta` are indexed like the strip
/// geometry; `rho` is the air density.
pub fn strip_forces(
    beta: &[f64],
    y_gamma: &[f64],
    flows: &[StripFlow],
    chords: &[f64],
    widths: &[f64],
    rho: f64,
) -> StripForces {
    let m = beta.len();
    assert!(y_gamma.len() == m && flows.len() == m && chords.len() == m && widths.len() == m);
    let mut out = StripForces {
        forces: Vec::with_capacity(m),
        thrust: Vec::with_capacity(m),
        lift: Vec::with_capacity(m),
        drag: Vec::with_capacity(m),
        total: Vec3::zeros(),
    };
    for i in 0..m {
        let f = &flows[i];
        debug_assert!(f.u_rel.iter().all(|v| v.is_finite()), "non-finite strip flow");
        let scale = rho * chords[i] * beta[i] * widths[i];
        let speed = f.u_rel.norm();
        let u_hat = if speed > 1e-12 { f.u_rel / speed } else { Vec3::zeros() };
        let force = scale * (f.vortex_dir.cross(&f.u_rel) + y_gamma[i] * u_hat);
        out.thrust.push(force.dot(&f.body_x));
        out.lift.push(force.z);
        out.drag.push(force.dot(&u_hat));
        out.total += force;
        out.forces.push(force);
    }
    out
}
