//! Extended-state observer.
//!
//! Estimate ODEs, driven by the pose measurement z = x1:
//!
//! ```text
//!   x1_hat_dot = x2_hat              - beta1 (x1_hat - z)
//!   x2_hat_dot = g1 + g2 u + g3 x3_hat - beta2 (x1_hat - z)
//!   x3_hat_dot =                     - beta3 (x1_hat - z)
//! ```
//!
//! With e = hat - true the error dynamics are the block system
//! [[-beta1, I, 0], [-beta2, 0, g3], [-beta3, 0, 0]] plus a -G(t) input on
//! the third row. Bandwidth tuning places all poles at -omega0 per axis:
//! beta1 = 3 w0 I, beta2 = 3 w0^2 I, beta3 = w0^3 g3^-1.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ControlError;
use crate::geom::{Mat6, Vec6};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObserverState {
    pub x1: Vec6,
    pub x2: Vec6,
    pub x3: Vec6,
}

impl ObserverState {
    pub fn from_measurement(z: &Vec6, x2: &Vec6) -> Self {
        Self { x1: *z, x2: *x2, x3: Vec6::zeros() }
    }

    pub fn is_finite(&self) -> bool {
        self.x1.iter().chain(self.x2.iter()).chain(self.x3.iter()).all(|v| v.is_finite())
    }

    /// Raise if the output error exceeds the configured ceiling.
    pub fn check_divergence(&self, z: &Vec6, ceiling: f64) -> Result<(), ControlError> {
        let err = (self.x1 - z).norm();
        if !err.is_finite() || err > ceiling {
            return Err(ControlError::ObserverDivergence(err, ceiling));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ObserverGains {
    pub beta1: Mat6,
    pub beta2: Mat6,
    pub beta3: Mat6,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObserverConfig {
    /// Pole location (all observer poles at -omega0), rad/s.
    pub omega0: f64,
    /// Divergence ceiling on the output error norm.
    pub divergence_ceiling: f64,
}

impl Default for ObserverConfig {
    fn default() -> Self {
        Self { omega0: 10.0, divergence_ceiling: 10.0 }
    }
}

/// Bandwidth-parameterized pole placement: all eigenvalues of the error
/// dynamics at -omega0.
pub fn tune_observer(omega0: f64, g3: &Mat6) -> Result<ObserverGains, ControlError> {
    if !(omega0 > 0.0) {
        return Err(ControlError::Tuning(format!("bandwidth must be positive, got {omega0}")));
    }
    let g3_inv = g3
        .try_inverse()
        .ok_or_else(|| ControlError::Tuning("disturbance map g3 is not invertible".into()))?;
    let gains = ObserverGains {
        beta1: 3.0 * omega0 * Mat6::identity(),
        beta2: 3.0 * omega0 * omega0 * Mat6::identity(),
        beta3: omega0.powi(3) * g3_inv,
    };
    let a = error_dynamics_matrix(&gains, g3);
    let max_re = a.complex_eigenvalues().iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    if max_re >= 0.0 {
        return Err(ControlError::Tuning(format!(
            "error dynamics not Hurwitz (max eigenvalue real part {max_re:.3e})"
        )));
    }
    Ok(gains)
}

/// Assemble the 18x18 error-dynamics block matrix.
pub fn error_dynamics_matrix(gains: &ObserverGains, g3: &Mat6) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(18, 18);
    for r in 0..6 {
        for c in 0..6 {
            a[(r, c)] = -gains.beta1[(r, c)];
            a[(6 + r, c)] = -gains.beta2[(r, c)];
            a[(12 + r, c)] = -gains.beta3[(r, c)];
            a[(6 + r, 12 + c)] = g3[(r, c)];
        }
        a[(r, 6 + r)] = 1.0;
    }
    a
}

/// Advance the estimates one control period with frozen measurement and
/// known acceleration (g1 + g2 u), classical RK4.
pub fn observer_step(
    obs: &ObserverState,
    z: &Vec6,
    known_accel: &Vec6,
    g3: &Mat6,
    gains: &ObserverGains,
    dt: f64,
) -> ObserverState {
    debug_assert!(dt > 0.0);
    let deriv = |s: &ObserverState| -> ObserverState {
        let e1 = s.x1 - z;
        ObserverState {
            x1: s.x2 - gains.beta1 * e1,
            x2: known_accel + g3 * s.x3 - gains.beta2 * e1,
            x3: -(gains.beta3 * e1),
        }
    };
    let lc = |s: &ObserverState, k: &ObserverState, h: f64| ObserverState {
        x1: s.x1 + h * k.x1,
        x2: s.x2 + h * k.x2,
        x3: s.x3 + h * k.x3,
    };
    let k1 = deriv(obs);
    let k2 = deriv(&lc(obs, &k1, 0.5 * dt));
    let k3 = deriv(&lc(obs, &k2, 0.5 * dt));
    let k4 = deriv(&lc(obs, &k3, dt));
    ObserverState {
        x1: obs.x1 + dt / 6.0 * (k1.x1 + 2.0 * k2.x1 + 2.0 * k3.x1 + k4.x1),
        x2: obs.x2 + dt / 6.0 * (k1.x2 + 2.0 * k2.x2 + 2.0 * k3.x2 + k4.x2),
        x3: obs.x3 + dt / 6.0 * (k1.x3 + 2.0 * k2.x3 + 2.0 * k3.x3 + k4.x3),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Simulate the scalar plant x1dot = x2, x2dot = x3, x3dot = G(t) coupled
    /// with the estimate ODEs as one continuous system (the measurement is
    /// the plant output at every RK4 stage), marched on axis 0. Returns
    /// (t, e1, e2, e3) samples.
    fn run_scalar<G: Fn(f64) -> f64>(
        omega0: f64,
        x3_init: f64,
        g_of_t: G,
        t_end: f64,
        dt: f64,
    ) -> Vec<(f64, f64, f64, f64)> {
        let gains = tune_observer(omega0, &Mat6::identity()).unwrap();
        let (b1, b2, b3) = (gains.beta1[(0, 0)], gains.beta2[(0, 0)], gains.beta3[(0, 0)]);
        // state: [x1, x2, x3, h1, h2, h3]
        let f = |s: &[f64; 6], t: f64| -> [f64; 6] {
            let e1 = s[3] - s[0];
            [s[1], s[2], g_of_t(t), s[4] - b1 * e1, s[5] - b2 * e1, -b3 * e1]
        };
        let mut s = [0.0, 0.0, x3_init, 0.0, 0.0, 0.0];
        let mut out = Vec::new();
        let steps = (t_end / dt).round() as usize;
        for i in 0..steps {
            let t = i as f64 * dt;
            let k1 = f(&s, t);
            let mut s2 = s;
            for j in 0..6 {
                s2[j] += 0.5 * dt * k1[j];
            }
            let k2 = f(&s2, t + 0.5 * dt);
            let mut s3 = s;
            for j in 0..6 {
                s3[j] += 0.5 * dt * k2[j];
            }
            let k3 = f(&s3, t + 0.5 * dt);
            let mut s4 = s;
            for j in 0..6 {
                s4[j] += dt * k3[j];
            }
            let k4 = f(&s4, t + dt);
            for j in 0..6 {
                s[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
            out.push((t + dt, s[3] - s[0], s[4] - s[1], s[5] - s[2]));
        }
        out
    }

    #[test]
    fn bandwidth_ten_gains() {
        let g = tune_observer(10.0, &Mat6::identity()).unwrap();
        assert_relative_eq!(g.beta1[(0, 0)], 30.0, epsilon = 1e-12);
        assert_relative_eq!(g.beta2[(0, 0)], 300.0, epsilon = 1e-12);
        assert_relative_eq!(g.beta3[(0, 0)], 1000.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_gain_matrix_is_nilpotent() {
        let gains = ObserverGains { beta1: Mat6::zeros(), beta2: Mat6::zeros(), beta3: Mat6::zeros() };
        let a = error_dynamics_matrix(&gains, &Mat6::identity());
        let max_abs = a.complex_eigenvalues().iter().map(|l| l.norm()).fold(0.0, f64::max);
        assert!(max_abs < 1e-7, "expected all-zero eigenvalues, max |lambda| = {max_abs}");
        // a^3 = 0 exactly for the chain structure
        let a3 = &a * &a * &a;
        assert!(a3.norm() < 1e-12);
    }

    #[test]
    fn characteristic_coefficients_per_axis() {
        // with diagonal gains the 18x18 decouples; the cubic per axis is
        // s^3 + b1 s^2 + b2 s + b3 g3, which the placement makes (s+w0)^3
        let w0 = 7.0_f64;
        let g = tune_observer(w0, &Mat6::identity()).unwrap();
        assert_relative_eq!(g.beta1[(2, 2)], 3.0 * w0, epsilon = 1e-12);
        assert_relative_eq!(g.beta2[(2, 2)], 3.0 * w0 * w0, epsilon = 1e-12);
        assert_relative_eq!(g.beta3[(2, 2)], w0 * w0 * w0, epsilon = 1e-12);
    }

    #[test]
    fn eigenvalues_match_companion_roots_for_random_diagonal_gains() {
        let diag = |v: [f64; 6]| Mat6::from_diagonal(&Vec6::from_row_slice(&v));
        let gains = ObserverGains {
            beta1: diag([11.0, 13.0, 9.0, 17.0, 8.0, 15.0]),
            beta2: diag([40.0, 55.0, 35.0, 70.0, 30.0, 60.0]),
            beta3: diag([60.0, 90.0, 45.0, 120.0, 40.0, 100.0]),
        };
        let g3 = diag([1.0, 2.0, 0.5, 1.5, 1.0, 0.8]);
        let a = error_dynamics_matrix(&gains, &g3);
        let mut got: Vec<(f64, f64)> = a
            .complex_eigenvalues()
            .iter()
            .map(|l| (l.re, l.im))
            .collect();
        let mut want = Vec::new();
        for i in 0..6 {
            let comp = DMatrix::from_row_slice(
                3,
                3,
                &[
                    -gains.beta1[(i, i)], 1.0, 0.0,
                    -gains.beta2[(i, i)], 0.0, g3[(i, i)],
                    -gains.beta3[(i, i)], 0.0, 0.0,
                ],
            );
            for l in comp.complex_eigenvalues().iter() {
                want.push((l.re, l.im));
            }
        }
        let key = |p: &(f64, f64)| (p.0 * 1e6) as i64 * 10_000 + (p.1 * 1e3) as i64;
        got.sort_by_key(key);
        want.sort_by_key(key);
        for (g, w) in got.iter().zip(&want) {
            assert_relative_eq!(g.0, w.0, epsilon = 1e-6);
            assert_relative_eq!(g.1.abs(), w.1.abs(), epsilon = 1e-6);
        }
    }

    #[test]
    fn stationary_at_zero_error_equilibrium() {
        let g3 = Mat6::identity();
        let gains = tune_observer(10.0, &g3).unwrap();
        let z = Vec6::new(0.4, -0.2, 0.1, 0.0, 0.05, -0.01);
        let obs = ObserverState { x1: z, x2: Vec6::zeros(), x3: Vec6::zeros() };
        let next = observer_step(&obs, &z, &Vec6::zeros(), &g3, &gains, 0.002);
        assert_relative_eq!(next.x1, obs.x1, epsilon = 1e-14);
        assert_relative_eq!(next.x2, obs.x2, epsilon = 1e-14);
        assert_relative_eq!(next.x3, obs.x3, epsilon = 1e-14);
    }

    #[test]
    fn constant_disturbance_estimated_without_steady_error() {
        let hist = run_scalar(10.0, 2.5, |_| 0.0, 3.0, 1e-3);
        let (_, e1, _, e3) = hist.last().unwrap();
        assert!(e1.abs() < 1e-9, "output error {e1}");
        assert!(e3.abs() < 1e-7, "disturbance error {e3}");
    }

    #[test]
    fn error_decays_six_orders_by_two_seconds() {
        let hist = run_scalar(10.0, 1.0, |_| 0.0, 2.0, 1e-3);
        let (_, e1, e2, e3) = hist.last().unwrap();
        let err = (e1 * e1 + e2 * e2 + e3 * e3).sqrt();
        // (1 + w0 t + (w0 t)^2 / 2 ...) exp(-w0 t) bound at t = 2, w0 = 10
        assert!(err < 1e-6 * 221.0, "settled error {err}");
        assert!(err < 1e-4, "settled error {err}");
    }

    #[test]
    fn ramp_disturbance_output_error_shows_third_order_rolloff() {
        // constant G = ramp x3: steady output error g/w0^3; doubling w0
        // shrinks it by 8
        let g = 4.0;
        let e_a = run_scalar(10.0, 0.0, |_| g, 4.0, 1e-3).last().unwrap().1.abs();
        let e_b = run_scalar(20.0, 0.0, |_| g, 4.0, 1e-3).last().unwrap().1.abs();
        assert_relative_eq!(e_a, g / 10.0_f64.powi(3), max_relative = 1e-3);
        assert_relative_eq!(e_a / e_b, 8.0, max_relative = 1e-2);
    }

    #[test]
    fn measured_decay_rate_matches_pole_location() {
        // fit the log-slope of the error norm on a window clear of both the
        // polynomial transient and the numerical floor
        let w0 = 10.0;
        let hist = run_scalar(w0, 1.0, |_| 0.0, 3.0, 1e-3);
        let norm_at = |t: f64| -> f64 {
            let idx = ((t / 1e-3).round() as usize).min(hist.len()) - 1;
            let (_, e1, e2, e3) = hist[idx];
            (e1 * e1 + e2 * e2 + e3 * e3).sqrt()
        };
        let (t_a, t_b) = (2.0, 3.0);
        let rate = -(norm_at(t_b).ln() - norm_at(t_a).ln()) / (t_b - t_a);
        assert!((rate - w0).abs() / w0 < 0.1, "measured decay rate {rate}");
    }

    #[test]
    fn divergence_guard_trips() {
        let mut obs = ObserverState::default();
        obs.x1[0] = 100.0;
        assert!(obs.check_divergence(&Vec6::zeros(), 10.0).is_err());
        assert!(ObserverState::default().check_divergence(&Vec6::zeros(), 10.0).is_ok());
    }

    #[test]
    fn rejects_bad_tuning_inputs() {
        assert!(tune_observer(0.0, &Mat6::identity()).is_err());
        assert!(tune_observer(10.0, &Mat6::zeros()).is_err());
    }
}
