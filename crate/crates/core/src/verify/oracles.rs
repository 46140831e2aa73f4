//! Independent numerical oracles.
//!
//! These implementations deliberately avoid the state-space path they are
//! used to check: the indicial response is integrated by direct trapezoid
//! quadrature of the convolution, and the scalar observer harness integrates
//! plant and estimates as one continuous system.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aero::WagnerCoefficients;

/// Trapezoid-quadrature Duhamel convolution:
/// beta(t) = y'(t) Phi0 + int_0^t dPhi/dtau (t - tau) y'(tau) dtau,
/// evaluated at the requested sample indices of a uniformly sampled history.
pub fn duhamel_response(
    y_prime: &[f64],
    dt: f64,
    w: &WagnerCoefficients,
    chord: f64,
    eval_at: &[usize],
) -> Vec<f64> {
    let phi0 = w.phi0();
    let mut out = Vec::with_capacity(eval_at.len());
    for &k in eval_at {
        assert!(k < y_prime.len());
        let t_k = k as f64 * dt;
        let mut integral = 0.0;
        if k > 0 {
            let mut prev = w.kernel(t_k, chord) * y_prime[0];
            for (j, &y) in y_prime.iter().enumerate().take(k + 1).skip(1) {
                let cur = w.kernel(t_k - j as f64 * dt, chord) * y;
                integral += 0.5 * dt * (prev + cur);
                prev = cur;
            }
        }
        out.push(y_prime[k] * phi0 + integral);
    }
    out
}

/// Closed-form indicial response to a constant inflow Y: beta(t) = Y Phi(t)
/// for the rising Wagner form.
pub fn constant_inflow_response(y: f64, t: f64, w: &WagnerCoefficients, chord: f64) -> f64 {
    y * crate::aero::wagner_phi(t, chord, w)
}

/// Prescribed inflow histories for the oracle-equivalence check.
pub enum InputHistory {
    Step,
    Sine { hz: f64 },
    BandLimitedNoise { seed: u64 },
}

impl InputHistory {
    pub fn name(&self) -> String {
        match self {
            InputHistory::Step => "step".into(),
            InputHistory::Sine { hz } => format!("{hz}hz-sine"),
            InputHistory::BandLimitedNoise { .. } => "band-limited-noise".into(),
        }
    }

    /// Sample the history as a function of time; noise is a seeded sum of
    /// sinusoids below 15 Hz, so it is smooth and reproducible.
    pub fn sampler(&self) -> Box<dyn Fn(f64) -> f64> {
        match self {
            InputHistory::Step => Box::new(|t| if t >= 0.0 { 1.0 } else { 0.0 }),
            InputHistory::Sine { hz } => {
                let w = 2.0 * std::f64::consts::PI * hz;
                Box::new(move |t| (w * t).sin())
            }
            InputHistory::BandLimitedNoise { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let comps: Vec<(f64, f64, f64)> = (0..15)
                    .map(|_| {
                        let f = rng.random_range(0.5..15.0);
                        let a = rng.random_range(0.1..0.5);
                        let p = rng.random_range(0.0..std::f64::consts::TAU);
                        (2.0 * std::f64::consts::PI * f, a, p)
                    })
                    .collect();
                Box::new(move |t| comps.iter().map(|(w, a, p)| a * (w * t + p).sin()).sum())
            }
        }
    }
}

/// Scalar extended-state-observer harness: plant x1' = x2, x2' = x3,
/// x3' = G(t) coupled with the estimate ODEs, integrated continuously.
/// Returns samples of (t, e1, e2, e3).
pub fn scalar_observer_run<G: Fn(f64) -> f64>(
    omega0: f64,
    x3_init: f64,
    estimates_start_true: bool,
    g_of_t: G,
    t_end: f64,
    dt: f64,
) -> Vec<(f64, f64, f64, f64)> {
    let (b1, b2, b3) = (3.0 * omega0, 3.0 * omega0 * omega0, omega0.powi(3));
    let f = |s: &[f64; 6], t: f64| -> [f64; 6] {
        let e1 = s[3] - s[0];
        [s[1], s[2], g_of_t(t), s[4] - b1 * e1, s[5] - b2 * e1, -b3 * e1]
    };
    let mut s = [0.0, 0.0, x3_init, 0.0, 0.0, if estimates_start_true { x3_init } else { 0.0 }];
    let steps = (t_end / dt).round() as usize;
    let mut out = Vec::with_capacity(steps);
    for i in 0..steps {
        let t = i as f64 * dt;
        let k1 = f(&s, t);
        let mut s2 = s;
        let mut s3 = s;
        let mut s4 = s;
        for j in 0..6 {
            s2[j] += 0.5 * dt * k1[j];
        }
        let k2 = f(&s2, t + 0.5 * dt);
        for j in 0..6 {
            s3[j] += 0.5 * dt * k2[j];
        }
        let k3 = f(&s3, t + 0.5 * dt);
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

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_input_quadrature_matches_closed_form() {
        let w = WagnerCoefficients::jones();
        let chord = 0.05;
        let dt = 1e-4;
        let n = 5000;
        let y: Vec<f64> = vec![1.0; n];
        let eval: Vec<usize> = vec![100, 1000, 4999];
        let beta = duhamel_response(&y, dt, &w, chord, &eval);
        for (&k, &b) in eval.iter().zip(&beta) {
            let exact = constant_inflow_response(1.0, k as f64 * dt, &w, chord);
            assert_relative_eq!(b, exact, max_relative = 1e-4);
        }
    }

    #[test]
    fn zero_input_zero_response() {
        let w = WagnerCoefficients::jones();
        let y = vec![0.0; 100];
        let beta = duhamel_response(&y, 1e-3, &w, 0.05, &[0, 50, 99]);
        assert!(beta.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn noise_history_is_deterministic_and_bounded() {
        let a = InputHistory::BandLimitedNoise { seed: 9 }.sampler();
        let b = InputHistory::BandLimitedNoise { seed: 9 }.sampler();
        for i in 0..100 {
            let t = i as f64 * 0.01;
            assert_eq!(a(t), b(t));
            assert!(a(t).abs() < 8.0);
        }
    }
}
