//! Classical fixed-step RK4 over flat state vectors.

use nalgebra::DVector;

use super::SimError;

/// One RK4 step of x' = f(t, x). The derivative callback may fail (NaN guard,
/// singular configuration); the failure is annotated with the stage time.
pub fn rk4_step<F>(state: &DVector<f64>, t: f64, dt: f64, mut f: F) -> Result<DVector<f64>, SimError>
where
    F: FnMut(f64, &DVector<f64>) -> Result<DVector<f64>, SimError>,
{
    debug_assert!(dt > 0.0);
    let k1 = f(t, state)?;
    let k2 = f(t + 0.5 * dt, &(state + 0.5 * dt * &k1))?;
    let k3 = f(t + 0.5 * dt, &(state + 0.5 * dt * &k2))?;
    let k4 = f(t + dt, &(state + dt * &k3))?;
    let next = state + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if !next.iter().all(|v| v.is_finite()) {
        return Err(SimError::IntegrationFailure { t });
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn decay(t0: f64, x0: f64, t_end: f64, dt: f64) -> f64 {
        let mut x = DVector::from_element(1, x0);
        let mut t = t0;
        let steps = ((t_end - t0) / dt).round() as usize;
        for _ in 0..steps {
            x = rk4_step(&x, t, dt, |_, s| Ok(-s.clone())).unwrap();
            t += dt;
        }
        x[0]
    }

    #[test]
    fn exponential_decay_single_step() {
        let x = decay(0.0, 1.0, 0.1, 0.1);
        assert_relative_eq!(x, 0.9048374, epsilon = 1e-6);
    }

    #[test]
    fn constant_derivative_identity() {
        let x0 = DVector::from_vec(vec![2.0, -3.0]);
        let x = rk4_step(&x0, 0.0, 0.5, |_, _| Ok(DVector::zeros(2))).unwrap();
        assert_eq!(x, x0);
    }

    #[test]
    fn fourth_order_convergence() {
        let exact = (-1.0f64).exp();
        let e1 = (decay(0.0, 1.0, 1.0, 1e-2) - exact).abs();
        let e2 = (decay(0.0, 1.0, 1.0, 5e-3) - exact).abs();
        let ratio = e1 / e2;
        assert!((12.0..24.0).contains(&ratio), "order ratio {ratio}");
    }

    #[test]
    fn nan_derivative_reports_failure() {
        let x0 = DVector::from_element(1, 1.0);
        let r = rk4_step(&x0, 3.5, 0.1, |_, _| Ok(DVector::from_element(1, f64::NAN)));
        assert!(matches!(r, Err(SimError::IntegrationFailure { .. })));
    }
}
