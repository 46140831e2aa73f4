//! Wagner-type indicial response coefficients.
//!
//! The response kernel is a pair of decaying exponentials with per-chord time
//! scaling, Phi(tau) built from psi_k and eps_k. Two algebraic forms are
//! supported: the classical rising form (R. T. Jones coefficients),
//! Phi = 1 - psi1 e^{-eps1 tau/c} - psi2 e^{-eps2 tau/c}, which saturates at 1,
//! and a decaying two-exponential form Phi = psi1 e^{-eps1 tau/c} + psi2
//! e^{-eps2 tau/c} kept for reference. The rising form is the default; its
//! derivative is the convolution kernel realized by the lag states.

use serde::{Deserialize, Serialize};

use super::AeroError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WagnerForm {
    /// Phi(0) = 1 - psi1 - psi2, Phi(inf) = 1.
    #[default]
    Rising,
    /// Phi(0) = psi1 + psi2, Phi(inf) = 0.
    Decaying,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WagnerCoefficients {
    pub psi1: f64,
    pub psi2: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub form: WagnerForm,
}

impl Default for WagnerCoefficients {
    fn default() -> Self {
        Self::jones()
    }
}

impl WagnerCoefficients {
    /// R. T. Jones two-pole approximation of the Wagner function.
    pub fn jones() -> Self {
        Self { psi1: 0.165, psi2: 0.335, eps1: 0.0455, eps2: 0.3, form: WagnerForm::Rising }
    }

    pub fn validate(&self) -> Result<(), AeroError> {
        if !(self.eps1 > 0.0 && self.eps2 > 0.0) {
            return Err(AeroError::Wagner(format!(
                "decay rates must be positive, got eps1={} eps2={}",
                self.eps1, self.eps2
            )));
        }
        if !(self.psi1.is_finite() && self.psi2.is_finite()) {
            return Err(AeroError::Wagner("non-finite psi coefficients".into()));
        }
        Ok(())
    }

    /// Phi(0) of the configured form.
    pub fn phi0(&self) -> f64 {
        match self.form {
            WagnerForm::Rising => 1.0 - self.psi1 - self.psi2,
            WagnerForm::Decaying => self.psi1 + self.psi2,
        }
    }

    /// dPhi/dtau evaluated at elapsed time `s` for a strip of chord `c`.
    pub fn kernel(&self, s: f64, c: f64) -> f64 {
        let k = self.psi1 * (self.eps1 / c) * (-self.eps1 * s / c).exp()
            + self.psi2 * (self.eps2 / c) * (-self.eps2 * s / c).exp();
        match self.form {
            WagnerForm::Rising => k,
            WagnerForm::Decaying => -k,
        }
    }
}

/// Evaluate the configured Wagner approximation at scaled time `tau` for a
/// strip of chord `c`.
pub fn wagner_phi(tau: f64, c: f64, w: &WagnerCoefficients) -> f64 {
    debug_assert!(tau >= 0.0, "wagner_phi wants tau >= 0");
    let e1 = (-w.eps1 * tau / c).exp();
    let e2 = (-w.eps2 * tau / c).exp();
    match w.form {
        WagnerForm::Rising => 1.0 - w.psi1 * e1 - w.psi2 * e2,
        WagnerForm::Decaying => w.psi1 * e1 + w.psi2 * e2,
    }
}
