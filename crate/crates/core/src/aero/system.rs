//! Assembled linear state space of the wing aerodynamics.
//!
//! Per strip i the model carries two lag states Z_i = (z1, z2) and shares the
//! Fourier coefficient vector a across strips:
//!
//! ```text
//!   A_i a_dot = -B_i a + C_i Z_i + Phi0 y'_i        (circulation rows)
//!   Z_i_dot   =  D_i Z_i + E_i y'_i                 (lag states)
//!   beta_i    =  Phi0 y'_i + C_i Z_i                (response output)
//! ```
//!
//! with A_i = [sin(k theta_i)], B_i = A_i / c_i, C_i = [psi1 eps1/c_i,
//! psi2 eps2/c_i], and y'_i = y_{1,i} + y_{Gamma,i} the strip inflow including
//! the circulation-induced part.
//!
//! The harmonic family of the circulation series is selectable. Consecutive
//! harmonics k = 1..n restricted to the half-span interval theta in (0, pi/2)
//! produce a collocation matrix whose condition number grows roughly 80x per
//! two strips (1.7e6 at m = 8), so the default uses odd harmonics
//! k = 1, 3, 5, ... — the symmetric-loading family of classical lifting-line
//! analysis, which keeps the stacked rows near-orthogonal (condition ~3).
//!
//! Two realizations of (D_i, E_i) are provided:
//!
//! - `Autonomous` (default): D_i = diag(-eps_k/c_i), E_i = [1, 1]^T. This is
//!   the time-invariant realization of the exponential-kernel convolution
//!   implied by the change of variable z_k = int exp(-(eps_k/c)(t-tau)) y' dtau,
//!   and reproduces the Duhamel quadrature oracle exactly.
//! - `TimeVarying`: D_i = diag(-2 eps_k/c_i), E_i(t) = [2 - exp(eps_k t/c_i)].
//!   Kept selectable for reference; the explicit time dependence makes the
//!   input gain grow without bound, so it is unsuitable for long runs.

use nalgebra::{DMatrix, DVector, Dyn, LU};
use serde::{Deserialize, Serialize};

use super::{AeroError, StripGeometry, WagnerCoefficients};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LagRealization {
    #[default]
    Autonomous,
    TimeVarying,
}

/// Harmonic numbers carried by the circulation series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum HarmonicBasis {
    /// k = 1, 3, 5, ...: symmetric spanwise loading, well conditioned on the
    /// half-span collocation grid.
    #[default]
    Odd,
    /// k = 1, 2, 3, ...: the series as commonly printed; near-singular for
    /// more than ~6 strips on the half-span grid.
    Consecutive,
}

impl HarmonicBasis {
    fn harmonic(&self, j: usize) -> usize {
        match self {
            HarmonicBasis::Odd => 2 * j + 1,
            HarmonicBasis::Consecutive => j + 1,
        }
    }
}

/// Unified aerodynamic state of one wing: Fourier circulation coefficients
/// plus the per-strip lag-state pairs, xi = [a; Z].
#[derive(Debug, Clone, PartialEq)]
pub struct AeroState {
    /// Fourier circulation coefficients, length n.
    pub a: DVector<f64>,
    /// Lag states, length 2m, strip i at (2i, 2i+1).
    pub z: DVector<f64>,
}

impl AeroState {
    pub fn zeros(n: usize, strips: usize) -> Self {
        Self { a: DVector::zeros(n), z: DVector::zeros(2 * strips) }
    }

    pub fn norm(&self) -> f64 {
        (self.a.norm_squared() + self.z.norm_squared()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().chain(self.z.iter()).all(|v| v.is_finite())
    }
}

/// Per-strip inflow decomposition for one evaluation instant.
#[derive(Debug, Clone)]
pub struct StripKinematics {
    /// Quasi-steady normal inflow from vehicle kinematics, m/s.
    pub y1: Vec<f64>,
    /// Circulation-induced component.
    pub y_gamma: Vec<f64>,
    /// Combined inflow y' = y1 + y_gamma.
    pub y_prime: Vec<f64>,
}

/// Time derivative of an [`AeroState`] plus the intermediate quantities the
/// rest of the vehicle needs at the same instant.
#[derive(Debug, Clone)]
pub struct AeroDerivative {
    pub a_dot: DVector<f64>,
    pub z_dot: DVector<f64>,
    pub kinematics: StripKinematics,
    /// Per-strip response beta_i.
    pub beta: Vec<f64>,
}

pub struct AeroSystemMatrices {
    geom: StripGeometry,
    wagner: WagnerCoefficients,
    realization: LagRealization,
    basis: HarmonicBasis,
    n: usize,
    /// m x n rows [sin(k theta_i)].
    a_rows: DMatrix<f64>,
    a_lu: LU<f64, Dyn, Dyn>,
    /// m x n rows [sin(k theta_i) / sin(theta_i)].
    induced: DMatrix<f64>,
    /// Output/lag weights per strip: psi_k eps_k / c_i.
    c1: Vec<f64>,
    c2: Vec<f64>,
    /// Positive lag rates per strip (realization dependent).
    rate1: Vec<f64>,
    rate2: Vec<f64>,
    phi0: f64,
    condition: f64,
}

impl AeroSystemMatrices {
    pub fn assemble(
        geom: StripGeometry,
        wagner: WagnerCoefficients,
        fourier_order: usize,
        realization: LagRealization,
        basis: HarmonicBasis,
    ) -> Result<Self, AeroError> {
        wagner.validate()?;
        let m = geom.count();
        if fourier_order != m {
            return Err(AeroError::Configuration(format!(
                "Fourier order ({fourier_order}) must equal strip count ({m}) for a square circulation system"
            )));
        }
        let n = fourier_order;
        let mut a_rows = DMatrix::zeros(m, n);
        let mut induced = DMatrix::zeros(m, n);
        for i in 0..m {
            let th = geom.theta(i);
            let s = th.sin();
            for j in 0..n {
                let v = (basis.harmonic(j) as f64 * th).sin();
                a_rows[(i, j)] = v;
                induced[(i, j)] = v / s;
            }
        }
        let a_lu = a_rows.clone().lu();
        let inv = a_lu.try_inverse().ok_or(AeroError::SingularSystem)?;
        let condition = a_rows.norm() * inv.norm();
        if !condition.is_finite() {
            return Err(AeroError::SingularSystem);
        }

        let mut c1 = Vec::with_capacity(m);
        let mut c2 = Vec::with_capacity(m);
        let mut rate1 = Vec::with_capacity(m);
        let mut rate2 = Vec::with_capacity(m);
        let rate_scale = match realization {
            LagRealization::Autonomous => 1.0,
            LagRealization::TimeVarying => 2.0,
        };
        for i in 0..m {
            let c = geom.chord(i);
            c1.push(wagner.psi1 * wagner.eps1 / c);
            c2.push(wagner.psi2 * wagner.eps2 / c);
            rate1.push(rate_scale * wagner.eps1 / c);
            rate2.push(rate_scale * wagner.eps2 / c);
        }
        let phi0 = wagner.phi0();
        let sys = Self {
            geom,
            wagner,
            realization,
            basis,
            n,
            a_rows,
            a_lu,
            induced,
            c1,
            c2,
            rate1,
            rate2,
            phi0,
            condition,
        };

        // Stability gate on the closed xi-dynamics (input gain at t = 0).
        let (pi1, _) = sys.pi_matrices();
        let max_re = pi1
            .complex_eigenvalues()
            .iter()
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max);
        if max_re >= 0.0 {
            return Err(AeroError::UnstableSystem(max_re));
        }
        Ok(sys)
    }

    pub fn geometry(&self) -> &StripGeometry {
        &self.geom
    }

    pub fn wagner(&self) -> &WagnerCoefficients {
        &self.wagner
    }

    pub fn realization(&self) -> LagRealization {
        self.realization
    }

    pub fn basis(&self) -> HarmonicBasis {
        self.basis
    }

    /// Harmonic number of coefficient j.
    pub fn harmonic(&self, j: usize) -> usize {
        self.basis.harmonic(j)
    }

    pub fn strip_count(&self) -> usize {
        self.geom.count()
    }

    pub fn fourier_order(&self) -> usize {
        self.n
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    /// Condition number estimate of the stacked circulation rows.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Output weights C_i of strip i.
    pub fn output_weights(&self, i: usize) -> [f64; 2] {
        [self.c1[i], self.c2[i]]
    }

    /// Positive lag rates of strip i (the negated diagonal of D_i).
    pub fn lag_rates(&self, i: usize) -> [f64; 2] {
        [self.rate1[i], self.rate2[i]]
    }

    /// Circulation rows A_i stacked (immutable view).
    pub fn circulation_rows(&self) -> &DMatrix<f64> {
        &self.a_rows
    }

    /// Lag input gains E_i at absolute time t.
    fn input_gain(&self, i: usize, t: f64) -> [f64; 2] {
        match self.realization {
            LagRealization::Autonomous => [1.0, 1.0],
            LagRealization::TimeVarying => {
                let c = self.geom.chord(i);
                [
                    2.0 - (self.wagner.eps1 * t / c).exp(),
                    2.0 - (self.wagner.eps2 * t / c).exp(),
                ]
            }
        }
    }

    /// Strip inflow from the quasi-steady component and the current
    /// circulation state.
    pub fn kinematics(&self, state: &AeroState, y1: &[f64]) -> StripKinematics {
        let m = self.strip_count();
        assert_eq!(y1.len(), m, "y1 length must match strip count");
        let y_gamma_v = &self.induced * &state.a;
        let y_gamma: Vec<f64> = y_gamma_v.iter().copied().collect();
        let y_prime: Vec<f64> = y1.iter().zip(&y_gamma).map(|(a, b)| a + b).collect();
        StripKinematics { y1: y1.to_vec(), y_gamma, y_prime }
    }

    /// Full state derivative at absolute time t given the quasi-steady inflow.
    pub fn derivative(&self, state: &AeroState, y1: &[f64], t: f64) -> Result<AeroDerivative, AeroError> {
        let m = self.strip_count();
        assert_eq!(state.a.len(), self.n);
        assert_eq!(state.z.len(), 2 * m);
        let kin = self.kinematics(state, y1);

        let gamma = &self.a_rows * &state.a;
        let mut rhs = DVector::zeros(m);
        let mut beta = Vec::with_capacity(m);
        for i in 0..m {
            let z1 = state.z[2 * i];
            let z2 = state.z[2 * i + 1];
            let lag_out = self.c1[i] * z1 + self.c2[i] * z2;
            let forced = self.phi0 * kin.y_prime[i];
            rhs[i] = -gamma[i] / self.geom.chord(i) + lag_out + forced;
            beta.push(forced + lag_out);
        }
        let a_dot = self.a_lu.solve(&rhs).ok_or(AeroError::SingularSystem)?;

        let mut z_dot = DVector::zeros(2 * m);
        for i in 0..m {
            let e = self.input_gain(i, t);
            z_dot[2 * i] = -self.rate1[i] * state.z[2 * i] + e[0] * kin.y_prime[i];
            z_dot[2 * i + 1] = -self.rate2[i] * state.z[2 * i + 1] + e[1] * kin.y_prime[i];
        }

        if !a_dot.iter().chain(z_dot.iter()).all(|v| v.is_finite()) {
            return Err(AeroError::NonFinite("state derivative"));
        }
        Ok(AeroDerivative { a_dot, z_dot, kinematics: kin, beta })
    }

    /// Response output beta_i = Phi0 y'_i + C_i Z_i for a given inflow split.
    pub fn strip_beta(&self, state: &AeroState, kin: &StripKinematics) -> Vec<f64> {
        (0..self.strip_count())
            .map(|i| {
                self.phi0 * kin.y_prime[i]
                    + self.c1[i] * state.z[2 * i]
                    + self.c2[i] * state.z[2 * i + 1]
            })
            .collect()
    }

    /// Per-strip circulation of the current state.
    pub fn gamma(&self, state: &AeroState) -> Vec<f64> {
        (&self.a_rows * &state.a).iter().copied().collect()
    }

    /// Per-strip circulation rate implied by the solved coefficient rates.
    pub fn gamma_dot(&self, a_dot: &DVector<f64>) -> Vec<f64> {
        (&self.a_rows * a_dot).iter().copied().collect()
    }

    /// March the wing state one RK4 step; `y1_of` supplies the quasi-steady
    /// inflow at intermediate stage times.
    pub fn aero_step<F>(
        &self,
        state: &AeroState,
        t: f64,
        dt: f64,
        y1_of: F,
    ) -> Result<AeroState, AeroError>
    where
        F: Fn(f64) -> Vec<f64>,
    {
        assert!(dt > 0.0, "aero_step wants dt > 0");
        let eval = |s: &AeroState, tau: f64| -> Result<(DVector<f64>, DVector<f64>), AeroError> {
            let d = self.derivative(s, &y1_of(tau), tau)?;
            Ok((d.a_dot, d.z_dot))
        };
        let k1 = eval(state, t)?;
        let s2 = AeroState { a: &state.a + 0.5 * dt * &k1.0, z: &state.z + 0.5 * dt * &k1.1 };
        let k2 = eval(&s2, t + 0.5 * dt)?;
        let s3 = AeroState { a: &state.a + 0.5 * dt * &k2.0, z: &state.z + 0.5 * dt * &k2.1 };
        let k3 = eval(&s3, t + 0.5 * dt)?;
        let s4 = AeroState { a: &state.a + dt * &k3.0, z: &state.z + dt * &k3.1 };
        let k4 = eval(&s4, t + dt)?;
        let sixth = dt / 6.0;
        let next = AeroState {
            a: &state.a + sixth * (&k1.0 + 2.0 * &k2.0 + 2.0 * &k3.0 + &k4.0),
            z: &state.z + sixth * (&k1.1 + 2.0 * &k2.1 + 2.0 * &k3.1 + &k4.1),
        };
        if !next.is_finite() {
            return Err(AeroError::NonFinite("integrated state"));
        }
        Ok(next)
    }

    /// Global system blocks (Pi1, Pi2) of xi_dot = Pi1 xi + Pi2 y1 with the
    /// input gain frozen at t = 0; used for the assembly-time stability gate.
    pub fn pi_matrices(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let m = self.strip_count();
        let n = self.n;
        let dim = n + 2 * m;
        let mut pi1 = DMatrix::zeros(dim, dim);
        let mut pi2 = DMatrix::zeros(dim, m);

        // a-rows: a_dot = Ainv(-B a + C Z + Phi0 (y1 + induced a))
        let mut rhs_a = DMatrix::zeros(m, dim);
        let mut rhs_in = DMatrix::zeros(m, m);
        for i in 0..m {
            let c = self.geom.chord(i);
            for k in 0..n {
                rhs_a[(i, k)] = -self.a_rows[(i, k)] / c + self.phi0 * self.induced[(i, k)];
            }
            rhs_a[(i, n + 2 * i)] = self.c1[i];
            rhs_a[(i, n + 2 * i + 1)] = self.c2[i];
            rhs_in[(i, i)] = self.phi0;
        }
        let solved = self.a_lu.solve(&rhs_a).expect("checked invertible at assembly");
        let solved_in = self.a_lu.solve(&rhs_in).expect("checked invertible at assembly");
        pi1.view_mut((0, 0), (n, dim)).copy_from(&solved);
        pi2.view_mut((0, 0), (n, m)).copy_from(&solved_in);

        for i in 0..m {
            let e = self.input_gain(i, 0.0);
            for k in 0..n {
                pi1[(n + 2 * i, k)] = e[0] * self.induced[(i, k)];
                pi1[(n + 2 * i + 1, k)] = e[1] * self.induced[(i, k)];
            }
            pi1[(n + 2 * i, n + 2 * i)] = -self.rate1[i];
            pi1[(n + 2 * i + 1, n + 2 * i + 1)] = -self.rate2[i];
            pi2[(n + 2 * i, i)] = e[0];
            pi2[(n + 2 * i + 1, i)] = e[1];
        }
        (pi1, pi2)
    }
}
