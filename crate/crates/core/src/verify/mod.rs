//! Verification suites: independent oracles and property checks exercising
//! the library end to end, selectable by name. The CLI `verify` subcommand
//! and the acceptance test target both run these.

mod criteria;
mod oracles;

pub use criteria::{
    aero_oracle_checks, closed_loop_checks, conservation_checks, hover_config, observer_checks,
    release_config,
};
pub use oracles::{constant_inflow_response, duhamel_response, scalar_observer_run, InputHistory};

/// Direction of a threshold comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    LessThan,
    AtLeast,
}

/// One named check with its measured value and tolerance.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub cmp: Cmp,
    pub pass: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn new(name: String, measured: f64, threshold: f64, cmp: Cmp, detail: String) -> Self {
        let pass = match cmp {
            Cmp::LessThan => measured < threshold,
            Cmp::AtLeast => measured >= threshold,
        };
        Self { name, measured, threshold, cmp, pass, detail }
    }

    /// One status line: `[PASS] name  measured  (< tol)  -- detail`.
    pub fn line(&self) -> String {
        let op = match self.cmp {
            Cmp::LessThan => "<",
            Cmp::AtLeast => ">=",
        };
        format!(
            "[{}] {:<28} measured {:>12.6e}  (need {} {:.3e})  {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            op,
            self.threshold,
            self.detail
        )
    }
}

/// A named family of checks.
pub trait VerifySuite {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn run(&self) -> Vec<CheckResult>;
}

struct AeroOracleSuite;

impl VerifySuite for AeroOracleSuite {
    fn name(&self) -> &'static str {
        "aero-oracle"
    }
    fn description(&self) -> &'static str {
        "state-space vs Duhamel quadrature, Kutta-Joukowski identity, elliptic distribution"
    }
    fn run(&self) -> Vec<CheckResult> {
        aero_oracle_checks()
    }
}

struct ConservationSuite;

impl VerifySuite for ConservationSuite {
    fn name(&self) -> &'static str {
        "conservation"
    }
    fn description(&self) -> &'static str {
        "passive energy conservation, integrator order, free-fall kinematics"
    }
    fn run(&self) -> Vec<CheckResult> {
        conservation_checks()
    }
}

struct ObserverSuite;

impl VerifySuite for ObserverSuite {
    fn name(&self) -> &'static str {
        "observer"
    }
    fn description(&self) -> &'static str {
        "observer convergence and attenuation, cancellation identity, allocation round trip"
    }
    fn run(&self) -> Vec<CheckResult> {
        observer_checks()
    }
}

struct ClosedLoopSuite;

impl VerifySuite for ClosedLoopSuite {
    fn name(&self) -> &'static str {
        "closed-loop"
    }
    fn description(&self) -> &'static str {
        "hover scenario, result-figure structure, bitwise determinism"
    }
    fn run(&self) -> Vec<CheckResult> {
        closed_loop_checks()
    }
}

/// All suites in execution order.
pub fn registry() -> Vec<Box<dyn VerifySuite>> {
    vec![
        Box::new(AeroOracleSuite),
        Box::new(ConservationSuite),
        Box::new(ObserverSuite),
        Box::new(ClosedLoopSuite),
    ]
}

/// Look a suite up by name.
pub fn find_suite(name: &str) -> Option<Box<dyn VerifySuite>> {
    registry().into_iter().find(|s| s.name() == name)
}

pub fn suite_names() -> Vec<&'static str> {
    registry().iter().map(|s| s.name()).collect()
}
