//! Verification checks: numbered acceptance-style criteria evaluated against
//! independent oracles, shared by the CLI `verify` subcommand and the
//! acceptance test target.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::oracles::{duhamel_response, scalar_observer_run, InputHistory};
use super::{CheckResult, Cmp};
use crate::aero::{induced_kinematics, AeroConfig, AeroState};
use crate::control::{cancellation_law, Allocator};
use crate::geom::{wrap_angle, Mat6, Vec6};
use crate::sim::{
    dominant_frequency, frequency_resolution, passive_energy_audit, run_scenario, CoupledModel,
    SimConfig,
};
use crate::vehicle::{BodyWrench, GuardParams, ThrusterCommand};

/// The reference closed-loop hover scenario: 5 cm position and 5 degree
/// attitude initial offsets, default gait and gains, 10 s.
pub fn hover_config() -> SimConfig {
    let mut cfg = SimConfig::default();
    cfg.label = "hover".into();
    let p = 0.05 / 3.0f64.sqrt();
    cfg.initial.guard_position = [p, -p, p];
    let a = 5.0f64.to_radians() / 3.0f64.sqrt();
    cfg.initial.guard_attitude = [a, -a, a];
    cfg
}

/// Passive band-stretched release used by the conservation checks. The bands
/// are stiffened well beyond the hover default so the internal oscillation is
/// fast enough for the integrator truncation error to rise above the
/// floating-point floor, which the order-ratio check needs.
pub fn release_config(dt: f64) -> SimConfig {
    let mut cfg = SimConfig::default();
    cfg.label = "release".into();
    cfg.duration = 1.0;
    cfg.dt_plant = dt;
    cfg.thrusters_enabled = false;
    cfg.controller.enabled = false;
    cfg.aero.enabled = false;
    cfg.aerobat.bands.stiffness = 600.0;
    cfg.initial.vehicle_offset = Some([0.01, -0.015, -0.035]);
    cfg.initial.guard_omega = [2.0, 1.0, 1.5];
    cfg
}

/// Criteria 1-3: state-space vs Duhamel quadrature, the Kutta-Joukowski
/// identity along a flapping run, and the elliptic-distribution property.
pub fn aero_oracle_checks() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let start = Instant::now();

    // --- oracle equivalence over three input histories
    let aero_cfg = AeroConfig::default();
    let sys = aero_cfg.build_system().expect("default aero system assembles");
    let m = sys.strip_count();
    let dt = 1e-4;
    let steps = 10_000usize;
    let histories = [
        InputHistory::Step,
        InputHistory::Sine { hz: 5.0 },
        InputHistory::BandLimitedNoise { seed: 42 },
    ];
    for h in &histories {
        let base = h.sampler();
        let y1_of = |t: f64| -> Vec<f64> {
            (0..m).map(|i| base(t) * (1.0 + 0.05 * i as f64)).collect()
        };
        let mut xi = AeroState::zeros(sys.fourier_order(), m);
        let mut y_prime_hist: Vec<Vec<f64>> = vec![Vec::with_capacity(steps + 1); m];
        let mut beta_hist: Vec<Vec<f64>> = vec![Vec::with_capacity(steps + 1); m];
        for k in 0..=steps {
            let t = k as f64 * dt;
            let kin = sys.kinematics(&xi, &y1_of(t));
            let beta = sys.strip_beta(&xi, &kin);
            for i in 0..m {
                y_prime_hist[i].push(kin.y_prime[i]);
                beta_hist[i].push(beta[i]);
            }
            if k < steps {
                xi = sys.aero_step(&xi, t, dt, y1_of).expect("aero step");
            }
        }
        let eval_at: Vec<usize> = (1..=200).map(|j| j * steps / 200).collect();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..m {
            let oracle = duhamel_response(&y_prime_hist[i], dt, sys.wagner(), sys.geometry().chord(i), &eval_at);
            for (&k, &b_or) in eval_at.iter().zip(&oracle) {
                worst = worst.max((beta_hist[i][k] - b_or).abs());
                scale = scale.max(b_or.abs());
            }
        }
        let rel = worst / scale.max(1e-12);
        out.push(CheckResult::new(
            format!("c01.oracle-{}", h.name()),
            rel,
            1e-3,
            Cmp::LessThan,
            format!("state-space march vs Duhamel quadrature, {} strips, dt = {dt}", m),
        ));
    }
    out.push(CheckResult::new(
        "c01.runtime".into(),
        start.elapsed().as_secs_f64(),
        10.0,
        Cmp::LessThan,
        "oracle-equivalence wall time, s".into(),
    ));

    // --- Kutta-Joukowski identity along a coupled flapping run
    let mut cfg = SimConfig::default();
    cfg.thrusters_enabled = false;
    cfg.controller.enabled = false;
    let model = CoupledModel::new(
        cfg.guard.clone(),
        cfg.aerobat.clone(),
        cfg.gait.clone(),
        &cfg.aero,
        cfg.gravity,
        false,
    )
    .expect("coupled model");
    let sys = model.aero_system().expect("aero enabled");
    let mut state = crate::sim::initial_state(&cfg).expect("initial state");
    let mut worst_kj = 0.0f64;
    let dt = 1e-4;
    let kj_steps = 10_000;
    for k in 0..kj_steps {
        let t = k as f64 * dt;
        let eval = model.evaluate(t, &state, &ThrusterCommand::default()).expect("evaluate");
        for wing in [eval.left.as_ref().unwrap(), eval.right.as_ref().unwrap()] {
            for i in 0..sys.strip_count() {
                let kj = wing.gamma[i] / sys.geometry().chord(i) + wing.gamma_dot[i];
                worst_kj = worst_kj.max((wing.beta[i] - kj).abs());
            }
        }
        state = model.step(&state, t, dt, &ThrusterCommand::default()).expect("step");
    }
    out.push(CheckResult::new(
        "c02.kutta-joukowski".into(),
        worst_kj,
        1e-8,
        Cmp::LessThan,
        format!("max |beta - (Gamma/c + dGamma/dt)| over {kj_steps} flapping steps, both wings"),
    ));

    // --- elliptic-distribution property
    let geom = crate::aero::build_strips(8, 0.15, &crate::aero::ChordProfile::Constant { chord: 0.05 })
        .expect("strip geometry");
    let y = induced_kinematics(&[0.37, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], &geom);
    let (min, max) = y.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    out.push(CheckResult::new(
        "c03.elliptic-uniformity".into(),
        max - min,
        1e-12,
        Cmp::LessThan,
        "spread of induced kinematics across strips for a = (a1, 0, ..., 0)".into(),
    ));
    out
}

/// Criteria 4-5: passive energy conservation with integrator-order sanity,
/// and the free-fall kinematics check.
pub fn conservation_checks() -> Vec<CheckResult> {
    let mut out = Vec::new();

    let audit_full = passive_energy_audit(&release_config(1e-4)).expect("audit");
    out.push(CheckResult::new(
        "c04.energy-drift".into(),
        audit_full.relative_drift,
        1e-5,
        Cmp::LessThan,
        format!(
            "band-stretched release, 1 s at dt = 1e-4; peak active energy {:.3e} J",
            audit_full.peak_active_energy
        ),
    ));
    let audit_half = passive_energy_audit(&release_config(5e-5)).expect("audit");
    let ratio = audit_full.relative_drift / audit_half.relative_drift.max(1e-18);
    out.push(CheckResult::new(
        "c04.rk4-order".into(),
        ratio,
        12.0,
        Cmp::AtLeast,
        format!(
            "drift({:.1e}) / drift({:.1e}) = {:.3e}/{:.3e}",
            1e-4, 5e-5, audit_full.relative_drift, audit_half.relative_drift
        ),
    ));

    let mut ff = SimConfig::default();
    ff.label = "free-fall".into();
    ff.duration = 0.5;
    ff.thrusters_enabled = false;
    ff.controller.enabled = false;
    ff.aero.enabled = false;
    ff.aerobat.bands.enabled = false;
    ff.gait = ff.gait.frozen();
    let outsc = run_scenario(&ff).expect("free fall run");
    let z = outsc.log.column("g_pz").expect("g_pz column");
    let err = (z.last().unwrap() - (-4.9 * 0.25)).abs();
    out.push(CheckResult::new(
        "c05.free-fall".into(),
        err,
        1e-6,
        Cmp::LessThan,
        "guard z(0.5 s) vs -g t^2 / 2 with everything off".into(),
    ));
    out
}

/// Criteria 6-8: observer convergence and attenuation, the cancellation
/// identity on the square abstraction, and the allocation round trip.
pub fn observer_checks() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let start = Instant::now();

    // --- measured decay rate of the error norm
    let w0 = 10.0;
    let hist = scalar_observer_run(w0, 1.0, false, |_| 0.0, 3.0, 1e-3);
    let norm_at = |t: f64| -> f64 {
        let idx = ((t / 1e-3).round() as usize).min(hist.len()) - 1;
        let (_, e1, e2, e3) = hist[idx];
        (e1 * e1 + e2 * e2 + e3 * e3).sqrt()
    };
    let rate = -(norm_at(3.0).ln() - norm_at(2.0).ln()) / 1.0;
    out.push(CheckResult::new(
        "c06.decay-rate".into(),
        (rate - w0).abs() / w0,
        0.10,
        Cmp::LessThan,
        format!("scalar plant, G = 0: log-slope of the error norm is {rate:.3} vs poles at -{w0}"),
    ));

    // --- bandwidth attenuation of the disturbance-state error.
    // The disturbance is taken well below the observer bandwidth (most
    // favorable regime) with estimates initialized exactly, so the peak is
    // the steady sinusoidal response.
    let dist_hz = 0.25;
    let w_d = std::f64::consts::TAU * dist_hz;
    let g_max = 2.0;
    let run_peak_e3 = |w0: f64| -> f64 {
        let hist = scalar_observer_run(w0, 0.0, true, |t| g_max * (w_d * t).sin(), 16.0, 1e-3);
        hist.iter()
            .filter(|(t, ..)| *t > 4.0)
            .map(|(_, _, _, e3)| e3.abs())
            .fold(0.0, f64::max)
    };
    let peak_slow = run_peak_e3(10.0);
    let peak_fast = run_peak_e3(30.0);
    let ratio = peak_slow / peak_fast.max(1e-18);
    // the analogous output-error ratio, reported for context
    let run_peak_e1 = |w0: f64| -> f64 {
        let hist = scalar_observer_run(w0, 0.0, true, |t| g_max * (w_d * t).sin(), 16.0, 1e-3);
        hist.iter()
            .filter(|(t, ..)| *t > 4.0)
            .map(|(_, e1, _, _)| e1.abs())
            .fold(0.0, f64::max)
    };
    let ratio_e1 = run_peak_e1(10.0) / run_peak_e1(30.0).max(1e-18);
    out.push(CheckResult::new(
        "c06.bandwidth-attenuation".into(),
        ratio,
        5.0,
        Cmp::AtLeast,
        format!(
            "peak |e3| at omega0 = 10 vs 30 for a {dist_hz} Hz bounded sinusoidal G \
             (steady-state protocol, zero initial error); the triple-pole error dynamics \
             cap this ratio at 3 for any frequency - the DC transfer is 3/omega0 - \
             so 5x is not reachable for e3; the output-error ratio |e1| under the same \
             protocol is {ratio_e1:.1} (third-order rolloff)"
        ),
    ));
    out.push(CheckResult::new(
        "c06.runtime".into(),
        start.elapsed().as_secs_f64(),
        5.0,
        Cmp::LessThan,
        "observer checks wall time, s".into(),
    ));

    // --- cancellation identity marched on the square abstraction
    let mut g2 = Mat6::identity();
    g2[(0, 3)] = 0.4;
    g2[(2, 1)] = -0.7;
    g2[(5, 5)] = 2.0;
    g2[(1, 4)] = 0.3;
    let g3 = Mat6::from_diagonal(&Vec6::new(1.0, 0.5, 2.0, 1.0, 1.0, 0.3));
    let g1 = Vec6::new(0.0, 0.0, -9.8, 0.1, -0.2, 0.05);
    let k_p = 4.0;
    let k_d = 4.0;
    let mut x1 = Vec6::new(0.05, -0.03, 0.02, 0.01, -0.02, 0.04);
    let mut x2 = Vec6::zeros();
    let mut worst = 0.0f64;
    let dt = 1e-3;
    for k in 0..100 {
        let t = k as f64 * dt;
        let x3 = Vec6::new(
            (3.0 * t).sin(),
            0.4,
            -2.0 * (5.0 * t).cos(),
            0.1 * (2.0 * t).sin(),
            0.0,
            0.2,
        );
        let u0 = k_p * (-x1) - k_d * x2;
        let u = cancellation_law(&u0, &g1, &g2, &g3, &x3).expect("invertible g2");
        let x2_dot = g1 + g2 * u + g3 * x3;
        worst = worst.max((x2_dot - u0).norm());
        x1 += dt * x2;
        x2 += dt * x2_dot;
    }
    out.push(CheckResult::new(
        "c07.cancellation".into(),
        worst,
        1e-10,
        Cmp::LessThan,
        "per-step |x2_dot - u0| with perfect estimates on a random square plant".into(),
    ));

    // --- allocation round trip
    let guard = GuardParams::default();
    let allocator = Allocator::new(&guard).expect("rank-4 mixing");
    let mixing = DMatrix::from_iterator(4, 6, allocator.mixing().iter().copied());
    let rank = mixing.rank(1e-12);
    out.push(CheckResult::new(
        "c08.mixing-rank".into(),
        rank as f64,
        4.0,
        Cmp::AtLeast,
        "rank of the 4x6 mixing matrix".into(),
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut accepted = 0usize;
    let mut attempts = 0usize;
    let mut worst = 0.0f64;
    while accepted < 1000 && attempts < 100_000 {
        attempts += 1;
        let w = BodyWrench {
            force_z: rng.random_range(0.5..2.8),
            moment: crate::geom::Vec3::new(
                rng.random_range(-0.02..0.02),
                rng.random_range(-0.02..0.02),
                rng.random_range(-0.03..0.03),
            ),
        };
        let u = allocator.min_norm(&w);
        if u.0.iter().any(|&f| f < guard.f_min || f > guard.f_max) {
            continue;
        }
        accepted += 1;
        let back = allocator.allocate(&allocator.wrench_of(&u));
        let err = u
            .0
            .iter()
            .zip(back.command.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(err);
    }
    out.push(CheckResult::new(
        "c08.allocation-roundtrip".into(),
        worst,
        1e-10,
        Cmp::LessThan,
        format!("allocate(mixing * u) vs u over {accepted} in-bounds minimum-norm samples"),
    ));
    out
}

/// Criteria 9-11: the closed-loop hover scenario, the structure of its
/// result series, and bitwise determinism.
pub fn closed_loop_checks() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let cfg = hover_config();
    let start = Instant::now();
    let outcome = run_scenario(&cfg).expect("hover scenario");
    let runtime = start.elapsed().as_secs_f64();

    out.push(CheckResult::new(
        "c09.hover-rms-position".into(),
        outcome.metrics.rms_position_error_m,
        0.01,
        Cmp::LessThan,
        "RMS position error over the final 5 s, m".into(),
    ));
    out.push(CheckResult::new(
        "c09.hover-attitude".into(),
        outcome.metrics.max_attitude_error_deg,
        3.0,
        Cmp::LessThan,
        "peak attitude error norm over the final 5 s, deg".into(),
    ));
    out.push(CheckResult::new(
        "c09.no-divergence".into(),
        if outcome.is_ok() { 1.0 } else { 0.0 },
        1.0,
        Cmp::AtLeast,
        format!("scenario status: {}", outcome.status),
    ));
    out.push(CheckResult::new(
        "c09.saturation-fraction".into(),
        outcome.metrics.saturation_fraction,
        0.20,
        Cmp::LessThan,
        "fraction of control ticks with any thruster clamped".into(),
    ));
    out.push(CheckResult::new(
        "c09.runtime".into(),
        runtime,
        120.0,
        Cmp::LessThan,
        "hover scenario wall time, s".into(),
    ));

    // --- figure structure: the aero contribution oscillates at the gait
    // frequency; all tracking channels settle into the hover band
    let t = outcome.log.time();
    let window: Vec<usize> = t
        .iter()
        .enumerate()
        .filter(|(_, &ti)| ti >= 0.5 * cfg.duration)
        .map(|(i, _)| i)
        .collect();
    let mut best_series = String::new();
    let mut best_span = 0.0f64;
    let mut best: Vec<f64> = Vec::new();
    for k in 1..=6 {
        let name = format!("ca_{k}");
        if let Some(col) = outcome.log.column(&name) {
            let w: Vec<f64> = window.iter().map(|&i| col[i]).collect();
            let (lo, hi) = w.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
            if hi - lo > best_span {
                best_span = hi - lo;
                best_series = name;
                best = w;
            }
        }
    }
    let rate = cfg.control_rate_hz;
    let resolution = frequency_resolution(best.len(), rate);
    let dominant = dominant_frequency(&best, rate).unwrap_or(0.0);
    out.push(CheckResult::new(
        "c10.genforces-frequency".into(),
        (dominant - cfg.gait.frequency_hz).abs(),
        resolution + 1e-9,
        Cmp::LessThan,
        format!(
            "dominant frequency of {best_series} is {dominant:.3} Hz vs gait {} Hz (bin {resolution:.3} Hz)",
            cfg.gait.frequency_hz
        ),
    ));
    let last = outcome.log.rows().last().expect("rows").clone();
    let idx = |n: &str| outcome.log.column_index(n).expect("column");
    let sp = cfg.controller.setpoint();
    let pos_err = ((last[idx("g_px")] - sp.x).powi(2)
        + (last[idx("g_py")] - sp.y).powi(2)
        + (last[idx("g_pz")] - sp.z).powi(2))
    .sqrt();
    let att_err_deg = (last[idx("g_roll")].powi(2)
        + last[idx("g_pitch")].powi(2)
        + wrap_angle(last[idx("g_yaw")] - cfg.controller.setpoint_yaw).powi(2))
    .sqrt()
    .to_degrees();
    out.push(CheckResult::new(
        "c10.tracking-band-position".into(),
        pos_err,
        0.01,
        Cmp::LessThan,
        "final position error of the tracking channels, m".into(),
    ));
    out.push(CheckResult::new(
        "c10.tracking-band-attitude".into(),
        att_err_deg,
        3.0,
        Cmp::LessThan,
        "final attitude error of the tracking channels, deg".into(),
    ));

    // --- determinism
    let mut dcfg = hover_config();
    dcfg.duration = 1.5;
    dcfg.seed = 3;
    dcfg.sensor.position_noise_std = 1e-4;
    dcfg.sensor.attitude_noise_std = 5e-5;
    let a = run_scenario(&dcfg).expect("determinism run").log.to_csv_bytes();
    let b = run_scenario(&dcfg).expect("determinism run").log.to_csv_bytes();
    out.push(CheckResult::new(
        "c11.determinism".into(),
        if a == b { 1.0 } else { 0.0 },
        1.0,
        Cmp::AtLeast,
        format!("two seeded noisy runs, {} bytes each, bit-identical", a.len()),
    ));
    out
}
