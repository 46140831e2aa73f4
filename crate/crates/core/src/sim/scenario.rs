//! Closed-loop scenario execution.
//!
//! The plant integrates at `dt_plant`; the observer and controller tick at
//! the control rate with the thruster command held between ticks. One log row
//! is written per tick (duration * rate + 1 rows including t = 0). Runtime
//! failures (non-finite states, observer divergence, gimbal proximity under
//! control) flush the partial log instead of discarding it.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::log::{RunMetadata, TrajectoryLog};
use super::metrics::SummaryMetrics;
use super::model::{CoupledModel, CoupledState};
use super::{SimConfig, SimError};
use crate::aero::AeroState;
use crate::control::{
    control_law, observer_step, tune_observer, Allocator, ControlError, ControlOutput,
    GuardAbstraction, ObserverState,
};
use crate::geom::{
    euler_rate_matrix, euler_rate_matrix_dot, euler_to_rotation, rotation_to_euler_clamped,
    wrap_angle, EulerAngles, Mat6, Vec3, Vec6,
};
use crate::vehicle::{
    band_equilibrium_offset, relative_state, AerobatState, BodyWrench, GuardState,
    ThrusterCommand,
};

#[derive(Debug)]
pub struct ScenarioOutcome {
    pub log: TrajectoryLog,
    pub metrics: SummaryMetrics,
    /// "ok" or a failure class; partial logs carry the error text.
    pub status: String,
    pub error: Option<String>,
}

impl ScenarioOutcome {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Initial coupled state from the configured initial conditions; the vehicle
/// starts rigidly attached to the guard motion at the configured (or static
/// equilibrium) offset.
pub fn initial_state(cfg: &SimConfig) -> Result<CoupledState, SimError> {
    let att = cfg.initial.guard_attitude;
    let rot = euler_to_rotation(&EulerAngles::new(att[0], att[1], att[2]))?;
    let guard = GuardState {
        position: Vec3::from_row_slice(&cfg.initial.guard_position),
        rotation: rot,
        velocity: Vec3::from_row_slice(&cfg.initial.guard_velocity),
        omega: Vec3::from_row_slice(&cfg.initial.guard_omega),
    };
    let offset = match cfg.initial.vehicle_offset {
        Some(v) => Vec3::from_row_slice(&v),
        None => band_equilibrium_offset(&cfg.aerobat.bands, cfg.aerobat.total_mass() * cfg.gravity),
    };
    let vatt = cfg.initial.vehicle_attitude;
    let v_rot = rot * euler_to_rotation(&EulerAngles::new(vatt[0], vatt[1], vatt[2]))?;
    let offset_world = rot * offset;
    let vehicle = AerobatState {
        position: guard.position + offset_world,
        rotation: v_rot,
        velocity: guard.velocity + guard.omega_world().cross(&offset_world),
        omega: guard.omega_world(),
    };
    let (n, m) = if cfg.aero.enabled { (cfg.aero.fourier_order, cfg.aero.strips) } else { (0, 0) };
    Ok(CoupledState {
        guard,
        vehicle,
        aero_left: AeroState::zeros(n, m),
        aero_right: AeroState::zeros(n, m),
    })
}

fn column_schema(n: usize, m: usize) -> Vec<String> {
    let mut c: Vec<String> = vec!["t".into()];
    for s in ["g_px", "g_py", "g_pz", "g_roll", "g_pitch", "g_yaw", "g_vx", "g_vy", "g_vz", "g_wx", "g_wy", "g_wz"] {
        c.push(s.into());
    }
    for s in ["a_px", "a_py", "a_pz", "a_roll", "a_pitch", "a_yaw", "a_vx", "a_vy", "a_vz", "a_wx", "a_wy", "a_wz"] {
        c.push(s.into());
    }
    for s in ["alpha3", "alpha4", "alpha3_dot", "alpha4_dot"] {
        c.push(s.into());
    }
    for w in ["l", "r"] {
        for k in 1..=n {
            c.push(format!("xi_{w}_a_{k}"));
        }
        for k in 1..=2 * m {
            c.push(format!("xi_{w}_z_{k}"));
        }
    }
    for blk in ["xh1", "xh2", "xh3", "x3"] {
        for k in 1..=6 {
            c.push(format!("{blk}_{k}"));
        }
    }
    for k in 1..=6 {
        c.push(format!("u_{k}"));
    }
    for s in ["cmd_fz", "cmd_mx", "cmd_my", "cmd_mz", "ach_fz", "ach_mx", "ach_my", "ach_mz", "sat", "achievable"] {
        c.push(s.into());
    }
    for blk in ["ci", "ca"] {
        for k in 1..=6 {
            c.push(format!("{blk}_{k}"));
        }
    }
    for w in ["l", "r"] {
        for i in 1..=m {
            c.push(format!("s_{w}_{i}_thrust"));
            c.push(format!("s_{w}_{i}_lift"));
            c.push(format!("s_{w}_{i}_drag"));
        }
    }
    for s in ["ke_guard", "ke_vehicle", "pe_bands", "pe_gravity", "e_total"] {
        c.push(s.into());
    }
    c
}

fn zero_output() -> ControlOutput {
    ControlOutput {
        wrench: BodyWrench::zero(),
        command: ThrusterCommand::default(),
        achieved: BodyWrench::zero(),
        saturated: false,
        achievable: true,
        attitude_setpoint: EulerAngles::default(),
        contrib_inertial: Vec6::zeros(),
        contrib_aero: Vec6::zeros(),
    }
}

/// Run the closed loop described by the configuration.
pub fn run_scenario(cfg: &SimConfig) -> Result<ScenarioOutcome, SimError> {
    cfg.validate()?;
    let model = CoupledModel::new(
        cfg.guard.clone(),
        cfg.aerobat.clone(),
        cfg.gait.clone(),
        &cfg.aero,
        cfg.gravity,
        cfg.thrusters_enabled,
    )?;
    let control_active = cfg.thrusters_enabled && cfg.controller.enabled;
    let allocator = Allocator::new(&cfg.guard)?;
    let g3 = Mat6::identity();
    let gains = tune_observer(cfg.observer.omega0, &g3)?;

    let (n, m) = if cfg.aero.enabled { (cfg.aero.fourier_order, cfg.aero.strips) } else { (0, 0) };
    let mut log = TrajectoryLog::new(column_schema(n, m));

    let mut state = initial_state(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise_pos = (cfg.sensor.position_noise_std > 0.0)
        .then(|| Normal::new(0.0, cfg.sensor.position_noise_std).unwrap());
    let noise_att = (cfg.sensor.attitude_noise_std > 0.0)
        .then(|| Normal::new(0.0, cfg.sensor.attitude_noise_std).unwrap());

    let period = cfg.control_period();
    let substeps = cfg.substeps();
    let dt = cfg.dt_plant;
    let ticks = cfg.ticks();
    let setpoint = cfg.controller.setpoint();

    let mut observer = ObserverState::default();
    let mut observer_ready = false;
    let mut last_out = zero_output();

    let mut metrics = SummaryMetrics::default();
    let mut sat_ticks = 0usize;
    let mut sum_sq_pos = 0.0f64;
    let mut window_rows = 0usize;
    let mut status = "ok".to_string();
    let mut error: Option<String> = None;

    'ticks: for tick in 0..=ticks {
        let t = tick as f64 * period;

        // truth in output coordinates
        let q_true = rotation_to_euler_clamped(&state.guard.rotation);
        let mut x1 = Vec6::zeros();
        x1.fixed_rows_mut::<3>(0).copy_from(&state.guard.position);
        x1[3] = q_true.roll;
        x1[4] = q_true.pitch;
        x1[5] = q_true.yaw;
        let mut x2 = Vec6::zeros();
        x2.fixed_rows_mut::<3>(0).copy_from(&state.guard.velocity);
        let qdot = match euler_rate_matrix(&q_true) {
            Ok(w) => w * state.guard.omega,
            Err(e) => {
                if control_active {
                    status = "integration-failure".into();
                    error = Some(format!("gimbal proximity at t = {t:.4}: {e}"));
                    break 'ticks;
                }
                Vec3::zeros()
            }
        };
        x2.fixed_rows_mut::<3>(3).copy_from(&qdot);

        // measurement
        let mut z = x1;
        if let Some(npos) = &noise_pos {
            for i in 0..3 {
                z[i] += npos.sample(&mut rng);
            }
        }
        if let Some(natt) = &noise_att {
            for i in 3..6 {
                z[i] += natt.sample(&mut rng);
            }
        }

        // estimation and control
        let mut known_accel = Vec6::zeros();
        let out = if control_active {
            if !observer_ready {
                observer = ObserverState::from_measurement(&z, &x2);
                observer_ready = true;
            }
            if let Err(e) = observer.check_divergence(&z, cfg.observer.divergence_ceiling) {
                status = "observer-divergence".into();
                error = Some(format!("at t = {t:.4}: {e}"));
                break 'ticks;
            }
            match GuardAbstraction::from_measurement(&z, &x2, &cfg.guard, cfg.gravity, g3) {
                Ok(plant) => {
                    let out = match control_law(&z, &x2, &observer.x3, &plant, &cfg.controller, &cfg.guard, &allocator) {
                        Ok(o) => o,
                        Err(ControlError::IllConditioned(_)) => {
                            let mut fallback = last_out.clone();
                            fallback.achievable = false;
                            fallback
                        }
                        Err(e) => return Err(e.into()),
                    };
                    known_accel = plant.g1 + plant.wrench_accel(&out.achieved);
                    out
                }
                Err(e) => {
                    status = "integration-failure".into();
                    error = Some(format!("plant abstraction at t = {t:.4}: {e}"));
                    break 'ticks;
                }
            }
        } else {
            zero_output()
        };

        // evaluate the plant at this tick with the command that will be held
        let eval = match model.evaluate(t, &state, &out.command) {
            Ok(e) => e,
            Err(e) => {
                status = "integration-failure".into();
                error = Some(e.to_string());
                break 'ticks;
            }
        };

        // implied extended state (diagnostic truth); x2_dot in output coords
        let x3_true = if control_active {
            let mut x2_dot = Vec6::zeros();
            x2_dot.fixed_rows_mut::<3>(0).copy_from(&eval.guard_accel);
            let qddot = match (euler_rate_matrix(&q_true), euler_rate_matrix_dot(&q_true, &qdot)) {
                (Ok(w), Ok(wd)) => w * eval.guard_omega_dot + wd * state.guard.omega,
                _ => Vec3::zeros(),
            };
            x2_dot.fixed_rows_mut::<3>(3).copy_from(&qddot);
            GuardAbstraction::from_measurement(&x1, &x2, &cfg.guard, cfg.gravity, g3)
                .ok()
                .and_then(|truth| truth.implied_x3(&x2_dot, &eval.thruster_wrench))
                .unwrap_or_else(Vec6::zeros)
        } else {
            Vec6::zeros()
        };

        // log row
        let rel = relative_state(&state.guard, &state.vehicle, &eval.joints);
        let energy = model.energy(t, &state);
        let mut row = Vec::with_capacity(log.columns().len());
        row.push(t);
        row.extend_from_slice(&[
            state.guard.position.x,
            state.guard.position.y,
            state.guard.position.z,
            q_true.roll,
            q_true.pitch,
            q_true.yaw,
            state.guard.velocity.x,
            state.guard.velocity.y,
            state.guard.velocity.z,
            state.guard.omega.x,
            state.guard.omega.y,
            state.guard.omega.z,
        ]);
        row.extend_from_slice(&[
            rel.position.x,
            rel.position.y,
            rel.position.z,
            rel.attitude.roll,
            rel.attitude.pitch,
            rel.attitude.yaw,
            rel.velocity.x,
            rel.velocity.y,
            rel.velocity.z,
            rel.omega.x,
            rel.omega.y,
            rel.omega.z,
        ]);
        row.extend_from_slice(&[rel.alpha3, rel.alpha4, rel.alpha3_dot, rel.alpha4_dot]);
        for xi in [&state.aero_left, &state.aero_right] {
            row.extend(xi.a.iter().copied());
            row.extend(xi.z.iter().copied());
        }
        row.extend(observer.x1.iter().copied());
        row.extend(observer.x2.iter().copied());
        row.extend(observer.x3.iter().copied());
        row.extend(x3_true.iter().copied());
        row.extend(out.command.0);
        row.extend_from_slice(&[
            out.wrench.force_z,
            out.wrench.moment.x,
            out.wrench.moment.y,
            out.wrench.moment.z,
            out.achieved.force_z,
            out.achieved.moment.x,
            out.achieved.moment.y,
            out.achieved.moment.z,
            out.saturated as u8 as f64,
            out.achievable as u8 as f64,
        ]);
        row.extend(out.contrib_inertial.iter().copied());
        row.extend(out.contrib_aero.iter().copied());
        for w in [&eval.left, &eval.right].into_iter().flatten() {
            for i in 0..m {
                row.push(w.forces.thrust[i]);
                row.push(w.forces.lift[i]);
                row.push(w.forces.drag[i]);
            }
        }
        row.extend_from_slice(&[
            energy.kinetic_guard,
            energy.kinetic_vehicle,
            energy.potential_bands,
            energy.potential_gravity,
            energy.total(),
        ]);
        log.push(row);

        // metrics accumulation
        let pos_err = (state.guard.position - setpoint).norm();
        let att_err = (q_true.roll.powi(2)
            + q_true.pitch.powi(2)
            + wrap_angle(q_true.yaw - cfg.controller.setpoint_yaw).powi(2))
        .sqrt();
        if t >= 0.5 * cfg.duration {
            sum_sq_pos += pos_err * pos_err;
            window_rows += 1;
            metrics.max_attitude_error_deg = metrics.max_attitude_error_deg.max(att_err.to_degrees());
        }
        if out.saturated {
            sat_ticks += 1;
        }
        if control_active {
            metrics.max_observer_output_error =
                metrics.max_observer_output_error.max((observer.x1 - x1).norm());
            metrics.max_disturbance_estimate_error =
                metrics.max_disturbance_estimate_error.max((observer.x3 - x3_true).norm());
        }
        metrics.final_position_error_m = pos_err;

        if tick == ticks {
            break;
        }

        // plant substeps with the held command
        for k in 0..substeps {
            let tau = t + k as f64 * dt;
            match model.step(&state, tau, dt, &out.command) {
                Ok(next) => state = next,
                Err(e) => {
                    status = "integration-failure".into();
                    error = Some(e.to_string());
                    break 'ticks;
                }
            }
        }

        // observer advance over the held period
        if control_active {
            observer = observer_step(&observer, &z, &known_accel, &g3, &gains, period);
        }
        last_out = out;
    }

    metrics.saturation_fraction = sat_ticks as f64 / (ticks + 1) as f64;
    metrics.rms_position_error_m =
        if window_rows > 0 { (sum_sq_pos / window_rows as f64).sqrt() } else { 0.0 };
    metrics.rows = log.len();
    Ok(ScenarioOutcome { log, metrics, status, error })
}

/// Run a scenario and write `<label>.csv` plus `<label>.meta.json` under
/// `out_dir`. Returns the file paths and the outcome.
pub fn run_to_files(
    cfg: &SimConfig,
    out_dir: &Path,
) -> Result<(PathBuf, PathBuf, ScenarioOutcome), SimError> {
    let outcome = run_scenario(cfg)?;
    let csv_path = out_dir.join(format!("{}.csv", cfg.label));
    let meta_path = out_dir.join(format!("{}.meta.json", cfg.label));
    outcome.log.write_csv(&csv_path)?;
    let meta = RunMetadata {
        schema_version: cfg.schema_version,
        build: crate::GIT_DESCRIBE.to_string(),
        label: cfg.label.clone(),
        status: outcome.status.clone(),
        error: outcome.error.clone(),
        summary: outcome.metrics.clone(),
        config: cfg.clone(),
    };
    meta.write_json(&meta_path)?;
    Ok((csv_path, meta_path, outcome))
}

#[derive(Debug, Clone, Copy)]
pub struct EnergyAudit {
    /// max |E(t) - E(0)| over the run divided by the peak active energy
    /// (kinetic + band potential).
    pub relative_drift: f64,
    pub initial_energy: f64,
    pub peak_active_energy: f64,
}

/// Integrate the passive coupled system (thrusters and aerodynamics off,
/// bands conservative, gait frozen at its mean angles) and audit total-energy
/// conservation along the trajectory.
pub fn passive_energy_audit(cfg: &SimConfig) -> Result<EnergyAudit, SimError> {
    let mut pcfg = cfg.clone();
    pcfg.thrusters_enabled = false;
    pcfg.controller.enabled = false;
    pcfg.aero.enabled = false;
    pcfg.aerobat.bands.damping = 0.0;
    pcfg.gait = pcfg.gait.frozen();
    pcfg.validate()?;
    let model = CoupledModel::new(
        pcfg.guard.clone(),
        pcfg.aerobat.clone(),
        pcfg.gait.clone(),
        &pcfg.aero,
        pcfg.gravity,
        false,
    )?;
    let mut state = initial_state(&pcfg)?;
    let dt = pcfg.dt_plant;
    let steps = (pcfg.duration / dt).round() as usize;
    let e0 = model.energy(0.0, &state).total();
    let mut peak_active = 0.0f64;
    let mut drift = 0.0f64;
    let sample_every = 25;
    let mut t = 0.0;
    for i in 0..steps {
        state = model.step(&state, t, dt, &ThrusterCommand::default())?;
        t = (i + 1) as f64 * dt;
        if i % sample_every == 0 || i + 1 == steps {
            let e = model.energy(t, &state);
            peak_active = peak_active.max(e.kinetic() + e.potential_bands);
            drift = drift.max((e.total() - e0).abs());
        }
    }
    Ok(EnergyAudit {
        relative_drift: drift / peak_active.max(1e-12),
        initial_energy: e0,
        peak_active_energy: peak_active,
    })
}
