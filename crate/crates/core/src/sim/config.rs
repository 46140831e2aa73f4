//! Scenario configuration: one TOML file with nested sections mirroring the
//! module parameter blocks, plus scriptable dotted-key overrides
//! (`observer.omega0=20`). Unknown keys are rejected, both in the file
//! (strict deserialization) and in overrides (checked against the flattened
//! schema of the default configuration).

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::aero::AeroConfig;
use crate::control::{ControllerConfig, ObserverConfig};
use crate::sim::GaitParams;
use crate::vehicle::{AerobatParams, GuardParams, DEFAULT_GRAVITY};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorConfig {
    /// Additive Gaussian noise on the measured position, m (1-sigma).
    pub position_noise_std: f64,
    /// Additive Gaussian noise on the measured attitude, rad (1-sigma).
    pub attitude_noise_std: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self { position_noise_std: 0.0, attitude_noise_std: 0.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConditions {
    pub guard_position: [f64; 3],
    /// Roll, pitch, yaw in radians.
    pub guard_attitude: [f64; 3],
    pub guard_velocity: [f64; 3],
    pub guard_omega: [f64; 3],
    /// Vehicle offset in the guard frame; when omitted the vehicle starts at
    /// the static band-equilibrium hang point.
    pub vehicle_offset: Option<[f64; 3]>,
    /// Vehicle attitude relative to the guard, radians.
    pub vehicle_attitude: [f64; 3],
}

impl Default for InitialConditions {
    fn default() -> Self {
        Self {
            guard_position: [0.0; 3],
            guard_attitude: [0.0; 3],
            guard_velocity: [0.0; 3],
            guard_omega: [0.0; 3],
            vehicle_offset: None,
            vehicle_attitude: [0.0; 3],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub schema_version: u32,
    /// Plant integration step, s; must divide the control period.
    pub dt_plant: f64,
    pub control_rate_hz: f64,
    pub duration: f64,
    pub gravity: f64,
    pub seed: u64,
    pub thrusters_enabled: bool,
    pub output_dir: String,
    pub label: String,
    pub guard: GuardParams,
    pub aerobat: AerobatParams,
    pub aero: AeroConfig,
    pub gait: GaitParams,
    pub observer: ObserverConfig,
    pub controller: ControllerConfig,
    pub sensor: SensorConfig,
    pub initial: InitialConditions,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            dt_plant: 1e-4,
            control_rate_hz: 500.0,
            duration: 10.0,
            gravity: DEFAULT_GRAVITY,
            seed: 0,
            thrusters_enabled: true,
            output_dir: "out".into(),
            label: "run".into(),
            guard: GuardParams::default(),
            aerobat: AerobatParams::default(),
            aero: AeroConfig::default(),
            gait: GaitParams::default(),
            observer: ObserverConfig::default(),
            controller: ControllerConfig::default(),
            sensor: SensorConfig::default(),
            initial: InitialConditions::default(),
        }
    }
}

impl SimConfig {
    pub fn control_period(&self) -> f64 {
        1.0 / self.control_rate_hz
    }

    /// Plant substeps per control tick.
    pub fn substeps(&self) -> usize {
        (self.control_period() / self.dt_plant).round() as usize
    }

    pub fn ticks(&self) -> usize {
        (self.duration * self.control_rate_hz).round() as usize
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(SimError::Config(format!(
                "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if !(self.dt_plant > 0.0 && self.control_rate_hz > 0.0 && self.duration >= 0.0) {
            return Err(SimError::Config("dt_plant, control_rate_hz and duration must be positive".into()));
        }
        let ratio = self.control_period() / self.dt_plant;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) || ratio < 1.0 {
            return Err(SimError::Config(format!(
                "dt_plant must divide the control period: 1/{} Hz over {} gives {ratio} substeps",
                self.control_rate_hz, self.dt_plant
            )));
        }
        if !(self.gravity >= 0.0) {
            return Err(SimError::Config("gravity must be non-negative".into()));
        }
        self.guard.validate()?;
        self.aerobat.validate()?;
        self.gait.validate(&self.aerobat.wing)?;
        if self.aero.enabled && self.aero.fourier_order != self.aero.strips {
            return Err(SimError::Config(format!(
                "aero.fourier_order ({}) must equal aero.strips ({})",
                self.aero.fourier_order, self.aero.strips
            )));
        }
        if !(self.observer.omega0 > 0.0) {
            return Err(SimError::Config("observer.omega0 must be positive".into()));
        }
        if self.sensor.position_noise_std < 0.0 || self.sensor.attitude_noise_std < 0.0 {
            return Err(SimError::Config("sensor noise levels must be non-negative".into()));
        }
        Ok(())
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Parse a TOML document and apply dotted-key overrides, then validate.
    pub fn from_toml_str(text: &str, overrides: &[(String, String)]) -> Result<Self, SimError> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e| SimError::Config(format!("config parse error: {e}")))?;
        apply_overrides(&mut table, overrides)?;
        let cfg: SimConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e| SimError::Config(format!("config field error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path, overrides: &[(String, String)]) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            SimError::Config(format!("cannot read config file {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text, overrides)
    }

    /// Flattened dotted keys of every leaf field, derived from the default
    /// configuration (all fields carry defaults, so the schema is complete).
    pub fn valid_keys() -> BTreeSet<String> {
        let table = toml::Value::try_from(SimConfig::default()).expect("config serializes");
        let mut keys = BTreeSet::new();
        flatten("", &table, &mut keys);
        keys
    }
}

fn flatten(prefix: &str, value: &toml::Value, out: &mut BTreeSet<String>) {
    match value {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&path, v, out);
            }
        }
        _ => {
            out.insert(prefix.to_string());
        }
    }
}

/// Parse an override value with TOML semantics, falling back to a string.
fn parse_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    if let Ok(t) = wrapped.parse::<toml::Table>() {
        if let Some(v) = t.get("v") {
            return v.clone();
        }
    }
    toml::Value::String(raw.to_string())
}

fn apply_overrides(table: &mut toml::Table, overrides: &[(String, String)]) -> Result<(), SimError> {
    if overrides.is_empty() {
        return Ok(());
    }
    let valid = SimConfig::valid_keys();
    for (key, raw) in overrides {
        // `vehicle_offset` style optional leaves are absent from the default
        // flattening; accept a key if it or a parent table path is known.
        let known = valid.contains(key)
            || valid.iter().any(|v| v.starts_with(&format!("{key}.")))
            || key == "initial.vehicle_offset";
        if !known {
            let listing = valid.iter().cloned().collect::<Vec<_>>().join("\n  ");
            return Err(SimError::Config(format!(
                "unknown override key `{key}`; valid keys:\n  {listing}"
            )));
        }
        let mut node = &mut *table;
        let parts: Vec<&str> = key.split('.').collect();
        for part in &parts[..parts.len() - 1] {
            node = node
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                .as_table_mut()
                .ok_or_else(|| {
                    SimError::Config(format!("override key `{key}` descends into a non-table value"))
                })?;
        }
        node.insert(parts[parts.len() - 1].to_string(), parse_value(raw));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_roundtrips_through_toml() {
        let cfg = SimConfig::default();
        let text = cfg.to_toml_string();
        let back = SimConfig::from_toml_str(&text, &[]).unwrap();
        assert_eq!(back.dt_plant, cfg.dt_plant);
        assert_eq!(back.guard.f_max, cfg.guard.f_max);
        assert_eq!(back.aero.strips, cfg.aero.strips);
    }

    #[test]
    fn override_applies_and_echoes() {
        let cfg = SimConfig::from_toml_str("", &[("observer.omega0".into(), "20".into())]).unwrap();
        assert_eq!(cfg.observer.omega0, 20.0);
        let cfg = SimConfig::from_toml_str("", &[("gait.frequency_hz".into(), "3.5".into())]).unwrap();
        assert_eq!(cfg.gait.frequency_hz, 3.5);
        let cfg = SimConfig::from_toml_str("", &[("label".into(), "sweep-a".into())]).unwrap();
        assert_eq!(cfg.label, "sweep-a");
    }

    #[test]
    fn unknown_override_is_rejected_with_key_list() {
        let err = SimConfig::from_toml_str("", &[("observer.omega9".into(), "20".into())]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unknown override key `observer.omega9`"));
        assert!(msg.contains("observer.omega0"));
    }

    #[test]
    fn unknown_file_key_is_rejected() {
        let err = SimConfig::from_toml_str("typo_field = 3\n", &[]).unwrap_err();
        assert!(err.to_string().contains("typo_field"));
    }

    #[test]
    fn timing_divisibility_enforced() {
        let err = SimConfig::from_toml_str("dt_plant = 3e-4\n", &[]).unwrap_err();
        assert!(err.to_string().contains("divide"));
        let cfg = SimConfig::default();
        assert_eq!(cfg.substeps(), 20);
        assert_eq!(cfg.ticks(), 5000);
    }

    #[test]
    fn schema_version_checked() {
        let err = SimConfig::from_toml_str("schema_version = 99\n", &[]).unwrap_err();
        assert!(err.to_string().contains("schema_version"));
    }

    #[test]
    fn valid_keys_cover_nested_sections() {
        let keys = SimConfig::valid_keys();
        assert!(keys.contains("observer.omega0"));
        assert!(keys.contains("aerobat.bands.stiffness"));
        assert!(keys.contains("aero.wagner.psi1"));
        assert!(keys.contains("controller.kp_pos"));
    }

    #[test]
    fn optional_vehicle_offset_parses() {
        let cfg = SimConfig::from_toml_str(
            "[initial]\nvehicle_offset = [0.0, 0.0, -0.05]\n",
            &[],
        )
        .unwrap();
        assert_eq!(cfg.initial.vehicle_offset, Some([0.0, 0.0, -0.05]));
    }
}
