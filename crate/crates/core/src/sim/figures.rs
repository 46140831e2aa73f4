//! Tidy long-format extraction of the two result figures from a trajectory
//! log: the six tracking channels against their setpoints, and the
//! generalized inertial / aerodynamic contribution estimates.

use super::log::TrajectoryLog;
use super::SimError;
use crate::control::ControllerConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    GenForces,
    Tracking,
}

impl Figure {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "gen-forces" => Some(Figure::GenForces),
            "tracking" => Some(Figure::Tracking),
            _ => None,
        }
    }

    pub fn options() -> [&'static str; 2] {
        ["gen-forces", "tracking"]
    }
}

const AXES: [&str; 6] = ["x", "y", "z", "roll", "pitch", "yaw"];

/// Extract (t, series, value) rows for one figure. Tracking needs the
/// controller setpoint; pass None to reference the origin.
pub fn plot_series(
    log: &TrajectoryLog,
    figure: Figure,
    controller: Option<&ControllerConfig>,
) -> Result<Vec<(f64, String, f64)>, SimError> {
    if log.is_empty() {
        return Err(SimError::Config("trajectory log contains no rows".into()));
    }
    let t = log.time();
    let mut out = Vec::new();
    match figure {
        Figure::GenForces => {
            for (prefix, series) in [("ci", "inertial"), ("ca", "aero")] {
                for (k, axis) in AXES.iter().enumerate() {
                    let col = log
                        .column(&format!("{prefix}_{}", k + 1))
                        .ok_or_else(|| SimError::Config(format!("log lacks the {prefix} columns")))?;
                    let name = format!("{series}_{axis}");
                    for (ti, vi) in t.iter().zip(col) {
                        out.push((*ti, name.clone(), vi));
                    }
                }
            }
        }
        Figure::Tracking => {
            let names = ["g_px", "g_py", "g_pz", "g_roll", "g_pitch", "g_yaw"];
            let default = ControllerConfig::default();
            let cfg = controller.unwrap_or(&default);
            let sp = cfg.setpoint();
            let setpoints = [sp.x, sp.y, sp.z, 0.0, 0.0, cfg.setpoint_yaw];
            for (k, axis) in AXES.iter().enumerate() {
                let col = log
                    .column(names[k])
                    .ok_or_else(|| SimError::Config(format!("log lacks column {}", names[k])))?;
                for (ti, vi) in t.iter().zip(col) {
                    out.push((*ti, axis.to_string(), vi));
                }
                let name = format!("{axis}_setpoint");
                for ti in &t {
                    out.push((*ti, name.clone(), setpoints[k]));
                }
            }
        }
    }
    Ok(out)
}

/// Serialize tidy rows as CSV with a (t, series, value) header.
pub fn tidy_csv_bytes(rows: &[(f64, String, f64)]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "series", "value"]).expect("header");
    for (t, series, value) in rows {
        w.write_record([format!("{t}"), series.clone(), format!("{value}")]).expect("row");
    }
    w.into_inner().expect("csv buffer")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_log() -> TrajectoryLog {
        let mut cols: Vec<String> = vec!["t".into()];
        for n in ["g_px", "g_py", "g_pz", "g_roll", "g_pitch", "g_yaw"] {
            cols.push(n.into());
        }
        for p in ["ci", "ca"] {
            for k in 1..=6 {
                cols.push(format!("{p}_{k}"));
            }
        }
        let mut log = TrajectoryLog::new(cols);
        for i in 0..3 {
            let mut row = vec![i as f64 * 0.1];
            row.extend((0..18).map(|j| (i * 18 + j) as f64 * 0.01));
            log.push(row);
        }
        log
    }

    #[test]
    fn figure_names_parse() {
        assert_eq!(Figure::parse("gen-forces"), Some(Figure::GenForces));
        assert_eq!(Figure::parse("tracking"), Some(Figure::Tracking));
        assert_eq!(Figure::parse("unknown"), None);
    }

    #[test]
    fn tracking_emits_twelve_series() {
        let rows = plot_series(&toy_log(), Figure::Tracking, None).unwrap();
        let mut names: Vec<&str> = rows.iter().map(|(_, s, _)| s.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), 12);
        assert!(names.contains(&"yaw_setpoint"));
    }

    #[test]
    fn gen_forces_emits_twelve_series() {
        let rows = plot_series(&toy_log(), Figure::GenForces, None).unwrap();
        let mut names: Vec<&str> = rows.iter().map(|(_, s, _)| s.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), 12);
        assert!(names.contains(&"aero_z") && names.contains(&"inertial_roll"));
    }

    #[test]
    fn empty_log_rejected() {
        let log = TrajectoryLog::new(vec!["t".into()]);
        assert!(plot_series(&log, Figure::Tracking, None).is_err());
    }

    #[test]
    fn tidy_csv_shape() {
        let rows = plot_series(&toy_log(), Figure::GenForces, None).unwrap();
        let bytes = tidy_csv_bytes(&rows);
        let text = String::from_utf8(bytes).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,series,value"));
        assert_eq!(text.lines().count(), rows.len() + 1);
    }
}
