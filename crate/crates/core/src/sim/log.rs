//! Trajectory log and its on-disk formats: a CSV with one header row and a
//! JSON metadata sidecar (config echo, build id, summary metrics). All files
//! are written atomically (temp file + rename) so interrupted runs never
//! leave truncated artifacts.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::metrics::SummaryMetrics;
use super::{SimConfig, SimError};

#[derive(Debug, Clone)]
pub struct TrajectoryLog {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl TrajectoryLog {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the schema");
        if let Some(last) = self.rows.last() {
            debug_assert!(row[0] > last[0], "timestamps must increase");
        }
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Copy of one column by header name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn time(&self) -> Vec<f64> {
        self.column("t").unwrap_or_default()
    }

    /// Serialize as CSV; float formatting is shortest-roundtrip, so identical
    /// runs produce identical bytes.
    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("header");
        let mut field = String::new();
        for row in &self.rows {
            w.write_record(row.iter().map(|v| {
                field.clear();
                use std::fmt::Write as _;
                write!(field, "{v}").unwrap();
                field.clone().into_bytes()
            }))
            .expect("row");
        }
        w.into_inner().expect("csv buffer")
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), SimError> {
        write_atomic(path, &self.to_csv_bytes())?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self, SimError> {
        let mut rdr = csv::Reader::from_path(path)
            .map_err(|e| SimError::Config(format!("cannot read log {}: {e}", path.display())))?;
        let columns: Vec<String> =
            rdr.headers().map_err(|e| SimError::Config(e.to_string()))?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| SimError::Config(e.to_string()))?;
            let row: Result<Vec<f64>, _> = rec.iter().map(|f| f.parse::<f64>()).collect();
            rows.push(row.map_err(|e| SimError::Config(format!("bad numeric field: {e}")))?);
        }
        Ok(Self { columns, rows })
    }
}

/// Write bytes to `path` via a temp file in the same directory plus rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let tmp: PathBuf = {
        let mut os = path.as_os_str().to_owned();
        os.push(format!(".tmp{}", std::process::id()));
        os.into()
    };
    let mut f = std::fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    drop(f);
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Sidecar metadata next to each trajectory CSV.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub schema_version: u32,
    pub build: String,
    pub label: String,
    /// "ok", or the error class for runs flushed after a failure.
    pub status: String,
    pub error: Option<String>,
    pub summary: SummaryMetrics,
    pub config: SimConfig,
}

impl RunMetadata {
    pub fn write_json(&self, path: &Path) -> Result<(), SimError> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("metadata serializes");
        bytes.push(b'\n');
        write_atomic(path, &bytes)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<serde_json::Value, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Config(format!("cannot read metadata {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| SimError::Config(format!("bad metadata: {e}")))
    }
}

/// Controller block recovered from a run's metadata sidecar, if readable.
pub fn controller_from_metadata(meta_path: &Path) -> Option<crate::control::ControllerConfig> {
    let v = RunMetadata::read_json(meta_path).ok()?;
    let cfg = v.get("config")?.get("controller")?;
    serde_json::from_value(cfg.clone()).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TrajectoryLog {
        let mut log = TrajectoryLog::new(vec!["t".into(), "x".into()]);
        log.push(vec![0.0, 1.5]);
        log.push(vec![0.1, -0.25]);
        log
    }

    #[test]
    fn csv_roundtrip() {
        let log = sample();
        let dir = std::env::temp_dir().join(format!("aerobat-log-test-{}", std::process::id()));
        let path = dir.join("log.csv");
        log.write_csv(&path).unwrap();
        let back = TrajectoryLog::read_csv(&path).unwrap();
        assert_eq!(back.columns(), log.columns());
        assert_eq!(back.rows(), log.rows());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn serialization_is_deterministic() {
        assert_eq!(sample().to_csv_bytes(), sample().to_csv_bytes());
    }

    #[test]
    fn column_lookup() {
        let log = sample();
        assert_eq!(log.column("x").unwrap(), vec![1.5, -0.25]);
        assert!(log.column("missing").is_none());
        assert_eq!(log.time(), vec![0.0, 0.1]);
    }
}
