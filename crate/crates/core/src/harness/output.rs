use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// One row of a field snapshot (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnapshotRow {
    pub x: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub q: f64,
    #[serde(rename = "A_over_A0")]
    pub a_over_a0: f64,
    pub u: f64,
    pub p: f64,
    #[serde(rename = "Gamma")]
    pub gamma: f64,
}

/// Midpoint pressure and flow at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeSample {
    pub t: f64,
    pub p_mid: f64,
    pub q_mid: f64,
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `x,A,q,A_over_A0,u,p,Gamma`.
pub fn write_snapshot(path: &Path, rows: &[SnapshotRow]) -> Result<()> {
    write_rows(path, rows)
}

/// Writes `t,p_mid,q_mid`.
pub fn write_time_series(path: &Path, rows: &[TimeSample]) -> Result<()> {
    write_rows(path, rows)
}
