use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

use super::config::{merge_flat, RunConfig};
use super::runner::run_trials;
use super::stats::{ResultRow, RunStats};

/// Writes result rows with a header line.
pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Sweep definition: a flat base config and per-key value lists whose
/// cartesian product gives the cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub base: Map<String, Value>,
    #[serde(default)]
    pub grid: BTreeMap<String, Vec<Value>>,
}

impl SweepSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Flat configs of every cell, last grid key varying fastest.
    pub fn cells(&self) -> Vec<Map<String, Value>> {
        let mut combos: Vec<Vec<(String, Value)>> = vec![Vec::new()];
        for (key, values) in &self.grid {
            let mut next = Vec::with_capacity(combos.len() * values.len());
            for c in &combos {
                for v in values {
                    let mut c = c.clone();
                    c.push((key.clone(), v.clone()));
                    next.push(c);
                }
            }
            combos = next;
        }
        combos.iter().map(|c| merge_flat(&self.base, c)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub config: Map<String, Value>,
    pub status: CellStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<RunStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepManifest {
    pub spec: SweepSpec,
    pub csv: Option<String>,
    pub cells: Vec<SweepCell>,
}

impl SweepManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }

    pub fn rows(&self) -> Vec<ResultRow> {
        self.cells.iter().filter_map(|c| c.stats.as_ref().map(|s| s.row.clone())).collect()
    }

    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.status == CellStatus::Error).count()
    }
}

/// Runs every cell; a failing cell is recorded with its error and the sweep
/// continues.
pub fn sweep(spec: &SweepSpec) -> SweepManifest {
    let cells = spec
        .cells()
        .into_iter()
        .map(|flat| {
            let outcome = RunConfig::from_json_value(Value::Object(flat.clone())).and_then(|cfg| run_trials(&cfg));
            match outcome {
                Ok(stats) => SweepCell { config: flat, status: CellStatus::Ok, error: None, stats: Some(stats) },
                Err(e) => SweepCell { config: flat, status: CellStatus::Error, error: Some(e.to_string()), stats: None },
            }
        })
        .collect();
    SweepManifest { spec: spec.clone(), csv: None, cells }
}

/// Runs a sweep and writes `<stem>.csv` plus `<stem>.json`.
pub fn sweep_to_files(spec: &SweepSpec, csv_path: &Path, manifest_path: &Path) -> Result<SweepManifest> {
    let mut manifest = sweep(spec);
    manifest.csv = Some(csv_path.display().to_string());
    write_csv(csv_path, &manifest.rows())?;
    manifest.save(manifest_path)?;
    Ok(manifest)
}
