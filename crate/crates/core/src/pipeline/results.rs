//! The results document and its canonical JSON form.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::agreement_aggregation::{CoreGroup, Rgb};
use crate::cluster_assignment::{ClusterLabel, GlobalLabel};
use crate::error::PipelineError;
use crate::lisa_statistics::StatKind;

use super::{InputSpec, Method, RunConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    #[serde(flatten)]
    pub run: RunConfig,
    #[serde(default)]
    pub input: Option<InputSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationInfo {
    pub id: String,
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub locations: Vec<LocationInfo>,
    pub timesteps: Vec<String>,
    /// Content digest of the inputs and configuration that produced this document.
    pub digest: String,
}

/// Inference outputs for one global statistic at one timestep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalResult {
    pub statistic: StatKind,
    pub value: Option<f64>,
    pub znorm: Option<f64>,
    pub pseudo_p: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub label: GlobalLabel,
    pub sketch: Vec<f64>,
}

/// Inference outputs for one method at one location and timestep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalResult {
    pub value: Option<f64>,
    pub znorm: Option<f64>,
    pub pseudo_p: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub label: ClusterLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sketch: Option<Vec<f64>>,
}

impl LocalResult {
    /// A cell without statistics, e.g. `no-data` or `no-neighbors`.
    pub fn marker(label: ClusterLabel) -> Self {
        Self {
            value: None,
            znorm: None,
            pseudo_p: None,
            lower: None,
            upper: None,
            label,
            sketch: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateCell {
    pub core: CoreGroup,
    pub h: f64,
    pub color: Rgb,
}

/// Everything the dashboard needs; geometry is loaded separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSet {
    pub schema_version: u32,
    pub config: ConfigEcho,
    pub dataset: DatasetInfo,
    /// `values[location][timestep]`, raw.
    pub values: Vec<Vec<Option<f64>>>,
    pub zvalues: Vec<Vec<Option<f64>>>,
    /// timestep → method → result; empty for skipped timesteps.
    pub global: BTreeMap<String, BTreeMap<Method, GlobalResult>>,
    /// timestep → method → one result per location in dataset order.
    pub local: BTreeMap<String, BTreeMap<Method, Vec<LocalResult>>>,
    pub aggregate: BTreeMap<String, Vec<AggregateCell>>,
    pub warnings: Vec<String>,
}

impl ResultSet {
    pub fn location_index(&self, id: &str) -> Option<usize> {
        self.dataset.locations.iter().position(|l| l.id == id)
    }

    /// Counts `(location, timestep, method)` cells, failing on the first missing one.
    pub fn check_complete(&self) -> Result<usize, String> {
        let n = self.dataset.locations.len();
        let mut cells = 0;
        for t in &self.dataset.timesteps {
            let by_method = self
                .local
                .get(t)
                .ok_or_else(|| format!("timestep {t}: no local results"))?;
            for method in &self.config.run.methods {
                let cells_t = by_method
                    .get(method)
                    .ok_or_else(|| format!("timestep {t}: method {method} missing"))?;
                if cells_t.len() != n {
                    return Err(format!("timestep {t}, method {method}: {} of {n} cells", cells_t.len()));
                }
                for (i, cell) in cells_t.iter().enumerate() {
                    let marker = matches!(cell.label, ClusterLabel::NoData | ClusterLabel::NoNeighbors);
                    if cell.value.is_none() && !marker && cell.label != ClusterLabel::NotSignificant {
                        return Err(format!("timestep {t}, method {method}, location {i}: empty cell"));
                    }
                    cells += 1;
                }
            }
            let aggregate = self
                .aggregate
                .get(t)
                .ok_or_else(|| format!("timestep {t}: no aggregate"))?;
            if aggregate.len() != n {
                return Err(format!("timestep {t}: {} of {n} aggregate cells", aggregate.len()));
            }
        }
        Ok(cells)
    }

    /// Canonical JSON: sorted object keys, shortest round-trip floats.
    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("result set is always serializable");
        let mut text = serde_json::to_string_pretty(&sort_keys(value)).expect("value serializes");
        text.push('\n');
        text
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(bytes)
    }
}

fn sort_keys(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let sorted: BTreeMap<String, Value> = map.into_iter().map(|(k, v)| (k, sort_keys(v))).collect();
            Value::Object(sorted.into_iter().collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

/// Writes the canonical JSON form to `path`.
pub fn write_results(rs: &ResultSet, path: &Path) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        if !parent.is_dir() {
            return Err(PipelineError::MissingDirectory(parent.to_path_buf()));
        }
    }
    fs::write(path, rs.to_canonical_json()).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_results(path: &Path) -> Result<ResultSet, PipelineError> {
    let bytes = fs::read(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ResultSet::from_json(&bytes).map_err(|source| PipelineError::Json {
        path: path.to_path_buf(),
        source,
    })
}
