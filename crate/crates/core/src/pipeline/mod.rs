//! Full analysis runs: per timestep and method, statistics, permutation inference, labels,
//! and aggregation, with optional disk caching.
//!
//! Work is split into independent `(timestep, location)` items that run on the current
//! rayon pool and are gathered back in timestep-major, location-minor order, so output
//! bytes never depend on the thread count.

mod cache;
mod results;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agreement_aggregation::{aggregate_color, PaletteConfig};
use crate::cluster_assignment::{
    assign_gi, assign_global, assign_local_geary, assign_local_moran, ClusterLabel, GlobalLabel,
};
use crate::data_model::{join_dataset, parse_geometry, parse_values, Dataset};
use crate::error::{InferenceError, PipelineError};
use crate::lisa_statistics::{spatial_lag, StatKind};
use crate::permutation_engine::{
    distribution_sketch, permute_global, permute_local, PermutationDistribution, PermutationSettings, RngPolicy,
    DEFAULT_PERMUTATIONS,
};
use crate::spatial_weights::{build_contiguity, row_normalize, ContiguityRule, WeightMatrix, DEFAULT_SNAP_PRECISION};

pub use cache::{cache_lookup, cache_store, CacheKey};
pub use results::{
    read_results, write_results, AggregateCell, ConfigEcho, DatasetInfo, GlobalResult, LocalResult, LocationInfo,
    ResultSet, SCHEMA_VERSION,
};

pub const DEFAULT_LOCAL_SKETCH: usize = 49;
pub const GLOBAL_SKETCH: usize = 199;

/// A local clustering method the user can enable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    LocalMoran,
    LocalGeary,
    GiStar,
    Gi,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::LocalMoran, Method::LocalGeary, Method::GiStar, Method::Gi];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::LocalMoran => "local-moran",
            Method::LocalGeary => "local-geary",
            Method::GiStar => "gi-star",
            Method::Gi => "gi",
        }
    }

    pub fn local_kind(self) -> StatKind {
        match self {
            Method::LocalMoran => StatKind::LocalMoran,
            Method::LocalGeary => StatKind::LocalGeary,
            Method::GiStar => StatKind::GiStar,
            Method::Gi => StatKind::Gi,
        }
    }

    /// The global statistic reported alongside this method.
    pub fn global_kind(self) -> StatKind {
        match self {
            Method::LocalMoran => StatKind::GlobalMoran,
            Method::LocalGeary => StatKind::GlobalGeary,
            Method::GiStar | Method::Gi => StatKind::GeneralG,
        }
    }

    /// Parses a comma-separated list such as `local-moran,gi-star`.
    pub fn parse_list(list: &str) -> Result<Vec<Method>, String> {
        list.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown method `{s}` (expected local-moran, local-geary, gi-star or gi)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub methods: Vec<Method>,
    pub contiguity: ContiguityRule,
    pub snap_precision: u32,
    pub alpha: f64,
    pub permutations: usize,
    pub seed: u64,
    pub sketch_size: usize,
    pub store_local_sketches: bool,
    pub palette: PaletteConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            methods: vec![Method::LocalMoran, Method::LocalGeary, Method::GiStar],
            contiguity: ContiguityRule::Queen,
            snap_precision: DEFAULT_SNAP_PRECISION,
            alpha: 0.05,
            permutations: DEFAULT_PERMUTATIONS,
            seed: 0,
            sketch_size: DEFAULT_LOCAL_SKETCH,
            store_local_sketches: false,
            palette: PaletteConfig::default(),
        }
    }
}

impl RunConfig {
    /// Checks the invariants and puts `methods` into canonical order without duplicates.
    pub fn validated(&self) -> Result<RunConfig, PipelineError> {
        let methods: BTreeSet<Method> = self.methods.iter().copied().collect();
        if methods.is_empty() {
            return Err(PipelineError::Config("at least one method must be enabled".into()));
        }
        if self.sketch_size < 3 {
            return Err(PipelineError::Config(format!(
                "sketch size must be at least 3, got {}",
                self.sketch_size
            )));
        }
        PermutationSettings::new(self.permutations, self.alpha)?;
        Ok(RunConfig {
            methods: methods.into_iter().collect(),
            ..self.clone()
        })
    }

    fn global_kinds(&self) -> Vec<StatKind> {
        let kinds: BTreeSet<StatKind> = self.methods.iter().map(|m| m.global_kind()).collect();
        kinds.into_iter().collect()
    }
}

/// Column and property names used to read the input files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputSpec {
    pub id_field: String,
    pub name_field: Option<String>,
    pub id_col: String,
    pub time_col: String,
    pub value_col: String,
}

impl InputSpec {
    pub fn load(&self, geometry: &[u8], values: &[u8]) -> Result<Dataset, PipelineError> {
        let areas = parse_geometry(geometry, &self.id_field, self.name_field.as_deref())?;
        let table = parse_values(values, &self.id_col, &self.time_col, &self.value_col)?;
        Ok(join_dataset(areas, &table)?)
    }
}

/// Compact per-timestep view: only present locations, renumbered.
struct TimestepFrame {
    /// Original location → compact index.
    compact: Vec<Option<usize>>,
    z: Vec<f64>,
    weights: WeightMatrix,
    self_weights: Option<WeightMatrix>,
    lags: Vec<Option<f64>>,
}

enum LocalOutcome {
    Cell(LocalResult),
    Warning(LocalResult, String),
}

fn build_frame(
    dataset: &Dataset,
    t: usize,
    weights: &WeightMatrix,
    self_weights: Option<&WeightMatrix>,
) -> TimestepFrame {
    let zcolumn = dataset.zcolumn(t);
    let present: Vec<bool> = zcolumn.iter().map(Option::is_some).collect();
    let mut compact = vec![None; present.len()];
    let mut next = 0;
    for (slot, &p) in compact.iter_mut().zip(&present) {
        if p {
            *slot = Some(next);
            next += 1;
        }
    }
    let z: Vec<f64> = zcolumn.into_iter().flatten().collect();
    let weights = weights.compact(&present);
    let lags = spatial_lag(&weights, &z);
    TimestepFrame {
        compact,
        z,
        weights,
        self_weights: self_weights.map(|w| w.compact(&present)),
        lags,
    }
}

fn opt(value: f64) -> Option<f64> {
    value.is_finite().then_some(value)
}

fn local_cell(
    method: Method,
    frame: &TimestepFrame,
    focal: usize,
    config: &RunConfig,
    settings: PermutationSettings,
    policy: &RngPolicy,
    t: usize,
) -> Result<LocalOutcome, PipelineError> {
    let kind = method.local_kind();
    let weights = if kind.uses_self_weights() {
        frame
            .self_weights
            .as_ref()
            .expect("self-inclusive weights built for gi-star")
    } else {
        &frame.weights
    };
    if !weights.has_neighbors(focal) {
        return Ok(LocalOutcome::Cell(LocalResult::marker(ClusterLabel::NoNeighbors)));
    }
    let dist = match permute_local(kind, weights, &frame.z, focal, settings, policy, t) {
        Ok(dist) => dist,
        Err(InferenceError::Statistic(e)) => {
            return Ok(LocalOutcome::Warning(
                LocalResult::marker(ClusterLabel::NotSignificant),
                e.to_string(),
            ))
        }
        Err(e) => return Err(e.into()),
    };
    let side = dist.side();
    let z = frame.z[focal];
    let lag = frame.lags[focal].expect("row has neighbors");
    let label = match method {
        Method::LocalMoran => assign_local_moran(dist.observed, side.is_significant(), z, lag)?,
        Method::LocalGeary => assign_local_geary(side, z, lag),
        Method::GiStar | Method::Gi => assign_gi(side),
    };
    let sketch = config
        .store_local_sketches
        .then(|| distribution_sketch(&dist.sorted_values, config.sketch_size));
    Ok(LocalOutcome::Cell(local_result(&dist, label, sketch)))
}

fn local_result(dist: &PermutationDistribution, label: ClusterLabel, sketch: Option<Vec<f64>>) -> LocalResult {
    LocalResult {
        value: opt(dist.observed),
        znorm: dist.znorm,
        pseudo_p: Some(dist.pseudo_p),
        lower: opt(dist.lower_cutoff),
        upper: opt(dist.upper_cutoff),
        label,
        sketch,
    }
}

fn global_cell(
    kind: StatKind,
    frame: &TimestepFrame,
    settings: PermutationSettings,
    policy: &RngPolicy,
    t: usize,
) -> Result<(GlobalResult, Option<String>), PipelineError> {
    match permute_global(kind, &frame.weights, &frame.z, settings, policy, t) {
        Ok(dist) => Ok((
            GlobalResult {
                statistic: kind,
                value: opt(dist.observed),
                znorm: dist.znorm,
                pseudo_p: Some(dist.pseudo_p),
                lower: opt(dist.lower_cutoff),
                upper: opt(dist.upper_cutoff),
                label: assign_global(kind, dist.side()),
                sketch: distribution_sketch(&dist.sorted_values, GLOBAL_SKETCH),
            },
            None,
        )),
        Err(InferenceError::Statistic(e)) => Ok((
            GlobalResult {
                statistic: kind,
                value: None,
                znorm: None,
                pseudo_p: None,
                lower: None,
                upper: None,
                label: GlobalLabel::NotSignificant,
                sketch: Vec::new(),
            },
            Some(e.to_string()),
        )),
        Err(e) => Err(e.into()),
    }
}

/// Content digest of a dataset and configuration.
pub fn dataset_digest(dataset: &Dataset, config: &RunConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(b"clusterlens-dataset-v1");
    for area in dataset.areas.areas() {
        hasher.update(area.id.as_bytes());
        hasher.update([0]);
    }
    for t in &dataset.timesteps {
        hasher.update(t.as_bytes());
        hasher.update([0]);
    }
    for v in dataset.values.iter().flatten() {
        match v {
            Some(x) => hasher.update(x.to_bits().to_le_bytes()),
            None => hasher.update([0xff; 9]),
        }
    }
    hasher.update(serde_json::to_vec(config).expect("config serializes"));
    hex::encode(hasher.finalize())
}

/// Runs every enabled method on every timestep of `dataset`.
pub fn run_analysis(dataset: &Dataset, config: &RunConfig) -> Result<ResultSet, PipelineError> {
    let config = config.validated()?;
    let digest = dataset_digest(dataset, &config);
    analyze(dataset, &config, None, digest)
}

fn analyze(
    dataset: &Dataset,
    config: &RunConfig,
    input: Option<InputSpec>,
    digest: String,
) -> Result<ResultSet, PipelineError> {
    let settings = PermutationSettings::new(config.permutations, config.alpha)?;
    let policy = RngPolicy::new(config.seed);
    let n = dataset.n_locations();
    let mut warnings = dataset.warnings.clone();

    let graph = build_contiguity(&dataset.areas, config.contiguity, config.snap_precision);
    let islands = graph.islands();
    if !islands.is_empty() {
        let ids: Vec<&str> = islands.iter().map(|&i| dataset.areas.areas()[i].id.as_str()).collect();
        warnings.push(format!("locations without neighbors: {}", ids.join(", ")));
    }
    let weights = row_normalize(&graph, false);
    let self_weights = config
        .methods
        .contains(&Method::GiStar)
        .then(|| row_normalize(&graph, true));

    let analyzable: Vec<usize> = (0..dataset.n_timesteps())
        .filter(|&t| dataset.moments[t].is_ok())
        .collect();
    if analyzable.is_empty() {
        let summary = dataset
            .timesteps
            .iter()
            .zip(&dataset.moments)
            .filter_map(|(label, m)| m.as_ref().err().map(|e| format!("{label}: {e}")))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(PipelineError::AllTimestepsDegenerate(summary));
    }

    let frames: Vec<Option<TimestepFrame>> = (0..dataset.n_timesteps())
        .into_par_iter()
        .map(|t| {
            dataset.moments[t]
                .is_ok()
                .then(|| build_frame(dataset, t, &weights, self_weights.as_ref()))
        })
        .collect();

    let global_kinds = config.global_kinds();
    let global_items: Vec<(usize, StatKind)> = analyzable
        .iter()
        .flat_map(|&t| global_kinds.iter().map(move |&k| (t, k)))
        .collect();
    let global_results = global_items
        .par_iter()
        .map(|&(t, kind)| global_cell(kind, frames[t].as_ref().expect("analyzable"), settings, &policy, t))
        .collect::<Result<Vec<_>, _>>()?;

    let local_items: Vec<(usize, usize)> = (0..dataset.n_timesteps())
        .flat_map(|t| (0..n).map(move |i| (t, i)))
        .collect();
    let local_results = local_items
        .par_iter()
        .map(|&(t, i)| -> Result<Vec<LocalOutcome>, PipelineError> {
            let focal = frames[t]
                .as_ref()
                .and_then(|frame| frame.compact[i].map(|c| (frame, c)));
            match focal {
                None => Ok(config
                    .methods
                    .iter()
                    .map(|_| LocalOutcome::Cell(LocalResult::marker(ClusterLabel::NoData)))
                    .collect()),
                Some((frame, c)) => config
                    .methods
                    .iter()
                    .map(|&m| local_cell(m, frame, c, config, settings, &policy, t))
                    .collect(),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut global: BTreeMap<String, BTreeMap<Method, GlobalResult>> = BTreeMap::new();
    for label in &dataset.timesteps {
        global.insert(label.clone(), BTreeMap::new());
    }
    let by_kind: BTreeMap<(usize, StatKind), GlobalResult> = global_items
        .iter()
        .zip(global_results)
        .map(|(&(t, kind), (result, warning))| {
            if let Some(w) = warning {
                warnings.push(format!("timestep {}: {}: {w}", dataset.timesteps[t], kind));
            }
            ((t, kind), result)
        })
        .collect();
    for &t in &analyzable {
        let entry = global.get_mut(&dataset.timesteps[t]).expect("inserted above");
        for &method in &config.methods {
            entry.insert(method, by_kind[&(t, method.global_kind())].clone());
        }
    }

    let mut local: BTreeMap<String, BTreeMap<Method, Vec<LocalResult>>> = BTreeMap::new();
    let mut aggregate: BTreeMap<String, Vec<AggregateCell>> = BTreeMap::new();
    let mut outcomes = local_results.into_iter();
    for label in &dataset.timesteps {
        let mut per_method: BTreeMap<Method, Vec<LocalResult>> =
            config.methods.iter().map(|&m| (m, Vec::with_capacity(n))).collect();
        let mut cells = Vec::with_capacity(n);
        for i in 0..n {
            let row = outcomes.next().expect("one outcome row per item");
            let mut labels = Vec::with_capacity(row.len());
            for (&method, outcome) in config.methods.iter().zip(row) {
                let result = match outcome {
                    LocalOutcome::Cell(r) => r,
                    LocalOutcome::Warning(r, w) => {
                        let id = &dataset.areas.areas()[i].id;
                        warnings.push(format!("timestep {label}: location {id}: {method}: {w}"));
                        r
                    }
                };
                labels.push(result.label);
                per_method.get_mut(&method).expect("method present").push(result);
            }
            let agg = aggregate_color(&labels, &config.palette);
            cells.push(AggregateCell {
                core: agg.core,
                h: agg.h,
                color: agg.color,
            });
        }
        local.insert(label.clone(), per_method);
        aggregate.insert(label.clone(), cells);
    }

    Ok(ResultSet {
        schema_version: SCHEMA_VERSION,
        config: ConfigEcho {
            run: config.clone(),
            input,
        },
        dataset: DatasetInfo {
            locations: dataset
                .areas
                .areas()
                .iter()
                .map(|a| LocationInfo {
                    id: a.id.clone(),
                    name: a.name.clone(),
                })
                .collect(),
            timesteps: dataset.timesteps.clone(),
            digest,
        },
        values: dataset.values.clone(),
        zvalues: dataset.zvalues.clone(),
        global,
        local,
        aggregate,
        warnings,
    })
}

/// Whether a result came from the cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Miss,
    Disabled,
}

/// Parses the input files, consults the cache, and runs the analysis on a miss.
pub fn analyze_files(
    geometry: &[u8],
    values: &[u8],
    input: &InputSpec,
    config: &RunConfig,
    cache_dir: Option<&Path>,
) -> Result<(ResultSet, CacheStatus), PipelineError> {
    let config = config.validated()?;
    let key = CacheKey::compute(geometry, values, &config, input);
    if let Some(dir) = cache_dir {
        if let Some(rs) = cache_lookup(&key, dir) {
            return Ok((rs, CacheStatus::Hit));
        }
    }
    let dataset = input.load(geometry, values)?;
    let rs = analyze(&dataset, &config, Some(input.clone()), key.as_str().to_string())?;
    match cache_dir {
        Some(dir) => {
            if let Err(e) = cache_store(&key, &rs, dir) {
                log::warn!("could not write cache: {e}");
            }
            Ok((rs, CacheStatus::Miss))
        }
        None => Ok((rs, CacheStatus::Disabled)),
    }
}

/// Runs `f` on a dedicated pool with `threads` workers (0 = one per core).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    pool.install(f)
}
