//! Global and local spatial association statistics on z-scored values.
//!
//! All functions take a row-normalized [`WeightMatrix`] and a z-vector whose length is the
//! number of analyzed locations `n`. Local functions return one `Result` per location so
//! that undefined cells ("no neighbors", degenerate denominators) stay explicit.
//!
//! Global Geary's C uses the squared neighbor difference `(z_i - z_j)^2`, the same term as
//! its local counterpart. Gi divides by the leave-one-out population standard deviation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::StatError;
use crate::spatial_weights::WeightMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatKind {
    GlobalMoran,
    LocalMoran,
    GlobalGeary,
    LocalGeary,
    GeneralG,
    GiStar,
    Gi,
}

impl StatKind {
    pub fn is_local(self) -> bool {
        matches!(
            self,
            StatKind::LocalMoran | StatKind::LocalGeary | StatKind::GiStar | StatKind::Gi
        )
    }

    /// Gi* is the only statistic evaluated on self-inclusive weights.
    pub fn uses_self_weights(self) -> bool {
        self == StatKind::GiStar
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StatKind::GlobalMoran => "global-moran",
            StatKind::LocalMoran => "local-moran",
            StatKind::GlobalGeary => "global-geary",
            StatKind::LocalGeary => "local-geary",
            StatKind::GeneralG => "general-g",
            StatKind::GiStar => "gi-star",
            StatKind::Gi => "gi",
        }
    }
}

impl fmt::Display for StatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Value, lag and leave-one-out moments at one location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalContext {
    pub z_i: f64,
    /// `None` for an empty row.
    pub lag_i: Option<f64>,
    pub mean_excl: f64,
    pub std_excl: f64,
}

pub fn local_context(w: &WeightMatrix, z: &[f64], i: usize) -> LocalContext {
    let (mean_excl, std_excl) = leave_one_out_moments(z, i);
    LocalContext {
        z_i: z[i],
        lag_i: lag_at(w, z, i),
        mean_excl,
        std_excl,
    }
}

fn lag_at(w: &WeightMatrix, z: &[f64], i: usize) -> Option<f64> {
    let (cols, ws) = w.row(i);
    if cols.is_empty() {
        return None;
    }
    Some(cols.iter().zip(ws).map(|(&j, &wij)| wij * z[j]).sum())
}

/// `lag_i = Σ_j W_ij z_j`, `None` for empty rows.
pub fn spatial_lag(w: &WeightMatrix, z: &[f64]) -> Vec<Option<f64>> {
    debug_assert_eq!(w.n(), z.len());
    (0..z.len()).map(|i| lag_at(w, z, i)).collect()
}

/// Mean and population standard deviation of `z` without entry `i`.
pub fn leave_one_out_moments(z: &[f64], i: usize) -> (f64, f64) {
    let count = (z.len() - 1) as f64;
    let mean = z
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, v)| v)
        .sum::<f64>()
        / count;
    let var = z
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, v)| (v - mean).powi(2))
        .sum::<f64>()
        / count;
    (mean, var.sqrt())
}

fn require_any_row(w: &WeightMatrix) -> Result<(), StatError> {
    if w.nnz() == 0 {
        Err(StatError::NoSpatialStructure)
    } else {
        Ok(())
    }
}

fn require_n(n: usize, min: usize) -> Result<(), StatError> {
    if n < min {
        Err(StatError::TooFewLocations { n })
    } else {
        Ok(())
    }
}

/// `I = Σ_i Σ_j W_ij z_i z_j / (n - 1)`.
pub fn global_moran(w: &WeightMatrix, z: &[f64]) -> Result<f64, StatError> {
    let n = z.len();
    require_n(n, 2)?;
    require_any_row(w)?;
    let total: f64 = (0..n).filter_map(|i| lag_at(w, z, i).map(|lag| z[i] * lag)).sum();
    Ok(total / (n - 1) as f64)
}

/// `C = Σ_i Σ_j W_ij (z_i - z_j)^2 / (2n)`.
pub fn global_geary(w: &WeightMatrix, z: &[f64]) -> Result<f64, StatError> {
    let n = z.len();
    require_n(n, 2)?;
    require_any_row(w)?;
    let mut total = 0.0;
    for i in 0..n {
        let (cols, ws) = w.row(i);
        for (&j, &wij) in cols.iter().zip(ws) {
            total += wij * (z[i] - z[j]).powi(2);
        }
    }
    Ok(total / (2 * n) as f64)
}

/// `G = Σ_i Σ_{j≠i} W_ij z_i z_j / Σ_i Σ_{j≠i} z_i z_j`.
pub fn general_g(w: &WeightMatrix, z: &[f64]) -> Result<f64, StatError> {
    let n = z.len();
    require_n(n, 3)?;
    require_any_row(w)?;
    let mut numerator = 0.0;
    for i in 0..n {
        let (cols, ws) = w.row(i);
        for (&j, &wij) in cols.iter().zip(ws) {
            if j != i {
                numerator += wij * z[i] * z[j];
            }
        }
    }
    let sum: f64 = z.iter().sum();
    let sum_sq: f64 = z.iter().map(|v| v * v).sum();
    let denominator = sum * sum - sum_sq;
    if denominator.abs() < 1e-12 {
        return Err(StatError::UndefinedGeneralG);
    }
    Ok(numerator / denominator)
}

/// Dispatches a global statistic.
pub fn evaluate_global(kind: StatKind, w: &WeightMatrix, z: &[f64]) -> Result<f64, StatError> {
    match kind {
        StatKind::GlobalMoran => global_moran(w, z),
        StatKind::GlobalGeary => global_geary(w, z),
        StatKind::GeneralG => general_g(w, z),
        other => Err(StatError::WrongKind(other.as_str())),
    }
}

/// Everything a local statistic reads at one focal location.
///
/// `neighbor_z[m]` is the value at column `columns[m]`; for a self-inclusive row the
/// diagonal slot holds the focal value. Keeping the evaluation here lets the permutation
/// engine recompute the statistic from permuted neighbor values with the same arithmetic
/// as the observed one.
#[derive(Debug, Clone, Copy)]
pub struct FocalInput<'a> {
    pub n: usize,
    pub z_i: f64,
    pub weights: &'a [f64],
    pub neighbor_z: &'a [f64],
    /// Leave-one-out mean and standard deviation, required by Gi.
    pub leave_one_out: (f64, f64),
}

/// `sqrt((n Σ_j W_ij^2 - 1) / (n - 1))`, shared by Gi* and Gi.
fn getis_ord_scale(n: usize, weights: &[f64]) -> Result<f64, StatError> {
    let sum_sq: f64 = weights.iter().map(|w| w * w).sum();
    let radicand = (n as f64 * sum_sq - 1.0) / (n - 1) as f64;
    if radicand > 1e-12 {
        Ok(radicand.sqrt())
    } else {
        Err(StatError::DegenerateGiDenominator)
    }
}

/// Evaluates a local statistic from its focal inputs.
pub fn evaluate_focal(kind: StatKind, input: &FocalInput<'_>) -> Result<f64, StatError> {
    let n = input.n;
    let weighted: f64 = input.weights.iter().zip(input.neighbor_z).map(|(w, v)| w * v).sum();
    match kind {
        StatKind::LocalMoran => {
            require_n(n, 2)?;
            Ok(input.z_i * weighted / (n - 1) as f64)
        }
        StatKind::LocalGeary => Ok(input
            .weights
            .iter()
            .zip(input.neighbor_z)
            .map(|(w, v)| w * (input.z_i - v).powi(2))
            .sum()),
        StatKind::GiStar => {
            require_n(n, 3)?;
            Ok(weighted / getis_ord_scale(n, input.weights)?)
        }
        StatKind::Gi => {
            require_n(n, 3)?;
            let (mean_excl, std_excl) = input.leave_one_out;
            if std_excl.is_nan() || std_excl <= 0.0 {
                return Err(StatError::DegenerateLeaveOneOut);
            }
            Ok((weighted - mean_excl) / (std_excl * getis_ord_scale(n, input.weights)?))
        }
        other => Err(StatError::WrongKind(other.as_str())),
    }
}

/// Evaluates a local statistic at location `i` on unpermuted data.
///
/// `w` must be self-inclusive for Gi* and self-exclusive otherwise.
pub fn evaluate_local_at(kind: StatKind, w: &WeightMatrix, z: &[f64], i: usize) -> Result<f64, StatError> {
    if !kind.is_local() {
        return Err(StatError::WrongKind(kind.as_str()));
    }
    if !w.has_neighbors(i) {
        return Err(StatError::NoNeighbors);
    }
    let (cols, weights) = w.row(i);
    let neighbor_z: Vec<f64> = cols.iter().map(|&j| z[j]).collect();
    let leave_one_out = if kind == StatKind::Gi {
        leave_one_out_moments(z, i)
    } else {
        (0.0, 0.0)
    };
    evaluate_focal(
        kind,
        &FocalInput {
            n: z.len(),
            z_i: z[i],
            weights,
            neighbor_z: &neighbor_z,
            leave_one_out,
        },
    )
}

fn evaluate_local(kind: StatKind, w: &WeightMatrix, z: &[f64]) -> Vec<Result<f64, StatError>> {
    debug_assert_eq!(w.n(), z.len());
    (0..z.len()).map(|i| evaluate_local_at(kind, w, z, i)).collect()
}

/// `I_i = z_i lag_i / (n - 1)`.
pub fn local_moran(w: &WeightMatrix, z: &[f64]) -> Vec<Result<f64, StatError>> {
    evaluate_local(StatKind::LocalMoran, w, z)
}

/// `C_i = Σ_j W_ij (z_i - z_j)^2`.
pub fn local_geary(w: &WeightMatrix, z: &[f64]) -> Vec<Result<f64, StatError>> {
    evaluate_local(StatKind::LocalGeary, w, z)
}

/// Gi* on a self-inclusive weight matrix.
pub fn gi_star(w_star: &WeightMatrix, z: &[f64]) -> Vec<Result<f64, StatError>> {
    debug_assert!(w_star.self_included() || w_star.nnz() == 0);
    evaluate_local(StatKind::GiStar, w_star, z)
}

/// Gi on a self-exclusive weight matrix.
pub fn gi(w: &WeightMatrix, z: &[f64]) -> Vec<Result<f64, StatError>> {
    evaluate_local(StatKind::Gi, w, z)
}
