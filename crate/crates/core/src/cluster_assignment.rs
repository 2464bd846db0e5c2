//! Categorical cluster labels from statistic values, cutoffs, and value/lag signs.
//!
//! Significance is read from the cutoff interval: a value strictly below the lower or
//! strictly above the upper cutoff is significant. Gi and Gi* follow the usual convention
//! that a high statistic marks a hot spot.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::AssignError;
use crate::lisa_statistics::StatKind;

/// Position of an observed statistic relative to its cutoff interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Below,
    Within,
    Above,
}

impl Side {
    pub fn from_cutoffs(value: f64, lower: f64, upper: f64) -> Side {
        if value < lower {
            Side::Below
        } else if value > upper {
            Side::Above
        } else {
            Side::Within
        }
    }

    pub fn is_significant(self) -> bool {
        self != Side::Within
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClusterLabel {
    #[serde(rename = "high-high")]
    HighHigh,
    #[serde(rename = "low-low")]
    LowLow,
    #[serde(rename = "high-low")]
    HighLow,
    #[serde(rename = "low-high")]
    LowHigh,
    #[serde(rename = "other-positive")]
    OtherPositive,
    #[serde(rename = "negative-sa")]
    NegativeSA,
    #[serde(rename = "hot-spot")]
    HotSpot,
    #[serde(rename = "cold-spot")]
    ColdSpot,
    #[serde(rename = "not-significant")]
    NotSignificant,
    #[serde(rename = "no-data")]
    NoData,
    #[serde(rename = "no-neighbors")]
    NoNeighbors,
}

impl ClusterLabel {
    pub const ALL: [ClusterLabel; 11] = [
        ClusterLabel::HighHigh,
        ClusterLabel::LowLow,
        ClusterLabel::HighLow,
        ClusterLabel::LowHigh,
        ClusterLabel::OtherPositive,
        ClusterLabel::NegativeSA,
        ClusterLabel::HotSpot,
        ClusterLabel::ColdSpot,
        ClusterLabel::NotSignificant,
        ClusterLabel::NoData,
        ClusterLabel::NoNeighbors,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClusterLabel::HighHigh => "high-high",
            ClusterLabel::LowLow => "low-low",
            ClusterLabel::HighLow => "high-low",
            ClusterLabel::LowHigh => "low-high",
            ClusterLabel::OtherPositive => "other-positive",
            ClusterLabel::NegativeSA => "negative-sa",
            ClusterLabel::HotSpot => "hot-spot",
            ClusterLabel::ColdSpot => "cold-spot",
            ClusterLabel::NotSignificant => "not-significant",
            ClusterLabel::NoData => "no-data",
            ClusterLabel::NoNeighbors => "no-neighbors",
        }
    }

    /// Whether `kind` can emit this label.
    pub fn is_legal_for(self, kind: StatKind) -> bool {
        use ClusterLabel::*;
        if matches!(self, NotSignificant | NoData | NoNeighbors) {
            return kind.is_local();
        }
        match kind {
            StatKind::LocalMoran => matches!(self, HighHigh | LowLow | HighLow | LowHigh),
            StatKind::LocalGeary => matches!(self, HighHigh | LowLow | OtherPositive | NegativeSA),
            StatKind::GiStar | StatKind::Gi => matches!(self, HotSpot | ColdSpot),
            _ => false,
        }
    }
}

impl fmt::Display for ClusterLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GlobalLabel {
    #[serde(rename = "positive-sa")]
    PositiveSA,
    #[serde(rename = "negative-sa")]
    NegativeSA,
    #[serde(rename = "high-clustering")]
    HighClustering,
    #[serde(rename = "low-clustering")]
    LowClustering,
    #[serde(rename = "not-significant")]
    NotSignificant,
}

impl GlobalLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            GlobalLabel::PositiveSA => "positive-sa",
            GlobalLabel::NegativeSA => "negative-sa",
            GlobalLabel::HighClustering => "high-clustering",
            GlobalLabel::LowClustering => "low-clustering",
            GlobalLabel::NotSignificant => "not-significant",
        }
    }
}

impl fmt::Display for GlobalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Local Moran quadrant for a significant `I_i`.
///
/// Positive `I_i` yields high-high or low-low, negative yields high-low or low-high.
/// When `I_i` is exactly zero a zero `z` or `lag` counts as high.
pub fn assign_local_moran(value: f64, significant: bool, z: f64, lag: f64) -> Result<ClusterLabel, AssignError> {
    if !significant {
        return Ok(ClusterLabel::NotSignificant);
    }
    let inconsistent = AssignError::InconsistentQuadrant { value, z, lag };
    let label = if value > 0.0 {
        match (z > 0.0, lag > 0.0, z < 0.0, lag < 0.0) {
            (true, true, _, _) => ClusterLabel::HighHigh,
            (_, _, true, true) => ClusterLabel::LowLow,
            _ => return Err(inconsistent),
        }
    } else if value < 0.0 {
        match (z > 0.0, lag < 0.0, z < 0.0, lag > 0.0) {
            (true, true, _, _) => ClusterLabel::HighLow,
            (_, _, true, true) => ClusterLabel::LowHigh,
            _ => return Err(inconsistent),
        }
    } else {
        match (z >= 0.0, lag >= 0.0) {
            (true, true) => ClusterLabel::HighHigh,
            (true, false) => ClusterLabel::HighLow,
            (false, true) => ClusterLabel::LowHigh,
            (false, false) => ClusterLabel::LowLow,
        }
    };
    Ok(label)
}

/// Local Geary: low `C_i` is positive autocorrelation (refined by quadrant), high is negative.
pub fn assign_local_geary(side: Side, z: f64, lag: f64) -> ClusterLabel {
    match side {
        Side::Within => ClusterLabel::NotSignificant,
        Side::Above => ClusterLabel::NegativeSA,
        Side::Below if z > 0.0 && lag > 0.0 => ClusterLabel::HighHigh,
        Side::Below if z < 0.0 && lag < 0.0 => ClusterLabel::LowLow,
        Side::Below => ClusterLabel::OtherPositive,
    }
}

/// Gi / Gi*: above the upper cutoff is a hot spot, below the lower one a cold spot.
pub fn assign_gi(side: Side) -> ClusterLabel {
    match side {
        Side::Above => ClusterLabel::HotSpot,
        Side::Below => ClusterLabel::ColdSpot,
        Side::Within => ClusterLabel::NotSignificant,
    }
}

/// Global interpretation; Geary's C reads inverted (low C is positive autocorrelation).
pub fn assign_global(kind: StatKind, side: Side) -> GlobalLabel {
    match (kind, side) {
        (_, Side::Within) => GlobalLabel::NotSignificant,
        (StatKind::GeneralG, Side::Above) => GlobalLabel::HighClustering,
        (StatKind::GeneralG, Side::Below) => GlobalLabel::LowClustering,
        (StatKind::GlobalGeary, Side::Below) => GlobalLabel::PositiveSA,
        (StatKind::GlobalGeary, Side::Above) => GlobalLabel::NegativeSA,
        (_, Side::Above) => GlobalLabel::PositiveSA,
        (_, Side::Below) => GlobalLabel::NegativeSA,
    }
}
