//! Cross-method agreement: one core group and one color per location and timestep.
//!
//! A high (red) or low (blue) core color is pulled toward the not-significant grey by the
//! mean disagreement `h` of the label set, so full agreement gives the saturated color and
//! weaker agreement a muted one. Conflicts and other-only sets get fixed colors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cluster_assignment::ClusterLabel;
use crate::error::AggregationError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Membership {
    High,
    Low,
    Neutral,
    Other,
}

pub fn high_low_membership(label: ClusterLabel) -> Membership {
    use ClusterLabel::*;
    match label {
        HighHigh | HotSpot => Membership::High,
        LowLow | ColdSpot => Membership::Low,
        NotSignificant | NoData | NoNeighbors => Membership::Neutral,
        HighLow | LowHigh | OtherPositive | NegativeSA => Membership::Other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoreGroup {
    HighCluster,
    LowCluster,
    MajorConflict,
    MinorConflict,
    OtherOnly,
    NoneSignificant,
    NoData,
}

impl CoreGroup {
    pub fn as_str(self) -> &'static str {
        match self {
            CoreGroup::HighCluster => "high-cluster",
            CoreGroup::LowCluster => "low-cluster",
            CoreGroup::MajorConflict => "major-conflict",
            CoreGroup::MinorConflict => "minor-conflict",
            CoreGroup::OtherOnly => "other-only",
            CoreGroup::NoneSignificant => "none-significant",
            CoreGroup::NoData => "no-data",
        }
    }
}

impl fmt::Display for CoreGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An sRGB color, serialized as `"#rrggbb"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rgb(pub [u8; 3]);

impl Rgb {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Rgb([r, g, b])
    }

    pub fn hex(&self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.0[0], self.0[1], self.0[2])
    }

    /// `self + t (target - self)` per channel, rounded to the nearest integer.
    pub fn lerp(self, target: Rgb, t: f64) -> Rgb {
        let mut out = [0u8; 3];
        for (c, o) in out.iter_mut().enumerate() {
            let from = f64::from(self.0[c]);
            let to = f64::from(target.0[c]);
            *o = (from + t * (to - from)).round().clamp(0.0, 255.0) as u8;
        }
        Rgb(out)
    }

    pub fn distance(self, other: Rgb) -> f64 {
        (0..3)
            .map(|c| (f64::from(self.0[c]) - f64::from(other.0[c])).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.hex())
    }
}

impl FromStr for Rgb {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s
            .strip_prefix('#')
            .filter(|d| d.len() == 6 && d.is_ascii())
            .ok_or_else(|| format!("invalid color `{s}`"))?;
        let channel = |k: usize| u8::from_str_radix(&digits[2 * k..2 * k + 2], 16).map_err(|e| e.to_string());
        Ok(Rgb([channel(0)?, channel(1)?, channel(2)?]))
    }
}

impl Serialize for Rgb {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.hex())
    }
}

impl<'de> Deserialize<'de> for Rgb {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaletteConfig {
    pub high_cluster: Rgb,
    pub low_cluster: Rgb,
    pub not_significant: Rgb,
    pub major_conflict: Rgb,
    pub minor_conflict: Rgb,
    pub other_only: Rgb,
    pub no_data: Rgb,
}

impl Default for PaletteConfig {
    fn default() -> Self {
        Self {
            high_cluster: Rgb::new(178, 24, 43),
            low_cluster: Rgb::new(33, 102, 172),
            not_significant: Rgb::new(224, 224, 224),
            major_conflict: Rgb::new(84, 39, 136),
            minor_conflict: Rgb::new(153, 112, 171),
            other_only: Rgb::new(254, 224, 139),
            no_data: Rgb::new(250, 250, 250),
        }
    }
}

impl PaletteConfig {
    /// Base color of a core group before any agreement attenuation.
    pub fn core_color(&self, core: CoreGroup) -> Rgb {
        match core {
            CoreGroup::HighCluster => self.high_cluster,
            CoreGroup::LowCluster => self.low_cluster,
            CoreGroup::MajorConflict => self.major_conflict,
            CoreGroup::MinorConflict => self.minor_conflict,
            CoreGroup::OtherOnly => self.other_only,
            CoreGroup::NoneSignificant => self.not_significant,
            CoreGroup::NoData => self.no_data,
        }
    }
}

/// Core group of a label set.
///
/// High and low members together are a major conflict. A high member next to low-high (or
/// a low member next to high-low) is a minor conflict: both see high (low) neighbors but
/// disagree on the focal location.
pub fn core_group(labels: &[ClusterLabel]) -> CoreGroup {
    let has = |m: Membership| labels.iter().any(|&l| high_low_membership(l) == m);
    let (high, low) = (has(Membership::High), has(Membership::Low));
    if high && low {
        CoreGroup::MajorConflict
    } else if (high && labels.contains(&ClusterLabel::LowHigh)) || (low && labels.contains(&ClusterLabel::HighLow)) {
        CoreGroup::MinorConflict
    } else if high {
        CoreGroup::HighCluster
    } else if low {
        CoreGroup::LowCluster
    } else if has(Membership::Other) {
        CoreGroup::OtherOnly
    } else if labels.iter().all(|&l| l == ClusterLabel::NoData) {
        CoreGroup::NoData
    } else {
        CoreGroup::NoneSignificant
    }
}

/// `d(g, l)`: 0 in group, 0.5 for other-positive, 1 for non-conflicting contradictory labels.
pub fn disagreement(core: CoreGroup, label: ClusterLabel) -> Result<f64, AggregationError> {
    let (own, opposing, opposing_outlier) = match core {
        CoreGroup::HighCluster => (Membership::High, Membership::Low, ClusterLabel::LowHigh),
        CoreGroup::LowCluster => (Membership::Low, Membership::High, ClusterLabel::HighLow),
        other => return Err(AggregationError::NotAClusterCore(other)),
    };
    let membership = high_low_membership(label);
    if membership == opposing || label == opposing_outlier {
        return Err(AggregationError::ConflictingLabel { core, label });
    }
    Ok(if membership == own {
        0.0
    } else if label == ClusterLabel::OtherPositive {
        0.5
    } else {
        1.0
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateAssignment {
    pub core: CoreGroup,
    /// Mean disagreement; 0 for every core other than high/low cluster.
    pub h: f64,
    pub color: Rgb,
    #[serde(skip)]
    pub labels: Vec<ClusterLabel>,
}

/// Collapses one location's labels into a core group, disagreement `h` and color.
pub fn aggregate_color(labels: &[ClusterLabel], palette: &PaletteConfig) -> AggregateAssignment {
    let core = core_group(labels);
    let (h, color) = match core {
        CoreGroup::HighCluster | CoreGroup::LowCluster => {
            let total: f64 = labels
                .iter()
                .map(|&l| disagreement(core, l).expect("conflicts are resolved by core_group"))
                .sum();
            let h = total / labels.len() as f64;
            (h, palette.core_color(core).lerp(palette.not_significant, h))
        }
        other => (0.0, palette.core_color(other)),
    };
    AggregateAssignment {
        core,
        h,
        color,
        labels: labels.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use ClusterLabel::*;

    #[test]
    fn memberships() {
        assert_eq!(high_low_membership(HighHigh), Membership::High);
        assert_eq!(high_low_membership(ColdSpot), Membership::Low);
        assert_eq!(high_low_membership(NotSignificant), Membership::Neutral);
        assert_eq!(high_low_membership(NegativeSA), Membership::Other);
    }

    #[test]
    fn core_groups() {
        assert_eq!(
            core_group(&[HighHigh, ColdSpot, NotSignificant]),
            CoreGroup::MajorConflict
        );
        assert_eq!(
            core_group(&[LowHigh, HotSpot, NotSignificant]),
            CoreGroup::MinorConflict
        );
        assert_eq!(core_group(&[HighLow, ColdSpot]), CoreGroup::MinorConflict);
        assert_eq!(core_group(&[NotSignificant; 3]), CoreGroup::NoneSignificant);
        assert_eq!(core_group(&[HighLow, NotSignificant, NegativeSA]), CoreGroup::OtherOnly);
        assert_eq!(core_group(&[NoData; 3]), CoreGroup::NoData);
        assert_eq!(core_group(&[NoNeighbors; 3]), CoreGroup::NoneSignificant);
        assert_eq!(core_group(&[LowLow, NotSignificant]), CoreGroup::LowCluster);
    }

    #[test]
    fn disagreement_values() {
        assert_eq!(disagreement(CoreGroup::HighCluster, HighHigh), Ok(0.0));
        assert_eq!(disagreement(CoreGroup::HighCluster, OtherPositive), Ok(0.5));
        assert_eq!(disagreement(CoreGroup::HighCluster, NotSignificant), Ok(1.0));
        assert_eq!(disagreement(CoreGroup::LowCluster, OtherPositive), Ok(0.5));
        assert!(disagreement(CoreGroup::HighCluster, ColdSpot).is_err());
        assert!(disagreement(CoreGroup::HighCluster, LowHigh).is_err());
        assert!(disagreement(CoreGroup::OtherOnly, HighHigh).is_err());
    }

    #[test]
    fn aggregate_examples() {
        let palette = PaletteConfig::default();
        let full = aggregate_color(&[HighHigh, HotSpot, HighHigh], &palette);
        assert_eq!(
            (full.core, full.h, full.color),
            (CoreGroup::HighCluster, 0.0, palette.high_cluster)
        );

        let partial = aggregate_color(&[HighHigh, NotSignificant, NotSignificant], &palette);
        assert!((partial.h - 2.0 / 3.0).abs() < 1e-15);
        // (178,24,43) + 2/3 ((224,224,224) - (178,24,43)) = (208.67, 157.33, 163.67)
        assert_eq!(partial.color, Rgb::new(209, 157, 164));

        let major = aggregate_color(&[HighHigh, ColdSpot, NotSignificant], &palette);
        assert_eq!(
            (major.core, major.color),
            (CoreGroup::MajorConflict, palette.major_conflict)
        );
    }

    #[test]
    fn hex_round_trip() {
        let c = Rgb::new(178, 24, 43);
        assert_eq!(c.hex(), "#b2182b");
        assert_eq!("#b2182b".parse::<Rgb>(), Ok(c));
        assert!("b2182b".parse::<Rgb>().is_err());
        assert_eq!(serde_json::to_string(&c).unwrap(), "\"#b2182b\"");
    }

    fn label() -> impl Strategy<Value = ClusterLabel> {
        proptest::sample::select(ClusterLabel::ALL.to_vec())
    }

    fn swap_direction(l: ClusterLabel) -> ClusterLabel {
        match l {
            HighHigh => LowLow,
            LowLow => HighHigh,
            HotSpot => ColdSpot,
            ColdSpot => HotSpot,
            HighLow => LowHigh,
            LowHigh => HighLow,
            other => other,
        }
    }

    proptest! {
        #[test]
        fn aggregate_invariants(mut labels in proptest::collection::vec(label(), 1..6), seed in any::<u64>()) {
            let palette = PaletteConfig::default();
            let a = aggregate_color(&labels, &palette);
            prop_assert!((0.0..1.0).contains(&a.h));
            if matches!(a.core, CoreGroup::HighCluster | CoreGroup::LowCluster) {
                let in_group = labels.iter().all(|&l| disagreement(a.core, l) == Ok(0.0));
                prop_assert_eq!(a.h == 0.0, in_group);
                prop_assert!(a.h <= (labels.len() as f64 - 1.0) / labels.len() as f64 + 1e-15);
            }

            let swapped: Vec<ClusterLabel> = labels.iter().copied().map(swap_direction).collect();
            let b = aggregate_color(&swapped, &palette);
            prop_assert_eq!(a.h, b.h);
            match a.core {
                CoreGroup::HighCluster => {
                    prop_assert_eq!(b.core, CoreGroup::LowCluster);
                    prop_assert_eq!(b.color, palette.low_cluster.lerp(palette.not_significant, a.h));
                }
                CoreGroup::LowCluster => prop_assert_eq!(b.core, CoreGroup::HighCluster),
                other => prop_assert_eq!(b.core, other),
            }

            let k = (seed as usize) % labels.len();
            labels.rotate_left(k);
            labels.reverse();
            let c = aggregate_color(&labels, &palette);
            prop_assert_eq!((c.core, c.h, c.color), (a.core, a.h, a.color));
        }

        #[test]
        fn more_disagreement_is_closer_to_grey(h1 in 0.0..0.98_f64, gap in 0.01..0.5_f64) {
            let h2 = (h1 + gap).min(1.0);
            let palette = PaletteConfig::default();
            for base in [palette.high_cluster, palette.low_cluster] {
                let d1 = base.lerp(palette.not_significant, h1).distance(palette.not_significant);
                let d2 = base.lerp(palette.not_significant, h2).distance(palette.not_significant);
                prop_assert!(d2 < d1);
            }
        }
    }
}
