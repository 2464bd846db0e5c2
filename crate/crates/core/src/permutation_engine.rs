//! Permutation inference: empirical distributions, pseudo p-values and cutoffs.
//!
//! Every permutation draws from its own ChaCha8 stream keyed by
//! `(master seed, timestep, location | GLOBAL)` with the permutation index as stream id, so
//! a distribution is a pure function of its inputs no matter how work is scheduled.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{InferenceError, StatError};
use crate::lisa_statistics::{
    evaluate_focal, evaluate_global, evaluate_local_at, leave_one_out_moments, FocalInput, StatKind,
};
use crate::spatial_weights::WeightMatrix;

pub const DEFAULT_PERMUTATIONS: usize = 999;
pub const MIN_PERMUTATIONS: usize = 19;

const STREAM_TAG: [u8; 8] = *b"lisaperm";
const GLOBAL_LOCATION: u64 = u64::MAX;

/// Deterministic per-permutation random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngPolicy {
    pub master_seed: u64,
}

impl RngPolicy {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    /// The stream for one permutation of one work item; `location = None` means global.
    pub fn substream(&self, timestep: usize, location: Option<usize>, permutation: usize) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&(timestep as u64).to_le_bytes());
        let location = location.map_or(GLOBAL_LOCATION, |l| l as u64);
        key[16..24].copy_from_slice(&location.to_le_bytes());
        key[24..].copy_from_slice(&STREAM_TAG);
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(permutation as u64);
        rng
    }
}

/// Permutation count and significance level for one inference call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermutationSettings {
    pub permutations: usize,
    pub alpha: f64,
}

impl PermutationSettings {
    pub fn new(permutations: usize, alpha: f64) -> Result<Self, InferenceError> {
        let settings = Self { permutations, alpha };
        settings.validate()?;
        Ok(settings)
    }

    pub fn validate(&self) -> Result<(), InferenceError> {
        if self.permutations < MIN_PERMUTATIONS {
            return Err(InferenceError::TooFewPermutations(self.permutations));
        }
        if !(self.alpha > 0.0 && self.alpha <= 0.5) {
            return Err(InferenceError::InvalidAlpha(self.alpha));
        }
        cutoff_rank(self.permutations, self.alpha).map(|_| ())
    }
}

/// Empirical null distribution of one statistic and the inference drawn from it.
#[derive(Debug, Clone, PartialEq)]
pub struct PermutationDistribution {
    /// Permuted values in ascending order.
    pub sorted_values: Vec<f64>,
    pub observed: f64,
    pub pseudo_p: f64,
    pub lower_cutoff: f64,
    pub upper_cutoff: f64,
    /// `None` when the permuted values have zero spread.
    pub znorm: Option<f64>,
}

impl PermutationDistribution {
    pub fn from_values(mut values: Vec<f64>, observed: f64, alpha: f64) -> Result<Self, InferenceError> {
        let pseudo_p = pseudo_p(&values, observed);
        let znorm = znorm_statistic(&values, observed).ok();
        values.sort_by(f64::total_cmp);
        let (lower_cutoff, upper_cutoff) = significance_cutoffs(&values, alpha)?;
        Ok(Self {
            sorted_values: values,
            observed,
            pseudo_p,
            lower_cutoff,
            upper_cutoff,
            znorm,
        })
    }

    pub fn permutations(&self) -> usize {
        self.sorted_values.len()
    }

    /// Where the observed value falls relative to the cutoff interval.
    pub fn side(&self) -> crate::cluster_assignment::Side {
        crate::cluster_assignment::Side::from_cutoffs(self.observed, self.lower_cutoff, self.upper_cutoff)
    }
}

/// `R = min(#{s > v}, M - #{s > v})`, `p* = (R + 1) / (M + 1)`. Ties count as not greater.
pub fn pseudo_p(values: &[f64], observed: f64) -> f64 {
    let m = values.len();
    let greater = values.iter().filter(|&&s| s > observed).count();
    let extreme = greater.min(m - greater);
    (extreme + 1) as f64 / (m + 1) as f64
}

/// `R_cutoff = floor(alpha (M + 1) - 1)`; must be at least 1.
pub fn cutoff_rank(permutations: usize, alpha: f64) -> Result<usize, InferenceError> {
    // the epsilon absorbs representation error such as 0.29 * 100 = 28.999999999999996
    let rank = (alpha * (permutations + 1) as f64 - 1.0 + 1e-9).floor();
    if rank < 1.0 {
        return Err(InferenceError::InsufficientPermutations);
    }
    let rank = rank as usize;
    if rank > permutations - rank {
        return Err(InferenceError::InvalidAlpha(alpha));
    }
    Ok(rank)
}

/// `(S'[R_cutoff], S'[M - R_cutoff])` with 1-based indices into the ascending values.
pub fn significance_cutoffs(sorted: &[f64], alpha: f64) -> Result<(f64, f64), InferenceError> {
    let m = sorted.len();
    let rank = cutoff_rank(m, alpha)?;
    Ok((sorted[rank - 1], sorted[m - rank - 1]))
}

/// `(v - mean(S)) / std(S)` with the population standard deviation.
pub fn znorm_statistic(values: &[f64], observed: f64) -> Result<f64, InferenceError> {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / m;
    let std = var.sqrt();
    if std.is_nan() || std <= 1e-12 * mean.abs().max(1.0) {
        return Err(InferenceError::DegenerateDistribution);
    }
    Ok((observed - mean) / std)
}

/// `k` evenly spaced order statistics of `sorted`, including the minimum and maximum.
///
/// `k` is clamped into `2..=M`.
pub fn distribution_sketch(sorted: &[f64], k: usize) -> Vec<f64> {
    let m = sorted.len();
    if m == 0 {
        return Vec::new();
    }
    let k = k.clamp(2, m.max(2));
    if k >= m {
        return sorted.to_vec();
    }
    let span = k - 1;
    (0..k).map(|j| sorted[(j * (m - 1) + span / 2) / span]).collect()
}

/// Global inference: every permutation is a full Fisher–Yates shuffle of `z`.
pub fn permute_global(
    kind: StatKind,
    w: &WeightMatrix,
    z: &[f64],
    settings: PermutationSettings,
    policy: &RngPolicy,
    timestep: usize,
) -> Result<PermutationDistribution, InferenceError> {
    settings.validate()?;
    if kind.is_local() {
        return Err(StatError::WrongKind(kind.as_str()).into());
    }
    let observed = evaluate_global(kind, w, z)?;
    let mut shuffled = z.to_vec();
    let mut values = Vec::with_capacity(settings.permutations);
    for p in 0..settings.permutations {
        let mut rng = policy.substream(timestep, None, p);
        shuffled.copy_from_slice(z);
        shuffled.shuffle(&mut rng);
        values.push(evaluate_global(kind, w, &shuffled)?);
    }
    PermutationDistribution::from_values(values, observed, settings.alpha)
}

/// Conditional inference at `focal`: the focal value stays put and the others are shuffled.
///
/// Each permutation runs Fisher–Yates over the non-focal values for as many positions as
/// the focal row has neighbors, which yields exactly the values those neighbors would hold
/// after a full shuffle. The swaps are undone afterwards so each permutation starts from
/// the same arrangement.
pub fn permute_local(
    kind: StatKind,
    w: &WeightMatrix,
    z: &[f64],
    focal: usize,
    settings: PermutationSettings,
    policy: &RngPolicy,
    timestep: usize,
) -> Result<PermutationDistribution, InferenceError> {
    settings.validate()?;
    if !kind.is_local() {
        return Err(StatError::WrongKind(kind.as_str()).into());
    }
    let observed = evaluate_local_at(kind, w, z, focal)?;

    let (columns, weights) = w.row(focal);
    let slots: Vec<usize> = (0..columns.len()).filter(|&m| columns[m] != focal).collect();
    let mut neighbor_z: Vec<f64> = columns
        .iter()
        .map(|&j| if j == focal { z[focal] } else { 0.0 })
        .collect();
    let mut pool: Vec<f64> = z
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != focal)
        .map(|(_, &v)| v)
        .collect();
    let leave_one_out = if kind == StatKind::Gi {
        leave_one_out_moments(z, focal)
    } else {
        (0.0, 0.0)
    };

    let mut swaps = Vec::with_capacity(slots.len());
    let mut values = Vec::with_capacity(settings.permutations);
    for p in 0..settings.permutations {
        let mut rng = policy.substream(timestep, Some(focal), p);
        for (m, &slot) in slots.iter().enumerate() {
            let r = rng.random_range(m..pool.len());
            pool.swap(m, r);
            swaps.push(r);
            neighbor_z[slot] = pool[m];
        }
        let input = FocalInput {
            n: z.len(),
            z_i: z[focal],
            weights,
            neighbor_z: &neighbor_z,
            leave_one_out,
        };
        values.push(evaluate_focal(kind, &input)?);
        for (m, &r) in swaps.iter().enumerate().rev() {
            pool.swap(m, r);
        }
        swaps.clear();
    }
    PermutationDistribution::from_values(values, observed, settings.alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial_weights::{row_normalize, NeighborGraph};
    use proptest::prelude::*;
    use rand::Rng;

    fn rook_grid(side: usize) -> NeighborGraph {
        let adjacency = (0..side * side)
            .map(|k| {
                let (r, c) = (k / side, k % side);
                let mut nb = Vec::new();
                if r > 0 {
                    nb.push(k - side);
                }
                if c > 0 {
                    nb.push(k - 1);
                }
                nb
            })
            .collect();
        NeighborGraph::from_adjacency(adjacency)
    }

    fn checkerboard(side: usize) -> Vec<f64> {
        (0..side * side)
            .map(|k| {
                if (k / side + k % side).is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect()
    }

    #[test]
    fn pseudo_p_hand_cases() {
        let all_below: Vec<f64> = (0..999).map(|k| k as f64).collect();
        assert_eq!(pseudo_p(&all_below, 1e6), 0.001);

        // 499 greater, 500 not greater
        let values: Vec<f64> = (0..999).map(|k| if k < 499 { 1.0 } else { -1.0 }).collect();
        assert_eq!(pseudo_p(&values, 0.0), 0.5);

        // 97 of 99 greater: R = min(97, 2) = 2
        let values: Vec<f64> = (0..99).map(|k| if k < 97 { 1.0 } else { -1.0 }).collect();
        assert_eq!(pseudo_p(&values, 0.0), 0.03);

        // ties are not greater
        assert_eq!(pseudo_p(&[1.0; 19], 1.0), 0.05);
    }

    #[test]
    fn cutoff_hand_cases() {
        assert_eq!(cutoff_rank(999, 0.05), Ok(49));
        assert_eq!(cutoff_rank(99, 0.01), Err(InferenceError::InsufficientPermutations));
        assert_eq!(cutoff_rank(99, 0.29), Ok(28));
        let sorted: Vec<f64> = (1..=999).map(f64::from).collect();
        assert_eq!(significance_cutoffs(&sorted, 0.05), Ok((49.0, 950.0)));
        // 1-based S'[R] is the R-th smallest: with M = 19 and alpha = 0.1, R = 1
        let sorted: Vec<f64> = (10..29).map(f64::from).collect();
        assert_eq!(significance_cutoffs(&sorted, 0.1), Ok((10.0, 27.0)));
    }

    #[test]
    fn settings_validation() {
        assert_eq!(
            PermutationSettings::new(18, 0.05),
            Err(InferenceError::TooFewPermutations(18))
        );
        assert!(PermutationSettings::new(999, 0.0).is_err());
        assert!(PermutationSettings::new(999, 0.6).is_err());
        assert_eq!(
            PermutationSettings::new(99, 0.01),
            Err(InferenceError::InsufficientPermutations)
        );
        assert!(PermutationSettings::new(19, 0.1).is_ok());
    }

    #[test]
    fn znorm_cases() {
        let s = [1.0, 2.0, 3.0, 4.0];
        let mean = 2.5;
        let std = (1.25_f64).sqrt();
        assert_eq!(znorm_statistic(&s, mean), Ok(0.0));
        assert!((znorm_statistic(&s, mean + std).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(
            znorm_statistic(&[2.0; 5], 1.0),
            Err(InferenceError::DegenerateDistribution)
        );
    }

    #[test]
    fn sketch_cases() {
        let sorted: Vec<f64> = (1..=999).map(f64::from).collect();
        assert_eq!(distribution_sketch(&sorted, 3), [1.0, 500.0, 999.0]);
        assert_eq!(distribution_sketch(&sorted, 999), sorted);
        let sketch = distribution_sketch(&sorted, 49);
        assert_eq!(sketch.len(), 49);
        assert_eq!((sketch[0], sketch[48]), (1.0, 999.0));
    }

    #[test]
    fn substreams_are_distinct_and_reproducible() {
        let policy = RngPolicy::new(7);
        let draw = |t, l, p| policy.substream(t, l, p).random::<u64>();
        assert_eq!(draw(0, Some(1), 2), draw(0, Some(1), 2));
        assert_ne!(draw(0, Some(1), 2), draw(0, Some(1), 3));
        assert_ne!(draw(0, Some(1), 2), draw(0, Some(2), 2));
        assert_ne!(draw(0, Some(1), 2), draw(1, Some(1), 2));
        assert_ne!(draw(0, None, 2), draw(0, Some(1), 2));
        assert_ne!(
            draw(0, None, 2),
            RngPolicy::new(8).substream(0, None, 2).random::<u64>()
        );
    }

    #[test]
    fn checkerboard_global_moran_is_significantly_negative() {
        let w = row_normalize(&rook_grid(4), false);
        let z = checkerboard(4);
        let settings = PermutationSettings::new(999, 0.05).unwrap();
        let dist = permute_global(StatKind::GlobalMoran, &w, &z, settings, &RngPolicy::new(1), 0).unwrap();
        assert!((dist.observed + 16.0 / 15.0).abs() < 1e-12);
        assert!(dist.observed < dist.lower_cutoff);
        assert_eq!(dist.pseudo_p, 0.001);
        assert!(dist.znorm.unwrap() < -3.0);
    }

    #[test]
    fn focal_without_neighbors_is_rejected() {
        let graph = NeighborGraph::from_adjacency(vec![vec![1], vec![0], vec![]]);
        let w = row_normalize(&graph, false);
        let settings = PermutationSettings::new(99, 0.05).unwrap();
        let err = permute_local(
            StatKind::LocalMoran,
            &w,
            &[1.0, 0.0, -1.0],
            2,
            settings,
            &RngPolicy::new(0),
            0,
        )
        .unwrap_err();
        assert_eq!(err.to_string(), "no neighbors");
        assert!(permute_global(
            StatKind::LocalMoran,
            &w,
            &[1.0, 0.0, -1.0],
            settings,
            &RngPolicy::new(0),
            0
        )
        .is_err());
    }

    #[test]
    fn local_permutation_holds_focal_value() {
        // Gi* with the focal value fixed: every permuted value includes the self term
        let w = row_normalize(&rook_grid(4), true);
        let z = checkerboard(4);
        let settings = PermutationSettings::new(199, 0.05).unwrap();
        let dist = permute_local(StatKind::GiStar, &w, &z, 5, settings, &RngPolicy::new(3), 0).unwrap();
        // neighbors draw from 7 (+1) and 8 (-1): the numerator lies in [(1 - 4)/5, (1 + 4)/5]
        let scale = (2.2_f64 / 15.0).sqrt();
        for v in &dist.sorted_values {
            let numerator = v * scale;
            assert!((-0.6 - 1e-12..=1.0 + 1e-12).contains(&numerator));
            let twice = numerator * 5.0;
            assert!((twice - twice.round()).abs() < 1e-9 && (twice.round() as i64) % 2 != 0);
        }
    }

    proptest! {
        #[test]
        fn pseudo_p_bounds_and_cutoff_consistency(
            values in proptest::collection::vec(-10.0..10.0_f64, 99),
            observed in -12.0..12.0_f64,
        ) {
            let dist = PermutationDistribution::from_values(values.clone(), observed, 0.05).unwrap();
            let m = 99.0;
            prop_assert!(dist.pseudo_p >= 1.0 / (m + 1.0));
            prop_assert!(dist.pseudo_p <= (49.0 + 1.0) / (m + 1.0));
            prop_assert!(dist.lower_cutoff <= dist.upper_cutoff);
            prop_assert!(dist.sorted_values.windows(2).all(|p| p[0] <= p[1]));

            // Outside the cutoffs iff p* <= alpha, except one rank on the lower side:
            // with exactly R_cutoff permuted values below v, p* = (R_cutoff + 1) / (M + 1)
            // while v still sits above S'[R_cutoff].
            let below = values.iter().filter(|&&s| s < observed).count();
            let ties = values.contains(&observed);
            let rank = cutoff_rank(99, 0.05).unwrap();
            if !ties && below != rank {
                let outside = observed < dist.lower_cutoff || observed > dist.upper_cutoff;
                prop_assert_eq!(outside, dist.pseudo_p <= 0.05);
            }
        }

        #[test]
        fn sketch_is_monotone(mut values in proptest::collection::vec(-1e3..1e3_f64, 19..400), k in 3usize..60) {
            values.sort_by(f64::total_cmp);
            let sketch = distribution_sketch(&values, k);
            prop_assert!(sketch.windows(2).all(|p| p[0] <= p[1]));
            prop_assert_eq!(sketch[0], values[0]);
            prop_assert_eq!(*sketch.last().unwrap(), *values.last().unwrap());
        }

        #[test]
        fn znorm_matches_direct_formula(values in proptest::collection::vec(-5.0..5.0_f64, 20..200), v in -8.0..8.0_f64) {
            let m = values.len() as f64;
            let mean: f64 = values.iter().sum::<f64>() / m;
            let std = (values.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / m).sqrt();
            prop_assert!((znorm_statistic(&values, v).unwrap() - (v - mean) / std).abs() <= 1e-12);
        }
    }
}
