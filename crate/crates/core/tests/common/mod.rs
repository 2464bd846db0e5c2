//! Dense O(n²) reference implementations built straight from the statistic definitions,
//! plus grid helpers that derive adjacency from cell coordinates instead of geometry.

#![allow(dead_code, clippy::needless_range_loop)]

use clusterlens_core::data_model::zscore_timestep;
use clusterlens_core::spatial_weights::{build_contiguity, row_normalize, ContiguityRule, WeightMatrix};
use clusterlens_core::synthetic::grid_areas;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<f64>>;

/// Row-normalized dense weights for a `rows × cols` grid from index arithmetic alone.
pub fn dense_grid_weights(rows: usize, cols: usize, queen: bool, include_self: bool) -> Dense {
    let n = rows * cols;
    let mut w = vec![vec![0.0; n]; n];
    for i in 0..n {
        let (ri, ci) = ((i / cols) as i64, (i % cols) as i64);
        for j in 0..n {
            let (rj, cj) = ((j / cols) as i64, (j % cols) as i64);
            let (dr, dc) = ((ri - rj).abs(), (ci - cj).abs());
            let adjacent = if queen { dr.max(dc) == 1 } else { dr + dc == 1 };
            if adjacent || (include_self && i == j) {
                w[i][j] = 1.0;
            }
        }
        let total: f64 = w[i].iter().sum();
        if total > 0.0 {
            for x in &mut w[i] {
                *x /= total;
            }
        }
    }
    w
}

/// Population z-scores.
pub fn zscores(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
    x.iter().map(|v| (v - mean) / sd).collect()
}

pub fn moran(w: &Dense, z: &[f64]) -> f64 {
    let n = z.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            total += w[i][j] * z[i] * z[j];
        }
    }
    total / (n - 1) as f64
}

pub fn local_moran(w: &Dense, z: &[f64]) -> Vec<f64> {
    let n = z.len();
    (0..n)
        .map(|i| {
            let mut lag = 0.0;
            for j in 0..n {
                lag += w[i][j] * z[j];
            }
            z[i] * lag / (n - 1) as f64
        })
        .collect()
}

pub fn geary(w: &Dense, z: &[f64]) -> f64 {
    let n = z.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            total += w[i][j] * (z[i] - z[j]).powi(2);
        }
    }
    total / (2 * n) as f64
}

pub fn local_geary(w: &Dense, z: &[f64]) -> Vec<f64> {
    let n = z.len();
    (0..n)
        .map(|i| (0..n).map(|j| w[i][j] * (z[i] - z[j]).powi(2)).sum())
        .collect()
}

pub fn general_g(w: &Dense, z: &[f64]) -> f64 {
    let n = z.len();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                num += w[i][j] * z[i] * z[j];
                den += z[i] * z[j];
            }
        }
    }
    num / den
}

fn getis_scale(row: &[f64], n: usize) -> f64 {
    let sum_sq: f64 = row.iter().map(|x| x * x).sum();
    ((n as f64 * sum_sq - 1.0) / (n - 1) as f64).sqrt()
}

/// Gi*; `w_star` must include the diagonal.
pub fn gi_star(w_star: &Dense, z: &[f64]) -> Vec<f64> {
    let n = z.len();
    (0..n)
        .map(|i| {
            let num: f64 = (0..n).map(|j| w_star[i][j] * z[j]).sum();
            num / getis_scale(&w_star[i], n)
        })
        .collect()
}

/// Gi with the leave-one-out mean and standard deviation.
pub fn gi(w: &Dense, z: &[f64]) -> Vec<f64> {
    let n = z.len();
    (0..n)
        .map(|i| {
            let others: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| z[j]).collect();
            let m = others.len() as f64;
            let mean = others.iter().sum::<f64>() / m;
            let sd = (others.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m).sqrt();
            let num: f64 = (0..n).map(|j| w[i][j] * z[j]).sum::<f64>() - mean;
            num / (sd * getis_scale(&w[i], n))
        })
        .collect()
}

/// Sparse weights from the library's own geometry pipeline.
pub fn library_weights(rows: usize, cols: usize, rule: ContiguityRule, include_self: bool) -> WeightMatrix {
    let graph = build_contiguity(&grid_areas(rows, cols), rule, 6);
    row_normalize(&graph, include_self)
}

/// Library z-scores for a fully observed column.
pub fn library_z(x: &[f64]) -> Vec<f64> {
    let column: Vec<Option<f64>> = x.iter().copied().map(Some).collect();
    let (z, _) = zscore_timestep(&column).expect("non-degenerate column");
    z.into_iter().map(|v| v.expect("present")).collect()
}

/// Uniform values on a `rows × cols` grid, rows and cols drawn in `2..=max_side`.
pub fn random_grid(rng: &mut ChaCha8Rng, max_side: usize) -> (usize, usize, Vec<f64>) {
    let rows = rng.random_range(2..=max_side);
    let cols = rng.random_range(2..=max_side);
    let values = (0..rows * cols).map(|_| rng.random_range(-10.0..10.0)).collect();
    (rows, cols, values)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// 4×4 checkerboard values.
pub fn checkerboard() -> Vec<f64> {
    (0..16)
        .map(|i| if (i / 4 + i % 4) % 2 == 0 { 1.0 } else { -1.0 })
        .collect()
}
