//! Synthetic square-grid datasets for tests, benchmarks, and demos.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::json;

use crate::data_model::{join_dataset, Area, AreaSet, Dataset, TimeSeriesTable, ValueRow};

/// Id of the cell at `(row, col)`.
pub fn cell_id(row: usize, col: usize) -> String {
    format!("r{row}c{col}")
}

/// A `rows × cols` grid of unit squares in row-major order.
pub fn grid_areas(rows: usize, cols: usize) -> AreaSet {
    let areas = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .map(|(r, c)| {
            let (x, y) = (c as f64, r as f64);
            Area {
                id: cell_id(r, c),
                name: None,
                polygons: vec![vec![vec![
                    [x, y],
                    [x + 1.0, y],
                    [x + 1.0, y + 1.0],
                    [x, y + 1.0],
                    [x, y],
                ]]],
            }
        })
        .collect();
    AreaSet::new(areas).expect("grid cells are valid")
}

/// The same grid as a GeoJSON FeatureCollection with `id` and `name` properties.
pub fn grid_geojson(rows: usize, cols: usize) -> String {
    let features: Vec<_> = grid_areas(rows, cols)
        .areas()
        .iter()
        .map(|a| {
            json!({
                "type": "Feature",
                "properties": {"id": a.id, "name": format!("Cell {}", a.id)},
                "geometry": {"type": "Polygon", "coordinates": a.polygons[0]},
            })
        })
        .collect();
    let collection = json!({"type": "FeatureCollection", "features": features});
    serde_json::to_string(&collection).expect("geojson serializes")
}

/// Independent standard normal draws, `values[location][timestep]`.
pub fn gaussian_noise(locations: usize, timesteps: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    (0..locations)
        .map(|_| (0..timesteps).map(|_| normal.sample(&mut rng)).collect())
        .collect()
}

/// A square block of cells whose values are shifted by `shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub row: usize,
    pub col: usize,
    pub size: usize,
    pub shift: f64,
}

impl Block {
    /// Row-major indices of the block's cells inside a grid with `cols` columns.
    pub fn cells(&self, cols: usize) -> Vec<usize> {
        (self.row..self.row + self.size)
            .flat_map(|r| (self.col..self.col + self.size).map(move |c| r * cols + c))
            .collect()
    }

    /// Adds `shift` to every timestep of the block's cells.
    pub fn inject(&self, values: &mut [Vec<f64>], cols: usize) {
        for i in self.cells(cols) {
            for v in &mut values[i] {
                *v += self.shift;
            }
        }
    }
}

/// Timestep labels `1..=count`.
pub fn timestep_labels(count: usize) -> Vec<String> {
    (1..=count).map(|t| t.to_string()).collect()
}

/// Long-format CSV with columns `id,time,value`; `None` is written as an empty cell.
pub fn values_csv(ids: &[String], timesteps: &[String], values: &[Vec<Option<f64>>]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["id", "time", "value"]).expect("in-memory write");
    for (id, row) in ids.iter().zip(values) {
        for (t, v) in timesteps.iter().zip(row) {
            let cell = v.map(|x| x.to_string()).unwrap_or_default();
            writer.write_record([id, t, &cell]).expect("in-memory write");
        }
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

/// Joins grid geometry with `values[location][timestep]`, labelling timesteps `1..`.
pub fn grid_dataset(rows: usize, cols: usize, values: &[Vec<Option<f64>>]) -> Dataset {
    let areas = grid_areas(rows, cols);
    assert_eq!(values.len(), areas.len(), "one value row per cell");
    let timesteps = timestep_labels(values.first().map_or(0, Vec::len));
    let table = TimeSeriesTable {
        rows: areas
            .ids()
            .zip(values)
            .flat_map(|(id, row)| {
                timesteps.iter().zip(row).map(move |(t, &value)| ValueRow {
                    id: id.to_string(),
                    timestep: t.clone(),
                    value,
                })
            })
            .collect(),
    };
    join_dataset(areas, &table).expect("synthetic table matches its grid")
}

/// `grid_dataset` for fully observed values.
pub fn dense_grid_dataset(rows: usize, cols: usize, values: &[Vec<f64>]) -> Dataset {
    let values: Vec<Vec<Option<f64>>> = values
        .iter()
        .map(|row| row.iter().copied().map(Some).collect())
        .collect();
    grid_dataset(rows, cols, &values)
}

/// ±1 checkerboard with a single timestep.
pub fn checkerboard_dataset(size: usize) -> Dataset {
    let values: Vec<Vec<f64>> = (0..size * size)
        .map(|i| {
            vec![if (i / size + i % size).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            }]
        })
        .collect();
    dense_grid_dataset(size, size, &values)
}

/// A drifting hot block, a fixed cold block, and one missing reading on noise.
///
/// Returns GeoJSON and long-format CSV (`id,time,value`) text.
pub fn demo_fixture(rows: usize, cols: usize, timesteps: usize, seed: u64) -> (String, String) {
    assert!(rows >= 8 && cols >= 8, "demo grid needs at least 8 × 8 cells");
    let n = rows * cols;
    let mut values = gaussian_noise(n, timesteps, seed);
    let hot: Vec<Block> = (0..timesteps)
        .map(|t| Block {
            row: 1,
            col: (1 + t) % (cols - 3),
            size: 3,
            shift: 3.0,
        })
        .collect();
    for (t, block) in hot.iter().enumerate() {
        for i in block.cells(cols) {
            values[i][t] += block.shift;
        }
    }
    Block {
        row: rows - 4,
        col: cols - 4,
        size: 3,
        shift: -3.0,
    }
    .inject(&mut values, cols);
    let ids: Vec<String> = grid_areas(rows, cols).ids().map(str::to_string).collect();
    let mut observed: Vec<Vec<Option<f64>>> = values
        .into_iter()
        .map(|row| row.into_iter().map(|v| Some((v * 1000.0).round() / 1000.0)).collect())
        .collect();
    observed[n / 2][0] = None;
    let csv = values_csv(&ids, &timestep_labels(timesteps), &observed);
    (grid_geojson(rows, cols), csv)
}
