//! Polygon contiguity graphs and row-normalized sparse weight matrices.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data_model::AreaSet;

pub const DEFAULT_SNAP_PRECISION: u32 = 6;

/// Neighbor definition between polygons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContiguityRule {
    /// At least one shared vertex.
    #[default]
    Queen,
    /// At least one shared edge.
    Rook,
}

impl fmt::Display for ContiguityRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContiguityRule::Queen => "queen",
            ContiguityRule::Rook => "rook",
        })
    }
}

impl FromStr for ContiguityRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "queen" => Ok(ContiguityRule::Queen),
            "rook" => Ok(ContiguityRule::Rook),
            other => Err(format!("unknown contiguity rule `{other}` (expected queen or rook)")),
        }
    }
}

/// Symmetric, irreflexive binary neighbor relation with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborGraph {
    adjacency: Vec<Vec<usize>>,
}

impl NeighborGraph {
    /// Builds a graph from adjacency lists, symmetrizing and dropping self-loops.
    pub fn from_adjacency(mut adjacency: Vec<Vec<usize>>) -> Self {
        let n = adjacency.len();
        let mut edges = Vec::new();
        for (i, row) in adjacency.iter().enumerate() {
            for &j in row {
                assert!(j < n, "neighbor index {j} out of range for {n} locations");
                if i != j {
                    edges.push((i, j));
                }
            }
        }
        for row in adjacency.iter_mut() {
            row.clear();
        }
        for (i, j) in edges {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for row in adjacency.iter_mut() {
            row.sort_unstable();
            row.dedup();
        }
        Self { adjacency }
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    /// Locations without any neighbor.
    pub fn islands(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.adjacency[i].is_empty()).collect()
    }

    /// `{id: [neighbor ids]}` for debugging.
    pub fn to_id_map(&self, areas: &AreaSet) -> BTreeMap<String, Vec<String>> {
        areas
            .areas()
            .iter()
            .zip(&self.adjacency)
            .map(|(area, row)| {
                let ids = row.iter().map(|&j| areas.areas()[j].id.clone()).collect();
                (area.id.clone(), ids)
            })
            .collect()
    }
}

type SnappedPoint = (i64, i64);

fn snap(coord: [f64; 2], scale: f64) -> SnappedPoint {
    ((coord[0] * scale).round() as i64, (coord[1] * scale).round() as i64)
}

/// Derives contiguity from shared vertices (queen) or shared edges (rook) after rounding
/// coordinates to `snap_precision` decimal places.
pub fn build_contiguity(areas: &AreaSet, rule: ContiguityRule, snap_precision: u32) -> NeighborGraph {
    let scale = 10f64.powi(snap_precision as i32);
    let mut buckets: HashMap<(SnappedPoint, SnappedPoint), Vec<usize>> = HashMap::new();

    for (index, area) in areas.areas().iter().enumerate() {
        for ring in area.polygons.iter().flatten() {
            let snapped: Vec<SnappedPoint> = ring.iter().map(|&c| snap(c, scale)).collect();
            match rule {
                ContiguityRule::Queen => {
                    for &p in &snapped {
                        buckets.entry((p, p)).or_default().push(index);
                    }
                }
                ContiguityRule::Rook => {
                    for pair in snapped.windows(2) {
                        let (a, b) = (pair[0], pair[1]);
                        if a == b {
                            continue;
                        }
                        let key = if a <= b { (a, b) } else { (b, a) };
                        buckets.entry(key).or_default().push(index);
                    }
                }
            }
        }
    }

    let mut adjacency = vec![Vec::new(); areas.len()];
    for members in buckets.values_mut() {
        members.sort_unstable();
        members.dedup();
        for (k, &i) in members.iter().enumerate() {
            for &j in &members[k + 1..] {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
    }
    for row in adjacency.iter_mut() {
        row.sort_unstable();
        row.dedup();
    }
    let graph = NeighborGraph { adjacency };
    let islands = graph.islands();
    if !islands.is_empty() {
        let ids: Vec<&str> = islands.iter().map(|&i| areas.areas()[i].id.as_str()).collect();
        log::warn!("locations without neighbors: {}", ids.join(", "));
    }
    graph
}

/// Sparse row-normalized weights in compressed-row form.
///
/// Every nonempty row sums to 1, weights are positive, and columns are strictly
/// increasing within a row.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    row_offsets: Vec<usize>,
    columns: Vec<usize>,
    weights: Vec<f64>,
    self_included: bool,
}

impl WeightMatrix {
    fn from_rows(rows: Vec<Vec<(usize, f64)>>, self_included: bool) -> Self {
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        let mut columns = Vec::new();
        let mut weights = Vec::new();
        row_offsets.push(0);
        for row in rows {
            let total: f64 = row.iter().map(|(_, w)| w).sum();
            for (j, w) in row {
                columns.push(j);
                weights.push(w / total);
            }
            row_offsets.push(columns.len());
        }
        Self {
            row_offsets,
            columns,
            weights,
            self_included,
        }
    }

    pub fn n(&self) -> usize {
        self.row_offsets.len() - 1
    }

    pub fn self_included(&self) -> bool {
        self.self_included
    }

    /// Column indices and weights of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.columns[range.clone()], &self.weights[range])
    }

    pub fn row_len(&self, i: usize) -> usize {
        self.row_offsets[i + 1] - self.row_offsets[i]
    }

    /// True when row `i` has at least one entry other than the diagonal.
    pub fn has_neighbors(&self, i: usize) -> bool {
        self.row(i).0.iter().any(|&j| j != i)
    }

    /// Total number of stored weights.
    pub fn nnz(&self) -> usize {
        self.columns.len()
    }

    /// Drops masked-out neighbors and renormalizes; rows of masked-out locations are emptied.
    pub fn restrict_to_present(&self, present: &[bool]) -> WeightMatrix {
        assert_eq!(
            present.len(),
            self.n(),
            "mask length must equal the number of locations"
        );
        let rows = (0..self.n())
            .map(|i| {
                if !present[i] {
                    return Vec::new();
                }
                let (cols, ws) = self.row(i);
                cols.iter()
                    .zip(ws)
                    .filter(|(&j, _)| present[j])
                    .map(|(&j, &w)| (j, w))
                    .collect()
            })
            .collect();
        WeightMatrix::from_rows(rows, self.self_included)
    }

    /// Restricts to the present locations and renumbers them `0..count` in original order.
    pub fn compact(&self, present: &[bool]) -> WeightMatrix {
        assert_eq!(
            present.len(),
            self.n(),
            "mask length must equal the number of locations"
        );
        let mut new_index = vec![usize::MAX; self.n()];
        let mut next = 0;
        for (i, &p) in present.iter().enumerate() {
            if p {
                new_index[i] = next;
                next += 1;
            }
        }
        let rows = (0..self.n())
            .filter(|&i| present[i])
            .map(|i| {
                let (cols, ws) = self.row(i);
                cols.iter()
                    .zip(ws)
                    .filter(|(&j, _)| present[j])
                    .map(|(&j, &w)| (new_index[j], w))
                    .collect()
            })
            .collect();
        WeightMatrix::from_rows(rows, self.self_included)
    }
}

/// Binary adjacency (plus the diagonal when `include_self`) divided by each row's count.
pub fn row_normalize(graph: &NeighborGraph, include_self: bool) -> WeightMatrix {
    let rows = (0..graph.n())
        .map(|i| {
            let neighbors = graph.neighbors(i);
            if neighbors.is_empty() {
                return Vec::new();
            }
            let mut row: Vec<(usize, f64)> = neighbors.iter().map(|&j| (j, 1.0)).collect();
            if include_self {
                let at = row.partition_point(|&(j, _)| j < i);
                row.insert(at, (i, 1.0));
            }
            row
        })
        .collect();
    WeightMatrix::from_rows(rows, include_self)
}
