//! Areal geometry, long-format value tables, and the joined, z-normalized dataset.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};

use geojson::{GeoJson, Value as GeometryValue};
use serde_json::Value as JsonValue;

use crate::error::{DataError, ZScoreError};

/// A closed ring of `(lon, lat)` pairs; first and last coordinates are equal.
pub type Ring = Vec<[f64; 2]>;
/// Exterior ring followed by any holes.
pub type Polygon = Vec<Ring>;

#[derive(Debug, Clone, PartialEq)]
pub struct Area {
    pub id: String,
    pub name: Option<String>,
    /// A plain polygon is stored as a one-element list.
    pub polygons: Vec<Polygon>,
}

impl Area {
    /// Display label: the configured name when present, else the id.
    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or(&self.id)
    }
}

/// Areas in file order with unique, non-empty ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AreaSet {
    areas: Vec<Area>,
}

impl AreaSet {
    /// Validates ids and rings and builds the set.
    pub fn new(areas: Vec<Area>) -> Result<Self, DataError> {
        let mut seen = HashSet::with_capacity(areas.len());
        for (index, area) in areas.iter().enumerate() {
            if area.id.is_empty() {
                return Err(DataError::EmptyId { index });
            }
            if !seen.insert(area.id.as_str()) {
                return Err(DataError::DuplicateId {
                    index,
                    id: area.id.clone(),
                });
            }
            for ring in area.polygons.iter().flatten() {
                validate_ring(index, ring)?;
            }
        }
        Ok(Self { areas })
    }

    pub fn len(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
    }

    pub fn areas(&self) -> &[Area] {
        &self.areas
    }

    pub fn get(&self, index: usize) -> Option<&Area> {
        self.areas.get(index)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.areas.iter().map(|a| a.id.as_str())
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.areas.iter().position(|a| a.id == id)
    }
}

fn validate_ring(index: usize, ring: &Ring) -> Result<(), DataError> {
    if ring.len() < 4 {
        return Err(DataError::InvalidRing {
            index,
            reason: format!("{} positions, need at least 4", ring.len()),
        });
    }
    if ring.first() != ring.last() {
        return Err(DataError::InvalidRing {
            index,
            reason: "ring is not closed".to_string(),
        });
    }
    if ring.iter().flatten().any(|c| !c.is_finite()) {
        return Err(DataError::InvalidRing {
            index,
            reason: "non-finite coordinate".to_string(),
        });
    }
    Ok(())
}

/// Parses a GeoJSON FeatureCollection of polygons and multipolygons.
///
/// The id is read from `properties[id_field]`, falling back to the feature's own `id`.
/// Numeric ids are rendered with their JSON text (`1001` becomes `"1001"`).
pub fn parse_geometry(bytes: &[u8], id_field: &str, name_field: Option<&str>) -> Result<AreaSet, DataError> {
    let text = std::str::from_utf8(bytes).map_err(|e| DataError::MalformedGeoJson(e.to_string()))?;
    let geojson: GeoJson = text
        .parse()
        .map_err(|e: geojson::Error| DataError::MalformedGeoJson(e.to_string()))?;
    let collection = match geojson {
        GeoJson::FeatureCollection(fc) => fc,
        _ => return Err(DataError::MalformedGeoJson("expected a FeatureCollection".to_string())),
    };

    let mut areas = Vec::with_capacity(collection.features.len());
    for (index, feature) in collection.features.iter().enumerate() {
        let property = feature
            .properties
            .as_ref()
            .and_then(|p| p.get(id_field))
            .and_then(json_scalar_to_string);
        let id = match property {
            Some(id) => id,
            None => match &feature.id {
                Some(geojson::feature::Id::String(s)) => s.clone(),
                Some(geojson::feature::Id::Number(n)) => n.to_string(),
                None => {
                    return Err(DataError::MissingIdField {
                        index,
                        field: id_field.to_string(),
                    })
                }
            },
        };
        let name = name_field.and_then(|field| {
            feature
                .properties
                .as_ref()
                .and_then(|p| p.get(field))
                .and_then(json_scalar_to_string)
        });
        let polygons = match feature.geometry.as_ref().map(|g| &g.value) {
            Some(GeometryValue::Polygon(rings)) => vec![convert_polygon(rings)],
            Some(GeometryValue::MultiPolygon(polys)) => polys.iter().map(|p| convert_polygon(p)).collect(),
            Some(other) => {
                return Err(DataError::NonArealGeometry {
                    index,
                    kind: other.type_name().to_string(),
                })
            }
            None => {
                return Err(DataError::NonArealGeometry {
                    index,
                    kind: "null".to_string(),
                })
            }
        };
        areas.push(Area { id, name, polygons });
    }
    AreaSet::new(areas)
}

fn json_scalar_to_string(value: &JsonValue) -> Option<String> {
    match value {
        JsonValue::String(s) => Some(s.clone()),
        JsonValue::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn convert_polygon(rings: &[Vec<Vec<f64>>]) -> Polygon {
    rings
        .iter()
        .map(|ring| {
            ring.iter()
                .map(|pos| {
                    [
                        pos.first().copied().unwrap_or(f64::NAN),
                        pos.get(1).copied().unwrap_or(f64::NAN),
                    ]
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueRow {
    pub id: String,
    pub timestep: String,
    pub value: Option<f64>,
}

/// Long-format `(id, timestep, value)` rows, at most one per `(id, timestep)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeSeriesTable {
    pub rows: Vec<ValueRow>,
}

impl TimeSeriesTable {
    /// Distinct timestep labels in analysis order.
    pub fn timesteps(&self) -> Vec<String> {
        let distinct: BTreeSet<&str> = self.rows.iter().map(|r| r.timestep.as_str()).collect();
        let mut labels: Vec<String> = distinct.into_iter().map(str::to_string).collect();
        sort_timesteps(&mut labels);
        labels
    }
}

/// Numeric ascending when every label parses as a number, lexicographic otherwise.
pub fn sort_timesteps(labels: &mut [String]) {
    let numeric: Option<Vec<f64>> = labels.iter().map(|l| l.trim().parse::<f64>().ok()).collect();
    match numeric {
        Some(_) => labels.sort_by(|a, b| {
            let x: f64 = a.trim().parse().unwrap_or(f64::NAN);
            let y: f64 = b.trim().parse().unwrap_or(f64::NAN);
            x.total_cmp(&y).then_with(|| a.cmp(b))
        }),
        None => labels.sort(),
    }
}

fn is_missing_token(cell: &str) -> bool {
    let cell = cell.trim();
    cell.is_empty()
        || ["na", "n/a", "nan", "null"]
            .iter()
            .any(|t| cell.eq_ignore_ascii_case(t))
}

/// Parses a long-format CSV. Empty and `NA`-like cells become missing values.
pub fn parse_values(bytes: &[u8], id_col: &str, time_col: &str, value_col: &str) -> Result<TimeSeriesTable, DataError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };
    let (id_idx, time_idx, value_idx) = (column(id_col)?, column(time_col)?, column(value_col)?);

    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let id = record.get(id_idx).unwrap_or("").to_string();
        let timestep = record.get(time_idx).unwrap_or("").to_string();
        let cell = record.get(value_idx).unwrap_or("");
        let value = if is_missing_token(cell) {
            None
        } else {
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Some(v),
                _ => {
                    return Err(DataError::BadValue {
                        line,
                        value: cell.to_string(),
                    })
                }
            }
        };
        if !seen.insert((id.clone(), timestep.clone())) {
            return Err(DataError::DuplicateRow { line, id, timestep });
        }
        rows.push(ValueRow { id, timestep, value });
    }
    Ok(TimeSeriesTable { rows })
}

/// Mean and population standard deviation of the present values of one timestep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

/// Z-scores present entries with the population standard deviation; missing stays missing.
pub fn zscore_timestep(values: &[Option<f64>]) -> Result<(Vec<Option<f64>>, Moments), ZScoreError> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let count = present.len();
    if count < 2 {
        return Err(ZScoreError::InsufficientData);
    }
    let n = count as f64;
    let mean = present.iter().sum::<f64>() / n;
    let variance = present.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let std = variance.sqrt();
    let scale = present.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if !std.is_finite() || std <= 1e-12 * scale {
        return Err(ZScoreError::Degenerate);
    }
    let z = values.iter().map(|v| v.map(|x| (x - mean) / std)).collect();
    Ok((z, Moments { mean, std, count }))
}

/// Geometry joined with a location × timestep value matrix.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub areas: AreaSet,
    pub timesteps: Vec<String>,
    /// `values[location][timestep]`
    pub values: Vec<Vec<Option<f64>>>,
    /// Same shape as `values`; a timestep that cannot be normalized is all `None`.
    pub zvalues: Vec<Vec<Option<f64>>>,
    pub moments: Vec<Result<Moments, ZScoreError>>,
    pub warnings: Vec<String>,
}

impl Dataset {
    pub fn n_locations(&self) -> usize {
        self.areas.len()
    }

    pub fn n_timesteps(&self) -> usize {
        self.timesteps.len()
    }

    /// Values of one timestep across locations.
    pub fn column(&self, t: usize) -> Vec<Option<f64>> {
        self.values.iter().map(|row| row[t]).collect()
    }

    pub fn zcolumn(&self, t: usize) -> Vec<Option<f64>> {
        self.zvalues.iter().map(|row| row[t]).collect()
    }

    /// Long-format CSV of the raw values; missing cells are written empty.
    pub fn to_csv(&self, id_col: &str, time_col: &str, value_col: &str) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer
            .write_record([id_col, time_col, value_col])
            .expect("in-memory write");
        for (area, row) in self.areas.areas().iter().zip(&self.values) {
            for (timestep, value) in self.timesteps.iter().zip(row) {
                let cell = value.map(|v| v.to_string()).unwrap_or_default();
                writer
                    .write_record([area.id.as_str(), timestep.as_str(), cell.as_str()])
                    .expect("in-memory write");
            }
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

/// Aligns table rows to area order and sorted timesteps, then z-normalizes each timestep.
pub fn join_dataset(areas: AreaSet, table: &TimeSeriesTable) -> Result<Dataset, DataError> {
    let timesteps = table.timesteps();
    if timesteps.is_empty() {
        return Err(DataError::NoTimesteps);
    }
    let area_index: HashMap<&str, usize> = areas.ids().enumerate().map(|(i, id)| (id, i)).collect();
    let time_index: HashMap<&str, usize> = timesteps.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();

    let unknown: BTreeSet<&str> = table
        .rows
        .iter()
        .map(|r| r.id.as_str())
        .filter(|id| !area_index.contains_key(id))
        .collect();
    if !unknown.is_empty() {
        return Err(DataError::UnknownLocations(
            unknown.into_iter().map(str::to_string).collect(),
        ));
    }

    let mut values = vec![vec![None; timesteps.len()]; areas.len()];
    let mut has_rows = vec![false; areas.len()];
    for row in &table.rows {
        let i = area_index[row.id.as_str()];
        values[i][time_index[row.timestep.as_str()]] = row.value;
        has_rows[i] = true;
    }

    let mut warnings = Vec::new();
    let without_rows: Vec<&str> = areas
        .ids()
        .zip(&has_rows)
        .filter(|(_, has)| !**has)
        .map(|(id, _)| id)
        .collect();
    if !without_rows.is_empty() {
        let message = format!("locations without any value rows: {}", without_rows.join(", "));
        log::warn!("{message}");
        warnings.push(message);
    }

    let mut zvalues = vec![vec![None; timesteps.len()]; areas.len()];
    let mut moments = Vec::with_capacity(timesteps.len());
    for (t, label) in timesteps.iter().enumerate() {
        let column: Vec<Option<f64>> = values.iter().map(|row| row[t]).collect();
        match zscore_timestep(&column) {
            Ok((z, m)) => {
                for (row, zv) in zvalues.iter_mut().zip(z) {
                    row[t] = zv;
                }
                moments.push(Ok(m));
            }
            Err(e) => {
                let message = format!("timestep {label}: {e}");
                log::warn!("{message}");
                warnings.push(message);
                moments.push(Err(e));
            }
        }
    }

    Ok(Dataset {
        areas,
        timesteps,
        values,
        zvalues,
        moments,
        warnings,
    })
}

/// Orders two labels the same way [`sort_timesteps`] would.
pub fn compare_timesteps(a: &str, b: &str) -> Ordering {
    let mut pair = [a.to_string(), b.to_string()];
    sort_timesteps(&mut pair);
    if a == b {
        Ordering::Equal
    } else if pair[0] == a {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn square(x: f64, y: f64) -> String {
        format!(
            "[[[{x},{y}],[{},{y}],[{},{}],[{x},{}],[{x},{y}]]]",
            x + 1.0,
            x + 1.0,
            y + 1.0,
            y + 1.0
        )
    }

    fn collection(features: &[String]) -> Vec<u8> {
        format!(r#"{{"type":"FeatureCollection","features":[{}]}}"#, features.join(",")).into_bytes()
    }

    fn polygon_feature(props: &str, x: f64) -> String {
        format!(
            r#"{{"type":"Feature","properties":{props},"geometry":{{"type":"Polygon","coordinates":{}}}}}"#,
            square(x, 0.0)
        )
    }

    #[test]
    fn parses_two_features_by_property() {
        let bytes = collection(&[
            polygon_feature(r#"{"fips":"01001","name":"Autauga"}"#, 0.0),
            polygon_feature(r#"{"fips":1003,"name":"Baldwin"}"#, 1.0),
        ]);
        let areas = parse_geometry(&bytes, "fips", Some("name")).unwrap();
        assert_eq!(areas.len(), 2);
        assert_eq!(areas.ids().collect::<Vec<_>>(), ["01001", "1003"]);
        assert_eq!(areas.get(1).unwrap().label(), "Baldwin");
        assert_eq!(areas.get(0).unwrap().polygons[0][0].len(), 5);
    }

    #[test]
    fn falls_back_to_feature_id() {
        let f = format!(
            r#"{{"type":"Feature","id":"A","properties":{{}},"geometry":{{"type":"Polygon","coordinates":{}}}}}"#,
            square(0.0, 0.0)
        );
        let areas = parse_geometry(&collection(&[f]), "fips", None).unwrap();
        assert_eq!(areas.get(0).unwrap().id, "A");
        assert_eq!(areas.get(0).unwrap().label(), "A");
    }

    #[test]
    fn missing_id_names_feature_index() {
        let bytes = collection(&[
            polygon_feature(r#"{"fips":"A"}"#, 0.0),
            polygon_feature(r#"{"other":"B"}"#, 1.0),
        ]);
        let err = parse_geometry(&bytes, "fips", None).unwrap_err();
        assert!(matches!(err, DataError::MissingIdField { index: 1, .. }), "{err}");
        assert!(err.to_string().contains("feature 1"));
    }

    #[test]
    fn rejects_points() {
        let f = r#"{"type":"Feature","properties":{"fips":"A"},"geometry":{"type":"Point","coordinates":[0,0]}}"#;
        let err = parse_geometry(&collection(&[f.to_string()]), "fips", None).unwrap_err();
        assert!(err.to_string().contains("non-areal geometry"), "{err}");
    }

    #[test]
    fn rejects_duplicates_and_malformed_json() {
        let bytes = collection(&[
            polygon_feature(r#"{"fips":"A"}"#, 0.0),
            polygon_feature(r#"{"fips":"A"}"#, 1.0),
        ]);
        assert!(matches!(
            parse_geometry(&bytes, "fips", None),
            Err(DataError::DuplicateId { index: 1, .. })
        ));
        assert!(matches!(
            parse_geometry(b"{not json", "fips", None),
            Err(DataError::MalformedGeoJson(_))
        ));
    }

    #[test]
    fn rejects_open_ring() {
        let f = r#"{"type":"Feature","properties":{"fips":"A"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1]]]}}"#;
        assert!(matches!(
            parse_geometry(&collection(&[f.to_string()]), "fips", None),
            Err(DataError::InvalidRing { index: 0, .. })
        ));
    }

    #[test]
    fn parses_values() {
        let table = parse_values(b"id,year,rate\nA,1999,10.0\nA,2000,11.0\n", "id", "year", "rate").unwrap();
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.rows[1].value, Some(11.0));
        assert_eq!(table.timesteps(), ["1999", "2000"]);
    }

    #[test]
    fn value_errors() {
        let dup = parse_values(b"id,year,rate\nA,1999,1\nA,1999,2\n", "id", "year", "rate").unwrap_err();
        assert!(matches!(dup, DataError::DuplicateRow { line: 3, .. }), "{dup}");
        let missing = parse_values(b"id,year\nA,1999\n", "id", "year", "rate").unwrap_err();
        assert!(matches!(missing, DataError::MissingColumn(ref c) if c == "rate"));
        let bad = parse_values(b"id,year,rate\nA,1999,ten\n", "id", "year", "rate").unwrap_err();
        assert!(matches!(bad, DataError::BadValue { line: 2, .. }));
    }

    #[test]
    fn empty_and_na_cells_are_missing() {
        let table = parse_values(b"id,year,rate\nA,1999,\nB,1999,NA\nC,1999,3\n", "id", "year", "rate").unwrap();
        let values: Vec<_> = table.rows.iter().map(|r| r.value).collect();
        assert_eq!(values, [None, None, Some(3.0)]);
    }

    #[test]
    fn timestep_ordering() {
        let mut numeric = vec!["10".to_string(), "9".to_string(), "2000".to_string()];
        sort_timesteps(&mut numeric);
        assert_eq!(numeric, ["9", "10", "2000"]);
        let mut mixed = vec!["b".to_string(), "10".to_string(), "9".to_string()];
        sort_timesteps(&mut mixed);
        assert_eq!(mixed, ["10", "9", "b"]);
        assert_eq!(compare_timesteps("9", "10"), Ordering::Less);
    }

    fn two_areas() -> AreaSet {
        let bytes = collection(&[
            polygon_feature(r#"{"id":"A"}"#, 0.0),
            polygon_feature(r#"{"id":"B"}"#, 1.0),
        ]);
        parse_geometry(&bytes, "id", None).unwrap()
    }

    #[test]
    fn joins_full_table() {
        let table = parse_values(b"id,t,v\nB,2,4\nA,1,1\nB,1,3\nA,2,2\n", "id", "t", "v").unwrap();
        let ds = join_dataset(two_areas(), &table).unwrap();
        assert_eq!(ds.timesteps, ["1", "2"]);
        assert_eq!(ds.values, vec![vec![Some(1.0), Some(2.0)], vec![Some(3.0), Some(4.0)]]);
        assert!(ds.warnings.is_empty());
        assert_eq!(ds.zvalues[0][0], Some(-1.0));
    }

    #[test]
    fn join_rejects_unknown_location() {
        let table = parse_values(b"id,t,v\nA,1,1\nZZZ,1,2\n", "id", "t", "v").unwrap();
        let err = join_dataset(two_areas(), &table).unwrap_err();
        assert_eq!(err.to_string(), "unknown location ZZZ");
    }

    #[test]
    fn join_warns_on_area_without_rows() {
        let table = parse_values(b"id,t,v\nA,1,1\nA,2,2\n", "id", "t", "v").unwrap();
        let ds = join_dataset(two_areas(), &table).unwrap();
        assert_eq!(ds.values[1], vec![None, None]);
        assert!(ds.warnings.iter().any(|w| w.contains("without any value rows: B")));
        // one present value per timestep cannot be normalized
        assert!(ds.moments.iter().all(|m| *m == Err(ZScoreError::InsufficientData)));
    }

    #[test]
    fn zscore_examples() {
        let (z, m) = zscore_timestep(&[Some(1.0), Some(2.0), Some(3.0)]).unwrap();
        let sigma = (2.0_f64 / 3.0).sqrt();
        assert_abs_diff_eq!(m.std, sigma, epsilon = 1e-15);
        assert_abs_diff_eq!(z[0].unwrap(), -1.0 / sigma, epsilon = 1e-12);
        assert_abs_diff_eq!(z[1].unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z[2].unwrap(), 1.0 / sigma, epsilon = 1e-12);

        assert_eq!(zscore_timestep(&[Some(5.0); 3]).unwrap_err(), ZScoreError::Degenerate);
        assert_eq!(
            zscore_timestep(&[Some(5.0), None]).unwrap_err(),
            ZScoreError::InsufficientData
        );

        let (z, m) = zscore_timestep(&[Some(1.0), None, Some(3.0)]).unwrap();
        assert_eq!((m.mean, m.std), (2.0, 1.0));
        assert_eq!(z, vec![Some(-1.0), None, Some(1.0)]);
    }

    fn column_strategy() -> impl Strategy<Value = Vec<Option<f64>>> {
        proptest::collection::vec(proptest::option::weighted(0.8, -1e3..1e3_f64), 2..60)
    }

    proptest! {
        #[test]
        fn zscores_have_zero_mean_unit_variance(column in column_strategy()) {
            if let Ok((z, _)) = zscore_timestep(&column) {
                let present: Vec<f64> = z.iter().flatten().copied().collect();
                let n = present.len() as f64;
                let sum: f64 = present.iter().sum();
                let var = present.iter().map(|v| v * v).sum::<f64>() / n;
                prop_assert!(sum.abs() <= 1e-9);
                prop_assert!((var - 1.0).abs() <= 1e-9);
                for (orig, zv) in column.iter().zip(&z) {
                    prop_assert_eq!(orig.is_some(), zv.is_some());
                }
            }
        }

        #[test]
        fn zscore_is_affine_invariant(column in column_strategy(), a in 0.01..100.0_f64, b in -100.0..100.0_f64) {
            if let Ok((z, _)) = zscore_timestep(&column) {
                let scaled: Vec<Option<f64>> = column.iter().map(|v| v.map(|x| a * x + b)).collect();
                let (zs, _) = zscore_timestep(&scaled).unwrap();
                for (p, q) in z.iter().zip(&zs) {
                    match (p, q) {
                        (Some(p), Some(q)) => prop_assert!((p - q).abs() <= 1e-9),
                        (None, None) => {}
                        _ => prop_assert!(false),
                    }
                }
            }
        }

        #[test]
        fn join_then_csv_round_trips_values(values in proptest::collection::vec(proptest::option::weighted(0.9, any::<f64>().prop_filter("finite", |v| v.is_finite())), 4)) {
            let mut csv = String::from("id,t,v\n");
            for (k, v) in values.iter().enumerate() {
                let id = if k % 2 == 0 { "A" } else { "B" };
                csv.push_str(&format!("{id},{},{}\n", k / 2, v.map(|x| x.to_string()).unwrap_or_default()));
            }
            let table = parse_values(csv.as_bytes(), "id", "t", "v").unwrap();
            let ds = join_dataset(two_areas(), &table).unwrap();
            let again = parse_values(ds.to_csv("id", "t", "v").as_bytes(), "id", "t", "v").unwrap();
            let ds2 = join_dataset(two_areas(), &again).unwrap();
            for (r1, r2) in ds.values.iter().zip(&ds2.values) {
                for (a, b) in r1.iter().zip(r2) {
                    prop_assert_eq!(a.map(f64::to_bits), b.map(f64::to_bits));
                }
            }
        }
    }
}
