use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PanelDataset;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Column names of a panel CSV file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsvSchema {
    pub count: String,
    pub location: String,
    pub time: String,
    pub coord_x: String,
    pub coord_y: String,
    /// Numeric position of each time label. When absent the time label
    /// itself is parsed as a number, falling back to rank order.
    pub time_point: Option<String>,
    pub covariates: Vec<String>,
    /// Z-score covariate columns after loading.
    pub standardize: bool,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            count: "y".into(),
            location: "location".into(),
            time: "time".into(),
            coord_x: "coord_x".into(),
            coord_y: "coord_y".into(),
            time_point: Some("time_point".into()),
            covariates: vec!["x1".into()],
            standardize: false,
        }
    }
}

fn parse_count(raw: &str) -> Option<u64> {
    let raw = raw.trim();
    if let Ok(v) = raw.parse::<u64>() {
        return Some(v);
    }
    let v: f64 = raw.parse().ok()?;
    (v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64).then_some(v as u64)
}

/// Sorts labels numerically when every label is a number, lexically otherwise.
fn label_order(labels: impl Iterator<Item = String>) -> Vec<String> {
    let mut v: Vec<String> = labels.collect();
    v.sort();
    v.dedup();
    let numeric: Option<Vec<f64>> = v.iter().map(|s| s.trim().parse::<f64>().ok()).collect();
    if let Some(nums) = numeric {
        let mut pairs: Vec<(f64, String)> = nums.into_iter().zip(v).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        pairs.into_iter().map(|(_, s)| s).collect()
    } else {
        v
    }
}

/// Reads a panel CSV with a header row.
///
/// Locations are re-indexed densely in label order and times in order of
/// their time point. Each location must carry the same coordinates on
/// every row that gives them, and at least one row must give them.
pub fn ingest_csv<T: Real>(path: &Path, schema: &CsvSchema) -> Result<PanelDataset<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Data(format!("cannot open {}: {e}", path.display())),
            _ => Error::Csv(e),
        })?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("column '{name}' not found in {}", path.display())))
    };
    let c_y = col(&schema.count)?;
    let c_loc = col(&schema.location)?;
    let c_time = col(&schema.time)?;
    let c_x = col(&schema.coord_x)?;
    let c_yc = col(&schema.coord_y)?;
    let c_tp = schema.time_point.as_deref().map(col).transpose()?;
    let c_cov: Vec<usize> = schema.covariates.iter().map(|c| col(c)).collect::<Result<_>>()?;

    let data_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: msg,
    };
    let num = |raw: &str, line: usize, what: &str| -> Result<f64> {
        raw.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| data_err(line, format!("{what} '{raw}' is not a finite number")))
    };

    let mut y = Vec::new();
    let mut covs = Vec::new();
    let mut loc_raw = Vec::new();
    let mut time_raw = Vec::new();
    let mut coords: HashMap<String, [f64; 2]> = HashMap::new();
    let mut tpoints: HashMap<String, f64> = HashMap::new();

    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let count = parse_count(&rec[c_y]).ok_or_else(|| {
            Error::Data(format!(
                "{}:{line}: count '{}' is not a non-negative integer",
                path.display(),
                &rec[c_y]
            ))
        })?;
        y.push(count);
        let loc = rec[c_loc].to_string();
        let time = rec[c_time].to_string();
        let (cx, cy) = (rec[c_x].trim(), rec[c_yc].trim());
        if !cx.is_empty() || !cy.is_empty() {
            let xy = [num(cx, line, "coordinate")?, num(cy, line, "coordinate")?];
            if let Some(prev) = coords.insert(loc.clone(), xy) {
                if prev != xy {
                    return Err(Error::Data(format!(
                        "{}:{line}: location '{loc}' has conflicting coordinates",
                        path.display()
                    )));
                }
            }
        }
        if let Some(c) = c_tp {
            let raw = rec[c].trim();
            if !raw.is_empty() {
                let v = num(raw, line, "time point")?;
                if let Some(prev) = tpoints.insert(time.clone(), v) {
                    if prev != v {
                        return Err(Error::Data(format!(
                            "{}:{line}: time '{time}' has conflicting time points",
                            path.display()
                        )));
                    }
                }
            }
        }
        covs.push(
            c_cov
                .iter()
                .map(|&c| num(&rec[c], line, "covariate").map(T::of))
                .collect::<Result<Vec<T>>>()?,
        );
        loc_raw.push(loc);
        time_raw.push(time);
    }

    let locations = label_order(loc_raw.iter().cloned());
    let loc_index: HashMap<&str, usize> = locations.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut coord_vec = Vec::with_capacity(locations.len());
    for l in &locations {
        let xy = coords
            .get(l)
            .ok_or_else(|| Error::Data(format!("location '{l}' has no coordinates")))?;
        coord_vec.push([T::of(xy[0]), T::of(xy[1])]);
    }

    let time_labels = label_order(time_raw.iter().cloned());
    let positions: Vec<f64> = if c_tp.is_some() {
        time_labels
            .iter()
            .map(|t| {
                tpoints
                    .get(t)
                    .copied()
                    .ok_or_else(|| Error::Data(format!("time '{t}' has no time point")))
            })
            .collect::<Result<_>>()?
    } else {
        let parsed: Option<Vec<f64>> = time_labels.iter().map(|t| t.trim().parse().ok()).collect();
        parsed.unwrap_or_else(|| (1..=time_labels.len()).map(|i| i as f64).collect())
    };
    // order times by position, breaking ties by label order
    let mut by_pos: Vec<(f64, String)> = positions.into_iter().zip(time_labels).collect();
    by_pos.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let time_index: BTreeMap<&str, usize> = by_pos.iter().enumerate().map(|(i, (_, s))| (s.as_str(), i)).collect();

    let location: Vec<usize> = loc_raw.iter().map(|l| loc_index[l.as_str()]).collect();
    let time: Vec<usize> = time_raw.iter().map(|t| time_index[t.as_str()]).collect();
    let time_points: Vec<T> = by_pos.iter().map(|(p, _)| T::of(*p)).collect();
    let time_labels: Vec<String> = by_pos.into_iter().map(|(_, s)| s).collect();

    let mut data = PanelDataset::new(y, covs, location, time, coord_vec, time_points)?
        .with_labels(locations, time_labels, schema.covariates.clone())?;
    if schema.standardize {
        data.standardize_covariates();
    }
    Ok(data)
}

/// Writes `data` in the layout [`ingest_csv`] reads with `schema`.
pub fn write_csv<T: Real>(data: &PanelDataset<T>, schema: &CsvSchema, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![
        schema.count.clone(),
        schema.location.clone(),
        schema.time.clone(),
        schema.coord_x.clone(),
        schema.coord_y.clone(),
    ];
    if let Some(tp) = &schema.time_point {
        header.push(tp.clone());
    }
    if schema.covariates.len() + 1 != data.n_coef() {
        return Err(Error::Schema(format!(
            "schema names {} covariates but the data has {}",
            schema.covariates.len(),
            data.n_coef() - 1
        )));
    }
    header.extend(schema.covariates.iter().cloned());
    w.write_record(&header)?;
    for j in 0..data.n_obs() {
        let s = data.location()[j];
        let t = data.time()[j];
        let c = data.coords()[s];
        let mut row = vec![
            data.y()[j].to_string(),
            data.location_labels()[s].clone(),
            data.time_labels()[t].clone(),
            c[0].to_string(),
            c[1].to_string(),
        ];
        if schema.time_point.is_some() {
            row.push(data.time_points()[t].to_string());
        }
        row.extend(data.x(j)[1..].iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
