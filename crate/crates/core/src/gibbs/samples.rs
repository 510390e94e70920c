use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{contract, Error, Result};
use crate::scalar::Real;

/// Draws of one parameter group, stored row-major (one row per draw).
#[derive(Clone, Debug, PartialEq)]
pub struct SampleGroup<T> {
    name: String,
    columns: Vec<String>,
    values: Vec<T>,
}

impl<T: Real> SampleGroup<T> {
    pub fn new(name: impl Into<String>, columns: Vec<String>) -> Self {
        Self { name: name.into(), columns, values: Vec::new() }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn n_draws(&self) -> usize {
        if self.columns.is_empty() {
            0
        } else {
            self.values.len() / self.columns.len()
        }
    }

    pub fn push(&mut self, draw: &[T]) -> Result<()> {
        if draw.len() != self.columns.len() {
            return Err(contract(format!(
                "group {} has {} columns, draw has {}",
                self.name,
                self.columns.len(),
                draw.len()
            )));
        }
        self.values.extend_from_slice(draw);
        Ok(())
    }

    pub fn draw(&self, i: usize) -> &[T] {
        let k = self.columns.len();
        &self.values[i * k..(i + 1) * k]
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        let k = self.columns.len();
        self.values.iter().skip(c).step_by(k).copied().collect()
    }

    fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for i in 0..self.n_draws() {
            w.write_record(self.draw(i).iter().map(|v| v.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    fn read_csv(name: String, path: &Path) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().from_path(path)?;
        let columns: Vec<String> = r.headers()?.iter().map(String::from).collect();
        let mut group = Self::new(name, columns);
        for (i, rec) in r.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse { path: path.to_path_buf(), line, message: e.to_string() })?;
            let row: Vec<T> = rec
                .iter()
                .map(|s| {
                    s.parse::<f64>().map(T::of).map_err(|_| Error::Parse {
                        path: path.to_path_buf(),
                        line,
                        message: format!("'{s}' is not a number"),
                    })
                })
                .collect::<Result<_>>()?;
            group.push(&row).map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected {} fields, found {}", group.n_cols(), row.len()),
            })?;
        }
        Ok(group)
    }
}

/// Retained draws of a chain, grouped by parameter, plus Metropolis
/// acceptance rates over the retained phase.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PosteriorSamples<T> {
    pub groups: Vec<SampleGroup<T>>,
    pub acceptance: BTreeMap<String, f64>,
}

pub const ACCEPTANCE_FILE: &str = "acceptance.json";

impl<T: Real> PosteriorSamples<T> {
    pub fn group(&self, name: &str) -> Option<&SampleGroup<T>> {
        self.groups.iter().find(|g| g.name == name)
    }

    /// Draws of a single-column group, or one column of a wider group
    /// addressed as `group[column]`.
    pub fn scalar(&self, name: &str) -> Option<Vec<T>> {
        if let Some(g) = self.group(name) {
            return (g.n_cols() == 1).then(|| g.column(0));
        }
        let (group, col) = name.strip_suffix(']')?.split_once('[')?;
        let g = self.group(group)?;
        let c = g.columns.iter().position(|c| c == col)?;
        Some(g.column(c))
    }

    pub fn n_draws(&self) -> usize {
        self.groups.first().map_or(0, SampleGroup::n_draws)
    }

    /// Writes `<group>.csv` per group and the acceptance rates; returns
    /// the files written.
    pub fn write_dir(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        for g in &self.groups {
            let path = dir.join(format!("{}.csv", g.name));
            g.write_csv(&path)?;
            written.push(path);
        }
        let path = dir.join(ACCEPTANCE_FILE);
        let text = serde_json::to_string_pretty(&self.acceptance)?;
        std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(written)
    }

    /// Reads every `*.csv` in `dir` as a group, in file-name order.
    pub fn read_dir(dir: &Path) -> Result<Self> {
        let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        let mut paths: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        paths.sort();
        if paths.is_empty() {
            return Err(Error::Data(format!("no sample files in {}", dir.display())));
        }
        let mut groups = Vec::with_capacity(paths.len());
        for p in &paths {
            let name = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            groups.push(SampleGroup::read_csv(name, p)?);
        }
        let n = groups[0].n_draws();
        if let Some(g) = groups.iter().find(|g| g.n_draws() != n) {
            return Err(Error::Data(format!(
                "group {} has {} draws, expected {n}",
                g.name,
                g.n_draws()
            )));
        }
        let acc_path = dir.join(ACCEPTANCE_FILE);
        let acceptance = if acc_path.exists() {
            let text = std::fs::read_to_string(&acc_path).map_err(|e| Error::io(&acc_path, e))?;
            serde_json::from_str(&text)?
        } else {
            BTreeMap::new()
        };
        Ok(Self { groups, acceptance })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_through_directory() {
        let mut a = SampleGroup::new("alpha", vec!["alpha0".into(), "alpha1".into()]);
        a.push(&[0.1f64, -2.5e-7]).unwrap();
        a.push(&[1.0 / 3.0, 4.0]).unwrap();
        let mut r = SampleGroup::new("r", vec!["r".into()]);
        r.push(&[1.5]).unwrap();
        r.push(&[0.75]).unwrap();
        let mut s = PosteriorSamples { groups: vec![a, r], acceptance: BTreeMap::new() };
        s.acceptance.insert("r".into(), 0.31);
        let dir = tempfile::tempdir().unwrap();
        let files = s.write_dir(dir.path()).unwrap();
        assert_eq!(files.len(), 3);
        let back = PosteriorSamples::<f64>::read_dir(dir.path()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.scalar("alpha[alpha1]").unwrap(), vec![-2.5e-7, 4.0]);
        assert_eq!(back.scalar("r").unwrap(), vec![1.5, 0.75]);
        assert!(back.scalar("alpha").is_none());
    }

    #[test]
    fn malformed_value_reports_file_and_line() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("r.csv"), "r\n1.0\nabc\n").unwrap();
        match PosteriorSamples::<f64>::read_dir(dir.path()) {
            Err(Error::Parse { line, path, .. }) => {
                assert_eq!(line, 3);
                assert!(path.ends_with("r.csv"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn push_checks_width() {
        let mut g = SampleGroup::<f64>::new("x", vec!["a".into()]);
        assert!(g.push(&[1.0, 2.0]).is_err());
    }
}
