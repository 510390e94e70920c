use crate::error::{contract, Error, Result};
use crate::scalar::Real;

/// Count observations indexed by location and time.
///
/// Locations and times are dense zero-based indices internally; the
/// original labels are kept for output. Column 0 of the design matrix is
/// the intercept.
#[derive(Clone, Debug, PartialEq)]
pub struct PanelDataset<T> {
    y: Vec<u64>,
    x: Vec<T>,
    n_coef: usize,
    location: Vec<usize>,
    time: Vec<usize>,
    coords: Vec<[T; 2]>,
    time_points: Vec<T>,
    location_labels: Vec<String>,
    time_labels: Vec<String>,
    covariate_names: Vec<String>,
}

impl<T: Real> PanelDataset<T> {
    /// Builds a dataset from counts, covariate rows (without intercept),
    /// zero-based location/time indices, per-location coordinates and
    /// per-time positions.
    pub fn new(
        y: Vec<u64>,
        covariates: Vec<Vec<T>>,
        location: Vec<usize>,
        time: Vec<usize>,
        coords: Vec<[T; 2]>,
        time_points: Vec<T>,
    ) -> Result<Self> {
        let n = y.len();
        if covariates.len() != n || location.len() != n || time.len() != n {
            return Err(contract(format!(
                "column lengths differ: y={n}, x={}, location={}, time={}",
                covariates.len(),
                location.len(),
                time.len()
            )));
        }
        let p = covariates.first().map_or(0, Vec::len);
        let mut x = Vec::with_capacity(n * (p + 1));
        for (j, row) in covariates.iter().enumerate() {
            if row.len() != p {
                return Err(contract(format!("row {j} has {} covariates, expected {p}", row.len())));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Data(format!("row {j} has a non-finite covariate")));
            }
            x.push(T::one());
            x.extend_from_slice(row);
        }
        let s = coords.len();
        let t = time_points.len();
        if let Some(j) = location.iter().position(|&l| l >= s) {
            return Err(Error::Data(format!("row {j} references location {} of {s}", location[j])));
        }
        if let Some(j) = time.iter().position(|&v| v >= t) {
            return Err(Error::Data(format!("row {j} references time {} of {t}", time[j])));
        }
        if coords.iter().flatten().any(|v| !v.is_finite()) || time_points.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite coordinate or time point".into()));
        }
        Ok(Self {
            y,
            x,
            n_coef: p + 1,
            location,
            time,
            location_labels: (1..=s).map(|i| i.to_string()).collect(),
            time_labels: (1..=t).map(|i| i.to_string()).collect(),
            covariate_names: (1..=p).map(|i| format!("x{i}")).collect(),
            coords,
            time_points,
        })
    }

    pub fn with_labels(
        mut self,
        location_labels: Vec<String>,
        time_labels: Vec<String>,
        covariate_names: Vec<String>,
    ) -> Result<Self> {
        if location_labels.len() != self.n_locations()
            || time_labels.len() != self.n_times()
            || covariate_names.len() + 1 != self.n_coef
        {
            return Err(contract("label counts do not match the dataset"));
        }
        self.location_labels = location_labels;
        self.time_labels = time_labels;
        self.covariate_names = covariate_names;
        Ok(self)
    }

    pub fn n_obs(&self) -> usize {
        self.y.len()
    }

    pub fn n_locations(&self) -> usize {
        self.coords.len()
    }

    pub fn n_times(&self) -> usize {
        self.time_points.len()
    }

    /// Number of regression coefficients including the intercept.
    pub fn n_coef(&self) -> usize {
        self.n_coef
    }

    pub fn y(&self) -> &[u64] {
        &self.y
    }

    /// Design row `j`, intercept first.
    pub fn x(&self, j: usize) -> &[T] {
        &self.x[j * self.n_coef..(j + 1) * self.n_coef]
    }

    pub fn location(&self) -> &[usize] {
        &self.location
    }

    pub fn time(&self) -> &[usize] {
        &self.time
    }

    pub fn coords(&self) -> &[[T; 2]] {
        &self.coords
    }

    pub fn time_points(&self) -> &[T] {
        &self.time_points
    }

    pub fn location_labels(&self) -> &[String] {
        &self.location_labels
    }

    pub fn time_labels(&self) -> &[String] {
        &self.time_labels
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    /// Replaces the counts, keeping the design.
    pub fn set_counts(&mut self, y: Vec<u64>) -> Result<()> {
        if y.len() != self.y.len() {
            return Err(contract(format!("{} counts for {} observations", y.len(), self.y.len())));
        }
        self.y = y;
        Ok(())
    }

    /// Z-scores every non-intercept covariate column in place.
    pub fn standardize_covariates(&mut self) {
        let n = self.n_obs();
        if n < 2 {
            return;
        }
        for k in 1..self.n_coef {
            let col = |j: usize| self.x[j * self.n_coef + k];
            let mean = (0..n).map(col).sum::<T>() / T::of_usize(n);
            let var = (0..n).map(|j| (col(j) - mean).powi(2)).sum::<T>() / T::of_usize(n - 1);
            let sd = if var > T::zero() { var.sqrt() } else { T::one() };
            for j in 0..n {
                let v = &mut self.x[j * self.n_coef + k];
                *v = (*v - mean) / sd;
            }
        }
    }

    /// Observation counts per location and time cell.
    pub fn cell_sizes(&self) -> Vec<Vec<usize>> {
        let mut cells = vec![vec![0; self.n_times()]; self.n_locations()];
        for (&s, &t) in self.location.iter().zip(&self.time) {
            cells[s][t] += 1;
        }
        cells
    }
}

/// Incidence of observations on locations and times, plus the current
/// at-risk subset.
#[derive(Clone, Debug)]
pub struct DesignMaps {
    n_locations: usize,
    n_times: usize,
    location: Vec<usize>,
    time: Vec<usize>,
    at_risk: Vec<usize>,
}

impl DesignMaps {
    pub fn new<T: Real>(data: &PanelDataset<T>) -> Self {
        Self {
            n_locations: data.n_locations(),
            n_times: data.n_times(),
            location: data.location.clone(),
            time: data.time.clone(),
            at_risk: (0..data.n_obs()).collect(),
        }
    }

    pub fn n_obs(&self) -> usize {
        self.location.len()
    }

    pub fn location_of(&self, j: usize) -> usize {
        self.location[j]
    }

    pub fn time_of(&self, j: usize) -> usize {
        self.time[j]
    }

    /// Rows with `W = 1`, ascending.
    pub fn at_risk(&self) -> &[usize] {
        &self.at_risk
    }

    pub fn refresh_at_risk(&mut self, w: &[bool]) {
        self.at_risk.clear();
        self.at_risk
            .extend(w.iter().enumerate().filter(|(_, &on)| on).map(|(j, _)| j));
    }

    /// Dense `N × S` location incidence.
    pub fn spatial_incidence(&self) -> Vec<Vec<u8>> {
        self.location
            .iter()
            .map(|&s| (0..self.n_locations).map(|k| u8::from(k == s)).collect())
            .collect()
    }

    /// Dense `N × T` time incidence.
    pub fn temporal_incidence(&self) -> Vec<Vec<u8>> {
        self.time
            .iter()
            .map(|&t| (0..self.n_times).map(|k| u8::from(k == t)).collect())
            .collect()
    }
}
