//! Posterior summaries, recovery scores against a known truth, fitted
//! counts and group risk ratios.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{effective_sample_size, mean, pearson, quantile_sorted, sorted};
use crate::error::{contract, Error, Result};
use crate::gibbs::{PosteriorSamples, SampleGroup};
use crate::model::{ChainState, ComponentState, PanelDataset};
use crate::scalar::Real;

/// Mean and equal-tailed 95% interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    /// `None` when `draws` is empty.
    pub fn of(draws: &[f64]) -> Option<Self> {
        if draws.is_empty() {
            return None;
        }
        let s = sorted(draws);
        Some(Self { mean: mean(draws), lo: quantile_sorted(&s, 0.025), hi: quantile_sorted(&s, 0.975) })
    }

    pub fn covers(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterSummary {
    pub group: String,
    pub parameter: String,
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
    pub ess: f64,
    /// Metropolis acceptance rate, for the length-scales and `r`
    pub acceptance: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub n_draws: usize,
    pub rows: Vec<ParameterSummary>,
}

fn to_f64<T: Real>(v: Vec<T>) -> Vec<f64> {
    v.into_iter().map(Real::to_f64_lossy).collect()
}

/// Name of one column: the column itself when it is the group name plus
/// an index (`r`, `alpha1`, `eta2_17`), `group[column]` otherwise.
fn column_name<T: Real>(g: &SampleGroup<T>, c: usize) -> String {
    let col = &g.columns()[c];
    let indexed = col
        .strip_prefix(g.name())
        .is_some_and(|rest| rest.chars().all(|ch| ch.is_ascii_digit() || ch == '_'));
    if indexed {
        col.clone()
    } else {
        format!("{}[{col}]", g.name())
    }
}

/// Mean, 95% interval and ESS of every column of every group.
pub fn summarize_samples<T: Real>(samples: &PosteriorSamples<T>) -> Result<SummaryTable> {
    let n = samples.n_draws();
    if n < 2 {
        return Err(contract(format!("summaries need at least 2 draws, got {n}")));
    }
    let mut rows = Vec::new();
    for g in &samples.groups {
        for c in 0..g.n_cols() {
            let draws = to_f64(g.column(c));
            let band = Band::of(&draws).expect("non-empty");
            rows.push(ParameterSummary {
                group: g.name().to_string(),
                parameter: column_name(g, c),
                mean: band.mean,
                lo: band.lo,
                hi: band.hi,
                ess: effective_sample_size(&draws),
                acceptance: (g.n_cols() == 1).then(|| samples.acceptance.get(g.name()).copied()).flatten(),
            });
        }
    }
    Ok(SummaryTable { n_draws: n, rows })
}

impl SummaryTable {
    pub fn get(&self, parameter: &str) -> Option<&ParameterSummary> {
        self.rows.iter().find(|r| r.parameter == parameter)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["group", "parameter", "mean", "lo", "hi", "ess", "acceptance"])?;
        for r in &self.rows {
            w.write_record([
                r.group.clone(),
                r.parameter.clone(),
                r.mean.to_string(),
                r.lo.to_string(),
                r.hi.to_string(),
                format!("{:.1}", r.ess),
                r.acceptance.map(|a| a.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Compact JSON digest: scalar parameters only, keyed by name.
    pub fn digest(&self) -> serde_json::Value {
        let scalars: BTreeMap<&str, &ParameterSummary> = self
            .rows
            .iter()
            .filter(|r| r.parameter == r.group || r.group == "alpha" || r.group == "beta")
            .map(|r| (r.parameter.as_str(), r))
            .collect();
        serde_json::json!({ "n_draws": self.n_draws, "parameters": scalars })
    }
}

/// Coverage of one true value by its 95% interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub parameter: String,
    pub truth: f64,
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
    pub covered: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub coverage: Vec<Coverage>,
    /// Pearson correlation of true and posterior-mean effects, by group
    /// (`a`, `b`, `c`, `d`)
    pub correlations: BTreeMap<String, f64>,
}

impl RecoveryReport {
    pub fn get(&self, parameter: &str) -> Option<&Coverage> {
        self.coverage.iter().find(|c| c.parameter == parameter)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["parameter", "truth", "mean", "lo", "hi", "covered"])?;
        for c in &self.coverage {
            w.write_record([
                c.parameter.clone(),
                c.truth.to_string(),
                c.mean.to_string(),
                c.lo.to_string(),
                c.hi.to_string(),
                c.covered.to_string(),
            ])?;
        }
        for (g, r) in &self.correlations {
            w.write_record([format!("corr({g})"), String::new(), r.to_string(), String::new(), String::new(), String::new()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// True values of every sampled group, in the column order the sampler
/// writes them.
fn truth_groups<T: Real>(truth: &ChainState<T>) -> Vec<(&'static str, Vec<f64>)> {
    let (b, c) = (&truth.binary, &truth.count);
    let f = |v: &[T]| v.iter().map(|x| x.to_f64_lossy()).collect::<Vec<f64>>();
    let s = |v: T| vec![v.to_f64_lossy()];
    vec![
        ("alpha", f(&b.coef)),
        ("beta", f(&c.coef)),
        ("sigma11", s(b.spatial_kernel.sigma)),
        ("l11", s(b.spatial_kernel.l)),
        ("sigma12", s(b.temporal_kernel.sigma)),
        ("l12", s(b.temporal_kernel.l)),
        ("sigma21", s(c.spatial_kernel.sigma)),
        ("l21", s(c.spatial_kernel.l)),
        ("sigma22", s(c.temporal_kernel.sigma)),
        ("l22", s(c.temporal_kernel.l)),
        ("sigma_eps11", s(b.spatial_noise_sd)),
        ("sigma_eps12", s(b.temporal_noise_sd)),
        ("sigma_eps21", s(c.spatial_noise_sd)),
        ("sigma_eps22", s(c.temporal_noise_sd)),
        ("r", s(truth.r)),
        ("a", f(&b.spatial)),
        ("b", f(&b.temporal)),
        ("c", f(&c.spatial)),
        ("d", f(&c.temporal)),
        ("eps11", f(&b.spatial_noise)),
        ("eps12", f(&b.temporal_noise)),
        ("eps21", f(&c.spatial_noise)),
        ("eps22", f(&c.temporal_noise)),
    ]
}

/// Interval coverage of every true value present in `samples`, and the
/// correlation between true and posterior-mean effect vectors.
pub fn recovery_score<T: Real, U: Real>(samples: &PosteriorSamples<T>, truth: &ChainState<U>) -> Result<RecoveryReport> {
    if samples.n_draws() == 0 {
        return Err(contract("recovery needs at least one draw"));
    }
    let mut report = RecoveryReport::default();
    for (name, values) in truth_groups(truth) {
        let Some(g) = samples.group(name) else { continue };
        if g.n_cols() != values.len() {
            return Err(contract(format!(
                "group {name} has {} columns but the truth has {}",
                g.n_cols(),
                values.len()
            )));
        }
        let mut means = Vec::with_capacity(values.len());
        for (c, &v) in values.iter().enumerate() {
            let band = Band::of(&to_f64(g.column(c))).expect("non-empty");
            means.push(band.mean);
            report.coverage.push(Coverage {
                parameter: column_name(g, c),
                truth: v,
                mean: band.mean,
                lo: band.lo,
                hi: band.hi,
                covered: band.covers(v),
            });
        }
        if matches!(name, "a" | "b" | "c" | "d") {
            report.correlations.insert(name.to_string(), pearson(&means, &values));
        }
    }
    Ok(report)
}

/// One row of a tidy trajectory or map table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TidyRow {
    pub entity: String,
    pub time: String,
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

pub fn write_tidy_csv(rows: &[TidyRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Rebuilds `φ·r·exp(η₂)` for any draw and observation from the stored
/// groups.
struct FittedDraws<'a, T> {
    alpha: &'a SampleGroup<T>,
    beta: &'a SampleGroup<T>,
    effects: [&'a SampleGroup<T>; 8],
    r: &'a SampleGroup<T>,
}

impl<'a, T: Real> FittedDraws<'a, T> {
    fn new(samples: &'a PosteriorSamples<T>, data: &PanelDataset<T>) -> Result<Self> {
        let get = |name: &str| samples.group(name).ok_or_else(|| Error::Data(format!("samples lack group {name}")));
        let (p, s, t) = (data.n_coef(), data.n_locations(), data.n_times());
        let names = ["a", "b", "c", "d", "eps11", "eps12", "eps21", "eps22"];
        let widths = [s, t, s, t, s, t, s, t];
        let mut effects = Vec::with_capacity(8);
        for (name, want) in names.iter().zip(widths) {
            let g = get(name)?;
            if g.n_cols() != want {
                return Err(contract(format!("group {name} has {} columns, the data need {want}", g.n_cols())));
            }
            effects.push(g);
        }
        let (alpha, beta) = (get("alpha")?, get("beta")?);
        if alpha.n_cols() != p || beta.n_cols() != p {
            return Err(contract(format!("coefficient groups do not have {p} columns")));
        }
        Ok(Self { alpha, beta, effects: effects.try_into().ok().expect("eight groups"), r: get("r")? })
    }

    fn value(&self, data: &PanelDataset<T>, i: usize, j: usize) -> f64 {
        let (s, t) = (data.location()[j], data.time()[j]);
        let x = data.x(j);
        let dot = |g: &SampleGroup<T>| -> f64 {
            g.draw(i).iter().zip(x).map(|(&a, &b)| a.to_f64_lossy() * b.to_f64_lossy()).sum()
        };
        let e = |k: usize, idx: usize| self.effects[k].draw(i)[idx].to_f64_lossy();
        let eta1 = dot(self.alpha) + e(0, s) + e(1, t) + e(4, s) + e(5, t);
        let eta2 = dot(self.beta) + e(2, s) + e(3, t) + e(6, s) + e(7, t);
        let r = self.r.draw(i)[0].to_f64_lossy();
        let phi = 1.0 / (1.0 + (-eta1).exp());
        phi * r * eta2.exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedCounts {
    /// posterior fitted mean and band of every observation
    pub observations: Vec<Band>,
    /// per occupied (location, time) cell: the mean over member
    /// observations, summarized across draws
    pub cells: Vec<TidyRow>,
    /// per location across all its observations
    pub locations: Vec<TidyRow>,
}

/// Posterior distribution of `E[Y] = φ·r·exp(η₂)` per observation, with
/// cell and location aggregates.
pub fn fitted_counts<T: Real>(samples: &PosteriorSamples<T>, data: &PanelDataset<T>) -> Result<FittedCounts> {
    let fd = FittedDraws::new(samples, data)?;
    let d = samples.n_draws();
    if d == 0 {
        return Err(contract("fitted counts need at least one draw"));
    }
    let n = data.n_obs();
    let mut cell_rows: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    let mut loc_rows: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for j in 0..n {
        cell_rows.entry((data.location()[j], data.time()[j])).or_default().push(j);
        loc_rows.entry(data.location()[j]).or_default().push(j);
    }
    let group_band = |rows: &[usize]| -> Band {
        let per_draw: Vec<f64> = (0..d)
            .map(|i| rows.iter().map(|&j| fd.value(data, i, j)).sum::<f64>() / rows.len() as f64)
            .collect();
        Band::of(&per_draw).expect("non-empty")
    };
    let observations = (0..n)
        .map(|j| {
            let v: Vec<f64> = (0..d).map(|i| fd.value(data, i, j)).collect();
            Band::of(&v).expect("non-empty")
        })
        .collect();
    let tidy = |entity: &str, time: &str, b: Band| TidyRow {
        entity: entity.to_string(),
        time: time.to_string(),
        mean: b.mean,
        lo: b.lo,
        hi: b.hi,
    };
    let cells = cell_rows
        .iter()
        .map(|(&(s, t), rows)| tidy(&data.location_labels()[s], &data.time_labels()[t], group_band(rows)))
        .collect();
    let locations = loc_rows
        .iter()
        .map(|(&s, rows)| tidy(&data.location_labels()[s], "all", group_band(rows)))
        .collect();
    Ok(FittedCounts { observations, cells, locations })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskRatios {
    /// one row per (group, time), including the reference group
    pub rows: Vec<TidyRow>,
    /// draws dropped because the reference group's fitted mean was zero
    pub missing: usize,
}

/// Per-time risk ratio of every group against `reference`: for each draw,
/// the unweighted mean over a group's locations of their mean fitted
/// count at that time, divided by the reference group's.
pub fn risk_ratio<T: Real>(
    samples: &PosteriorSamples<T>,
    data: &PanelDataset<T>,
    assignment: &BTreeMap<String, String>,
    reference: &str,
) -> Result<RiskRatios> {
    let fd = FittedDraws::new(samples, data)?;
    let mut group_of = Vec::with_capacity(data.n_locations());
    for label in data.location_labels() {
        let g = assignment
            .get(label)
            .ok_or_else(|| Error::Data(format!("location {label} has no group assignment")))?;
        group_of.push(g.clone());
    }
    if let Some(extra) = assignment.keys().find(|k| !data.location_labels().contains(k)) {
        return Err(Error::Data(format!("group assignment names unknown location {extra}")));
    }
    if !group_of.iter().any(|g| g == reference) {
        return Err(Error::Config(format!("reference group {reference} has no locations")));
    }
    let groups: Vec<String> = {
        let mut g = group_of.clone();
        g.sort();
        g.dedup();
        g
    };
    let gi = |name: &str| groups.iter().position(|g| g == name).expect("known group");
    let (s, t, d) = (data.n_locations(), data.n_times(), samples.n_draws());
    let mut cell_rows = vec![Vec::new(); s * t];
    for j in 0..data.n_obs() {
        cell_rows[data.location()[j] * t + data.time()[j]].push(j);
    }
    let ref_i = gi(reference);
    let mut rows = Vec::new();
    let mut missing = 0;
    for time in 0..t {
        // per draw, per group: sum of location means and their count
        let mut ratios = vec![Vec::with_capacity(d); groups.len()];
        let mut present = vec![false; groups.len()];
        for i in 0..d {
            let mut sum = vec![0.0; groups.len()];
            let mut cnt = vec![0usize; groups.len()];
            for loc in 0..s {
                let members = &cell_rows[loc * t + time];
                if members.is_empty() {
                    continue;
                }
                let m = members.iter().map(|&j| fd.value(data, i, j)).sum::<f64>() / members.len() as f64;
                let g = gi(&group_of[loc]);
                sum[g] += m;
                cnt[g] += 1;
            }
            if cnt[ref_i] == 0 {
                continue;
            }
            let base = sum[ref_i] / cnt[ref_i] as f64;
            if !(base > 0.0) {
                missing += 1;
                continue;
            }
            for g in 0..groups.len() {
                if cnt[g] > 0 {
                    present[g] = true;
                    ratios[g].push(sum[g] / cnt[g] as f64 / base);
                }
            }
        }
        for (g, name) in groups.iter().enumerate() {
            if let (true, Some(b)) = (present[g], Band::of(&ratios[g])) {
                rows.push(TidyRow { entity: name.clone(), time: data.time_labels()[time].clone(), mean: b.mean, lo: b.lo, hi: b.hi });
            }
        }
    }
    if missing > 0 {
        log::warn!("{missing} draw-time pairs had a zero reference mean and were dropped");
    }
    Ok(RiskRatios { rows, missing })
}

/// Reads a `location,group` CSV.
pub fn read_group_assignment(path: &Path) -> Result<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("{} lacks a {name} column", path.display())))
    };
    let (li, gi) = (col("location")?, col("group")?);
    let mut out = BTreeMap::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let (Some(l), Some(g)) = (rec.get(li), rec.get(gi)) else {
            return Err(Error::Parse { path: path.into(), line, message: "short record".into() });
        };
        if out.insert(l.to_string(), g.to_string()).is_some() {
            return Err(Error::Parse { path: path.into(), line, message: format!("location {l} assigned twice") });
        }
    }
    Ok(out)
}

/// Component effects of a state laid out as the sampler stores them; used
/// to build draw sets by hand.
pub fn samples_from_states<T: Real>(data: &PanelDataset<T>, states: &[ChainState<T>]) -> Result<PosteriorSamples<T>> {
    let names = |prefix: &str, n: usize| (0..n).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>();
    let locs = data.location_labels().to_vec();
    let times = data.time_labels().to_vec();
    let layout: Vec<(&str, Vec<String>)> = vec![
        ("alpha", names("alpha", data.n_coef())),
        ("beta", names("beta", data.n_coef())),
        ("r", vec!["r".into()]),
        ("a", locs.clone()),
        ("b", times.clone()),
        ("c", locs.clone()),
        ("d", times.clone()),
        ("eps11", locs.clone()),
        ("eps12", times.clone()),
        ("eps21", locs),
        ("eps22", times),
    ];
    let mut groups: Vec<SampleGroup<T>> = layout.into_iter().map(|(n, c)| SampleGroup::new(n, c)).collect();
    for st in states {
        st.check_dims(data)?;
        let (b, c): (&ComponentState<T>, &ComponentState<T>) = (&st.binary, &st.count);
        let rows: [&[T]; 11] = [
            &b.coef,
            &c.coef,
            std::slice::from_ref(&st.r),
            &b.spatial,
            &b.temporal,
            &c.spatial,
            &c.temporal,
            &b.spatial_noise,
            &b.temporal_noise,
            &c.spatial_noise,
            &c.temporal_noise,
        ];
        for (g, row) in groups.iter_mut().zip(rows) {
            g.push(row)?;
        }
    }
    Ok(PosteriorSamples { groups, acceptance: BTreeMap::new() })
}
