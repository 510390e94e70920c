use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::block::{BlockInputs, BlockSystem};
use super::conditionals::{
    at_risk_probability, update_dispersion, update_gp_variance, update_length_scale, update_noise_variance,
};
use super::samples::{PosteriorSamples, SampleGroup};
use super::{ChainConfig, Step, ADAPT_INTERVAL};
use crate::error::{contract, Error, Result};
use crate::linalg::Matrix;
use crate::model::{ChainState, ComponentState, DesignMaps, PanelDataset, PriorSpec};
use crate::nngp::{GpPrior, GpStructure, Points};
use crate::pg::{sample_pg, PgParams};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    Binary,
    Count,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Spatial,
    Temporal,
}

const PROCESSES: [(Component, Axis); 4] = [
    (Component::Binary, Axis::Spatial),
    (Component::Binary, Axis::Temporal),
    (Component::Count, Axis::Spatial),
    (Component::Count, Axis::Temporal),
];

fn process_index(c: Component, a: Axis) -> usize {
    match (c, a) {
        (Component::Binary, Axis::Spatial) => 0,
        (Component::Binary, Axis::Temporal) => 1,
        (Component::Count, Axis::Spatial) => 2,
        (Component::Count, Axis::Temporal) => 3,
    }
}

/// Proposal names in acceptance reports; the last slot is the dispersion.
const PROPOSAL_NAMES: [&str; 5] = ["l11", "l12", "l21", "l22", "r"];
const R_SLOT: usize = 4;

#[derive(Clone, Copy, Debug, Default)]
struct Tally {
    tried: usize,
    accepted: usize,
}

impl Tally {
    fn record(&mut self, accepted: bool) {
        self.tried += 1;
        self.accepted += usize::from(accepted);
    }

    fn rate(&self) -> f64 {
        if self.tried == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.tried as f64
        }
    }
}

fn effect<T: Real>(c: &ComponentState<T>, a: Axis) -> &[T] {
    match a {
        Axis::Spatial => &c.spatial,
        Axis::Temporal => &c.temporal,
    }
}

fn noise_mut<T: Real>(c: &mut ComponentState<T>, a: Axis) -> &mut Vec<T> {
    match a {
        Axis::Spatial => &mut c.spatial_noise,
        Axis::Temporal => &mut c.temporal_noise,
    }
}

fn noise_sd_mut<T: Real>(c: &mut ComponentState<T>, a: Axis) -> &mut T {
    match a {
        Axis::Spatial => &mut c.spatial_noise_sd,
        Axis::Temporal => &mut c.temporal_noise_sd,
    }
}

fn kernel_mut<T: Real>(c: &mut ComponentState<T>, a: Axis) -> &mut crate::nngp::KernelParams<T> {
    match a {
        Axis::Spatial => &mut c.spatial_kernel,
        Axis::Temporal => &mut c.temporal_kernel,
    }
}

fn standard_normals<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<T> {
    (0..n).map(|_| T::of(StandardNormal.sample(rng))).collect()
}

/// One Gibbs chain: the data, the fixed structures, and the current state.
///
/// The individual updates are public so each full conditional can be
/// exercised with everything else frozen; [`Sampler::sweep`] runs them in
/// sampler order.
pub struct Sampler<T: Real> {
    data: PanelDataset<T>,
    maps: DesignMaps,
    priors: PriorSpec<T>,
    config: ChainConfig,
    spatial: GpStructure<T>,
    temporal: GpStructure<T>,
    /// current correlation structures, by process index
    gp: Vec<GpPrior<T>>,
    system: BlockSystem<T>,
    coef_prior: [(Vec<T>, Vec<T>); 2],
    all_rows: Vec<usize>,
    state: ChainState<T>,
    proposal_sd: [f64; 5],
    window: [Tally; 5],
    retained: [Tally; 5],
    iteration: usize,
    empty_at_risk: usize,
}

impl<T: Real> Sampler<T> {
    /// Builds the structures and the default initial state.
    pub fn new<R: Rng + ?Sized>(
        data: PanelDataset<T>,
        priors: PriorSpec<T>,
        config: ChainConfig,
        rng: &mut R,
    ) -> Result<Self> {
        priors.validate()?;
        config.validate()?;
        let p = data.n_coef();
        let coef_prior = [priors.coef_binary.resolve(p)?, priors.coef_count.resolve(p)?];
        let nugget = T::of(config.nugget);
        let spatial = GpStructure::new(
            Points::planar(data.coords()),
            priors.neighbors,
            config.ordering.clone(),
            config.nngp_threshold_spatial,
            nugget,
        )?;
        let temporal = GpStructure::new(
            Points::line(data.time_points()),
            priors.neighbors,
            config.ordering.clone(),
            config.nngp_threshold_temporal,
            nugget,
        )?;
        let system = BlockSystem::new(&data, &spatial, &temporal)?;
        let mut state = ChainState::initial(&data, &priors, rng);
        if config.force_at_risk {
            state.at_risk.iter_mut().for_each(|w| *w = true);
        }
        let maps = DesignMaps::new(&data);
        let proposal_sd = [
            priors.l_proposal_sd.to_f64_lossy(),
            priors.l_proposal_sd.to_f64_lossy(),
            priors.l_proposal_sd.to_f64_lossy(),
            priors.l_proposal_sd.to_f64_lossy(),
            priors.r_proposal_sd.to_f64_lossy(),
        ];
        let mut sampler = Self {
            all_rows: (0..data.n_obs()).collect(),
            data,
            maps,
            priors,
            config,
            spatial,
            temporal,
            gp: Vec::new(),
            system,
            coef_prior,
            state: state.clone(),
            proposal_sd,
            window: Default::default(),
            retained: Default::default(),
            iteration: 0,
            empty_at_risk: 0,
        };
        sampler.set_state(state)?;
        Ok(sampler)
    }

    pub fn state(&self) -> &ChainState<T> {
        &self.state
    }

    pub fn data(&self) -> &PanelDataset<T> {
        &self.data
    }

    pub fn maps(&self) -> &DesignMaps {
        &self.maps
    }

    pub fn config(&self) -> &ChainConfig {
        &self.config
    }

    pub fn priors(&self) -> &PriorSpec<T> {
        &self.priors
    }

    pub fn block_system(&self) -> &BlockSystem<T> {
        &self.system
    }

    /// Correlation structure of one process at its current length-scale.
    pub fn process_prior(&self, c: Component, a: Axis) -> &GpPrior<T> {
        &self.gp[process_index(c, a)]
    }

    pub fn structure(&self, a: Axis) -> &GpStructure<T> {
        match a {
            Axis::Spatial => &self.spatial,
            Axis::Temporal => &self.temporal,
        }
    }

    /// Sweeps in which no observation was at risk, so the count block was
    /// drawn from its prior.
    pub fn empty_at_risk_sweeps(&self) -> usize {
        self.empty_at_risk
    }

    pub fn proposal_sds(&self) -> BTreeMap<String, f64> {
        PROPOSAL_NAMES.iter().map(|n| n.to_string()).zip(self.proposal_sd).collect()
    }

    /// Acceptance rates over the iterations after burn-in.
    pub fn acceptance_rates(&self) -> BTreeMap<String, f64> {
        let fixed = self.config.fix_length_scales;
        PROPOSAL_NAMES
            .iter()
            .zip(&self.retained)
            .enumerate()
            .filter(|(i, _)| *i == R_SLOT || !fixed)
            .map(|(_, (n, t))| (n.to_string(), t.rate()))
            .collect()
    }

    /// Replaces the whole state, rebuilding the correlation structures at
    /// its length-scales.
    pub fn set_state(&mut self, state: ChainState<T>) -> Result<()> {
        state.check_dims(&self.data)?;
        if let Some(j) = (0..self.data.n_obs()).find(|&j| self.data.y()[j] > 0 && !state.at_risk[j]) {
            return Err(contract(format!("observation {j} has a positive count but is not at risk")));
        }
        let mut gp = Vec::with_capacity(4);
        for (c, a) in PROCESSES {
            let comp = match c {
                Component::Binary => &state.binary,
                Component::Count => &state.count,
            };
            let kp = match a {
                Axis::Spatial => comp.spatial_kernel,
                Axis::Temporal => comp.temporal_kernel,
            };
            gp.push(self.structure(a).build(kp.l)?);
        }
        self.gp = gp;
        self.maps.refresh_at_risk(&state.at_risk);
        self.state = state;
        Ok(())
    }

    /// Mutable access to the Pólya-Gamma weights, for freezing them in tests.
    pub fn omega_mut(&mut self, c: Component) -> &mut Vec<T> {
        match c {
            Component::Binary => &mut self.state.omega_binary,
            Component::Count => &mut self.state.omega_count,
        }
    }

    /// Replaces counts and at-risk indicators together.
    pub fn set_counts(&mut self, y: Vec<u64>, at_risk: Vec<bool>) -> Result<()> {
        if at_risk.len() != y.len() {
            return Err(contract("counts and indicators differ in length"));
        }
        if let Some(j) = y.iter().zip(&at_risk).position(|(&y, &w)| y > 0 && !w) {
            return Err(contract(format!("observation {j} has a positive count but is not at risk")));
        }
        self.data.set_counts(y)?;
        self.maps.refresh_at_risk(&at_risk);
        self.state.at_risk = at_risk;
        Ok(())
    }

    fn component(&self, c: Component) -> &ComponentState<T> {
        match c {
            Component::Binary => &self.state.binary,
            Component::Count => &self.state.count,
        }
    }

    fn component_mut(&mut self, c: Component) -> &mut ComponentState<T> {
        match c {
            Component::Binary => &mut self.state.binary,
            Component::Count => &mut self.state.count,
        }
    }

    /// Current linear predictor of every observation for one component.
    pub fn eta(&self, c: Component) -> Vec<T> {
        let comp = self.component(c);
        (0..self.data.n_obs())
            .map(|j| comp.eta(self.data.x(j), self.data.location()[j], self.data.time()[j]))
            .collect()
    }

    fn rows(&self, c: Component) -> &[usize] {
        match c {
            Component::Binary => &self.all_rows,
            Component::Count => self.maps.at_risk(),
        }
    }

    /// `κ` by observation; entries outside the active rows are zero.
    fn kappa(&self, c: Component) -> Vec<T> {
        let n = self.data.n_obs();
        match c {
            Component::Binary => (0..n)
                .map(|j| if self.state.at_risk[j] { T::of(0.5) } else { T::of(-0.5) })
                .collect(),
            Component::Count => {
                let mut k = vec![T::zero(); n];
                for &j in self.maps.at_risk() {
                    k[j] = (T::of(self.data.y()[j] as f64) - self.state.r) * T::of(0.5);
                }
                k
            }
        }
    }

    fn omega(&self, c: Component) -> &[T] {
        match c {
            Component::Binary => &self.state.omega_binary,
            Component::Count => &self.state.omega_count,
        }
    }

    /// Step 1: at-risk indicators of the zero counts.
    pub fn update_at_risk<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        if self.config.force_at_risk {
            self.state.at_risk.iter_mut().for_each(|w| *w = true);
        } else {
            let eta1 = self.eta(Component::Binary);
            let eta2 = self.eta(Component::Count);
            let r = self.state.r.to_f64_lossy();
            for j in 0..self.data.n_obs() {
                self.state.at_risk[j] = if self.data.y()[j] > 0 {
                    true
                } else {
                    let p = at_risk_probability(eta1[j].to_f64_lossy(), eta2[j].to_f64_lossy(), r);
                    rng.random::<f64>() < p
                };
            }
        }
        self.maps.refresh_at_risk(&self.state.at_risk);
    }

    /// Pólya-Gamma weights of the active rows of one component.
    pub fn draw_omega<R: Rng + ?Sized>(&mut self, c: Component, rng: &mut R) -> Result<()> {
        let eta = self.eta(c);
        let r = self.state.r;
        let rows: Vec<usize> = self.rows(c).to_vec();
        for j in rows {
            let b = match c {
                Component::Binary => T::one(),
                Component::Count => T::of(self.data.y()[j] as f64) + r,
            };
            let w = sample_pg(PgParams::new(b, eta[j])?, rng);
            self.omega_mut(c)[j] = w;
        }
        Ok(())
    }

    fn assemble(&mut self, c: Component) -> Result<Vec<T>> {
        let kappa = self.kappa(c);
        let comp = match c {
            Component::Binary => &self.state.binary,
            Component::Count => &self.state.count,
        };
        let offset: Vec<T> = (0..self.data.n_obs())
            .map(|j| comp.spatial_noise[self.data.location()[j]] + comp.temporal_noise[self.data.time()[j]])
            .collect();
        let ci = match c {
            Component::Binary => 0,
            Component::Count => 1,
        };
        let rows: Vec<usize> = self.rows(c).to_vec();
        let inputs = BlockInputs {
            rows: &rows,
            omega: match c {
                Component::Binary => &self.state.omega_binary,
                Component::Count => &self.state.omega_count,
            },
            kappa: &kappa,
            offset: &offset,
            coef_mean: &self.coef_prior[ci].0,
            coef_var: &self.coef_prior[ci].1,
            spatial: (&self.gp[process_index(c, Axis::Spatial)], comp.spatial_kernel.sigma),
            temporal: (&self.gp[process_index(c, Axis::Temporal)], comp.temporal_kernel.sigma),
        };
        self.system.assemble(&self.data, &inputs)
    }

    /// Dense posterior precision `Q` and canonical mean `h` of the joint
    /// coefficient and effect block given the current weights.
    pub fn block_posterior(&mut self, c: Component) -> Result<(Matrix<T>, Vec<T>)> {
        let h = self.assemble(c)?;
        Ok((self.system.precision_dense(), h))
    }

    /// Joint Gaussian draw of `[coef; spatial; temporal]` given the weights.
    pub fn draw_block<R: Rng + ?Sized>(&mut self, c: Component, rng: &mut R) -> Result<()> {
        let h = self.assemble(c)?;
        let factor = self.system.factor()?;
        let z = standard_normals(h.len(), rng);
        let v = factor.sample_gaussian(&h, &z);
        let (coef, spatial, temporal) = self.system.split(&v);
        let (coef, spatial, temporal) = (coef.to_vec(), spatial.to_vec(), temporal.to_vec());
        let comp = self.component_mut(c);
        comp.coef = coef;
        comp.spatial = spatial;
        comp.temporal = temporal;
        Ok(())
    }

    /// Steps 2 and 9: weights, then the joint block.
    pub fn update_block<R: Rng + ?Sized>(&mut self, c: Component, rng: &mut R) -> Result<()> {
        if c == Component::Count && self.maps.at_risk().is_empty() {
            self.empty_at_risk += 1;
            log::debug!("no observation at risk; count block drawn from its prior");
        }
        self.draw_omega(c, rng)?;
        self.draw_block(c, rng)
    }

    /// Steps 3, 4, 10, 11: independent normal draws per location or time.
    pub fn update_noise<R: Rng + ?Sized>(&mut self, c: Component, a: Axis, rng: &mut R) -> Result<()> {
        let eta = self.eta(c);
        let kappa = self.kappa(c);
        let index = match a {
            Axis::Spatial => self.data.location(),
            Axis::Temporal => self.data.time(),
        };
        let len = match a {
            Axis::Spatial => self.data.n_locations(),
            Axis::Temporal => self.data.n_times(),
        };
        let comp = self.component(c);
        let (current, sd) = match a {
            Axis::Spatial => (&comp.spatial_noise, comp.spatial_noise_sd),
            Axis::Temporal => (&comp.temporal_noise, comp.temporal_noise_sd),
        };
        let mut prec = vec![T::one() / (sd * sd); len];
        let mut lin = vec![T::zero(); len];
        let omega = self.omega(c);
        for &j in self.rows(c) {
            let k = index[j];
            prec[k] += omega[j];
            lin[k] += kappa[j] - omega[j] * (eta[j] - current[k]);
        }
        let z: Vec<T> = standard_normals(len, rng);
        let draw: Vec<T> = (0..len).map(|k| lin[k] / prec[k] + z[k] / prec[k].sqrt()).collect();
        if draw.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite noise draw".into()));
        }
        *noise_mut(self.component_mut(c), a) = draw;
        Ok(())
    }

    /// Steps 5, 6, 12, 13: Metropolis on the length-scale, then the
    /// conjugate draw of the GP variance.
    pub fn update_process<R: Rng + ?Sized>(&mut self, c: Component, a: Axis, rng: &mut R) -> Result<()> {
        let pi = process_index(c, a);
        let (a_l, b_l, a_s, b_s) = match a {
            Axis::Spatial => (self.priors.a_l1, self.priors.b_l1, self.priors.a_sigma1, self.priors.b_sigma1),
            Axis::Temporal => (self.priors.a_l2, self.priors.b_l2, self.priors.a_sigma2, self.priors.b_sigma2),
        };
        let w = effect(self.component(c), a).to_vec();
        if !self.config.fix_length_scales {
            let kp = match a {
                Axis::Spatial => self.component(c).spatial_kernel,
                Axis::Temporal => self.component(c).temporal_kernel,
            };
            let structure = match a {
                Axis::Spatial => &self.spatial,
                Axis::Temporal => &self.temporal,
            };
            let mv = update_length_scale(
                &w,
                kp.sigma,
                kp.l,
                &self.gp[pi],
                structure,
                (a_l, b_l),
                T::of(self.proposal_sd[pi]),
                rng,
            )?;
            self.record(pi, mv.accepted);
            if let Some(prior) = mv.prior {
                self.gp[pi] = prior;
                kernel_mut(self.component_mut(c), a).l = mv.l;
            }
        }
        let s2 = update_gp_variance(&w, &self.gp[pi], a_s, b_s, rng)?;
        kernel_mut(self.component_mut(c), a).sigma = s2.sqrt();
        Ok(())
    }

    /// Steps 7, 8, 14, 15.
    pub fn update_noise_variance<R: Rng + ?Sized>(&mut self, c: Component, a: Axis, rng: &mut R) -> Result<()> {
        let (ae, be) = (self.priors.a_eps, self.priors.b_eps);
        let comp = self.component_mut(c);
        let s2 = update_noise_variance(noise_mut(comp, a), ae, be, rng)?;
        *noise_sd_mut(comp, a) = s2.sqrt();
        Ok(())
    }

    /// Metropolis update of the dispersion on the at-risk counts.
    pub fn update_dispersion<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let eta = self.eta(Component::Count);
        let rows = self.maps.at_risk();
        let y: Vec<u64> = rows.iter().map(|&j| self.data.y()[j]).collect();
        let e: Vec<f64> = rows.iter().map(|&j| eta[j].to_f64_lossy()).collect();
        let mv = update_dispersion(
            &y,
            &e,
            self.state.r.to_f64_lossy(),
            self.priors.r_max.map(|v| v.to_f64_lossy()),
            self.proposal_sd[R_SLOT],
            rng,
        );
        self.record(R_SLOT, mv.accepted);
        self.state.r = T::of(mv.r);
    }

    fn record(&mut self, slot: usize, accepted: bool) {
        if self.iteration > self.config.burn_in {
            self.retained[slot].record(accepted);
        } else {
            self.window[slot].record(accepted);
        }
    }

    fn run_step<R: Rng + ?Sized>(&mut self, step: Step, rng: &mut R) -> Result<()> {
        use Axis::*;
        use Component::*;
        match step {
            Step::AtRisk => {
                self.update_at_risk(rng);
                Ok(())
            }
            Step::BinaryBlock => self.update_block(Binary, rng),
            Step::BinarySpatialNoise => self.update_noise(Binary, Spatial, rng),
            Step::BinaryTemporalNoise => self.update_noise(Binary, Temporal, rng),
            Step::BinarySpatialProcess => self.update_process(Binary, Spatial, rng),
            Step::BinaryTemporalProcess => self.update_process(Binary, Temporal, rng),
            Step::BinarySpatialNoiseVariance => self.update_noise_variance(Binary, Spatial, rng),
            Step::BinaryTemporalNoiseVariance => self.update_noise_variance(Binary, Temporal, rng),
            Step::CountBlock => self.update_block(Count, rng),
            Step::CountSpatialNoise => self.update_noise(Count, Spatial, rng),
            Step::CountTemporalNoise => self.update_noise(Count, Temporal, rng),
            Step::CountSpatialProcess => self.update_process(Count, Spatial, rng),
            Step::CountTemporalProcess => self.update_process(Count, Temporal, rng),
            Step::CountSpatialNoiseVariance => self.update_noise_variance(Count, Spatial, rng),
            Step::CountTemporalNoiseVariance => self.update_noise_variance(Count, Temporal, rng),
            Step::Dispersion => {
                self.update_dispersion(rng);
                Ok(())
            }
        }
    }

    /// One full sweep, reporting each update to `trace` as it starts.
    pub fn sweep_traced<R: Rng + ?Sized>(&mut self, rng: &mut R, trace: &mut dyn FnMut(Step)) -> Result<()> {
        self.iteration += 1;
        for step in Step::ALL {
            trace(step);
            self.run_step(step, rng).map_err(|e| Error::Sampler {
                iteration: self.iteration,
                step: step.name(),
                source: Box::new(e),
            })?;
        }
        if self.config.adapt_proposals && self.iteration <= self.config.burn_in && self.iteration % ADAPT_INTERVAL == 0 {
            self.adapt();
        }
        Ok(())
    }

    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        self.sweep_traced(rng, &mut |_| {})
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    fn adapt(&mut self) {
        for (sd, tally) in self.proposal_sd.iter_mut().zip(self.window.iter_mut()) {
            if tally.tried > 0 {
                let rate = tally.rate();
                if rate < 0.2 {
                    *sd *= 0.5;
                } else if rate > 0.5 {
                    *sd *= 2.0;
                }
            }
            *tally = Tally::default();
        }
    }

    fn empty_samples(&self) -> PosteriorSamples<T> {
        let d = &self.data;
        let names = |prefix: &str, n: usize| (0..n).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>();
        let locs = d.location_labels().to_vec();
        let times = d.time_labels().to_vec();
        let mut groups = vec![
            SampleGroup::new("alpha", names("alpha", d.n_coef())),
            SampleGroup::new("beta", names("beta", d.n_coef())),
        ];
        for name in [
            "sigma11",
            "l11",
            "sigma12",
            "l12",
            "sigma21",
            "l21",
            "sigma22",
            "l22",
            "sigma_eps11",
            "sigma_eps12",
            "sigma_eps21",
            "sigma_eps22",
            "r",
        ] {
            groups.push(SampleGroup::new(name, vec![name.to_string()]));
        }
        for (name, labels) in [
            ("a", &locs),
            ("b", &times),
            ("c", &locs),
            ("d", &times),
            ("eps11", &locs),
            ("eps12", &times),
            ("eps21", &locs),
            ("eps22", &times),
        ] {
            groups.push(SampleGroup::new(name, labels.clone()));
        }
        if self.config.store_eta {
            groups.push(SampleGroup::new("eta1", names("eta1_", d.n_obs())));
            groups.push(SampleGroup::new("eta2", names("eta2_", d.n_obs())));
        }
        PosteriorSamples { groups, acceptance: BTreeMap::new() }
    }

    fn store(&self, out: &mut PosteriorSamples<T>) -> Result<()> {
        let (bin, cnt) = (&self.state.binary, &self.state.count);
        let mut rows: Vec<Vec<T>> = vec![
            bin.coef.clone(),
            cnt.coef.clone(),
            vec![bin.spatial_kernel.sigma],
            vec![bin.spatial_kernel.l],
            vec![bin.temporal_kernel.sigma],
            vec![bin.temporal_kernel.l],
            vec![cnt.spatial_kernel.sigma],
            vec![cnt.spatial_kernel.l],
            vec![cnt.temporal_kernel.sigma],
            vec![cnt.temporal_kernel.l],
            vec![bin.spatial_noise_sd],
            vec![bin.temporal_noise_sd],
            vec![cnt.spatial_noise_sd],
            vec![cnt.temporal_noise_sd],
            vec![self.state.r],
            bin.spatial.clone(),
            bin.temporal.clone(),
            cnt.spatial.clone(),
            cnt.temporal.clone(),
            bin.spatial_noise.clone(),
            bin.temporal_noise.clone(),
            cnt.spatial_noise.clone(),
            cnt.temporal_noise.clone(),
        ];
        if self.config.store_eta {
            rows.push(self.eta(Component::Binary));
            rows.push(self.eta(Component::Count));
        }
        for (g, row) in out.groups.iter_mut().zip(&rows) {
            g.push(row)?;
        }
        Ok(())
    }

    /// Runs the configured number of sweeps and collects retained draws.
    pub fn run<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<PosteriorSamples<T>> {
        let mut out = self.empty_samples();
        let (burn, thin) = (self.config.burn_in, self.config.thin);
        while self.iteration < self.config.n_iter {
            self.sweep(rng)?;
            let it = self.iteration;
            if it > burn && (it - burn) % thin == 0 {
                self.store(&mut out)?;
            }
        }
        out.acceptance = self.acceptance_rates();
        if self.empty_at_risk > 0 {
            log::warn!("{} sweeps had no at-risk observations", self.empty_at_risk);
        }
        Ok(out)
    }
}
