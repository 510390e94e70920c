use std::path::{Path, PathBuf};

use zinb_nngp::config::RunConfig;
use zinb_nngp::gibbs::{chain_rng, PosteriorSamples, Sampler, SampleGroup};
use zinb_nngp::model::{ingest_csv, write_csv, ChainState, CsvSchema, PanelDataset};
use zinb_nngp::simgen::{simulate_dataset, SimDesign};
use zinb_nngp::summarize::{
    fitted_counts, read_group_assignment, recovery_score, risk_ratio, summarize_samples, write_tidy_csv,
};

use crate::manifest::RunManifest;
use crate::{Failure, FitArgs, Kind, SimulateArgs, SummarizeArgs};

type Outcome = Result<(), Failure>;

/// Runs `body` and writes the manifest whatever happens, as long as the
/// output directory can be created.
fn with_manifest(command: &str, out: &Path, body: impl FnOnce(&mut RunManifest) -> Outcome) -> Outcome {
    let mut manifest = RunManifest::new(command);
    let result = body(&mut manifest);
    if let Err(e) = std::fs::create_dir_all(out) {
        log::error!("cannot create {}: {e}", out.display());
        return result.and(Err(Failure::new(Kind::Other, format!("cannot create {}: {e}", out.display()))));
    }
    manifest.finish(result.as_ref().err().map(Failure::record));
    manifest.write(out)?;
    result
}

fn create_out(out: &Path) -> Outcome {
    std::fs::create_dir_all(out)
        .map_err(|e| Failure::new(Kind::Other, format!("cannot create output directory {}: {e}", out.display())))
}

fn load_config(path: Option<&Path>) -> Result<RunConfig<f64>, Failure> {
    match path {
        Some(p) => Ok(RunConfig::load(p)?),
        None => Ok(RunConfig::default()),
    }
}

fn json<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

fn write_file(path: &Path, text: String) -> Result<PathBuf, Failure> {
    std::fs::write(path, text)
        .map_err(|e| Failure::new(Kind::Other, format!("writing {}: {e}", path.display())))?;
    Ok(path.to_path_buf())
}

pub fn simulate(args: &SimulateArgs, out: &Path) -> Outcome {
    with_manifest("simulate", out, |m| {
        let cfg = load_config(args.config.as_deref())?;
        let mut design = match &cfg.design {
            Some(d) => d.clone(),
            None => SimDesign::preset(&args.preset)?,
        };
        if let Some(f) = args.scale {
            design = design.scaled(f)?;
        }
        if let Some(seed) = args.seed {
            design.seed = seed;
        }
        design.validate()?;
        let n_cov = design.binary.coef.len() - 1;
        let mut schema = cfg.schema.clone();
        if schema.covariates.len() != n_cov {
            if args.config.is_some() && schema != CsvSchema::default() {
                return Err(Failure::new(
                    Kind::Config,
                    format!("schema names {} covariates but the design has {n_cov}", schema.covariates.len()),
                ));
            }
            schema.covariates = (1..=n_cov).map(|k| format!("x{k}")).collect();
        }
        m.seed = Some(design.seed);
        m.config = serde_json::json!({ "design": json(&design), "schema": json(&schema) });

        let (data, truth) = simulate_dataset::<f64>(&design)?;
        create_out(out)?;
        let data_path = out.join("data.csv");
        write_csv(&data, &schema, &data_path)?;
        let truth_path = write_file(&out.join("truth.json"), serde_json::to_string_pretty(&truth).map_err(zinb_nngp::Error::from)? + "\n")?;
        let zeros = data.y().iter().filter(|&&y| y == 0).count();
        m.notes.insert("n_obs".into(), data.n_obs().into());
        m.notes.insert("n_locations".into(), data.n_locations().into());
        m.notes.insert("n_times".into(), data.n_times().into());
        m.notes.insert("zero_fraction".into(), (zeros as f64 / data.n_obs().max(1) as f64).into());
        m.record(out, &[data_path, truth_path])?;
        Ok(())
    })
}

pub fn fit(args: &FitArgs, out: &Path) -> Outcome {
    with_manifest("fit", out, |m| {
        let mut cfg = load_config(args.config.as_deref())?;
        let chain = &mut cfg.chain;
        if let Some(v) = args.seed {
            chain.seed = v;
        }
        if let Some(v) = args.iters {
            chain.n_iter = v;
        }
        if let Some(v) = args.burn {
            chain.burn_in = v;
        }
        if let Some(v) = args.thin {
            chain.thin = v;
        }
        cfg.validate()?;
        if args.chains == 0 {
            return Err(Failure::new(Kind::Config, "--chains must be at least 1"));
        }
        m.seed = Some(cfg.chain.seed);
        m.config = json(&cfg);
        m.notes.insert("chains".into(), args.chains.into());
        m.notes.insert("data".into(), args.data.display().to_string().into());
        let data: PanelDataset<f64> = ingest_csv(&args.data, &cfg.schema)?;
        m.notes.insert("n_obs".into(), data.n_obs().into());
        create_out(out)?;

        let results: Vec<zinb_nngp::Result<PosteriorSamples<f64>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..args.chains)
                .map(|k| {
                    let (data, cfg) = (data.clone(), &cfg);
                    scope.spawn(move || {
                        let mut rng = chain_rng(cfg.chain.seed, k as u64);
                        let mut sampler = Sampler::new(data, cfg.priors.clone(), cfg.chain.clone(), &mut rng)?;
                        sampler.run(&mut rng)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("chain worker panicked")).collect()
        });

        let mut first_failure = None;
        for (k, res) in results.into_iter().enumerate() {
            let label = format!("chain-{}", k + 1);
            match res {
                Ok(samples) => {
                    let files = samples.write_dir(&out.join(&label))?;
                    m.acceptance.insert(label, samples.acceptance.clone());
                    m.record(out, &files)?;
                }
                Err(e) => {
                    log::error!("{label} failed: {e}");
                    if first_failure.is_none() {
                        let mut f = Failure::from(e);
                        f.chain = Some(k + 1);
                        first_failure = Some(f);
                    }
                }
            }
        }
        first_failure.map_or(Ok(()), Err)
    })
}

fn has_csv(dir: &Path) -> bool {
    std::fs::read_dir(dir)
        .map(|it| it.filter_map(|e| e.ok()).any(|e| e.path().extension().is_some_and(|x| x == "csv")))
        .unwrap_or(false)
}

/// Reads one chain directory, or pools every `chain-*` subdirectory.
fn load_samples(dir: &Path) -> Result<PosteriorSamples<f64>, Failure> {
    if has_csv(dir) {
        return Ok(PosteriorSamples::read_dir(dir)?);
    }
    let mut chains: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Failure::new(Kind::Data, format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && p.file_name().is_some_and(|n| n.to_string_lossy().starts_with("chain-")))
        .collect();
    chains.sort_by_key(|p| {
        let name = p.file_name().unwrap_or_default().to_string_lossy().into_owned();
        (name["chain-".len()..].parse::<usize>().unwrap_or(usize::MAX), name)
    });
    if chains.is_empty() {
        return Err(Failure::new(Kind::Data, format!("no sample files or chain directories in {}", dir.display())));
    }
    let parts = chains.iter().map(|c| PosteriorSamples::read_dir(c)).collect::<zinb_nngp::Result<Vec<_>>>()?;
    pool(parts)
}

fn pool(parts: Vec<PosteriorSamples<f64>>) -> Result<PosteriorSamples<f64>, Failure> {
    let mut it = parts.into_iter();
    let mut acc = it.next().expect("at least one chain");
    let mut n_chains = 1.0;
    for part in it {
        let same = part.groups.len() == acc.groups.len()
            && part.groups.iter().zip(&acc.groups).all(|(a, b)| a.name() == b.name() && a.columns() == b.columns());
        if !same {
            return Err(Failure::new(Kind::Data, "chains have different parameter groups"));
        }
        let mut groups = Vec::with_capacity(acc.groups.len());
        for (a, b) in acc.groups.iter().zip(&part.groups) {
            let mut g = SampleGroup::new(a.name(), a.columns().to_vec());
            for src in [a, b] {
                for i in 0..src.n_draws() {
                    g.push(src.draw(i))?;
                }
            }
            groups.push(g);
        }
        for (k, v) in &part.acceptance {
            *acc.acceptance.entry(k.clone()).or_insert(0.0) += v;
        }
        acc.groups = groups;
        n_chains += 1.0;
    }
    for v in acc.acceptance.values_mut() {
        *v /= n_chains;
    }
    Ok(acc)
}

fn same_dir(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

pub fn summarize(args: &SummarizeArgs, out: &Path) -> Outcome {
    with_manifest("summarize", out, |m| {
        if same_dir(out, &args.samples) {
            return Err(Failure::new(Kind::Config, "--out must differ from --samples; summaries would be read back as draws"));
        }
        let cfg = load_config(args.config.as_deref())?;
        m.config = json(&cfg.schema);
        if (args.fitted || args.rr.is_some()) && args.data.is_none() {
            return Err(Failure::new(Kind::Config, "--fitted and --rr need --data"));
        }
        let samples = load_samples(&args.samples)?;
        m.notes.insert("n_draws".into(), samples.n_draws().into());
        m.acceptance.insert("pooled".into(), samples.acceptance.clone());
        let truth: Option<ChainState<f64>> = match &args.truth {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Failure::new(Kind::Data, format!("cannot read {}: {e}", p.display())))?;
                Some(serde_json::from_str(&text).map_err(|e| Failure::new(Kind::Data, format!("{}: {e}", p.display())))?)
            }
            None => None,
        };
        let data: Option<PanelDataset<f64>> = args.data.as_ref().map(|p| ingest_csv(p, &cfg.schema)).transpose()?;
        let assignment = args.rr.as_ref().map(|p| read_group_assignment(p)).transpose()?;

        let table = summarize_samples(&samples)?;
        let recovery = truth.as_ref().map(|t| recovery_score(&samples, t)).transpose()?;
        let fitted = match (&data, args.fitted) {
            (Some(d), true) => Some(fitted_counts(&samples, d)?),
            _ => None,
        };
        let rr = match (&data, &assignment) {
            (Some(d), Some(a)) => {
                let reference = match &args.reference {
                    Some(r) => r.clone(),
                    None => a.values().min().cloned().unwrap_or_default(),
                };
                m.notes.insert("reference_group".into(), reference.clone().into());
                Some(risk_ratio(&samples, d, a, &reference)?)
            }
            _ => None,
        };

        create_out(out)?;
        let mut files = Vec::new();
        let p = out.join("summary.csv");
        table.write_csv(&p)?;
        files.push(p);
        files.push(write_file(&out.join("summary.json"), serde_json::to_string_pretty(&table.digest()).map_err(zinb_nngp::Error::from)? + "\n")?);
        if let Some(rep) = &recovery {
            let p = out.join("recovery.csv");
            rep.write_csv(&p)?;
            files.push(p);
            m.notes.insert("effect_correlations".into(), json(&rep.correlations));
            let covered = rep.coverage.iter().filter(|c| c.covered).count();
            m.notes.insert("coverage".into(), format!("{covered}/{}", rep.coverage.len()).into());
        }
        if let (Some(f), Some(d)) = (&fitted, &data) {
            let p = out.join("fitted_observations.csv");
            let mut w = csv::Writer::from_path(&p).map_err(zinb_nngp::Error::from)?;
            w.write_record(["observation", "location", "time", "observed", "mean", "lo", "hi"]).map_err(zinb_nngp::Error::from)?;
            for (j, b) in f.observations.iter().enumerate() {
                w.write_record([
                    j.to_string(),
                    d.location_labels()[d.location()[j]].clone(),
                    d.time_labels()[d.time()[j]].clone(),
                    d.y()[j].to_string(),
                    b.mean.to_string(),
                    b.lo.to_string(),
                    b.hi.to_string(),
                ])
                .map_err(zinb_nngp::Error::from)?;
            }
            w.flush().map_err(|e| Failure::new(Kind::Other, format!("writing {}: {e}", p.display())))?;
            files.push(p);
            for (name, rows) in [("fitted_cells.csv", &f.cells), ("fitted_locations.csv", &f.locations)] {
                let p = out.join(name);
                write_tidy_csv(rows, &p)?;
                files.push(p);
            }
        }
        if let Some(rr) = &rr {
            let p = out.join("risk_ratio.csv");
            write_tidy_csv(&rr.rows, &p)?;
            files.push(p);
            m.notes.insert("risk_ratio_missing_draws".into(), rr.missing.into());
        }
        m.record(out, &files)?;
        Ok(())
    })
}
