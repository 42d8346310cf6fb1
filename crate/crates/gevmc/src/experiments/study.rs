//! Replicated simulation studies: bias and MSE of marginal posterior modes.
//!
//! Seeds follow one rule, fixed for all versions: the data of replication
//! `r` at sample size `n` of design `d` come from
//! `derive_seed(master, [0, d, n, r])`, and sampler `s` (1 = MH, 2 = HMC,
//! 3 = RMHMC) fitting them uses `derive_seed(master, [s, d, n, r])`.
//! Replications run in parallel and are reduced in index order, so thread
//! count and scheduling never change a result.

use std::time::Instant;

use gevmc_core::ar::DEFAULT_BURN_IN;
use gevmc_core::rng::derive_seed;
use gevmc_core::{
    bias_mse, gev_sample, map_estimate, simulate_gev_ar, stationarity_check, summarize, GevArModel,
    GevParams, MapOptions, SamplerKind, StepSizePilot, TimeSeries,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit, ModelSpec, MomentSource, Posterior, SamplerSpec};
use crate::error::{AppError, Result};

/// The built-in GEV-AR models M1, M2 and M3, all with `GEV(0, 1, 0.3)`
/// innovations.
pub fn study_models() -> Vec<(String, GevArModel)> {
    let m = |theta: &[f64]| {
        GevArModel::new(-1.0, theta.to_vec(), 1.0, 0.3).expect("valid built-in model")
    };
    vec![
        ("M1".to_string(), m(&[0.8])),
        ("M2".to_string(), m(&[0.9, -0.8])),
        ("M3".to_string(), m(&[-1.56, -0.55, 0.04])),
    ]
}

/// Starting point of every chain in a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitRule {
    /// The origin of the sampling space, i.e. the centre of the iid prior.
    PriorCentre,
    /// [`Posterior::moment_init`] of the replication's data.
    Moments,
    /// The posterior mode, searched for from the moment-based point.
    Map,
}

/// One data-generating model and the sample sizes it is studied at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub label: String,
    pub model: ModelSpec,
    /// Natural-scale truth in chain column order.
    pub truth: Vec<f64>,
    pub sample_sizes: Vec<usize>,
}

impl Design {
    fn simulate(&self, n: usize, seed: u64) -> Result<TimeSeries> {
        match self.model {
            ModelSpec::Gev => {
                let p = GevParams::new(self.truth[0], self.truth[1], self.truth[2])?;
                Ok(TimeSeries::new(gev_sample(&p, n, seed))?)
            }
            ModelSpec::GevAr { .. } => {
                let m = GevArModel::from_slice(&self.truth)?;
                Ok(simulate_gev_ar(&m, n, seed, DEFAULT_BURN_IN)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub name: String,
    pub replications: usize,
    pub master_seed: u64,
    pub designs: Vec<Design>,
    /// Seeds in these specs are ignored; each replication derives its own.
    pub samplers: Vec<SamplerSpec>,
    pub init: InitRule,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(AppError::Usage(
                "a study needs at least one replication".into(),
            ));
        }
        if self.samplers.is_empty() || self.designs.is_empty() {
            return Err(AppError::Usage(
                "a study needs at least one design and one sampler".into(),
            ));
        }
        for d in &self.designs {
            if d.truth.len() != d.model.dim() {
                return Err(AppError::Usage(format!(
                    "design {}: truth has the wrong dimension",
                    d.label
                )));
            }
            if let ModelSpec::GevAr { p, .. } = d.model {
                let m = GevArModel::from_slice(&d.truth)?;
                if !stationarity_check(m.theta()) {
                    return Err(AppError::Model(gevmc_core::Error::NonStationary));
                }
                if d.sample_sizes.iter().any(|&n| n <= p + 1) {
                    return Err(AppError::Usage(format!(
                        "design {}: sample sizes must exceed p + 1",
                        d.label
                    )));
                }
            }
            if d.sample_sizes.is_empty() || d.sample_sizes.contains(&0) {
                return Err(AppError::Usage(format!(
                    "design {}: invalid sample sizes",
                    d.label
                )));
            }
        }
        for s in &self.samplers {
            if s.burn_in >= s.iterations {
                return Err(AppError::Usage(
                    "burn-in must be smaller than the number of iterations".into(),
                ));
            }
        }
        Ok(())
    }
}

fn sampler_code(kind: SamplerKind) -> u64 {
    match kind {
        SamplerKind::Rwm => 1,
        SamplerKind::Hmc => 2,
        SamplerKind::Rmhmc => 3,
        SamplerKind::External => 4,
    }
}

/// Bias and MSE for one (design, n, sampler, parameter).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub design: String,
    pub n: usize,
    pub sampler: SamplerKind,
    pub parameter: String,
    pub truth: f64,
    /// `None` when every replication of the cell failed.
    pub bias: Option<f64>,
    pub mse: Option<f64>,
    pub replications: usize,
    pub failures: usize,
    /// Sampler transitions over all successful replications, burn-in included.
    pub transitions: usize,
    pub divergent: usize,
}

impl CellResult {
    /// Share of transitions that did not diverge; 1 for samplers without
    /// trajectories.
    pub fn divergence_free_fraction(&self) -> f64 {
        if self.transitions == 0 {
            1.0
        } else {
            1.0 - self.divergent as f64 / self.transitions as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub design: String,
    pub n: usize,
    pub sampler: SamplerKind,
    pub replication: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub cells: Vec<CellResult>,
    pub failures: Vec<FailureRecord>,
}

/// Wall-clock seconds per (design, n, sampler) cell, summed over
/// replications. Kept apart from [`StudyResult`], which is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyTimings {
    pub cells: Vec<CellTiming>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellTiming {
    pub design: String,
    pub n: usize,
    pub sampler: SamplerKind,
    pub seconds: f64,
}

struct FitOutcome {
    estimates: std::result::Result<Vec<f64>, String>,
    transitions: usize,
    divergent: usize,
    seconds: f64,
}

/// The data set of replication `r` at sample size `n` of design `d`.
pub fn study_dataset(config: &StudyConfig, d: usize, n: usize, r: usize) -> Result<TimeSeries> {
    config.designs[d].simulate(
        n,
        derive_seed(config.master_seed, &[0, d as u64, n as u64, r as u64]),
    )
}

fn replicate(config: &StudyConfig, d: usize, n: usize, r: usize) -> Vec<FitOutcome> {
    let design = &config.designs[d];
    let data = study_dataset(config, d, n, r).and_then(|data| Posterior::new(&design.model, &data));
    config
        .samplers
        .iter()
        .map(|spec| {
            let start = Instant::now();
            let run = || -> Result<(Vec<f64>, usize, usize)> {
                let post = data
                    .as_ref()
                    .map_err(|e| AppError::Numerical(e.to_string()))?;
                let mut spec = spec.clone();
                spec.seed = derive_seed(
                    config.master_seed,
                    &[sampler_code(spec.kind), d as u64, n as u64, r as u64],
                );
                let init = match config.init {
                    InitRule::PriorCentre => vec![0.0; design.model.dim()],
                    InitRule::Moments => post.moment_init(),
                    InitRule::Map => {
                        map_estimate(post.target(), &post.moment_init(), &MapOptions::default())?
                            .point
                    }
                };
                let out = fit(post, &spec, &init)?;
                let chain = out.chain;
                let modes = (0..chain.dim())
                    .map(|j| {
                        summarize(&chain.column(j), 0.95)?.mode.ok_or(
                            gevmc_core::Error::ChainTooShort {
                                len: chain.len(),
                                needed: 100,
                            },
                        )
                    })
                    .collect::<gevmc_core::Result<Vec<f64>>>()?;
                let transitions = if spec.kind == SamplerKind::Rwm {
                    0
                } else {
                    spec.iterations
                };
                Ok((modes, transitions, chain.divergences()))
            };
            let res = run();
            let seconds = start.elapsed().as_secs_f64();
            match res {
                Ok((est, t, dv)) => FitOutcome {
                    estimates: Ok(est),
                    transitions: t,
                    divergent: dv,
                    seconds,
                },
                Err(e) => FitOutcome {
                    estimates: Err(e.to_string()),
                    transitions: 0,
                    divergent: 0,
                    seconds,
                },
            }
        })
        .collect()
}

/// Runs every (design, n, replication) and aggregates per cell.
/// Replication failures are excluded from bias and MSE and listed.
pub fn run_study(config: &StudyConfig) -> Result<(StudyResult, StudyTimings)> {
    config.validate()?;
    let mut jobs = Vec::new();
    for (d, design) in config.designs.iter().enumerate() {
        for &n in &design.sample_sizes {
            for r in 0..config.replications {
                jobs.push((d, n, r));
            }
        }
    }
    let outcomes: Vec<Vec<FitOutcome>> = jobs
        .par_iter()
        .map(|&(d, n, r)| replicate(config, d, n, r))
        .collect();

    let mut cells = Vec::new();
    let mut failures = Vec::new();
    let mut timings = Vec::new();
    let m = config.replications;
    let mut k = 0;
    for design in &config.designs {
        let names = design.model.param_names();
        for &n in &design.sample_sizes {
            let block = &outcomes[k..k + m];
            k += m;
            for (s, spec) in config.samplers.iter().enumerate() {
                let mut estimates = vec![Vec::new(); names.len()];
                let (mut transitions, mut divergent, mut failed, mut seconds) = (0, 0, 0, 0.0);
                for (r, rep) in block.iter().enumerate() {
                    let o = &rep[s];
                    seconds += o.seconds;
                    match &o.estimates {
                        Ok(est) => {
                            for (j, v) in est.iter().enumerate() {
                                estimates[j].push(*v);
                            }
                            transitions += o.transitions;
                            divergent += o.divergent;
                        }
                        Err(reason) => {
                            failed += 1;
                            failures.push(FailureRecord {
                                design: design.label.clone(),
                                n,
                                sampler: spec.kind,
                                replication: r,
                                reason: reason.clone(),
                            });
                        }
                    }
                }
                for (j, name) in names.iter().enumerate() {
                    let bm = bias_mse(&estimates[j], design.truth[j]).ok();
                    cells.push(CellResult {
                        design: design.label.clone(),
                        n,
                        sampler: spec.kind,
                        parameter: name.clone(),
                        truth: design.truth[j],
                        bias: bm.map(|b| b.0),
                        mse: bm.map(|b| b.1),
                        replications: m - failed,
                        failures: failed,
                        transitions,
                        divergent,
                    });
                }
                timings.push(CellTiming {
                    design: design.label.clone(),
                    n,
                    sampler: spec.kind,
                    seconds,
                });
            }
        }
    }
    Ok((
        StudyResult {
            config: config.clone(),
            cells,
            failures,
        },
        StudyTimings { cells: timings },
    ))
}

/// [`run_study`] restricted to iid GEV designs.
pub fn run_iid_study(config: &StudyConfig) -> Result<(StudyResult, StudyTimings)> {
    if config.designs.iter().any(|d| d.model != ModelSpec::Gev) {
        return Err(AppError::Usage(
            "an iid study only takes GEV designs".into(),
        ));
    }
    run_study(config)
}

/// [`run_study`] restricted to GEV-AR designs.
pub fn run_ar_study(config: &StudyConfig) -> Result<(StudyResult, StudyTimings)> {
    if config.designs.iter().any(|d| d.model == ModelSpec::Gev) {
        return Err(AppError::Usage(
            "an AR study only takes GEV-AR designs".into(),
        ));
    }
    run_study(config)
}

impl StudyResult {
    pub fn cell(
        &self,
        design: &str,
        n: usize,
        sampler: SamplerKind,
        parameter: &str,
    ) -> Option<&CellResult> {
        self.cells.iter().find(|c| {
            c.design == design && c.n == n && c.sampler == sampler && c.parameter == parameter
        })
    }

    /// One row per (design, n, parameter); for each sampler the columns
    /// `<label>_bias, <label>_mse, <label>_ok, <label>_failed`. Failed
    /// cells have empty bias and MSE.
    pub fn to_csv(&self) -> Vec<u8> {
        let samplers: Vec<SamplerKind> = self.config.samplers.iter().map(|s| s.kind).collect();
        let mut out = String::from("design,n,parameter,truth");
        for s in &samplers {
            let l = s.label();
            out.push_str(&format!(",{l}_bias,{l}_mse,{l}_ok,{l}_failed"));
        }
        out.push('\n');
        for design in &self.config.designs {
            for &n in &design.sample_sizes {
                for (j, name) in design.model.param_names().iter().enumerate() {
                    out.push_str(&format!(
                        "{},{},{},{}",
                        design.label, n, name, design.truth[j]
                    ));
                    for &s in &samplers {
                        let c = self
                            .cell(&design.label, n, s, name)
                            .expect("every cell is present");
                        let f = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                        out.push_str(&format!(
                            ",{},{},{},{}",
                            f(c.bias),
                            f(c.mse),
                            c.replications,
                            c.failures
                        ));
                    }
                    out.push('\n');
                }
            }
        }
        out.into_bytes()
    }
}

/// The three published protocols at a configurable number of replications.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// iid GEV(2, 0.5, -0.1), n = 15, 30, 50, 100, 20000 iterations with
    /// 10000 burn-in, HMC against MH.
    Table2,
    /// As `Table2` with 1100 iterations and 100 burn-in.
    Table3,
    /// GEV-AR models M1-M3, n = 60, 150, 300, 600 iterations with 100
    /// burn-in, HMC against fixed-metric RMHMC.
    Table4,
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Table2 => "table2",
            Protocol::Table3 => "table3",
            Protocol::Table4 => "table4",
        }
    }

    pub fn default_sample_sizes(&self) -> Vec<usize> {
        match self {
            Protocol::Table2 | Protocol::Table3 => vec![15, 30, 50, 100],
            Protocol::Table4 => vec![60, 150, 300],
        }
    }

    /// `sample_sizes = None` uses the protocol's own grid.
    pub fn config(
        &self,
        replications: usize,
        master_seed: u64,
        sample_sizes: Option<Vec<usize>>,
    ) -> StudyConfig {
        let sizes = sample_sizes.unwrap_or_else(|| self.default_sample_sizes());
        match self {
            Protocol::Table2 | Protocol::Table3 => {
                let (iters, burn) = if *self == Protocol::Table2 {
                    (20_000, 10_000)
                } else {
                    (1_100, 100)
                };
                let model = ModelSpec::Gev;
                let mut hmc = SamplerSpec::defaults(SamplerKind::Hmc, &model, iters, burn, 0);
                hmc.step_pilot = Some(StepSizePilot::default());
                let mh = SamplerSpec::defaults(SamplerKind::Rwm, &model, iters, burn, 0);
                StudyConfig {
                    name: self.name().to_string(),
                    replications,
                    master_seed,
                    designs: vec![Design {
                        label: "gev".to_string(),
                        model,
                        truth: vec![2.0, 0.5, -0.1],
                        sample_sizes: sizes,
                    }],
                    samplers: vec![hmc, mh],
                    init: InitRule::Moments,
                }
            }
            Protocol::Table4 => {
                let designs = study_models()
                    .into_iter()
                    .map(|(label, m)| {
                        let p = m.p();
                        let moments = if p >= 3 {
                            MomentSource::SampleAutocovariance
                        } else {
                            MomentSource::YuleWalker
                        };
                        Design {
                            label,
                            model: ModelSpec::GevAr { p, moments },
                            truth: m.to_vec(),
                            sample_sizes: sizes.clone(),
                        }
                    })
                    .collect();
                let any_ar = ModelSpec::GevAr {
                    p: 1,
                    moments: MomentSource::YuleWalker,
                };
                StudyConfig {
                    name: self.name().to_string(),
                    replications,
                    master_seed,
                    designs,
                    samplers: [SamplerKind::Hmc, SamplerKind::Rmhmc]
                        .into_iter()
                        .map(|kind| SamplerSpec {
                            step_pilot: Some(StepSizePilot::default()),
                            ..SamplerSpec::defaults(kind, &any_ar, 600, 100, 0)
                        })
                        .collect(),
                    init: InitRule::Map,
                }
            }
        }
    }
}
