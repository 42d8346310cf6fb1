//! Command-line front end.
//!
//! Every command computes all of its outputs before writing any of them, and
//! writes each file atomically, so a failing run leaves nothing behind.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gevmc_core::{
    autocorrelation, ess, forecast, gev_sample, simulate_gev_ar, GevArModel, GevParams,
    SamplerKind, StepSizePilot, TimeSeries,
};
use serde::Serialize;

use crate::error::{AppError, Result};
use crate::experiments::real::{run_real_data, summaries};
use crate::experiments::study::{run_study, Protocol};
use crate::experiments::{ModelSpec, MomentSource, SamplerSpec};
use crate::io::{
    chain_to_csv, read_chain, read_series, series_to_csv, write_atomic, write_json, ChainSidecar,
    ParameterSummary,
};
use crate::manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(
    name = "gevmc",
    version,
    about = "Bayesian GEV and GEV-AR fitting with HMC, RMHMC and random-walk MH"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model to a series and write draws, summaries and a manifest.
    Fit(FitArgs),
    /// Simulate a series from a GEV or GEV-AR model.
    Simulate(SimulateArgs),
    /// Run a replicated simulation study.
    Study(StudyArgs),
    /// ESS and autocorrelations of a chain file.
    Diagnose(DiagnoseArgs),
    /// Posterior predictive forecasts from a GEV-AR chain file.
    Forecast(ForecastArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    Gev,
    GevAr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerArg {
    Mh,
    Hmc,
    Rmhmc,
}

impl SamplerArg {
    fn kind(self) -> SamplerKind {
        match self {
            SamplerArg::Mh => SamplerKind::Rwm,
            SamplerArg::Hmc => SamplerKind::Hmc,
            SamplerArg::Rmhmc => SamplerKind::Rmhmc,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Series CSV: one column of values or `label,value` rows.
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "gev")]
    pub model: ModelArg,
    /// Autoregressive order (gev-ar only).
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    #[arg(long, value_enum, default_value = "hmc")]
    pub sampler: SamplerArg,
    /// Total iterations, burn-in included.
    #[arg(long, default_value_t = 6000)]
    pub iters: usize,
    #[arg(long, default_value_t = 1000)]
    pub burnin: usize,
    /// Leapfrog step size; defaults depend on model and sampler.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Leapfrog steps per transition; defaults depend on model and sampler.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Halve the step size before sampling until a short pilot accepts at
    /// least 80% of proposals with no divergent trajectory.
    #[arg(long)]
    pub tune_eps: bool,
    /// Hold out the last observations and forecast them (gev-ar only).
    #[arg(long, default_value_t = 0)]
    pub holdout: usize,
    /// Build the RMHMC metric from sample autocovariances instead of the
    /// Yule-Walker moments of the model.
    #[arg(long)]
    pub sample_moments: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "gev")]
    pub model: ModelArg,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub xi: f64,
    /// Comma-separated AR coefficients (gev-ar only).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Vec<f64>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Discarded warm-up steps of a GEV-AR simulation.
    #[arg(long, default_value_t = gevmc_core::ar::DEFAULT_BURN_IN)]
    pub burnin: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[arg(long, value_enum)]
    pub protocol: Protocol,
    #[arg(long, default_value_t = 50)]
    pub replications: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Comma-separated sample sizes replacing the protocol's grid.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Chain CSV written by `fit`.
    pub chain: PathBuf,
    /// Draws dropped from the start of the file before any diagnostic.
    #[arg(long, default_value_t = 0)]
    pub burnin_extra: usize,
    #[arg(long, default_value_t = 50)]
    pub max_lag: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    /// GEV-AR chain CSV written by `fit`.
    pub chain: PathBuf,
    /// The series the chain was fitted to.
    pub data: PathBuf,
    #[arg(long)]
    pub horizon: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Errors go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Fit(a) => cmd_fit(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Study(a) => cmd_study(a),
        Command::Diagnose(a) => cmd_diagnose(a),
        Command::Forecast(a) => cmd_forecast(a),
    }
}

/// Files of one command, written together once everything is computed.
struct Outputs {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    fn add_json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut bytes = serde_json::to_vec_pretty(value).expect("outputs serialize to JSON");
        bytes.push(b'\n');
        self.add(name, bytes);
    }

    /// Writes every file, then the manifest listing them.
    fn commit(self, mut manifest: RunManifest, manifest_name: &str) -> Result<()> {
        fs::create_dir_all(&self.dir).map_err(|e| AppError::io(&self.dir, e))?;
        for (name, bytes) in &self.files {
            write_atomic(&self.dir.join(name), bytes)?;
            manifest.add_output(name.clone());
        }
        write_json(&self.dir.join(manifest_name), &manifest)
    }
}

#[derive(Serialize)]
struct FitConfig<'a> {
    data: &'a Path,
    model: ModelSpec,
    sampler: &'a SamplerSpec,
    holdout: usize,
}

#[derive(Serialize)]
struct FitSummary<'a> {
    chain: ChainSidecar,
    parameters: &'a [ParameterSummary],
    #[serde(skip_serializing_if = "Option::is_none")]
    map: Option<&'a gevmc_core::MapEstimate>,
}

fn cmd_fit(a: &FitArgs) -> Result<()> {
    if a.burnin >= a.iters {
        return Err(AppError::Usage(
            "--burnin must be smaller than --iters".into(),
        ));
    }
    let model = match a.model {
        ModelArg::Gev => {
            if a.sample_moments {
                return Err(AppError::Usage(
                    "--sample-moments needs --model gev-ar".into(),
                ));
            }
            ModelSpec::Gev
        }
        ModelArg::GevAr => {
            if a.p == 0 {
                return Err(AppError::Usage("--p must be at least 1".into()));
            }
            let moments = if a.sample_moments {
                MomentSource::SampleAutocovariance
            } else {
                MomentSource::YuleWalker
            };
            ModelSpec::GevAr { p: a.p, moments }
        }
    };
    let kind = a.sampler.kind();
    if kind == SamplerKind::Rwm && (a.eps.is_some() || a.steps.is_some() || a.tune_eps) {
        return Err(AppError::Usage(
            "--eps, --steps and --tune-eps apply to hmc and rmhmc only".into(),
        ));
    }
    let mut spec = SamplerSpec::defaults(kind, &model, a.iters, a.burnin, a.seed);
    if let Some(e) = a.eps {
        spec.epsilon = e;
    }
    if let Some(s) = a.steps {
        spec.leapfrog_steps = s;
    }
    if a.tune_eps {
        spec.step_pilot = Some(StepSizePilot::default());
    }

    let data = read_series(&a.data)?;
    let forecast_seed = gevmc_core::rng::derive_seed(a.seed, &[u64::MAX]);
    let res = run_real_data(&data, &model, &spec, a.holdout, forecast_seed)?;

    let mut out = Outputs::new(&a.out);
    out.add("chain.csv", chain_to_csv(&res.fit.chain));
    out.add_json(
        "summary.json",
        &FitSummary {
            chain: ChainSidecar::new(&res.fit.chain),
            parameters: &res.summaries,
            map: res.fit.map.as_ref(),
        },
    );
    if a.holdout > 0 {
        out.add(
            "forecasts.csv",
            forecasts_csv(&res.forecasts, Some(&res.held_out)),
        );
    }
    let config = FitConfig {
        data: &a.data,
        model,
        sampler: &spec,
        holdout: a.holdout,
    };
    let mut manifest = RunManifest::new("fit", &config, Some(a.seed));
    manifest.add_input(&a.data)?;
    out.commit(manifest, "manifest.json")
}

fn forecasts_csv(steps: &[gevmc_core::ForecastStep], observed: Option<&[f64]>) -> Vec<u8> {
    let mut s = String::from("step,point,lower,upper");
    if observed.is_some() {
        s.push_str(",observed");
    }
    s.push('\n');
    for (i, f) in steps.iter().enumerate() {
        s.push_str(&format!("{},{},{},{}", f.step, f.point, f.lower, f.upper));
        if let Some(o) = observed {
            s.push_str(&format!(",{}", o[i]));
        }
        s.push('\n');
    }
    s.into_bytes()
}

#[derive(Serialize)]
struct SimulateConfig<'a> {
    model: ModelArg,
    mu: f64,
    sigma: f64,
    xi: f64,
    theta: &'a [f64],
    n: usize,
    burnin: usize,
}

fn split_file(path: &Path) -> Result<(PathBuf, String)> {
    let name = path
        .file_name()
        .ok_or_else(|| AppError::Usage(format!("{} is not a file path", path.display())))?
        .to_string_lossy()
        .into_owned();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    Ok((dir, name))
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    if a.n == 0 {
        return Err(AppError::Usage("--n must be at least 1".into()));
    }
    let series = match a.model {
        ModelArg::Gev => {
            if !a.theta.is_empty() {
                return Err(AppError::Usage("--theta needs --model gev-ar".into()));
            }
            TimeSeries::new(gev_sample(
                &GevParams::new(a.mu, a.sigma, a.xi)?,
                a.n,
                a.seed,
            ))?
        }
        ModelArg::GevAr => {
            if a.theta.is_empty() {
                return Err(AppError::Usage("--model gev-ar needs --theta".into()));
            }
            let m = GevArModel::new(a.mu, a.theta.clone(), a.sigma, a.xi)?;
            simulate_gev_ar(&m, a.n, a.seed, a.burnin)?
        }
    };
    let (dir, name) = split_file(&a.out)?;
    let mut out = Outputs::new(&dir);
    out.add(&name, series_to_csv(&series));
    let config = SimulateConfig {
        model: a.model,
        mu: a.mu,
        sigma: a.sigma,
        xi: a.xi,
        theta: &a.theta,
        n: a.n,
        burnin: a.burnin,
    };
    out.commit(
        RunManifest::new("simulate", &config, Some(a.seed)),
        &format!("{name}.manifest.json"),
    )
}

fn cmd_study(a: &StudyArgs) -> Result<()> {
    let sizes = (!a.sizes.is_empty()).then(|| a.sizes.clone());
    let config = a.protocol.config(a.replications, a.seed, sizes);
    let (result, timings) = run_study(&config)?;
    let mut out = Outputs::new(&a.out);
    out.add("result.csv", result.to_csv());
    out.add_json("result.json", &result);
    out.add_json("timings.json", &timings);
    out.commit(
        RunManifest::new("study", &config, Some(a.seed)),
        "manifest.json",
    )
}

#[derive(Serialize)]
struct EssEntry {
    parameter: String,
    ess: f64,
}

#[derive(Serialize)]
struct EssReport {
    draws: usize,
    discarded: usize,
    parameters: Vec<EssEntry>,
}

#[derive(Serialize)]
struct DiagnoseConfig<'a> {
    chain: &'a Path,
    burnin_extra: usize,
    max_lag: usize,
}

fn cmd_diagnose(a: &DiagnoseArgs) -> Result<()> {
    let chain = read_chain(&a.chain)?.discard(a.burnin_extra)?;
    let cols: Vec<Vec<f64>> = (0..chain.dim()).map(|j| chain.column(j)).collect();
    let parameters = chain
        .names()
        .iter()
        .zip(&cols)
        .map(|(name, x)| {
            Ok(EssEntry {
                parameter: name.clone(),
                ess: ess(x)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let acfs = cols
        .iter()
        .map(|x| autocorrelation(x, a.max_lag))
        .collect::<gevmc_core::Result<Vec<_>>>()?;
    let mut acf = format!("lag,{}\n", chain.names().join(","));
    for k in 0..=a.max_lag {
        acf.push_str(&k.to_string());
        for r in &acfs {
            acf.push_str(&format!(",{}", r[k]));
        }
        acf.push('\n');
    }
    let mut out = Outputs::new(&a.out);
    out.add_json(
        "ess.json",
        &EssReport {
            draws: chain.len(),
            discarded: a.burnin_extra,
            parameters,
        },
    );
    out.add("acf.csv", acf.into_bytes());
    let config = DiagnoseConfig {
        chain: &a.chain,
        burnin_extra: a.burnin_extra,
        max_lag: a.max_lag,
    };
    let mut manifest = RunManifest::new("diagnose", &config, None);
    manifest.add_input(&a.chain)?;
    out.commit(manifest, "manifest.json")
}

#[derive(Serialize)]
struct ForecastConfig<'a> {
    chain: &'a Path,
    data: &'a Path,
    horizon: usize,
}

fn cmd_forecast(a: &ForecastArgs) -> Result<()> {
    let chain = read_chain(&a.chain)?;
    let data = read_series(&a.data)?;
    let steps = forecast(&chain, &data, a.horizon, a.seed)?;
    let (dir, name) = split_file(&a.out)?;
    let mut out = Outputs::new(&dir);
    out.add(&name, forecasts_csv(&steps, None));
    let config = ForecastConfig {
        chain: &a.chain,
        data: &a.data,
        horizon: a.horizon,
    };
    let mut manifest = RunManifest::new("forecast", &config, Some(a.seed));
    manifest.add_input(&a.chain)?;
    manifest.add_input(&a.data)?;
    out.commit(manifest, &format!("{name}.manifest.json"))
}

/// Summaries of an arbitrary chain file; used by the acceptance harness.
pub fn summarize_chain_file(path: &Path) -> Result<Vec<ParameterSummary>> {
    summaries(&read_chain(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn help_exits_zero_and_bad_flags_exit_one() {
        assert_eq!(run(["gevmc", "--help"]), 0);
        assert_eq!(run(["gevmc", "--version"]), 0);
        assert_eq!(
            run(["gevmc", "study", "--protocol", "table9", "--out", "x"]),
            1
        );
        assert_eq!(run(["gevmc", "fit"]), 1);
    }
}
