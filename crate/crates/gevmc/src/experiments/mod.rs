//! Model fitting and the simulation-study harness.
//!
//! [`fit`] runs one sampler on one data set. The study functions in
//! [`study`] repeat that over simulated replications; [`real`] holds the
//! real-data workflows.

pub mod real;
pub mod study;

use gevmc_core::ar::fisher::SecondMoments;
use gevmc_core::sampler::rwm::PilotTuning;
use gevmc_core::special::EULER_GAMMA;
use gevmc_core::{
    hmc_sample, map_estimate, rmhmc_fixed_metric_sample, rwm_sample, stationarity_check,
    FisherMetric, GevArModel, GevArPosterior, GevParams, HmcConfig, IidGevPosterior, LogDensity,
    MapEstimate, MapOptions, Metric, PriorSpec, RwmConfig, SampleChain, SamplerKind, StepSizePilot,
    TimeSeries,
};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

pub use real::{run_real_data, table1_ess, EssComparison, RealDataResult};
pub use study::{
    run_ar_study, run_iid_study, run_study, Protocol, StudyConfig, StudyResult, StudyTimings,
};

/// Where the `E[Y_{t-i} Y_{t-j}]` terms of the GEV-AR metric come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentSource {
    /// Exact, from the Yule-Walker equations of the model.
    YuleWalker,
    /// Squared stationary mean plus sample autocovariances of the data.
    SampleAutocovariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ModelSpec {
    Gev,
    GevAr { p: usize, moments: MomentSource },
}

impl ModelSpec {
    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::Gev => 3,
            ModelSpec::GevAr { p, .. } => p + 3,
        }
    }

    pub fn param_names(&self) -> Vec<String> {
        match self {
            ModelSpec::Gev => ["mu", "sigma", "xi"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            ModelSpec::GevAr { p, .. } => GevArModel::param_names(*p),
        }
    }
}

/// Everything a single sampler run needs apart from data and start point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub kind: SamplerKind,
    /// Total iterations, burn-in included.
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub leapfrog_steps: usize,
    pub step_pilot: Option<StepSizePilot>,
    pub proposal_sds: Vec<f64>,
    pub rwm_pilot: Option<PilotTuning>,
}

/// Initial random-walk scale on every sampling coordinate.
pub const DEFAULT_PROPOSAL_SD: f64 = 0.1;

impl SamplerSpec {
    /// Step sizes and trajectory lengths used by the original experiments:
    /// `ε = 0.12, L = 27` for iid HMC, `ε = 0.006, L = 13` for GEV-AR HMC and
    /// `ε = 0.15, L = 13` for fixed-metric RMHMC. RWM starts every coordinate
    /// at [`DEFAULT_PROPOSAL_SD`] and pilot-tunes.
    pub fn defaults(
        kind: SamplerKind,
        model: &ModelSpec,
        iterations: usize,
        burn_in: usize,
        seed: u64,
    ) -> Self {
        let (epsilon, leapfrog_steps) = match (kind, model) {
            (SamplerKind::Hmc, ModelSpec::Gev) => (0.12, 27),
            (SamplerKind::Hmc, ModelSpec::GevAr { .. }) => (0.006, 13),
            _ => (0.15, 13),
        };
        Self {
            kind,
            iterations,
            burn_in,
            seed,
            epsilon,
            leapfrog_steps,
            step_pilot: None,
            proposal_sds: vec![DEFAULT_PROPOSAL_SD; model.dim()],
            rwm_pilot: (kind == SamplerKind::Rwm).then(PilotTuning::default),
        }
    }
}

/// A posterior built from a model choice and a data set.
#[derive(Debug, Clone)]
pub enum Posterior {
    Gev(IidGevPosterior),
    GevAr(GevArPosterior, MomentSource),
}

impl Posterior {
    /// Uses the default priors of each model.
    pub fn new(model: &ModelSpec, data: &TimeSeries) -> Result<Self> {
        Ok(match *model {
            ModelSpec::Gev => Posterior::Gev(IidGevPosterior::new(
                data.values().to_vec(),
                PriorSpec::iid_default(),
            )?),
            ModelSpec::GevAr { p, moments } => Posterior::GevAr(
                GevArPosterior::new(data.clone(), p, PriorSpec::ar_default(p))?,
                moments,
            ),
        })
    }

    pub fn target(&self) -> &(dyn LogDensity + Sync) {
        match self {
            Posterior::Gev(t) => t,
            Posterior::GevAr(t, _) => t,
        }
    }

    /// Moment-based start: `ξ = 0`, `σ = sd·√6/π`, `μ = mean - γσ`, `θ = 0`.
    pub fn moment_init(&self) -> Vec<f64> {
        match self {
            Posterior::Gev(t) => {
                let y = t.data();
                let n = y.len() as f64;
                let mean = y.iter().sum::<f64>() / n;
                let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                let sigma = var.sqrt().max(1e-6) * 6f64.sqrt() / std::f64::consts::PI;
                vec![mean - EULER_GAMMA * sigma, sigma.ln(), 0.0]
            }
            Posterior::GevAr(t, _) => t.default_init().into_values(),
        }
    }

    /// Sampling-space metric at `u`: expected information plus the negative
    /// prior Hessian.
    pub fn metric_at(&self, u: &[f64]) -> Result<FisherMetric> {
        let numerical = |e: gevmc_core::Error| match e {
            gevmc_core::Error::NotPositiveDefinite { .. } => AppError::Model(e),
            e => AppError::Numerical(format!("no Fisher metric at the MAP: {e}")),
        };
        match self {
            Posterior::Gev(t) => {
                let x = t.constrain(u);
                let params = GevParams::new(x[0], x[1], x[2])?;
                FisherMetric::iid(&params, t.data().len(), t.prior()).map_err(numerical)
            }
            Posterior::GevAr(t, moments) => {
                let model = GevArModel::from_slice(&t.constrain(u))?;
                let p = t.p();
                // Sample autocovariances stand in for the model ones, so only
                // the Yule-Walker source needs a stationary MAP.
                let m = match moments {
                    MomentSource::YuleWalker => {
                        if !stationarity_check(model.theta()) {
                            return Err(AppError::Numerical(
                                "the MAP is not a stationary model".into(),
                            ));
                        }
                        SecondMoments::YuleWalker
                    }
                    MomentSource::SampleAutocovariance => SecondMoments::from_series(t.data(), p),
                };
                FisherMetric::ar(&model, t.data().len() - p, &m, t.prior()).map_err(numerical)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitOutput {
    pub chain: SampleChain,
    /// Set for RMHMC, whose metric is anchored at the MAP.
    pub map: Option<MapEstimate>,
    pub metric: Option<FisherMetric>,
}

/// Runs `spec` from the sampling-space point `init`.
///
/// RMHMC first locates the MAP from `init`, builds the metric there, and
/// then starts its chain at `init` like the other samplers.
pub fn fit(posterior: &Posterior, spec: &SamplerSpec, init: &[f64]) -> Result<FitOutput> {
    let target = posterior.target();
    let hmc_config = || {
        let c = HmcConfig::new(
            spec.epsilon,
            spec.leapfrog_steps,
            spec.iterations,
            spec.burn_in,
            spec.seed,
        );
        match spec.step_pilot {
            Some(p) => c.with_pilot(p),
            None => c,
        }
    };
    match spec.kind {
        SamplerKind::Rwm => {
            let mut c = RwmConfig::new(
                spec.proposal_sds.clone(),
                spec.iterations,
                spec.burn_in,
                spec.seed,
            );
            if let Some(p) = spec.rwm_pilot {
                c = c.with_pilot(p);
            }
            Ok(FitOutput {
                chain: rwm_sample(target, &c, init)?,
                map: None,
                metric: None,
            })
        }
        SamplerKind::Hmc => Ok(FitOutput {
            chain: hmc_sample(target, &hmc_config(), init)?,
            map: None,
            metric: None,
        }),
        SamplerKind::Rmhmc => {
            let map = map_estimate(target, init, &MapOptions::default())?;
            let metric = posterior.metric_at(&map.point)?;
            let c = hmc_config().with_metric(Metric::Dense(metric.clone()));
            Ok(FitOutput {
                chain: rmhmc_fixed_metric_sample(target, &c, init)?,
                map: Some(map),
                metric: Some(metric),
            })
        }
        SamplerKind::External => Err(AppError::Usage(
            "cannot fit with an external sampler".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gevmc_core::simulate_gev_ar;

    #[test]
    fn sample_moment_metric_tolerates_a_non_stationary_point() {
        let model = GevArModel::new(-1.0, vec![-1.56, -0.55, 0.04], 1.0, 0.3).unwrap();
        let data = simulate_gev_ar(&model, 60, 3, 200).unwrap();
        // theta = (-1.6, -0.61, -0.02) has a root inside the unit circle
        let u = [-1.0, -1.6, -0.61, -0.02, 0.0, 0.3];
        assert!(!stationarity_check(&u[1..4]));
        let sample = ModelSpec::GevAr {
            p: 3,
            moments: MomentSource::SampleAutocovariance,
        };
        let g = Posterior::new(&sample, &data)
            .unwrap()
            .metric_at(&u)
            .unwrap();
        assert!(g.matrix().is_symmetric(1e-12));
        let yw = ModelSpec::GevAr {
            p: 3,
            moments: MomentSource::YuleWalker,
        };
        assert!(matches!(
            Posterior::new(&yw, &data).unwrap().metric_at(&u),
            Err(AppError::Numerical(_))
        ));
    }
}
