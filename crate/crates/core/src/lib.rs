//! Bayesian inference for generalized extreme value (GEV) models.
//!
//! The crate covers two model families:
//!
//! * iid GEV observations, sampled on `(μ, log σ, ξ)`;
//! * GEV-AR(p) series `y_t = μ + Σ θ_j y_{t-j} + e_t` with `e_t ~ GEV(0, σ, ξ)`,
//!   sampled on `(μ, θ_1..θ_p, log σ, logit(ξ + 1/2))`.
//!
//! Every log-posterior comes with an analytic gradient, and both models have an
//! expected Fisher information metric. Three samplers share the
//! [`sampler::LogDensity`] interface: componentwise random-walk Metropolis,
//! Hamiltonian Monte Carlo with a scalar mass, and HMC with a constant
//! Fisher-information mass matrix evaluated at the MAP (fixed-metric RMHMC).
//!
//! The crate is `no_std` and only needs `alloc`. Floating point maths goes
//! through `num_traits::Float` backed by `libm`; when another crate in the
//! build links `std`, its inherent `f64` methods take over and those imports
//! go unused, hence the `allow(unused_imports)` next to them.

#![no_std]
#![allow(clippy::needless_range_loop)]
#![allow(clippy::manual_range_contains)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ar;
pub mod diagnostics;
mod error;
pub mod gev;
pub mod linalg;
pub mod rng;
pub mod sampler;
pub mod special;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use ar::{
    ar_grad_loglik, ar_loglik, fisher::FisherMetric, forecast::forecast, forecast::ForecastStep,
    simulate_gev_ar, stationarity_check, stationary_moments, GevArModel, GevArPosterior,
    TimeSeries,
};
pub use diagnostics::{autocorrelation, bias_mse, ess, summarize, PosteriorSummary};
pub use gev::{
    gev_cdf, gev_loglik, gev_logpdf, gev_quantile, gev_sample, prior::PriorSpec,
    transform::UnconstrainedVector, GevParams, IidGevPosterior,
};
pub use sampler::{
    hmc::{hmc_sample, rmhmc_fixed_metric_sample, HmcConfig, Metric, StepSizePilot},
    map::{map_estimate, MapEstimate, MapOptions},
    rwm::{rwm_sample, RwmConfig},
    LogDensity, SampleChain, SamplerKind,
};
