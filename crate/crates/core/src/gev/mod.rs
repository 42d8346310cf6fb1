//! The generalized extreme value distribution.
//!
//! ```text
//! H(y | μ, σ, ξ) = exp{ -(1 + ξ (y - μ)/σ)_+^(-1/ξ) }      ξ ≠ 0
//!                = exp{ -exp(-(y - μ)/σ) }                 ξ = 0
//! ```
//!
//! The support is `{y : 1 + ξ (y - μ)/σ > 0}`: bounded below at `μ - σ/ξ`
//! when `ξ > 0`, bounded above at the same point when `ξ < 0`, and the whole
//! real line in the Gumbel case. For `|ξ| < XI_SWITCH_TOLERANCE` the Gumbel
//! formulas are used.

pub mod posterior;
pub mod prior;
pub mod transform;

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Open01};

use crate::{rng, Error, Result};

pub use posterior::IidGevPosterior;

/// Below this `|ξ|` the Gumbel branch of the density, cdf and gradients is
/// used.
pub const XI_SWITCH_TOLERANCE: f64 = 1e-8;

/// GEV parameters on their natural scale. `sigma > 0` always holds.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GevParams {
    mu: f64,
    sigma: f64,
    xi: f64,
}

impl GevParams {
    pub fn new(mu: f64, sigma: f64, xi: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mu",
                value: mu,
            });
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter {
                name: "sigma",
                value: sigma,
            });
        }
        if !xi.is_finite() {
            return Err(Error::InvalidParameter {
                name: "xi",
                value: xi,
            });
        }
        Ok(Self { mu, sigma, xi })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn is_gumbel(&self) -> bool {
        self.xi.abs() < XI_SWITCH_TOLERANCE
    }

    /// Open support interval `(lower, upper)`; infinite ends where unbounded.
    pub fn support(&self) -> (f64, f64) {
        if self.is_gumbel() {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else if self.xi > 0.0 {
            (self.mu - self.sigma / self.xi, f64::INFINITY)
        } else {
            (f64::NEG_INFINITY, self.mu - self.sigma / self.xi)
        }
    }

    /// Whether `1 + ξ (y - μ)/σ > 0`. Agrees with `ln_pdf(y) > -inf`.
    pub fn in_support(&self, y: f64) -> bool {
        self.is_gumbel() || self.xi * (y - self.mu) / self.sigma > -1.0
    }

    /// Log density; `-inf` outside the support.
    pub fn ln_pdf(&self, y: f64) -> f64 {
        let s = (y - self.mu) / self.sigma;
        if self.is_gumbel() {
            return -self.sigma.ln() - s - (-s).exp();
        }
        let w = self.xi * s;
        if !(w > -1.0) {
            return f64::NEG_INFINITY;
        }
        let log_z = w.ln_1p();
        -self.sigma.ln() - (1.0 / self.xi + 1.0) * log_z - (-log_z / self.xi).exp()
    }

    pub fn pdf(&self, y: f64) -> f64 {
        self.ln_pdf(y).exp()
    }

    /// Distribution function, with the positive-part convention beyond
    /// finite endpoints.
    pub fn cdf(&self, y: f64) -> f64 {
        let s = (y - self.mu) / self.sigma;
        if self.is_gumbel() {
            return (-(-s).exp()).exp();
        }
        let w = self.xi * s;
        if !(w > -1.0) {
            return if self.xi > 0.0 { 0.0 } else { 1.0 };
        }
        (-(-w.ln_1p() / self.xi).exp()).exp()
    }

    /// Inverse distribution function on `(0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::ProbabilityOutOfRange(u));
        }
        let log_e = (-u.ln()).ln();
        if self.is_gumbel() {
            Ok(self.mu - self.sigma * log_e)
        } else {
            // ((-ln u)^(-ξ) - 1)/ξ, written with expm1 for small ξ
            Ok(self.mu + self.sigma * (-self.xi * log_e).exp_m1() / self.xi)
        }
    }

    /// One draw by inversion of a uniform on the open unit interval.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = Open01.sample(rng);
        self.quantile(u).expect("Open01 draws lie in (0, 1)")
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.draw(rng)).collect()
    }
}

pub fn gev_logpdf(params: &GevParams, y: f64) -> f64 {
    params.ln_pdf(y)
}

pub fn gev_cdf(params: &GevParams, y: f64) -> f64 {
    params.cdf(y)
}

pub fn gev_quantile(params: &GevParams, u: f64) -> Result<f64> {
    params.quantile(u)
}

/// `n` iid draws, deterministic in `seed`.
pub fn gev_sample(params: &GevParams, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng::seeded(seed);
    params.sample(&mut rng, n)
}

/// Sum of log densities, left to right; `-inf` as soon as any observation is
/// outside the support.
pub fn gev_loglik(params: &GevParams, data: &[f64]) -> f64 {
    let mut total = 0.0;
    for &y in data {
        let lp = params.ln_pdf(y);
        if lp == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        total += lp;
    }
    total
}
