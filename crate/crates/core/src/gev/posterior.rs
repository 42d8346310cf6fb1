//! Log posterior of the iid GEV model on `(μ, δ = log σ, ξ)`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::prior::PriorSpec;
use super::transform::{CoordMap, ModelTag, UnconstrainedVector};
use super::{GevParams, XI_SWITCH_TOLERANCE};
use crate::sampler::LogDensity;
use crate::{Error, Result};

/// Log density of one observation and its partial derivatives with respect
/// to `(μ, δ = log σ, ξ)`. `None` outside the support.
pub(crate) fn ln_pdf_grad(y: f64, mu: f64, sigma: f64, xi: f64) -> Option<(f64, f64, f64, f64)> {
    let s = (y - mu) / sigma;
    let ln_sigma = sigma.ln();
    if xi.abs() < XI_SWITCH_TOLERANCE {
        let e = (-s).exp();
        if !e.is_finite() {
            return None;
        }
        let lp = -ln_sigma - s - e;
        let d_mu = (1.0 - e) / sigma;
        let d_delta = -1.0 + s * (1.0 - e);
        let d_xi = 0.5 * s * s - s - 0.5 * e * s * s;
        return Some((lp, d_mu, d_delta, d_xi));
    }
    let w = xi * s;
    if !(w > -1.0) {
        return None;
    }
    let z = 1.0 + w;
    let lz = w.ln_1p();
    let t = (-lz / xi).exp();
    if !t.is_finite() {
        return None;
    }
    let lp = -ln_sigma - (1.0 + 1.0 / xi) * lz - t;
    let core = (1.0 + xi - t) / z;
    let d_mu = core / sigma;
    let d_delta = -1.0 + s * core;
    let d_xi = lz / (xi * xi) * (1.0 - t) - s / xi * core;
    Some((lp, d_mu, d_delta, d_xi))
}

/// Posterior of `(μ, log σ, ξ)` given iid GEV observations.
#[derive(Debug, Clone)]
pub struct IidGevPosterior {
    data: Vec<f64>,
    prior: PriorSpec,
    maps: Vec<CoordMap>,
    likelihood_weight: f64,
}

impl IidGevPosterior {
    pub fn new(data: Vec<f64>, prior: PriorSpec) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyData);
        }
        if let Some(&y) = data.iter().find(|y| !y.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "data",
                value: y,
            });
        }
        if prior.dim() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: prior.dim(),
            });
        }
        Ok(Self {
            data,
            prior,
            maps: ModelTag::Iid.coord_maps(),
            likelihood_weight: 1.0,
        })
    }

    /// Multiplies the log likelihood by `w`; `w = 0` leaves only the prior.
    pub fn with_likelihood_weight(mut self, w: f64) -> Self {
        self.likelihood_weight = w;
        self
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    pub fn log_posterior(&self, v: &UnconstrainedVector) -> Result<f64> {
        self.check_tag(v)?;
        Ok(self.ln_density(v.values()))
    }

    /// Gradient with respect to `(μ, δ, ξ)`; `None` outside the support.
    pub fn grad_log_posterior(&self, v: &UnconstrainedVector) -> Result<Option<[f64; 3]>> {
        self.check_tag(v)?;
        let mut g = [0.0; 3];
        let lp = self.ln_density_and_grad(v.values(), &mut g);
        Ok(if lp.is_finite() { Some(g) } else { None })
    }

    fn check_tag(&self, v: &UnconstrainedVector) -> Result<()> {
        if v.tag() == ModelTag::Iid {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: 3,
                got: v.dim(),
            })
        }
    }

    fn params(&self, x: &[f64]) -> Option<GevParams> {
        GevParams::new(x[0], x[1].exp(), x[2]).ok()
    }
}

impl LogDensity for IidGevPosterior {
    fn dim(&self) -> usize {
        3
    }

    fn ln_density(&self, x: &[f64]) -> f64 {
        let Some(params) = self.params(x) else {
            return f64::NEG_INFINITY;
        };
        let ll = if self.likelihood_weight == 0.0 {
            0.0
        } else {
            self.likelihood_weight * super::gev_loglik(&params, &self.data)
        };
        ll + self.prior.ln_prior(&self.maps, x)
    }

    fn ln_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad[..3].fill(0.0);
        let sigma = x[1].exp();
        if !(sigma > 0.0) || !sigma.is_finite() || !x[0].is_finite() || !x[2].is_finite() {
            return f64::NEG_INFINITY;
        }
        let mut ll = 0.0;
        if self.likelihood_weight != 0.0 {
            let mut g = [0.0; 3];
            for &y in &self.data {
                let Some((lp, a, b, c)) = ln_pdf_grad(y, x[0], sigma, x[2]) else {
                    return f64::NEG_INFINITY;
                };
                ll += lp;
                g[0] += a;
                g[1] += b;
                g[2] += c;
            }
            for i in 0..3 {
                grad[i] = self.likelihood_weight * g[i];
            }
            ll *= self.likelihood_weight;
        }
        self.prior.add_grad(&self.maps, x, grad);
        ll + self.prior.ln_prior(&self.maps, x)
    }

    fn constrain(&self, x: &[f64]) -> Vec<f64> {
        alloc::vec![x[0], x[1].exp(), x[2]]
    }

    fn param_names(&self) -> Vec<String> {
        ["mu", "sigma", "xi"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }
}
