//! Independent per-coordinate priors.
//!
//! A prior is either placed directly on a transformed coordinate (the iid
//! model's `Normal(0, 25)` on `(μ, log σ, ξ)`) or on the natural parameter, in
//! which case the log-Jacobian of the coordinate map is added so that the
//! result is a density on the sampling space.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::transform::CoordMap;
use crate::special::ln_gamma;
use crate::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Prior {
    Normal {
        mean: f64,
        variance: f64,
    },
    InverseGamma {
        shape: f64,
        scale: f64,
    },
    /// Closed interval; the density is `-inf` outside it.
    Uniform {
        lower: f64,
        upper: f64,
    },
}

impl Prior {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Prior::Normal { mean, variance } => {
                mean.is_finite() && variance > 0.0 && variance.is_finite()
            }
            Prior::InverseGamma { shape, scale } => {
                shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite()
            }
            Prior::Uniform { lower, upper } => {
                lower < upper && lower.is_finite() && upper.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig("invalid prior hyperparameters"))
        }
    }

    pub fn ln_density(&self, x: f64) -> f64 {
        match *self {
            Prior::Normal { mean, variance } => {
                let d = x - mean;
                -0.5 * (LN_2PI + variance.ln()) - 0.5 * d * d / variance
            }
            Prior::InverseGamma { shape, scale } => {
                if !(x > 0.0) {
                    return f64::NEG_INFINITY;
                }
                shape * scale.ln() - ln_gamma(shape) - (shape + 1.0) * x.ln() - scale / x
            }
            Prior::Uniform { lower, upper } => {
                if x >= lower && x <= upper {
                    -(upper - lower).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    /// First and second derivatives of the log density at `x`.
    pub fn ln_density_derivatives(&self, x: f64) -> (f64, f64) {
        match *self {
            Prior::Normal { mean, variance } => (-(x - mean) / variance, -1.0 / variance),
            Prior::InverseGamma { shape, scale } => {
                let a1 = shape + 1.0;
                (
                    -a1 / x + scale / (x * x),
                    a1 / (x * x) - 2.0 * scale / (x * x * x),
                )
            }
            Prior::Uniform { .. } => (0.0, 0.0),
        }
    }
}

/// Whether a prior is stated for the transformed coordinate itself or for
/// the natural parameter it maps to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PriorScale {
    Transformed,
    Natural,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoordinatePrior {
    pub prior: Prior,
    pub scale: PriorScale,
}

impl CoordinatePrior {
    pub fn transformed(prior: Prior) -> Self {
        Self {
            prior,
            scale: PriorScale::Transformed,
        }
    }

    pub fn natural(prior: Prior) -> Self {
        Self {
            prior,
            scale: PriorScale::Natural,
        }
    }

    /// Log density on the sampling coordinate `u`.
    pub fn ln_density(&self, map: &CoordMap, u: f64) -> f64 {
        match self.scale {
            PriorScale::Transformed => self.prior.ln_density(u),
            PriorScale::Natural => self.prior.ln_density(map.to_natural(u)) + map.ln_jacobian(u),
        }
    }

    /// First and second derivatives with respect to `u` of [`Self::ln_density`].
    pub fn derivatives(&self, map: &CoordMap, u: f64) -> (f64, f64) {
        match self.scale {
            PriorScale::Transformed => self.prior.ln_density_derivatives(u),
            PriorScale::Natural => {
                let x = map.to_natural(u);
                let (l1, l2) = self.prior.ln_density_derivatives(x);
                let (g1, g2) = map.derivatives(u);
                let (j1, j2) = map.ln_jacobian_derivatives(u);
                (l1 * g1 + j1, l2 * g1 * g1 + l1 * g2 + j2)
            }
        }
    }
}

/// Product prior over the coordinates of a model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PriorSpec {
    coords: Vec<CoordinatePrior>,
}

impl PriorSpec {
    pub fn new(coords: Vec<CoordinatePrior>) -> Result<Self> {
        for c in &coords {
            c.prior.validate()?;
        }
        Ok(Self { coords })
    }

    /// `Normal(0, 25)` on each of `(μ, log σ, ξ)`.
    pub fn iid_default() -> Self {
        let n = CoordinatePrior::transformed(Prior::Normal {
            mean: 0.0,
            variance: 25.0,
        });
        Self {
            coords: alloc::vec![n; 3],
        }
    }

    /// `μ, θ_j ~ Normal(0, 25)`, `σ ~ IG(0.1, 0.001)`, `ξ ~ U(-0.5, 0.5)`, all
    /// on the natural scale.
    pub fn ar_default(p: usize) -> Self {
        let n = CoordinatePrior::natural(Prior::Normal {
            mean: 0.0,
            variance: 25.0,
        });
        let mut coords = alloc::vec![n; p + 1];
        coords.push(CoordinatePrior::natural(Prior::InverseGamma {
            shape: 0.1,
            scale: 0.001,
        }));
        coords.push(CoordinatePrior::natural(Prior::Uniform {
            lower: -0.5,
            upper: 0.5,
        }));
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[CoordinatePrior] {
        &self.coords
    }

    fn check(&self, maps: &[CoordMap], u: &[f64]) {
        debug_assert_eq!(self.coords.len(), maps.len());
        debug_assert_eq!(self.coords.len(), u.len());
    }

    pub fn ln_prior(&self, maps: &[CoordMap], u: &[f64]) -> f64 {
        self.check(maps, u);
        self.coords
            .iter()
            .zip(maps)
            .zip(u)
            .map(|((c, m), &v)| c.ln_density(m, v))
            .sum()
    }

    /// Adds the prior gradient into `grad`.
    pub fn add_grad(&self, maps: &[CoordMap], u: &[f64], grad: &mut [f64]) {
        self.check(maps, u);
        for (i, (c, m)) in self.coords.iter().zip(maps).enumerate() {
            grad[i] += c.derivatives(m, u[i]).0;
        }
    }

    /// Diagonal of the negative Hessian of the log prior.
    pub fn neg_hessian_diag(&self, maps: &[CoordMap], u: &[f64]) -> Vec<f64> {
        self.check(maps, u);
        self.coords
            .iter()
            .zip(maps)
            .zip(u)
            .map(|((c, m), &v)| -c.derivatives(m, v).1)
            .collect()
    }
}
