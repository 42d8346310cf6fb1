//! Maps between natural parameters and the unconstrained sampling space.
//!
//! iid GEV:   `(μ, σ, ξ)            <-> (μ, δ = log σ, ξ)`
//! GEV-AR(p): `(μ, θ_1..θ_p, σ, ξ)  <-> (μ, θ_1..θ_p, δ = log σ, η)`
//! with `η = logit(ξ + 1/2)`, which keeps `ξ` inside `(-1/2, 1/2)`.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::ar::GevArModel;
use crate::gev::GevParams;
use crate::{Error, Result};

pub const AR_XI_LOWER: f64 = -0.5;
pub const AR_XI_UPPER: f64 = 0.5;

/// Which parameterization an [`UnconstrainedVector`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ModelTag {
    Iid,
    Ar { p: usize },
}

impl ModelTag {
    pub fn dim(&self) -> usize {
        match *self {
            ModelTag::Iid => 3,
            ModelTag::Ar { p } => p + 3,
        }
    }

    /// Per-coordinate map from the unconstrained value to the natural one.
    pub fn coord_maps(&self) -> Vec<CoordMap> {
        match *self {
            ModelTag::Iid => alloc::vec![CoordMap::Identity, CoordMap::Log, CoordMap::Identity],
            ModelTag::Ar { p } => {
                let mut maps = alloc::vec![CoordMap::Identity; p + 1];
                maps.push(CoordMap::Log);
                maps.push(CoordMap::Logistic {
                    lower: AR_XI_LOWER,
                    upper: AR_XI_UPPER,
                });
                maps
            }
        }
    }
}

/// Scalar bijection `x = g(u)` from ℝ onto a parameter's range.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CoordMap {
    Identity,
    /// `x = exp(u)`
    Log,
    /// `x = lower + (upper - lower) · logistic(u)`
    Logistic {
        lower: f64,
        upper: f64,
    },
}

impl CoordMap {
    pub fn to_natural(&self, u: f64) -> f64 {
        match *self {
            CoordMap::Identity => u,
            CoordMap::Log => u.exp(),
            CoordMap::Logistic { lower, upper } => lower + (upper - lower) * logistic(u),
        }
    }

    pub fn to_unconstrained(&self, x: f64) -> Result<f64> {
        match *self {
            CoordMap::Identity => Ok(x),
            CoordMap::Log => {
                if x > 0.0 {
                    Ok(x.ln())
                } else {
                    Err(Error::InvalidParameter {
                        name: "sigma",
                        value: x,
                    })
                }
            }
            CoordMap::Logistic { lower, upper } => {
                if x > lower && x < upper {
                    Ok(logit((x - lower) / (upper - lower)))
                } else {
                    Err(Error::InvalidParameter {
                        name: "xi",
                        value: x,
                    })
                }
            }
        }
    }

    /// `ln g'(u)`.
    pub fn ln_jacobian(&self, u: f64) -> f64 {
        match *self {
            CoordMap::Identity => 0.0,
            CoordMap::Log => u,
            CoordMap::Logistic { lower, upper } => {
                (upper - lower).ln() - softplus(-u) - softplus(u)
            }
        }
    }

    /// `(g'(u), g''(u))`.
    pub fn derivatives(&self, u: f64) -> (f64, f64) {
        match *self {
            CoordMap::Identity => (1.0, 0.0),
            CoordMap::Log => {
                let e = u.exp();
                (e, e)
            }
            CoordMap::Logistic { lower, upper } => {
                let q = logistic(u);
                let d1 = (upper - lower) * q * (1.0 - q);
                (d1, d1 * (1.0 - 2.0 * q))
            }
        }
    }

    /// `(d/du ln g'(u), d²/du² ln g'(u))`.
    pub fn ln_jacobian_derivatives(&self, u: f64) -> (f64, f64) {
        match *self {
            CoordMap::Identity => (0.0, 0.0),
            CoordMap::Log => (1.0, 0.0),
            CoordMap::Logistic { .. } => {
                let q = logistic(u);
                (1.0 - 2.0 * q, -2.0 * q * (1.0 - q))
            }
        }
    }
}

pub fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

pub fn logit(q: f64) -> f64 {
    (q / (1.0 - q)).ln()
}

/// `ln(1 + e^u)` without overflow.
fn softplus(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

/// A point of the unconstrained sampling space, tagged with its model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UnconstrainedVector {
    values: Vec<f64>,
    tag: ModelTag,
}

impl UnconstrainedVector {
    pub fn new(values: Vec<f64>, tag: ModelTag) -> Result<Self> {
        if values.len() != tag.dim() {
            return Err(Error::DimensionMismatch {
                expected: tag.dim(),
                got: values.len(),
            });
        }
        if let Some(&v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "unconstrained",
                value: v,
            });
        }
        Ok(Self { values, tag })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn tag(&self) -> ModelTag {
        self.tag
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn from_iid(params: &GevParams) -> Self {
        Self {
            values: alloc::vec![params.mu(), params.sigma().ln(), params.xi()],
            tag: ModelTag::Iid,
        }
    }

    pub fn from_ar(model: &GevArModel) -> Result<Self> {
        let natural = model.to_vec();
        let tag = ModelTag::Ar { p: model.p() };
        let values = tag
            .coord_maps()
            .iter()
            .zip(&natural)
            .map(|(m, &x)| m.to_unconstrained(x))
            .collect::<Result<Vec<_>>>()?;
        Self::new(values, tag)
    }

    /// Natural-scale values in the model's coordinate order, plus the log
    /// Jacobian of the inverse map.
    pub fn to_natural(&self) -> (Vec<f64>, f64) {
        let maps = self.tag.coord_maps();
        let natural = maps
            .iter()
            .zip(&self.values)
            .map(|(m, &u)| m.to_natural(u))
            .collect();
        let ln_jac = maps
            .iter()
            .zip(&self.values)
            .map(|(m, &u)| m.ln_jacobian(u))
            .sum();
        (natural, ln_jac)
    }

    pub fn to_iid(&self) -> Result<(GevParams, f64)> {
        if self.tag != ModelTag::Iid {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: self.dim(),
            });
        }
        let (x, ln_jac) = self.to_natural();
        Ok((GevParams::new(x[0], x[1], x[2])?, ln_jac))
    }

    pub fn to_ar(&self) -> Result<(GevArModel, f64)> {
        let ModelTag::Ar { p } = self.tag else {
            return Err(Error::InvalidConfig("expected a GEV-AR parameter vector"));
        };
        let (x, ln_jac) = self.to_natural();
        let model = GevArModel::new(x[0], x[1..=p].to_vec(), x[p + 1], x[p + 2])?;
        Ok((model, ln_jac))
    }
}
