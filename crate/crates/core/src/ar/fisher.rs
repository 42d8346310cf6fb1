//! Expected Fisher information and the fixed sampling metric.
//!
//! Per observation, with `A = (1+ξ)² Γ(1+2ξ)` and
//! `B = Γ(2+ξ)[ψ(1+ξ) + (1+ξ)/ξ]`, the information of `GEV(μ, σ, ξ)` is
//!
//! ```text
//! I_μμ = A/σ²
//! I_σσ = [1 - 2Γ(2+ξ) + A] / (σ²ξ²)
//! I_ξξ = [π²/6 + (1 - γ + 1/ξ)² - 2B/ξ + A/ξ²] / ξ²
//! I_μσ = -[A - Γ(2+ξ)] / (σ²ξ)
//! I_μξ = -(B - A/ξ) / (σξ)
//! I_σξ = -[1 - γ + (1 - Γ(2+ξ))/ξ - B + A/ξ] / (σξ²)
//! ```
//!
//! The entries have removable singularities at `ξ = 0`; within
//! [`SHAPE_INTERPOLATION_HALF_WIDTH`] of zero they are linearly interpolated
//! between the two edge values. For the GEV-AR model the `θ` rows are the `μ`
//! rows weighted by `E[Y_{t-j}]` and `E[Y_{t-i} Y_{t-j}]`.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::{stationary_moments, yule_walker_autocovariances, GevArModel, TimeSeries};
use crate::gev::prior::PriorSpec;
use crate::gev::transform::CoordMap;
use crate::gev::GevParams;
use crate::linalg::{Cholesky, Matrix};
use crate::special::{digamma, gamma, EULER_GAMMA};
use crate::{Error, Result};

pub const SHAPE_INTERPOLATION_HALF_WIDTH: f64 = 1e-2;

/// `A = (1+ξ)² Γ(1+2ξ)`.
pub fn constant_a(xi: f64) -> f64 {
    (1.0 + xi) * (1.0 + xi) * gamma(1.0 + 2.0 * xi)
}

/// `B = Γ(2+ξ)[ψ(1+ξ) + (1+ξ)/ξ]`.
pub fn constant_b(xi: f64) -> f64 {
    gamma(2.0 + xi) * (digamma(1.0 + xi) + (1.0 + xi) / xi)
}

/// Closed-form entries for σ = 1, `[μμ, σσ, ξξ, μσ, μξ, σξ]`.
fn unit_entries(xi: f64) -> [f64; 6] {
    let a = constant_a(xi);
    let b = constant_b(xi);
    let g2 = gamma(2.0 + xi);
    let x2 = xi * xi;
    let pi2_6 = core::f64::consts::PI * core::f64::consts::PI / 6.0;
    let c = 1.0 - EULER_GAMMA + 1.0 / xi;
    [
        a,
        (1.0 - 2.0 * g2 + a) / x2,
        (pi2_6 + c * c - 2.0 * b / xi + a / x2) / x2,
        -(a - g2) / xi,
        -(b - a / xi) / xi,
        -(1.0 - EULER_GAMMA + (1.0 - g2) / xi - b + a / xi) / x2,
    ]
}

/// Expected information of one `GEV(μ, σ, ξ)` observation, ordered
/// `(μ, σ, ξ)`. Requires `ξ > -1/2`.
pub fn gev_information(sigma: f64, xi: f64) -> Result<Matrix> {
    if !(xi > -0.5) || !xi.is_finite() {
        return Err(Error::InvalidParameter {
            name: "xi",
            value: xi,
        });
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter {
            name: "sigma",
            value: sigma,
        });
    }
    let h = SHAPE_INTERPOLATION_HALF_WIDTH;
    let e = if xi.abs() < h {
        let lo = unit_entries(-h);
        let hi = unit_entries(h);
        let w = (xi + h) / (2.0 * h);
        let mut e = [0.0; 6];
        for k in 0..6 {
            e[k] = (1.0 - w) * lo[k] + w * hi[k];
        }
        e
    } else {
        unit_entries(xi)
    };
    let s = sigma;
    let mut m = Matrix::zeros(3);
    m[(0, 0)] = e[0] / (s * s);
    m[(1, 1)] = e[1] / (s * s);
    m[(2, 2)] = e[2];
    m.set_sym(0, 1, e[3] / (s * s));
    m.set_sym(0, 2, e[4] / s);
    m.set_sym(1, 2, e[5] / s);
    Ok(m)
}

/// Source of `E[Y_{t-i} Y_{t-j}]` in the `θ` block.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SecondMoments {
    /// `μ_Y² + γ(|i-j|)` with `γ` from the Yule-Walker equations of the model.
    YuleWalker,
    /// `μ_Y² + Ĉ(|i-j|)` with the sample autocovariances `Ĉ(0..p-1)` of the
    /// observed series.
    SampleAutocovariance(Vec<f64>),
}

impl SecondMoments {
    /// Biased sample autocovariances of `data` at lags `0..p`.
    pub fn from_series(data: &TimeSeries, p: usize) -> Self {
        let y = data.values();
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let c = (0..p)
            .map(|k| {
                (k..y.len())
                    .map(|t| (y[t] - mean) * (y[t - k] - mean))
                    .sum::<f64>()
                    / n
            })
            .collect();
        SecondMoments::SampleAutocovariance(c)
    }
}

/// Expected information of the conditional GEV-AR likelihood with `n_terms`
/// summands, ordered `(μ, θ_1..θ_p, σ, ξ)`.
pub fn ar_information(
    model: &GevArModel,
    n_terms: usize,
    moments: &SecondMoments,
) -> Result<Matrix> {
    let p = model.p();
    let unit = gev_information(model.sigma(), model.xi())?;
    let mu_y = stationary_moments(model)?.mu_y;
    let autocov = match moments {
        SecondMoments::YuleWalker => yule_walker_autocovariances(model)?,
        SecondMoments::SampleAutocovariance(c) => {
            if c.len() < p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: c.len(),
                });
            }
            c.clone()
        }
    };
    let n = n_terms as f64;
    let (i_mm, i_ss, i_xx) = (unit[(0, 0)], unit[(1, 1)], unit[(2, 2)]);
    let (i_ms, i_mx, i_sx) = (unit[(0, 1)], unit[(0, 2)], unit[(1, 2)]);
    let (s, x) = (p + 1, p + 2);
    let mut m = Matrix::zeros(p + 3);
    m[(0, 0)] = n * i_mm;
    m.set_sym(0, s, n * i_ms);
    m.set_sym(0, x, n * i_mx);
    m[(s, s)] = n * i_ss;
    m[(x, x)] = n * i_xx;
    m.set_sym(s, x, n * i_sx);
    for i in 1..=p {
        m.set_sym(0, i, n * i_mm * mu_y);
        m.set_sym(i, s, n * i_ms * mu_y);
        m.set_sym(i, x, n * i_mx * mu_y);
        for j in i..=p {
            let eyy = mu_y * mu_y + autocov[j - i];
            m.set_sym(i, j, n * i_mm * eyy);
        }
    }
    Ok(m)
}

/// A constant positive-definite metric with its Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FisherMetric {
    matrix: Matrix,
    cholesky: Cholesky,
    log_det: f64,
}

impl FisherMetric {
    /// Fails with the offending leading minor if `matrix` is not positive
    /// definite, or if it is not symmetric.
    pub fn new(matrix: Matrix) -> Result<Self> {
        let scale = matrix.as_slice().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if !matrix.is_symmetric(1e-12 * scale.max(1.0)) {
            return Err(Error::InvalidConfig("metric must be symmetric"));
        }
        let cholesky = Cholesky::new(&matrix)?;
        let log_det = cholesky.log_det();
        Ok(Self {
            matrix,
            cholesky,
            log_det,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(Matrix::identity(n)).expect("identity is positive definite")
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.cholesky
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `Jᵀ I J - ∇² log π` at the sampling-space point `u`, where `I` is the
    /// natural-scale information, `J = diag(g'(u))` the Jacobian of the
    /// coordinate maps and `π` the prior density on the sampling space.
    pub fn on_sampling_space(
        information: &Matrix,
        maps: &[CoordMap],
        prior: &PriorSpec,
        u: &[f64],
    ) -> Result<Self> {
        let n = information.dim();
        if maps.len() != n || u.len() != n || prior.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: u.len(),
            });
        }
        let jac: Vec<f64> = maps
            .iter()
            .zip(u)
            .map(|(m, &v)| m.derivatives(v).0)
            .collect();
        let mut g = information.scale_sym(&jac);
        g.add_diagonal(&prior.neg_hessian_diag(maps, u));
        Self::new(g)
    }

    /// Sampling metric of the iid posterior on `(μ, log σ, ξ)` with `n`
    /// observations.
    pub fn iid(params: &GevParams, n: usize, prior: &PriorSpec) -> Result<Self> {
        let mut info = gev_information(params.sigma(), params.xi())?;
        let nf = n as f64;
        let scaled: Vec<f64> = info.as_slice().iter().map(|v| v * nf).collect();
        info = Matrix::from_row_major(3, scaled)?;
        let maps = crate::gev::transform::ModelTag::Iid.coord_maps();
        let u = [params.mu(), params.sigma().ln(), params.xi()];
        Self::on_sampling_space(&info, &maps, prior, &u)
    }

    /// Sampling metric of a GEV-AR posterior on `(μ, θ, log σ, logit(ξ+1/2))`.
    pub fn ar(
        model: &GevArModel,
        n_terms: usize,
        moments: &SecondMoments,
        prior: &PriorSpec,
    ) -> Result<Self> {
        let info = ar_information(model, n_terms, moments)?;
        let maps = crate::gev::transform::ModelTag::Ar { p: model.p() }.coord_maps();
        let u = crate::gev::transform::UnconstrainedVector::from_ar(model)?.into_values();
        Self::on_sampling_space(&info, &maps, prior, &u)
    }
}
