//! GEV-AR(p) time series.
//!
//! `y_t = μ + θ_1 y_{t-1} + … + θ_p y_{t-p} + e_t` with iid `e_t ~ GEV(0, σ, ξ)`,
//! so that `y_t` given the past is GEV with location `μ_t = μ + Σ θ_j y_{t-j}`.
//! The likelihood conditions on the first `p` observations.

pub mod fisher;
pub mod forecast;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::gev::posterior::ln_pdf_grad;
use crate::gev::prior::PriorSpec;
use crate::gev::transform::{CoordMap, ModelTag, UnconstrainedVector, AR_XI_LOWER, AR_XI_UPPER};
use crate::gev::GevParams;
use crate::linalg::{self, Matrix};
use crate::sampler::LogDensity;
use crate::special::{gamma, APERY, EULER_GAMMA};
use crate::{rng, Error, Result};

/// Default number of transient draws discarded by [`simulate_gev_ar`].
pub const DEFAULT_BURN_IN: usize = 500;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GevArModel {
    mu: f64,
    theta: Vec<f64>,
    sigma: f64,
    xi: f64,
}

impl GevArModel {
    /// `theta` must be nonempty and `ξ` must lie in `(-1/2, 1/2)`.
    pub fn new(mu: f64, theta: Vec<f64>, sigma: f64, xi: f64) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidConfig("AR order must be at least 1"));
        }
        if !mu.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mu",
                value: mu,
            });
        }
        if let Some(&t) = theta.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "theta",
                value: t,
            });
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter {
                name: "sigma",
                value: sigma,
            });
        }
        if !(xi > AR_XI_LOWER && xi < AR_XI_UPPER) {
            return Err(Error::InvalidParameter {
                name: "xi",
                value: xi,
            });
        }
        Ok(Self {
            mu,
            theta,
            sigma,
            xi,
        })
    }

    /// From natural-scale values ordered `(μ, θ_1..θ_p, σ, ξ)`.
    pub fn from_slice(values: &[f64]) -> Result<Self> {
        if values.len() < 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: values.len(),
            });
        }
        let p = values.len() - 3;
        Self::new(
            values[0],
            values[1..=p].to_vec(),
            values[p + 1],
            values[p + 2],
        )
    }

    pub fn p(&self) -> usize {
        self.theta.len()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Innovation law `GEV(0, σ, ξ)`.
    pub fn innovation(&self) -> GevParams {
        GevParams::new(0.0, self.sigma, self.xi).expect("validated at construction")
    }

    /// `(μ, θ_1..θ_p, σ, ξ)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.p() + 3);
        v.push(self.mu);
        v.extend_from_slice(&self.theta);
        v.push(self.sigma);
        v.push(self.xi);
        v
    }

    /// `μ_t` for the observation following `history`, whose last element is
    /// `y_{t-1}`.
    pub fn location(&self, history: &[f64]) -> f64 {
        let n = history.len();
        let mut m = self.mu;
        for (j, th) in self.theta.iter().enumerate() {
            m += th * history[n - 1 - j];
        }
        m
    }

    pub fn param_names(p: usize) -> Vec<String> {
        let mut names = Vec::with_capacity(p + 3);
        names.push("mu".to_string());
        for j in 1..=p {
            names.push(format!("theta{j}"));
        }
        names.push("sigma".to_string());
        names.push("xi".to_string());
        names
    }
}

/// An observed series `y_1..y_T`, optionally with a label per observation.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeSeries {
    values: Vec<f64>,
    timestamps: Option<Vec<String>>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyData);
        }
        if let Some(&y) = values.iter().find(|y| !y.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "data",
                value: y,
            });
        }
        Ok(Self {
            values,
            timestamps: None,
        })
    }

    pub fn with_timestamps(values: Vec<f64>, timestamps: Vec<String>) -> Result<Self> {
        if timestamps.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: values.len(),
                got: timestamps.len(),
            });
        }
        let mut s = Self::new(values)?;
        s.timestamps = Some(timestamps);
        Ok(s)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn timestamps(&self) -> Option<&[String]> {
        self.timestamps.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Splits off the last `holdout` observations.
    pub fn split_holdout(&self, holdout: usize) -> Result<(TimeSeries, Vec<f64>)> {
        if holdout >= self.len() {
            return Err(Error::InvalidConfig(
                "holdout must be shorter than the series",
            ));
        }
        let cut = self.len() - holdout;
        let train = TimeSeries {
            values: self.values[..cut].to_vec(),
            timestamps: self.timestamps.as_ref().map(|t| t[..cut].to_vec()),
        };
        Ok((train, self.values[cut..].to_vec()))
    }
}

fn check_length(p: usize, data: &TimeSeries) -> Result<()> {
    if data.len() <= p {
        Err(Error::SeriesTooShort { len: data.len(), p })
    } else {
        Ok(())
    }
}

/// Conditional log likelihood `Σ_{t=p+1}^T log f(y_t | μ_t, σ, ξ)`; `-inf`
/// if any `y_t` is outside its conditional support.
pub fn ar_loglik(model: &GevArModel, data: &TimeSeries) -> Result<f64> {
    let p = model.p();
    check_length(p, data)?;
    let y = data.values();
    let mut total = 0.0;
    for t in p..y.len() {
        let mt = model.location(&y[..t]);
        let lp = GevParams::new(mt, model.sigma, model.xi)
            .map(|g| g.ln_pdf(y[t]))
            .unwrap_or(f64::NEG_INFINITY);
        if lp == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        total += lp;
    }
    Ok(total)
}

/// Log likelihood and natural-scale gradient in one pass; `None` outside the
/// support.
fn loglik_and_grad(
    mu: f64,
    theta: &[f64],
    sigma: f64,
    xi: f64,
    y: &[f64],
    grad: &mut [f64],
) -> Option<f64> {
    let p = theta.len();
    grad.fill(0.0);
    let mut ll = 0.0;
    for t in p..y.len() {
        let mut mt = mu;
        for (j, th) in theta.iter().enumerate() {
            mt += th * y[t - 1 - j];
        }
        let (lp, d_mu, d_delta, d_xi) = ln_pdf_grad(y[t], mt, sigma, xi)?;
        ll += lp;
        grad[0] += d_mu;
        for i in 0..p {
            grad[1 + i] += d_mu * y[t - 1 - i];
        }
        grad[p + 1] += d_delta / sigma;
        grad[p + 2] += d_xi;
    }
    if ll.is_finite() {
        Some(ll)
    } else {
        None
    }
}

/// Gradient of [`ar_loglik`] with respect to `(μ, θ_1..θ_p, σ, ξ)`. `None`
/// when some observation lies outside its support.
pub fn ar_grad_loglik(model: &GevArModel, data: &TimeSeries) -> Result<Option<Vec<f64>>> {
    let p = model.p();
    check_length(p, data)?;
    let mut g = alloc::vec![0.0; p + 3];
    Ok(loglik_and_grad(
        model.mu,
        &model.theta,
        model.sigma,
        model.xi,
        data.values(),
        &mut g,
    )
    .map(|_| g))
}

/// Whether every root of `1 - θ_1 z - … - θ_p z^p` lies outside the unit
/// circle, by the step-down recursion on the reflection coefficients.
pub fn stationarity_check(theta: &[f64]) -> bool {
    if theta.iter().any(|t| !t.is_finite()) {
        return false;
    }
    let mut a = theta.to_vec();
    for k in (1..=a.len()).rev() {
        let r = a[k - 1];
        if !(r.abs() < 1.0) {
            return false;
        }
        let d = 1.0 - r * r;
        let prev: Vec<f64> = (0..k - 1).map(|j| (a[j] + r * a[k - 2 - j]) / d).collect();
        a.truncate(k - 1);
        a.copy_from_slice(&prev);
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StationaryMoments {
    pub mu_e: f64,
    pub var_e: f64,
    pub mu_y: f64,
}

const ZETA2: f64 = core::f64::consts::PI * core::f64::consts::PI / 6.0;
const ZETA4: f64 = ZETA2 * ZETA2 * 0.4;

/// Mean of `GEV(0, σ, ξ)`, finite for `ξ < 1`.
pub fn innovation_mean(sigma: f64, xi: f64) -> f64 {
    let g = EULER_GAMMA;
    if xi.abs() < 1e-4 {
        let c1 = 0.5 * (g * g + ZETA2);
        let c2 = APERY / 3.0 + 0.5 * g * ZETA2 + g * g * g / 6.0;
        sigma * (g + xi * (c1 + xi * c2))
    } else {
        sigma * (gamma(1.0 - xi) - 1.0) / xi
    }
}

/// Variance of `GEV(0, σ, ξ)`, finite for `ξ < 1/2`.
pub fn innovation_variance(sigma: f64, xi: f64) -> f64 {
    let g = EULER_GAMMA;
    if xi.abs() < 1e-3 {
        let c1 = 2.0 * (APERY + g * ZETA2);
        let c2 =
            ZETA2 * (ZETA2 + 2.0 * g * g) + 4.0 * g * APERY + 3.5 * ZETA4 + 0.5 * ZETA2 * ZETA2;
        sigma * sigma * (ZETA2 + xi * (c1 + xi * c2))
    } else {
        let g1 = gamma(1.0 - xi);
        sigma * sigma * (gamma(1.0 - 2.0 * xi) - g1 * g1) / (xi * xi)
    }
}

/// Innovation mean and variance and the stationary mean of `Y_t`.
pub fn stationary_moments(model: &GevArModel) -> Result<StationaryMoments> {
    let denom = 1.0 - model.theta.iter().sum::<f64>();
    if denom.abs() < 1e-12 {
        return Err(Error::UnitRootSum);
    }
    let mu_e = innovation_mean(model.sigma, model.xi);
    let var_e = innovation_variance(model.sigma, model.xi);
    Ok(StationaryMoments {
        mu_e,
        var_e,
        mu_y: (mu_e + model.mu) / denom,
    })
}

/// Autocovariances `γ(0..=p)` of the stationary process from the Yule-Walker
/// equations `γ(k) - Σ_j θ_j γ(|k-j|) = σ_e² 1{k=0}`.
pub fn yule_walker_autocovariances(model: &GevArModel) -> Result<Vec<f64>> {
    if !stationarity_check(&model.theta) {
        return Err(Error::NonStationary);
    }
    let p = model.p();
    let mut a = Matrix::zeros(p + 1);
    for k in 0..=p {
        a[(k, k)] += 1.0;
        for (j, th) in model.theta.iter().enumerate() {
            let lag = (k as isize - (j as isize + 1)).unsigned_abs();
            a[(k, lag)] -= th;
        }
    }
    let mut b = alloc::vec![0.0; p + 1];
    b[0] = innovation_variance(model.sigma, model.xi);
    linalg::solve(&a, &b)
}

/// Simulates `n` observations after `burn_in` discarded transient draws; the
/// recursion starts with every lag at the stationary mean.
pub fn simulate_gev_ar(
    model: &GevArModel,
    n: usize,
    seed: u64,
    burn_in: usize,
) -> Result<TimeSeries> {
    if n == 0 {
        return Err(Error::EmptyData);
    }
    if !stationarity_check(&model.theta) {
        return Err(Error::NonStationary);
    }
    let mu_y = stationary_moments(model)?.mu_y;
    let p = model.p();
    let innov = model.innovation();
    let mut rng = rng::seeded(seed);
    let mut y = alloc::vec![mu_y; p];
    y.reserve(burn_in + n);
    for _ in 0..burn_in + n {
        let next = model.location(&y) + innov.draw(&mut rng);
        y.push(next);
    }
    TimeSeries::new(y.split_off(p + burn_in))
}

/// Posterior of a GEV-AR(p) model on `(μ, θ, log σ, logit(ξ + 1/2))`.
#[derive(Debug, Clone)]
pub struct GevArPosterior {
    data: TimeSeries,
    p: usize,
    prior: PriorSpec,
    maps: Vec<CoordMap>,
}

impl GevArPosterior {
    pub fn new(data: TimeSeries, p: usize, prior: PriorSpec) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidConfig("AR order must be at least 1"));
        }
        check_length(p, &data)?;
        if prior.dim() != p + 3 {
            return Err(Error::DimensionMismatch {
                expected: p + 3,
                got: prior.dim(),
            });
        }
        Ok(Self {
            data,
            p,
            prior,
            maps: ModelTag::Ar { p }.coord_maps(),
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn data(&self) -> &TimeSeries {
        &self.data
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    pub fn tag(&self) -> ModelTag {
        ModelTag::Ar { p: self.p }
    }

    pub fn coord_maps(&self) -> &[CoordMap] {
        &self.maps
    }

    /// Natural-scale `(μ, θ, σ, ξ)` for a sampling-space point.
    fn natural(&self, u: &[f64]) -> Vec<f64> {
        self.maps
            .iter()
            .zip(u)
            .map(|(m, &v)| m.to_natural(v))
            .collect()
    }

    /// A neutral starting point: `θ = 0`, `μ` and `σ` from the sample mean
    /// and standard deviation, `ξ = 0`.
    pub fn default_init(&self) -> UnconstrainedVector {
        let y = self.data.values();
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let sd = var.sqrt().max(1e-6);
        let sigma = sd * 6f64.sqrt() / core::f64::consts::PI;
        let mut u = alloc::vec![0.0; self.p + 3];
        u[0] = mean - EULER_GAMMA * sigma;
        u[self.p + 1] = sigma.ln();
        UnconstrainedVector::new(u, self.tag()).expect("finite by construction")
    }
}

impl LogDensity for GevArPosterior {
    fn dim(&self) -> usize {
        self.p + 3
    }

    fn ln_density(&self, u: &[f64]) -> f64 {
        let x = self.natural(u);
        let p = self.p;
        let Ok(model) = GevArModel::new(x[0], x[1..=p].to_vec(), x[p + 1], x[p + 2]) else {
            return f64::NEG_INFINITY;
        };
        let ll = ar_loglik(&model, &self.data).unwrap_or(f64::NEG_INFINITY);
        if ll == f64::NEG_INFINITY {
            return ll;
        }
        ll + self.prior.ln_prior(&self.maps, u)
    }

    fn ln_density_and_grad(&self, u: &[f64], grad: &mut [f64]) -> f64 {
        let p = self.p;
        let x = self.natural(u);
        if x.iter().any(|v| !v.is_finite())
            || !(x[p + 1] > 0.0)
            || !(x[p + 2] > AR_XI_LOWER && x[p + 2] < AR_XI_UPPER)
        {
            grad.fill(0.0);
            return f64::NEG_INFINITY;
        }
        let Some(ll) = loglik_and_grad(
            x[0],
            &x[1..=p],
            x[p + 1],
            x[p + 2],
            self.data.values(),
            grad,
        ) else {
            return f64::NEG_INFINITY;
        };
        for (g, (m, &v)) in grad.iter_mut().zip(self.maps.iter().zip(u)) {
            *g *= m.derivatives(v).0;
        }
        self.prior.add_grad(&self.maps, u, grad);
        ll + self.prior.ln_prior(&self.maps, u)
    }

    fn constrain(&self, u: &[f64]) -> Vec<f64> {
        self.natural(u)
    }

    fn param_names(&self) -> Vec<String> {
        GevArModel::param_names(self.p)
    }
}
