//! Posterior predictive forecasts for GEV-AR(p).
//!
//! For every posterior draw a future path is simulated recursively, seeding
//! the lags with the last observations and then with the path's own earlier
//! values. The point forecast is the mean over paths, the interval is made of
//! empirical quantiles.

use alloc::vec::Vec;

use super::{GevArModel, TimeSeries};
use crate::diagnostics::quantile_sorted;
use crate::sampler::SampleChain;
use crate::{rng, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ForecastStep {
    /// `j` in `Y_{T+j}`.
    pub step: usize,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
}

/// 95% equal-tailed predictive intervals.
pub fn forecast(
    chain: &SampleChain,
    data: &TimeSeries,
    horizon: usize,
    seed: u64,
) -> Result<Vec<ForecastStep>> {
    forecast_with_prob(chain, data, horizon, seed, 0.95)
}

/// `chain` holds natural-scale draws ordered `(μ, θ_1..θ_p, σ, ξ)`.
pub fn forecast_with_prob(
    chain: &SampleChain,
    data: &TimeSeries,
    horizon: usize,
    seed: u64,
    prob: f64,
) -> Result<Vec<ForecastStep>> {
    if chain.is_empty() {
        return Err(Error::EmptyData);
    }
    if horizon == 0 {
        return Err(Error::InvalidConfig("forecast horizon must be at least 1"));
    }
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::ProbabilityOutOfRange(prob));
    }
    if chain.dim() < 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: chain.dim(),
        });
    }
    let p = chain.dim() - 3;
    if data.len() < p {
        return Err(Error::SeriesTooShort { len: data.len(), p });
    }
    let y = data.values();
    let mut rng = rng::seeded(seed);
    let mut paths = alloc::vec![Vec::with_capacity(chain.len()); horizon];
    let mut history = Vec::with_capacity(p + horizon);
    for row in chain.rows() {
        let model = GevArModel::from_slice(row)?;
        let innov = model.innovation();
        history.clear();
        history.extend_from_slice(&y[y.len() - p..]);
        for path in paths.iter_mut() {
            let next = model.location(&history) + innov.draw(&mut rng);
            history.push(next);
            path.push(next);
        }
    }
    let tail = 0.5 * (1.0 - prob);
    Ok(paths
        .into_iter()
        .enumerate()
        .map(|(j, mut v)| {
            let point = v.iter().sum::<f64>() / v.len() as f64;
            v.sort_by(f64::total_cmp);
            ForecastStep {
                step: j + 1,
                point,
                lower: quantile_sorted(&v, tail),
                upper: quantile_sorted(&v, 1.0 - tail),
            }
        })
        .collect())
}
