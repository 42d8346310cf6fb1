//! Chain diagnostics and simulation-study metrics.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Number of grid points used for the kernel density mode.
pub const MODE_GRID_POINTS: usize = 512;
/// Shortest chain for which [`summarize`] estimates a mode.
pub const MODE_MIN_LEN: usize = 100;

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Centered series and its biased variance; errors on a constant chain.
fn centered(x: &[f64]) -> Result<(Vec<f64>, f64)> {
    if x.is_empty() {
        return Err(Error::EmptyData);
    }
    let m = mean(x);
    let c: Vec<f64> = x.iter().map(|v| v - m).collect();
    let c0 = c.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    if !(c0 > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok((c, c0))
}

fn autocov(c: &[f64], k: usize) -> f64 {
    c[k..].iter().zip(c).map(|(a, b)| a * b).sum::<f64>() / c.len() as f64
}

/// Sample autocorrelations `ρ(0..=max_lag)` with the biased `1/N`
/// normalization, so `ρ(0) = 1`.
pub fn autocorrelation(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if x.len() <= max_lag {
        return Err(Error::ChainTooShort {
            len: x.len(),
            needed: max_lag + 1,
        });
    }
    let (c, c0) = centered(x)?;
    let mut out = Vec::with_capacity(max_lag + 1);
    out.push(1.0);
    for k in 1..=max_lag {
        out.push(autocov(&c, k) / c0);
    }
    Ok(out)
}

/// Geyer's initial monotone sequence `Γ_m = ρ(2m) + ρ(2m+1)`, truncated
/// before the first non-positive pair and made nonincreasing.
pub fn geyer_sequence(x: &[f64]) -> Result<Vec<f64>> {
    let (c, c0) = centered(x)?;
    let n = c.len();
    let mut seq: Vec<f64> = Vec::new();
    let mut m = 0;
    while 2 * m + 1 < n {
        let a = if m == 0 { 1.0 } else { autocov(&c, 2 * m) / c0 };
        let b = autocov(&c, 2 * m + 1) / c0;
        let mut pair = a + b;
        if !(pair > 0.0) {
            break;
        }
        if let Some(&prev) = seq.last() {
            pair = pair.min(prev);
        }
        seq.push(pair);
        m += 1;
    }
    Ok(seq)
}

/// Effective sample size `N / τ` with `τ = -1 + 2 Σ Γ_m` from
/// [`geyer_sequence`], clamped to `(0, N]`.
pub fn ess(x: &[f64]) -> Result<f64> {
    let seq = geyer_sequence(x)?;
    let n = x.len() as f64;
    let tau = -1.0 + 2.0 * seq.iter().sum::<f64>();
    if !(tau > 0.0) {
        return Ok(n);
    }
    Ok((n / tau).min(n))
}

/// Type-7 (linear interpolation) quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PosteriorSummary {
    pub mean: f64,
    pub sd: f64,
    /// `None` for chains shorter than [`MODE_MIN_LEN`].
    pub mode: Option<f64>,
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
    pub interval_prob: f64,
}

/// Mean, standard deviation, KDE mode, median and equal-tailed credible
/// interval of one chain column.
pub fn summarize(x: &[f64], interval_prob: f64) -> Result<PosteriorSummary> {
    if x.is_empty() {
        return Err(Error::EmptyData);
    }
    if !(interval_prob > 0.0 && interval_prob < 1.0) {
        return Err(Error::ProbabilityOutOfRange(interval_prob));
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = x.len();
    // sums over sorted data so the result does not depend on draw order
    let m = mean(&sorted);
    let sd = if n > 1 {
        (sorted.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let tail = 0.5 * (1.0 - interval_prob);
    Ok(PosteriorSummary {
        mean: m,
        sd,
        mode: if n >= MODE_MIN_LEN {
            Some(kde_mode(&sorted, sd))
        } else {
            None
        },
        median: quantile_sorted(&sorted, 0.5),
        lower: quantile_sorted(&sorted, tail),
        upper: quantile_sorted(&sorted, 1.0 - tail),
        interval_prob,
    })
}

/// Silverman's rule `0.9 min(sd, IQR/1.34) n^{-1/5}`.
pub fn silverman_bandwidth(sorted: &[f64], sd: f64) -> f64 {
    let iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * (sorted.len() as f64).powf(-0.2)
}

/// Argmax of a Gaussian KDE over [`MODE_GRID_POINTS`] points spanning the
/// sample range. Kernel contributions beyond 8 bandwidths are skipped.
fn kde_mode(sorted: &[f64], sd: f64) -> f64 {
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let h = silverman_bandwidth(sorted, sd);
    if !(hi > lo) || !(h > 0.0) {
        return sorted[sorted.len() / 2];
    }
    let cut = 8.0 * h;
    let step = (hi - lo) / (MODE_GRID_POINTS - 1) as f64;
    let mut best = (f64::NEG_INFINITY, lo);
    for k in 0..MODE_GRID_POINTS {
        let g = lo + k as f64 * step;
        let a = sorted.partition_point(|&v| v < g - cut);
        let b = sorted.partition_point(|&v| v <= g + cut);
        let dens: f64 = sorted[a..b]
            .iter()
            .map(|&v| {
                let z = (v - g) / h;
                (-0.5 * z * z).exp()
            })
            .sum();
        if dens > best.0 {
            best = (dens, g);
        }
    }
    best.1
}

/// `(mean(est) - truth, mean((est - truth)²))`.
pub fn bias_mse(estimates: &[f64], truth: f64) -> Result<(f64, f64)> {
    if estimates.is_empty() {
        return Err(Error::EmptyData);
    }
    let n = estimates.len() as f64;
    let bias = estimates.iter().map(|e| e - truth).sum::<f64>() / n;
    let mse = estimates
        .iter()
        .map(|e| (e - truth) * (e - truth))
        .sum::<f64>()
        / n;
    Ok((bias, mse))
}
