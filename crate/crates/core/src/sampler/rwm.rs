//! Componentwise random-walk Metropolis.
//!
//! One iteration is a sweep over the coordinates; each coordinate gets a
//! Gaussian proposal and its own accept/reject step. An optional pilot run
//! rescales the proposal standard deviations until every coordinate's
//! acceptance rate falls inside a target band; the main chain then restarts
//! from the initial point with the tuned scales held fixed.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{ChainSettings, LogDensity, SampleChain, SamplerKind};
use crate::rng::{self, ChainRng};
use crate::{Error, Result};

/// Seed path label for the pilot run, so it never shares a stream with the
/// main chain.
const PILOT_STREAM: u64 = 0x70_696c_6f74;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PilotTuning {
    pub batches: usize,
    pub batch_size: usize,
    pub low: f64,
    pub high: f64,
}

impl Default for PilotTuning {
    fn default() -> Self {
        Self {
            batches: 20,
            batch_size: 50,
            low: 0.2,
            high: 0.45,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RwmConfig {
    pub proposal_sds: Vec<f64>,
    /// Total sweeps, burn-in included.
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub pilot: Option<PilotTuning>,
}

impl RwmConfig {
    pub fn new(proposal_sds: Vec<f64>, iterations: usize, burn_in: usize, seed: u64) -> Self {
        Self {
            proposal_sds,
            iterations,
            burn_in,
            seed,
            pilot: None,
        }
    }

    pub fn with_pilot(mut self, pilot: PilotTuning) -> Self {
        self.pilot = Some(pilot);
        self
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.proposal_sds.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.proposal_sds.len(),
            });
        }
        if self
            .proposal_sds
            .iter()
            .any(|s| !(*s > 0.0) || !s.is_finite())
        {
            return Err(Error::InvalidConfig(
                "proposal standard deviations must be positive",
            ));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::InvalidConfig(
                "burn-in must be smaller than the number of iterations",
            ));
        }
        if let Some(p) = &self.pilot {
            if p.batch_size == 0 || !(p.low > 0.0 && p.low < p.high && p.high < 1.0) {
                return Err(Error::InvalidConfig("invalid pilot tuning band"));
            }
        }
        Ok(())
    }
}

struct Walker<'a, D: LogDensity + ?Sized> {
    target: &'a D,
    x: Vec<f64>,
    lp: f64,
    rng: ChainRng,
}

impl<'a, D: LogDensity + ?Sized> Walker<'a, D> {
    /// One sweep; `accepted[j]` is incremented for each accepted coordinate.
    fn sweep(&mut self, sds: &[f64], accepted: &mut [usize]) {
        for j in 0..self.x.len() {
            let z: f64 = self.rng.sample(StandardNormal);
            let u: f64 = self.rng.random();
            let old = self.x[j];
            self.x[j] = old + sds[j] * z;
            let lp = self.target.ln_density(&self.x);
            if lp.is_finite() && u < (lp - self.lp).exp() {
                self.lp = lp;
                accepted[j] += 1;
            } else {
                self.x[j] = old;
            }
        }
    }
}

fn start<'a, D: LogDensity + ?Sized>(
    target: &'a D,
    init: &[f64],
    seed: u64,
) -> Result<Walker<'a, D>> {
    if init.len() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: target.dim(),
            got: init.len(),
        });
    }
    let lp = target.ln_density(init);
    if !lp.is_finite() {
        return Err(Error::InitOutOfSupport);
    }
    Ok(Walker {
        target,
        x: init.to_vec(),
        lp,
        rng: rng::seeded(seed),
    })
}

/// Rescales `sds` batch by batch until each coordinate's acceptance rate is
/// inside `[low, high]`.
pub fn tune_proposal_sds<D: LogDensity + ?Sized>(
    target: &D,
    init: &[f64],
    sds: &[f64],
    pilot: &PilotTuning,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut w = start(target, init, rng::derive_seed(seed, &[PILOT_STREAM]))?;
    let mut sds = sds.to_vec();
    let mut acc = alloc::vec![0usize; sds.len()];
    for _ in 0..pilot.batches {
        acc.fill(0);
        for _ in 0..pilot.batch_size {
            w.sweep(&sds, &mut acc);
        }
        for (s, &a) in sds.iter_mut().zip(&acc) {
            let rate = a as f64 / pilot.batch_size as f64;
            if rate < pilot.low || rate > pilot.high {
                *s *= ((rate + 0.01) / 0.3).clamp(0.25, 4.0);
            }
        }
    }
    Ok(sds)
}

/// Componentwise random-walk Metropolis. The reported acceptance rate is the
/// fraction of accepted coordinate updates over all sweeps of the main run.
pub fn rwm_sample<D: LogDensity + ?Sized>(
    target: &D,
    config: &RwmConfig,
    init: &[f64],
) -> Result<SampleChain> {
    let d = target.dim();
    config.validate(d)?;
    let sds = match &config.pilot {
        Some(p) => tune_proposal_sds(target, init, &config.proposal_sds, p, config.seed)?,
        None => config.proposal_sds.clone(),
    };
    let mut w = start(target, init, config.seed)?;
    let mut acc = alloc::vec![0usize; d];
    let mut draws = Vec::with_capacity((config.iterations - config.burn_in) * d);
    for it in 0..config.iterations {
        w.sweep(&sds, &mut acc);
        if it >= config.burn_in {
            draws.extend(target.constrain(&w.x));
        }
    }
    let total: usize = acc.iter().sum();
    Ok(SampleChain::from_parts(
        target.param_names(),
        draws,
        SamplerKind::Rwm,
        total as f64 / (config.iterations * d) as f64,
        0,
        ChainSettings {
            seed: config.seed,
            iterations: config.iterations,
            burn_in: config.burn_in,
            epsilon: None,
            leapfrog_steps: None,
            proposal_sds: Some(sds),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::testing::Gaussian;

    #[test]
    fn symmetric_target_mean() {
        let target = Gaussian::standard(1);
        let cfg = RwmConfig::new(alloc::vec![2.4], 50_000, 1000, 5);
        let c = rwm_sample(&target, &cfg, &[0.0]).unwrap();
        let x = c.column(0);
        let m = x.iter().sum::<f64>() / x.len() as f64;
        assert!(m.abs() < 0.05, "{m}");
    }

    #[test]
    fn tiny_proposal_barely_moves() {
        let target = Gaussian::standard(2);
        let cfg = RwmConfig::new(alloc::vec![1e-6; 2], 2000, 0, 5);
        let c = rwm_sample(&target, &cfg, &[0.5, -0.5]).unwrap();
        assert!(c.acceptance_rate() > 0.99);
        let x = c.column(0);
        let m = x.iter().sum::<f64>() / x.len() as f64;
        let v = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64;
        assert!(v < 1e-6);
    }

    #[test]
    fn pilot_tuning_lands_in_band() {
        let target = Gaussian {
            sd: alloc::vec![0.01, 1.0, 50.0],
        };
        let pilot = PilotTuning::default();
        let cfg = RwmConfig::new(alloc::vec![1.0; 3], 4000, 0, 8).with_pilot(pilot);
        let c = rwm_sample(&target, &cfg, &[0.0; 3]).unwrap();
        let sds = c.settings().proposal_sds.clone().unwrap();
        assert!(sds[0] < 0.1 && sds[2] > 10.0, "{sds:?}");
        assert!(c.acceptance_rate() > 0.15 && c.acceptance_rate() < 0.55);
    }

    #[test]
    fn out_of_support_proposals_are_rejected() {
        struct Positive;
        impl LogDensity for Positive {
            fn dim(&self) -> usize {
                1
            }
            fn ln_density(&self, x: &[f64]) -> f64 {
                if x[0] > 0.0 {
                    -x[0]
                } else {
                    f64::NEG_INFINITY
                }
            }
            fn ln_density_and_grad(&self, x: &[f64], g: &mut [f64]) -> f64 {
                g[0] = -1.0;
                self.ln_density(x)
            }
        }
        let cfg = RwmConfig::new(alloc::vec![3.0], 5000, 0, 2);
        let c = rwm_sample(&Positive, &cfg, &[1.0]).unwrap();
        assert!(c.column(0).iter().all(|&v| v > 0.0));
        assert_eq!(
            rwm_sample(&Positive, &cfg, &[-1.0]).unwrap_err(),
            Error::InitOutOfSupport
        );
    }
}
