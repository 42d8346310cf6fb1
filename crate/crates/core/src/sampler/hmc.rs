//! Hamiltonian Monte Carlo with a constant mass matrix.
//!
//! `H(x, p) = -log π(x) + ½ pᵀ M⁻¹ p`. Each iteration refreshes
//! `p ~ N(0, M)`, runs `L` leapfrog steps of size `ε` and accepts with
//! probability `min(1, exp(H₀ - H₁))`. With `M` the Fisher metric at the MAP
//! this is fixed-metric RMHMC: the `½ log|G|` term of the Riemannian
//! Hamiltonian is then constant, cancels in the acceptance ratio, and is left
//! out of every reported energy.
//!
//! A trajectory that reaches a point with non-finite log density or gradient
//! is abandoned, counted as divergent and rejected.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{ChainSettings, LogDensity, SampleChain, SamplerKind};
use crate::ar::fisher::FisherMetric;
use crate::rng::{self, ChainRng};
use crate::{Error, Result};

/// Mass matrix `M`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Metric {
    /// `M = m I`.
    Scalar(f64),
    Dense(FisherMetric),
}

impl Metric {
    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Metric::Scalar(m) if !(*m > 0.0) || !m.is_finite() => {
                Err(Error::InvalidConfig("scalar mass must be positive"))
            }
            Metric::Dense(g) if g.dim() != dim => Err(Error::DimensionMismatch {
                expected: dim,
                got: g.dim(),
            }),
            _ => Ok(()),
        }
    }

    /// `p = M^{1/2} z` for standard normal `z`, using the Cholesky factor for
    /// a dense metric.
    pub fn momentum_from_normal(&self, z: &[f64], p: &mut [f64]) {
        match self {
            Metric::Scalar(m) => {
                let s = m.sqrt();
                for i in 0..z.len() {
                    p[i] = s * z[i];
                }
            }
            Metric::Dense(g) => g.cholesky().mul_lower(z, p),
        }
    }

    /// `v = M⁻¹ p`.
    pub fn velocity(&self, p: &[f64], v: &mut [f64]) {
        match self {
            Metric::Scalar(m) => {
                for i in 0..p.len() {
                    v[i] = p[i] / m;
                }
            }
            Metric::Dense(g) => {
                v.copy_from_slice(p);
                g.cholesky().solve_in_place(v);
            }
        }
    }

    /// `½ pᵀ M⁻¹ p`.
    pub fn kinetic(&self, p: &[f64]) -> f64 {
        let mut v = vec![0.0; p.len()];
        self.velocity(p, &mut v);
        0.5 * p.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HmcConfig {
    pub epsilon: f64,
    pub leapfrog_steps: usize,
    pub metric: Metric,
    /// Total iterations, burn-in included.
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Shrinks `epsilon` before the run, see [`tune_step_size`].
    pub pilot: Option<StepSizePilot>,
}

impl HmcConfig {
    pub fn new(
        epsilon: f64,
        leapfrog_steps: usize,
        iterations: usize,
        burn_in: usize,
        seed: u64,
    ) -> Self {
        Self {
            epsilon,
            leapfrog_steps,
            metric: Metric::Scalar(1.0),
            iterations,
            burn_in,
            seed,
            pilot: None,
        }
    }

    pub fn with_pilot(mut self, pilot: StepSizePilot) -> Self {
        self.pilot = Some(pilot);
        self
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidConfig(
                "step size must be finite and positive",
            ));
        }
        if self.leapfrog_steps == 0 {
            return Err(Error::InvalidConfig(
                "at least one leapfrog step is required",
            ));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::InvalidConfig(
                "burn-in must be smaller than the number of iterations",
            ));
        }
        if let Some(p) = &self.pilot {
            if p.iterations == 0 || !(p.min_accept > 0.0 && p.min_accept < 1.0) {
                return Err(Error::InvalidConfig(
                    "step-size pilot needs iterations and a target rate in (0, 1)",
                ));
            }
        }
        self.metric.validate(dim)
    }
}

/// Seed path label for step-size pilot rounds.
const PILOT_STREAM: u64 = 0x6570_735f_706c;

/// Step-size search run before the main chain.
///
/// Each round runs `iterations` transitions at the current step size and
/// halves it if fewer than `min_accept` of them were accepted or any of them
/// diverged. Rounds pick up from where the previous one stopped so the pilot
/// also walks towards the bulk of the target; the main chain still starts at
/// its own initial point.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepSizePilot {
    pub iterations: usize,
    pub min_accept: f64,
    pub max_halvings: usize,
}

impl Default for StepSizePilot {
    fn default() -> Self {
        Self {
            iterations: 100,
            min_accept: 0.8,
            max_halvings: 12,
        }
    }
}

/// Largest `epsilon / 2^k`, `k <= max_halvings`, whose pilot round reaches
/// the target acceptance rate without a divergence (the smallest tried if none
/// does).
pub fn tune_step_size<D: LogDensity + ?Sized>(
    target: &D,
    metric: &Metric,
    epsilon: f64,
    steps: usize,
    init: &[f64],
    pilot: &StepSizePilot,
    seed: u64,
) -> Result<f64> {
    let mut eps = epsilon;
    let mut x = init.to_vec();
    for round in 0..=pilot.max_halvings {
        let mut chain = Hmc::new(
            target,
            metric,
            eps,
            steps,
            &x,
            rng::derive_seed(seed, &[PILOT_STREAM, round as u64]),
        )?;
        let (mut accepted, mut divergent) = (0usize, false);
        for _ in 0..pilot.iterations {
            let t = chain.step();
            accepted += t.accepted as usize;
            divergent |= t.divergent;
        }
        x.copy_from_slice(chain.position());
        let stable = !divergent && accepted as f64 >= pilot.min_accept * pilot.iterations as f64;
        if stable || round == pilot.max_halvings {
            break;
        }
        eps *= 0.5;
    }
    Ok(eps)
}

/// Runs `steps` leapfrog steps from `(x, p)` in place. `grad` must hold the
/// gradient at the starting `x` and is left holding the gradient at the end.
///
/// Returns the log density at the end point, or `None` if the trajectory hit
/// a point where the log density or its gradient is not finite.
pub fn leapfrog<D: LogDensity + ?Sized>(
    target: &D,
    metric: &Metric,
    x: &mut [f64],
    p: &mut [f64],
    grad: &mut [f64],
    epsilon: f64,
    steps: usize,
) -> Option<f64> {
    let n = x.len();
    let mut v = vec![0.0; n];
    let half = 0.5 * epsilon;
    let mut lp = f64::NAN;
    for _ in 0..steps {
        for i in 0..n {
            p[i] += half * grad[i];
        }
        metric.velocity(p, &mut v);
        for i in 0..n {
            x[i] += epsilon * v[i];
        }
        lp = target.ln_density_and_grad(x, grad);
        if !lp.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return None;
        }
        for i in 0..n {
            p[i] += half * grad[i];
        }
    }
    Some(lp)
}

/// Outcome of one HMC iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub h0: f64,
    /// `+inf` for a divergent trajectory.
    pub h1: f64,
    pub accept_prob: f64,
    pub accepted: bool,
    pub divergent: bool,
}

/// A running HMC chain, advanced one iteration at a time.
pub struct Hmc<'a, D: LogDensity + ?Sized> {
    target: &'a D,
    metric: &'a Metric,
    epsilon: f64,
    steps: usize,
    rng: ChainRng,
    x: Vec<f64>,
    lp: f64,
    grad: Vec<f64>,
    x_new: Vec<f64>,
    grad_new: Vec<f64>,
    z: Vec<f64>,
    p: Vec<f64>,
}

impl<'a, D: LogDensity + ?Sized> Hmc<'a, D> {
    pub fn new(
        target: &'a D,
        metric: &'a Metric,
        epsilon: f64,
        steps: usize,
        init: &[f64],
        seed: u64,
    ) -> Result<Self> {
        let n = target.dim();
        if init.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: init.len(),
            });
        }
        metric.validate(n)?;
        let mut grad = vec![0.0; n];
        let lp = target.ln_density_and_grad(init, &mut grad);
        if !lp.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::InitOutOfSupport);
        }
        Ok(Self {
            target,
            metric,
            epsilon,
            steps,
            rng: rng::seeded(seed),
            x: init.to_vec(),
            lp,
            grad,
            x_new: vec![0.0; n],
            grad_new: vec![0.0; n],
            z: vec![0.0; n],
            p: vec![0.0; n],
        })
    }

    pub fn position(&self) -> &[f64] {
        &self.x
    }

    pub fn ln_density(&self) -> f64 {
        self.lp
    }

    pub fn step(&mut self) -> Transition {
        for zi in self.z.iter_mut() {
            *zi = self.rng.sample(StandardNormal);
        }
        let u: f64 = self.rng.random();
        self.metric.momentum_from_normal(&self.z, &mut self.p);
        let h0 = -self.lp + self.metric.kinetic(&self.p);
        self.x_new.copy_from_slice(&self.x);
        self.grad_new.copy_from_slice(&self.grad);
        let end = leapfrog(
            self.target,
            self.metric,
            &mut self.x_new,
            &mut self.p,
            &mut self.grad_new,
            self.epsilon,
            self.steps,
        );
        let h1 = match end {
            Some(lp) => -lp + self.metric.kinetic(&self.p),
            None => f64::INFINITY,
        };
        if !h1.is_finite() {
            return Transition {
                h0,
                h1: f64::INFINITY,
                accept_prob: 0.0,
                accepted: false,
                divergent: true,
            };
        }
        let accept_prob = (h0 - h1).exp().min(1.0);
        let accepted = accept_prob > u;
        if accepted {
            core::mem::swap(&mut self.x, &mut self.x_new);
            core::mem::swap(&mut self.grad, &mut self.grad_new);
            self.lp = end.expect("finite energy implies a finished trajectory");
        }
        Transition {
            h0,
            h1,
            accept_prob,
            accepted,
            divergent: false,
        }
    }
}

fn run<D: LogDensity + ?Sized>(
    target: &D,
    config: &HmcConfig,
    init: &[f64],
    kind: SamplerKind,
) -> Result<SampleChain> {
    config.validate(target.dim())?;
    let epsilon = match &config.pilot {
        Some(p) => tune_step_size(
            target,
            &config.metric,
            config.epsilon,
            config.leapfrog_steps,
            init,
            p,
            config.seed,
        )?,
        None => config.epsilon,
    };
    let mut chain = Hmc::new(
        target,
        &config.metric,
        epsilon,
        config.leapfrog_steps,
        init,
        config.seed,
    )?;
    let d = target.dim();
    let mut draws = Vec::with_capacity((config.iterations - config.burn_in) * d);
    let mut accepted = 0usize;
    let mut divergent = 0usize;
    for it in 0..config.iterations {
        let t = chain.step();
        accepted += t.accepted as usize;
        divergent += t.divergent as usize;
        if it >= config.burn_in {
            draws.extend(target.constrain(chain.position()));
        }
    }
    Ok(SampleChain::from_parts(
        target.param_names(),
        draws,
        kind,
        accepted as f64 / config.iterations as f64,
        divergent,
        ChainSettings {
            seed: config.seed,
            iterations: config.iterations,
            burn_in: config.burn_in,
            epsilon: Some(epsilon),
            leapfrog_steps: Some(config.leapfrog_steps),
            proposal_sds: None,
        },
    ))
}

/// HMC. Acceptance rate and divergence count cover all iterations, burn-in
/// included.
pub fn hmc_sample<D: LogDensity + ?Sized>(
    target: &D,
    config: &HmcConfig,
    init: &[f64],
) -> Result<SampleChain> {
    run(target, config, init, SamplerKind::Hmc)
}

/// HMC with `M = G`, a dense metric (normally the Fisher metric at the MAP).
pub fn rmhmc_fixed_metric_sample<D: LogDensity + ?Sized>(
    target: &D,
    config: &HmcConfig,
    init: &[f64],
) -> Result<SampleChain> {
    if !matches!(config.metric, Metric::Dense(_)) {
        return Err(Error::InvalidConfig(
            "fixed-metric RMHMC needs a dense metric",
        ));
    }
    run(target, config, init, SamplerKind::Rmhmc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::sampler::testing::Gaussian;

    #[test]
    fn leapfrog_is_reversible() {
        let target = Gaussian {
            sd: vec![1.0, 0.5, 2.0],
        };
        let metric = Metric::Scalar(1.0);
        let x0 = [0.3, -0.2, 1.0];
        let p0 = [0.5, 1.0, -0.7];
        let mut x = x0;
        let mut p = p0;
        let mut g = [0.0; 3];
        target.ln_density_and_grad(&x, &mut g);
        leapfrog(&target, &metric, &mut x, &mut p, &mut g, 0.1, 25).unwrap();
        for v in p.iter_mut() {
            *v = -*v;
        }
        leapfrog(&target, &metric, &mut x, &mut p, &mut g, 0.1, 25).unwrap();
        for i in 0..3 {
            assert!((x[i] - x0[i]).abs() < 1e-10);
            assert!((p[i] + p0[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn config_validation() {
        let target = Gaussian::standard(2);
        let bad_l = HmcConfig::new(0.1, 0, 10, 5, 1);
        assert!(hmc_sample(&target, &bad_l, &[0.0, 0.0]).is_err());
        let bad_burn = HmcConfig::new(0.1, 5, 10, 10, 1);
        assert!(hmc_sample(&target, &bad_burn, &[0.0, 0.0]).is_err());
        let bad_eps = HmcConfig::new(f64::NAN, 5, 10, 1, 1);
        assert!(hmc_sample(&target, &bad_eps, &[0.0, 0.0]).is_err());
        let scalar = HmcConfig::new(0.1, 5, 10, 1, 1);
        assert!(rmhmc_fixed_metric_sample(&target, &scalar, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn identity_metric_reproduces_unit_mass_bit_for_bit() {
        let target = Gaussian {
            sd: vec![1.0, 3.0, 0.2],
        };
        let base = HmcConfig::new(0.05, 10, 300, 50, 77);
        let a = hmc_sample(&target, &base, &[0.1, 0.1, 0.1]).unwrap();
        let dense = base
            .clone()
            .with_metric(Metric::Dense(FisherMetric::identity(3)));
        let b = rmhmc_fixed_metric_sample(&target, &dense, &[0.1, 0.1, 0.1]).unwrap();
        assert_eq!(a.column(0), b.column(0));
        assert_eq!(a.column(2), b.column(2));
        assert_eq!(a.acceptance_rate(), b.acceptance_rate());
    }

    #[test]
    fn huge_step_rejects_without_crashing() {
        let target = Gaussian::standard(3);
        let cfg = HmcConfig::new(5.0, 10, 500, 0, 3);
        let c = hmc_sample(&target, &cfg, &[0.0; 3]).unwrap();
        assert!(c.acceptance_rate() < 0.05, "{}", c.acceptance_rate());
        assert_eq!(c.len(), 500);
    }

    #[test]
    fn pilot_shrinks_an_unstable_step() {
        // leapfrog on a unit-sd coordinate is unstable for ε > 2
        let target = Gaussian { sd: vec![1.0, 0.1] };
        let cfg = HmcConfig::new(1.0, 10, 400, 100, 4).with_pilot(StepSizePilot::default());
        let c = hmc_sample(&target, &cfg, &[0.0, 0.0]).unwrap();
        let eps = c.settings().epsilon.unwrap();
        assert!(eps < 0.2 && eps >= 1.0 / 4096.0, "{eps}");
        assert!(c.acceptance_rate() > 0.6);
        let stable = HmcConfig::new(0.01, 10, 200, 0, 4).with_pilot(StepSizePilot::default());
        assert_eq!(
            hmc_sample(&target, &stable, &[0.0, 0.0])
                .unwrap()
                .settings()
                .epsilon,
            Some(0.01)
        );
    }

    #[test]
    fn dense_metric_kinetic_energy() {
        let m = Matrix::from_row_major(2, vec![2.0, 0.5, 0.5, 1.0]).unwrap();
        let metric = Metric::Dense(FisherMetric::new(m).unwrap());
        // M⁻¹ = [1, -0.5; -0.5, 2] / 1.75
        let p = [1.0, 2.0];
        let expected = 0.5 * (1.0 - 2.0 + 8.0) / 1.75;
        assert!((metric.kinetic(&p) - expected).abs() < 1e-14);
    }

    #[test]
    fn out_of_support_init_is_rejected() {
        struct HalfLine;
        impl LogDensity for HalfLine {
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
        let cfg = HmcConfig::new(0.5, 20, 2000, 0, 9);
        assert_eq!(
            hmc_sample(&HalfLine, &cfg, &[-1.0]).unwrap_err(),
            Error::InitOutOfSupport
        );
        let c = hmc_sample(&HalfLine, &cfg, &[1.0]).unwrap();
        assert!(c.divergences() > 0);
        assert!(c.column(0).iter().all(|&x| x > 0.0));
    }
}
