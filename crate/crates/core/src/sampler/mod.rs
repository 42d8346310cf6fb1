//! Posterior samplers and the MAP optimizer.
//!
//! Every sampler works on an unconstrained space through [`LogDensity`] and
//! stores natural-scale draws (via [`LogDensity::constrain`]) in a
//! [`SampleChain`].

pub mod hmc;
pub mod map;
pub mod rwm;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

/// An unnormalized log density on ℝ^d.
///
/// Non-finite return values mean "outside the support"; samplers reject such
/// points and the gradient buffer is then unspecified.
pub trait LogDensity {
    fn dim(&self) -> usize;

    fn ln_density(&self, x: &[f64]) -> f64;

    /// Log density at `x`, writing its gradient into `grad`.
    fn ln_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64;

    /// Natural-scale parameters for a point of the sampling space.
    fn constrain(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    fn param_names(&self) -> Vec<String> {
        (0..self.dim()).map(|i| format!("x{i}")).collect()
    }
}

impl<T: LogDensity + ?Sized> LogDensity for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn ln_density(&self, x: &[f64]) -> f64 {
        (**self).ln_density(x)
    }
    fn ln_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (**self).ln_density_and_grad(x, grad)
    }
    fn constrain(&self, x: &[f64]) -> Vec<f64> {
        (**self).constrain(x)
    }
    fn param_names(&self) -> Vec<String> {
        (**self).param_names()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SamplerKind {
    Rwm,
    Hmc,
    Rmhmc,
    /// Draws read back from a file.
    External,
}

impl SamplerKind {
    pub fn label(&self) -> &'static str {
        match self {
            SamplerKind::Rwm => "mh",
            SamplerKind::Hmc => "hmc",
            SamplerKind::Rmhmc => "rmhmc",
            SamplerKind::External => "external",
        }
    }
}

/// Settings a chain was produced with.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChainSettings {
    pub seed: u64,
    pub iterations: usize,
    pub burn_in: usize,
    pub epsilon: Option<f64>,
    pub leapfrog_steps: Option<usize>,
    pub proposal_sds: Option<Vec<f64>>,
}

/// Retained draws, iteration-major, on the natural scale.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleChain {
    names: Vec<String>,
    draws: Vec<f64>,
    sampler: SamplerKind,
    acceptance_rate: f64,
    divergences: usize,
    settings: ChainSettings,
}

impl SampleChain {
    pub(crate) fn from_parts(
        names: Vec<String>,
        draws: Vec<f64>,
        sampler: SamplerKind,
        acceptance_rate: f64,
        divergences: usize,
        settings: ChainSettings,
    ) -> Self {
        debug_assert!(names.is_empty() || draws.len() % names.len() == 0);
        Self {
            names,
            draws,
            sampler,
            acceptance_rate,
            divergences,
            settings,
        }
    }

    /// A chain of externally produced draws.
    pub fn from_rows(names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let d = names.len();
        if d == 0 {
            return Err(Error::InvalidConfig("chain needs at least one column"));
        }
        let mut draws = Vec::with_capacity(rows.len() * d);
        for r in rows {
            if r.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: r.len(),
                });
            }
            draws.extend_from_slice(r);
        }
        Ok(Self::from_parts(
            names,
            draws,
            SamplerKind::External,
            f64::NAN,
            0,
            ChainSettings {
                iterations: rows.len(),
                ..ChainSettings::default()
            },
        ))
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn len(&self) -> usize {
        if self.names.is_empty() {
            0
        } else {
            self.draws.len() / self.names.len()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.draws[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.draws.chunks_exact(self.dim().max(1))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn sampler(&self) -> SamplerKind {
        self.sampler
    }

    /// Accepted fraction of proposals (coordinate updates for RWM).
    pub fn acceptance_rate(&self) -> f64 {
        self.acceptance_rate
    }

    pub fn divergences(&self) -> usize {
        self.divergences
    }

    pub fn settings(&self) -> &ChainSettings {
        &self.settings
    }

    /// Drops the first `k` retained draws.
    pub fn discard(&self, k: usize) -> Result<Self> {
        if k >= self.len() {
            return Err(Error::ChainTooShort {
                len: self.len(),
                needed: k + 1,
            });
        }
        let mut out = self.clone();
        out.draws = self.draws[k * self.dim()..].to_vec();
        Ok(out)
    }
}

#[cfg(test)]
pub(crate) mod testing {
    use super::LogDensity;

    /// Independent Gaussian with the given standard deviations.
    pub struct Gaussian {
        pub sd: alloc::vec::Vec<f64>,
    }

    impl Gaussian {
        pub fn standard(d: usize) -> Self {
            Self {
                sd: alloc::vec![1.0; d],
            }
        }
    }

    impl LogDensity for Gaussian {
        fn dim(&self) -> usize {
            self.sd.len()
        }
        fn ln_density(&self, x: &[f64]) -> f64 {
            x.iter()
                .zip(&self.sd)
                .map(|(v, s)| -0.5 * v * v / (s * s))
                .sum()
        }
        fn ln_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
            for i in 0..x.len() {
                grad[i] = -x[i] / (self.sd[i] * self.sd[i]);
            }
            self.ln_density(x)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn chain_rows_and_discard() {
        let names = vec!["a".to_string(), "b".to_string()];
        let c = SampleChain::from_rows(names, &[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]])
            .unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.column(1), vec![2.0, 4.0, 6.0]);
        let d = c.discard(2).unwrap();
        assert_eq!(d.row(0), &[5.0, 6.0]);
        assert!(c.discard(3).is_err());
        assert!(SampleChain::from_rows(vec!["a".to_string()], &[vec![1.0, 2.0]]).is_err());
    }
}
