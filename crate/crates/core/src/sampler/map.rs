//! Posterior mode by quasi-Newton ascent.
//!
//! BFGS on `-log π` with a backtracking Armijo line search. Every trial point
//! outside the support is treated as a failed trial, so the iterates never
//! leave it. When the quasi-Newton direction cannot make progress the inverse
//! Hessian approximation is reset and plain gradient ascent is tried.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::LogDensity;
use crate::{Error, Result};

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MapOptions {
    /// Stop when the Euclidean norm of the gradient falls below this.
    pub tolerance: f64,
    pub max_iters: usize,
}

impl Default for MapOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iters: 5000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MapEstimate {
    pub point: Vec<f64>,
    pub ln_density: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    /// `false` if the iteration limit was hit or the line search stalled
    /// before the gradient tolerance was met.
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

enum Search {
    Accepted(f64),
    /// Every trial was outside the support.
    AllOutside,
    /// Some trials were valid but none gave sufficient increase.
    Stalled,
}

#[allow(clippy::too_many_arguments)]
fn line_search<D: LogDensity + ?Sized>(
    target: &D,
    x: &[f64],
    f: f64,
    g: &[f64],
    d: &[f64],
    x_new: &mut [f64],
    g_new: &mut [f64],
) -> Search {
    let slope = dot(g, d);
    let mut t = 1.0;
    let mut any_valid = false;
    for _ in 0..MAX_HALVINGS {
        for i in 0..x.len() {
            x_new[i] = x[i] + t * d[i];
        }
        let f_new = target.ln_density_and_grad(x_new, g_new);
        if f_new.is_finite() && g_new.iter().all(|v| v.is_finite()) {
            any_valid = true;
            // near the optimum the change in f drops below rounding error,
            // so a step that keeps f within that error and shrinks the
            // gradient is also accepted
            let flat = (f_new - f).abs() <= 1e-12 * (f.abs() + 1.0) && norm(g_new) < norm(g);
            if f_new >= f + ARMIJO * t * slope || flat {
                return Search::Accepted(f_new);
            }
        }
        t *= 0.5;
    }
    if any_valid {
        Search::Stalled
    } else {
        Search::AllOutside
    }
}

pub fn map_estimate<D: LogDensity + ?Sized>(
    target: &D,
    init: &[f64],
    options: &MapOptions,
) -> Result<MapEstimate> {
    let n = target.dim();
    if init.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: init.len(),
        });
    }
    let mut x = init.to_vec();
    let mut g = vec![0.0; n];
    let mut f = target.ln_density_and_grad(&x, &mut g);
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::InitOutOfSupport);
    }
    // inverse Hessian approximation of -log π, row-major
    let mut h = identity(n);
    let mut fresh = true;
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut iterations = 0;
    while iterations < options.max_iters {
        if norm(&g) < options.tolerance {
            break;
        }
        iterations += 1;
        mat_vec(&h, &g, &mut d);
        if !(dot(&g, &d) > 0.0) {
            h = identity(n);
            fresh = true;
            d.copy_from_slice(&g);
        }
        let mut outcome = line_search(target, &x, f, &g, &d, &mut x_new, &mut g_new);
        if !matches!(outcome, Search::Accepted(_)) && !fresh {
            h = identity(n);
            fresh = true;
            d.copy_from_slice(&g);
            outcome = line_search(target, &x, f, &g, &d, &mut x_new, &mut g_new);
        }
        let f_new = match outcome {
            Search::Accepted(v) => v,
            Search::AllOutside => {
                return Err(Error::MapFailed {
                    iterations,
                    last: x,
                })
            }
            Search::Stalled => break,
        };
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        // gradient change of -log π
        let y: Vec<f64> = g.iter().zip(&g_new).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            if fresh {
                let scale = sy / dot(&y, &y);
                for v in h.iter_mut() {
                    *v *= scale;
                }
            }
            bfgs_update(&mut h, &s, &y, sy);
            fresh = false;
        }
        x.copy_from_slice(&x_new);
        g.copy_from_slice(&g_new);
        f = f_new;
    }
    let grad_norm = norm(&g);
    Ok(MapEstimate {
        point: x,
        ln_density: f,
        grad_norm,
        iterations,
        converged: grad_norm < options.tolerance,
    })
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

fn mat_vec(h: &[f64], v: &[f64], out: &mut [f64]) {
    let n = v.len();
    for i in 0..n {
        out[i] = dot(&h[i * n..(i + 1) * n], v);
    }
}

/// `H ← (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ` with `ρ = 1/(yᵀs)`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let mut hy = vec![0.0; n];
    mat_vec(h, y, &mut hy);
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] +=
                -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}
