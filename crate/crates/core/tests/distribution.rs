// Density normalization by quadrature, quantile/cdf round trips and the
// Gumbel join.

use gevmc_core::{gev_cdf, gev_logpdf, gev_quantile, GevParams};

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (l, r) = (simpson(f, a, m), simpson(f, m, b));
    if depth == 0 || (l + r - whole).abs() <= 15.0 * tol {
        return l + r + (l + r - whole) / 15.0;
    }
    adaptive(f, a, m, l, 0.5 * tol, depth - 1) + adaptive(f, m, b, r, 0.5 * tol, depth - 1)
}

/// Integral over `(0, 1)` of `f`, on 64 panels to keep endpoint behaviour
/// local.
fn integrate_unit(f: &dyn Fn(f64) -> f64) -> f64 {
    let panels = 64;
    (0..panels)
        .map(|k| {
            let (a, b) = (k as f64 / panels as f64, (k + 1) as f64 / panels as f64);
            adaptive(f, a, b, simpson(f, a, b), 1e-13, 40)
        })
        .sum()
}

/// `∫ pdf` over the whole support, mapping each infinite end to `(0, 1)`
/// with `y = c ± t/(1-t)`.
fn total_mass(d: &GevParams) -> f64 {
    let pdf = |y: f64| {
        let v = gev_logpdf(d, y).exp();
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let (lo, hi) = d.support();
    let c = d.mu();
    let right = |from: f64| {
        move |t: f64| {
            if t >= 1.0 {
                0.0
            } else {
                pdf(from + t / (1.0 - t)) / ((1.0 - t) * (1.0 - t))
            }
        }
    };
    let left = |to: f64| {
        move |t: f64| {
            if t >= 1.0 {
                0.0
            } else {
                pdf(to - t / (1.0 - t)) / ((1.0 - t) * (1.0 - t))
            }
        }
    };
    match (lo.is_finite(), hi.is_finite()) {
        (false, false) => integrate_unit(&left(c)) + integrate_unit(&right(c)),
        (true, false) => integrate_unit(&right(lo)),
        (false, true) => integrate_unit(&left(hi)),
        (true, true) => unreachable!(),
    }
}

#[test]
fn density_integrates_to_one() {
    for xi in [-0.75, -0.1, 0.0, 0.5, 1.0] {
        for (mu, sigma) in [(0.0, 1.0), (2.0, 0.5)] {
            let d = GevParams::new(mu, sigma, xi).unwrap();
            let m = total_mass(&d);
            assert!(
                (m - 1.0).abs() < 1e-6,
                "xi={xi} mu={mu} sigma={sigma}: mass {m}"
            );
        }
    }
}

#[test]
fn quantile_and_cdf_invert_each_other() {
    for xi in [-0.75, -0.3, -0.1, 0.0, 1e-9, 0.1, 0.5, 1.0] {
        let d = GevParams::new(1.0, 2.0, xi).unwrap();
        for k in 1..1000 {
            let u = k as f64 / 1000.0;
            let y = gev_quantile(&d, u).unwrap();
            assert!((gev_cdf(&d, y) - u).abs() <= 1e-10, "xi={xi} u={u}");
        }
    }
}

#[test]
fn gumbel_branch_is_continuous() {
    let g = GevParams::new(0.5, 1.5, 0.0).unwrap();
    for eps in [1e-7, -1e-7, 1e-6, -1e-6] {
        let d = GevParams::new(0.5, 1.5, eps).unwrap();
        for k in 0..=80 {
            let y = -3.0 + 0.1 * k as f64;
            assert!(
                (gev_cdf(&d, y) - gev_cdf(&g, y)).abs() <= 1e-6,
                "cdf at {y}, xi={eps}"
            );
            let (a, b) = (gev_logpdf(&d, y).exp(), gev_logpdf(&g, y).exp());
            assert!((a - b).abs() <= 1e-6, "pdf at {y}, xi={eps}");
        }
    }
}
