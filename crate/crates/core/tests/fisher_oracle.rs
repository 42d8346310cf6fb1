// Expected information of one GEV observation against a Monte Carlo average
// of finite-difference Hessians of the log density.

use gevmc_core::ar::fisher::{gev_information, SecondMoments};
use gevmc_core::{
    gev_logpdf, gev_sample, map_estimate, simulate_gev_ar, FisherMetric, GevArModel,
    GevArPosterior, GevParams, MapOptions, PriorSpec,
};

fn logpdf(theta: [f64; 3], y: f64) -> f64 {
    match GevParams::new(theta[0], theta[1], theta[2]) {
        Ok(d) => gev_logpdf(&d, y),
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Negative Hessian of the log density at `theta` by central differences.
fn neg_hessian(theta: [f64; 3], y: f64, h: f64) -> Option<[[f64; 3]; 3]> {
    let f = |d: [f64; 3]| logpdf([theta[0] + d[0], theta[1] + d[1], theta[2] + d[2]], y);
    let mut out = [[0.0; 3]; 3];
    let f0 = f([0.0; 3]);
    for i in 0..3 {
        for j in i..3 {
            let v = if i == j {
                let mut e = [0.0; 3];
                e[i] = h;
                let mut m = [0.0; 3];
                m[i] = -h;
                (f(e) - 2.0 * f0 + f(m)) / (h * h)
            } else {
                let mut pp = [0.0; 3];
                pp[i] = h;
                pp[j] = h;
                let mut pm = pp;
                pm[j] = -h;
                let mut mp = pp;
                mp[i] = -h;
                let mut mm = pm;
                mm[i] = -h;
                (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h)
            };
            if !v.is_finite() {
                return None;
            }
            out[i][j] = -v;
            out[j][i] = -v;
        }
    }
    Some(out)
}

#[test]
fn iid_information_matches_monte_carlo() {
    let theta = [0.0, 1.0, 0.3];
    let ys = gev_sample(
        &GevParams::new(theta[0], theta[1], theta[2]).unwrap(),
        1_000_000,
        2718,
    );
    let mut acc = [[0.0; 3]; 3];
    let mut used = 0usize;
    for &y in &ys {
        if let Some(h) = neg_hessian(theta, y, 1e-4) {
            for i in 0..3 {
                for j in 0..3 {
                    acc[i][j] += h[i][j];
                }
            }
            used += 1;
        }
    }
    assert!(
        used as f64 > 0.9999 * ys.len() as f64,
        "{used} usable points"
    );
    let info = gev_information(theta[1], theta[2]).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let mc = acc[i][j] / used as f64;
            let exact = info[(i, j)];
            assert!(
                (mc - exact).abs() <= 0.02 * exact.abs(),
                "entry ({i},{j}): mc {mc} vs {exact}"
            );
        }
    }
}

#[test]
fn ar_metric_is_positive_definite_at_the_map_of_study_data() {
    let models = [
        GevArModel::new(-1.0, vec![0.8], 1.0, 0.3).unwrap(),
        GevArModel::new(-1.0, vec![0.9, -0.8], 1.0, 0.3).unwrap(),
        GevArModel::new(-1.0, vec![-1.56, -0.55, 0.04], 1.0, 0.3).unwrap(),
    ];
    for (k, m) in models.iter().enumerate() {
        let p = m.p();
        for (r, n) in [60, 150, 300].into_iter().enumerate() {
            let ts = simulate_gev_ar(m, n, (10 * k + r) as u64, 500).unwrap();
            let post = GevArPosterior::new(ts.clone(), p, PriorSpec::ar_default(p)).unwrap();
            let map = map_estimate(
                &post,
                &post.default_init().into_values(),
                &MapOptions::default(),
            )
            .unwrap();
            let at = GevArModel::from_slice(&gevmc_core::LogDensity::constrain(&post, &map.point))
                .unwrap();
            let moments = if p >= 3 {
                SecondMoments::from_series(&ts, p)
            } else {
                SecondMoments::YuleWalker
            };
            let g = FisherMetric::ar(&at, n - p, &moments, post.prior()).unwrap();
            assert!(g.matrix().is_symmetric(1e-12), "model {k}, n={n}");
        }
    }
}
