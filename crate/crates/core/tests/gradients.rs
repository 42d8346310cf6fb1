// Analytic posterior gradients against central finite differences on random
// valid instances.

use gevmc_core::gev::transform::UnconstrainedVector;
use gevmc_core::rng;
use gevmc_core::{
    gev_sample, simulate_gev_ar, stationarity_check, GevArModel, GevArPosterior, GevParams,
    IidGevPosterior, LogDensity, PriorSpec,
};
use rand::Rng;

const H: f64 = 1e-6;
const TOL: f64 = 1e-4;

/// Largest `|g - fd| / max(|fd|, 1)` over coordinates, or `None` if `x` is
/// not an interior point.
fn worst_error<D: LogDensity>(target: &D, x: &[f64]) -> Option<f64> {
    let mut g = vec![0.0; x.len()];
    if !target.ln_density_and_grad(x, &mut g).is_finite() {
        return None;
    }
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let mut up = x.to_vec();
        let mut dn = x.to_vec();
        up[i] += H;
        dn[i] -= H;
        let (a, b) = (target.ln_density(&up), target.ln_density(&dn));
        if !a.is_finite() || !b.is_finite() {
            return None;
        }
        let fd = (a - b) / (2.0 * H);
        worst = worst.max((g[i] - fd).abs() / fd.abs().max(1.0));
    }
    Some(worst)
}

#[test]
fn iid_gradient_on_100_random_instances() {
    let mut r = rng::seeded(2024);
    let mut done = 0;
    while done < 100 {
        let truth = GevParams::new(
            r.random_range(-5.0..5.0),
            r.random_range(0.2..4.0),
            r.random_range(-0.45..0.8),
        )
        .unwrap();
        let data = gev_sample(&truth, r.random_range(5..120), r.random());
        let post = IidGevPosterior::new(data, PriorSpec::iid_default()).unwrap();
        let mut x = UnconstrainedVector::from_iid(&truth).into_values();
        for v in &mut x {
            *v += r.random_range(-0.05..0.05);
        }
        if let Some(e) = worst_error(&post, &x) {
            assert!(e < TOL, "instance {done}: relative error {e} at {x:?}");
            done += 1;
        }
    }
}

#[test]
fn ar_gradient_on_100_random_instances_per_order() {
    let mut r = rng::seeded(7);
    for p in 1..=3 {
        let mut done = 0;
        while done < 100 {
            let theta: Vec<f64> = (0..p).map(|_| r.random_range(-0.9..0.9)).collect();
            if !stationarity_check(&theta) {
                continue;
            }
            let model = GevArModel::new(
                r.random_range(-3.0..3.0),
                theta,
                r.random_range(0.3..3.0),
                r.random_range(-0.45..0.45),
            )
            .unwrap();
            let ts = simulate_gev_ar(&model, r.random_range(p + 20..150), r.random(), 200).unwrap();
            let post = GevArPosterior::new(ts, p, PriorSpec::ar_default(p)).unwrap();
            let mut x = UnconstrainedVector::from_ar(&model).unwrap().into_values();
            for v in &mut x {
                *v += r.random_range(-0.02..0.02);
            }
            if let Some(e) = worst_error(&post, &x) {
                assert!(e < TOL, "p={p} instance {done}: relative error {e}");
                done += 1;
            }
        }
    }
}
