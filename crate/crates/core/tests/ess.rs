// ESS of a Gaussian AR(1) sequence against its closed form.

use gevmc_core::{ess, rng};
use rand::Rng;
use rand_distr::StandardNormal;

#[test]
fn ar1_ess_matches_closed_form() {
    let (rho, n) = (0.9, 100_000);
    let mut r = rng::seeded(99);
    let sd = (1.0f64 - rho * rho).sqrt();
    let mut x = Vec::with_capacity(n);
    let mut v: f64 = r.sample(StandardNormal);
    for _ in 0..n {
        v = rho * v + sd * r.sample::<f64, _>(StandardNormal);
        x.push(v);
    }
    let expected = n as f64 * (1.0 - rho) / (1.0 + rho);
    let got = ess(&x).unwrap();
    assert!(
        (got / expected - 1.0).abs() < 0.15,
        "ess {got}, expected {expected}"
    );
}

#[test]
fn iid_ess_is_close_to_length() {
    let mut r = rng::seeded(5);
    let x: Vec<f64> = (0..20_000).map(|_| r.sample(StandardNormal)).collect();
    let got = ess(&x).unwrap();
    assert!(got > 17_000.0 && got <= 20_000.0, "{got}");
}
