// Leapfrog reversibility and second-order energy error.

use gevmc_core::sampler::hmc::leapfrog;
use gevmc_core::{
    gev_sample, hmc_sample, rng, GevParams, HmcConfig, IidGevPosterior, LogDensity, Metric,
    PriorSpec,
};
use rand::Rng;
use rand_distr::StandardNormal;

struct Normal3;

impl LogDensity for Normal3 {
    fn dim(&self) -> usize {
        3
    }
    fn ln_density(&self, x: &[f64]) -> f64 {
        -0.5 * x.iter().map(|v| v * v).sum::<f64>()
    }
    fn ln_density_and_grad(&self, x: &[f64], g: &mut [f64]) -> f64 {
        for (gi, xi) in g.iter_mut().zip(x) {
            *gi = -xi;
        }
        self.ln_density(x)
    }
}

fn hamiltonian<D: LogDensity>(t: &D, x: &[f64], p: &[f64]) -> f64 {
    -t.ln_density(x) + 0.5 * p.iter().map(|v| v * v).sum::<f64>()
}

/// Mean `|ΔH|` over trajectories of length `eps * steps` from each start.
fn mean_energy_error<D: LogDensity>(
    t: &D,
    starts: &[(Vec<f64>, Vec<f64>)],
    eps: f64,
    steps: usize,
) -> f64 {
    let metric = Metric::Scalar(1.0);
    let mut sum = 0.0;
    for (x0, p0) in starts {
        let (mut x, mut p) = (x0.clone(), p0.clone());
        let mut g = vec![0.0; x.len()];
        t.ln_density_and_grad(&x, &mut g);
        leapfrog(t, &metric, &mut x, &mut p, &mut g, eps, steps).expect("stable trajectory");
        sum += (hamiltonian(t, &x, &p) - hamiltonian(t, x0, p0)).abs();
    }
    sum / starts.len() as f64
}

fn momenta(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng::seeded(seed);
    (0..n)
        .map(|_| (0..d).map(|_| r.sample(StandardNormal)).collect())
        .collect()
}

fn port_pirie_like() -> IidGevPosterior {
    let data = gev_sample(&GevParams::new(3.87, 0.2, -0.05).unwrap(), 65, 31);
    IidGevPosterior::new(data, PriorSpec::iid_default()).unwrap()
}

#[test]
fn leapfrog_reversibility() {
    let post = port_pirie_like();
    let draws = hmc_sample(
        &post,
        &HmcConfig::new(0.005, 20, 300, 100, 4),
        &[3.87, (0.2f64).ln(), 0.0],
    )
    .unwrap();
    let metric = Metric::Scalar(1.0);
    let ps = momenta(50, 3, 9);
    for (i, p0) in ps.iter().enumerate() {
        let x0 = gevmc_core::gev::transform::UnconstrainedVector::from_iid(
            &GevParams::new(
                draws.row(4 * i)[0],
                draws.row(4 * i)[1],
                draws.row(4 * i)[2],
            )
            .unwrap(),
        )
        .into_values();
        let (mut x, mut p) = (x0.clone(), p0.clone());
        let mut g = vec![0.0; 3];
        post.ln_density_and_grad(&x, &mut g);
        leapfrog(&post, &metric, &mut x, &mut p, &mut g, 0.005, 30).unwrap();
        p.iter_mut().for_each(|v| *v = -*v);
        leapfrog(&post, &metric, &mut x, &mut p, &mut g, 0.005, 30).unwrap();
        for k in 0..3 {
            assert!(
                (x[k] - x0[k]).abs() <= 1e-10,
                "position {k}: {} vs {}",
                x[k],
                x0[k]
            );
            assert!((p[k] + p0[k]).abs() <= 1e-10, "momentum {k}");
        }
    }
}

#[test]
fn energy_error_quarters_when_the_step_halves_on_a_gaussian() {
    let mut r = rng::seeded(1);
    let ps = momenta(200, 3, 2);
    let starts: Vec<_> = ps
        .into_iter()
        .map(|p| ((0..3).map(|_| r.sample(StandardNormal)).collect(), p))
        .collect();
    let coarse = mean_energy_error(&Normal3, &starts, 0.2, 10);
    let fine = mean_energy_error(&Normal3, &starts, 0.1, 20);
    let ratio = coarse / fine;
    assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn energy_error_quarters_when_the_step_halves_on_a_gev_posterior() {
    let post = port_pirie_like();
    let chain = hmc_sample(
        &post,
        &HmcConfig::new(0.005, 20, 1200, 200, 8),
        &[3.87, (0.2f64).ln(), 0.0],
    )
    .unwrap();
    let ps = momenta(200, 3, 3);
    let starts: Vec<_> = ps
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let row = chain.row(5 * i);
            let x = gevmc_core::gev::transform::UnconstrainedVector::from_iid(
                &GevParams::new(row[0], row[1], row[2]).unwrap(),
            )
            .into_values();
            (x, p)
        })
        .collect();
    let coarse = mean_energy_error(&post, &starts, 0.004, 25);
    let fine = mean_energy_error(&post, &starts, 0.002, 50);
    let ratio = coarse / fine;
    assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
}
