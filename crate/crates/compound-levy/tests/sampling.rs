//! Distributional checks of the variate generators against the closed forms.

mod common;

use common::*;
use compound_levy::{LevyParams, ParamForm, StableParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const N: usize = 100_000;

fn levy01() -> LevyParams {
    LevyParams::new(0.01, 0.0).unwrap()
}

#[test]
fn cms_sampler_matches_levy_cdf() {
    let p = StableParams::new(0.5, 1.0, 0.01, 0.0, ParamForm::S1).unwrap();
    let levy = levy01();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut sample: Vec<f64> = (0..N).map(|_| p.sample_cms(&mut rng)).collect();
    let d = ks_one_sample(&mut sample, |x| levy.cdf(x));
    assert!(d < ks_critical_1pct(N), "KS = {d}");
}

#[test]
fn inverse_cdf_sampler_matches_cms() {
    let p = StableParams::new(0.5, 1.0, 0.01, 0.0, ParamForm::S1).unwrap();
    let levy = levy01();
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let mut a: Vec<f64> = (0..N).map(|_| p.sample_cms(&mut rng)).collect();
    let mut b: Vec<f64> = (0..N).map(|_| levy.sample_inverse_cdf(&mut rng)).collect();
    let d = ks_two_sample(&mut a, &mut b);
    assert!(d < ks_two_sample_critical_1pct(N, N), "KS = {d}");
}

#[test]
fn inverse_sampler_median() {
    // Sample median near the analytic median, within bootstrap error.
    let levy = levy01();
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut sample: Vec<f64> = (0..N).map(|_| levy.sample_inverse_cdf(&mut rng)).collect();
    sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let med = sample[N / 2];
    // se(median) = 1 / (2 sqrt(n) f(median))
    let se = 1.0 / (2.0 * (N as f64).sqrt() * levy.pdf(levy.median()));
    assert!((med - 0.0219811).abs() < 3.0 * se, "median = {med}");
}

#[test]
fn gaussian_subfamily_variance() {
    // alpha = 2 is the Gaussian member with variance 2 gamma^2.
    let gamma = 1.5;
    let p = StableParams::new(2.0, 0.0, gamma, 0.0, ParamForm::S0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let sample: Vec<f64> = (0..N).map(|_| p.sample_cms(&mut rng)).collect();
    let mean = sample.iter().sum::<f64>() / N as f64;
    let var = sample.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (N - 1) as f64;
    let expect = 2.0 * gamma * gamma;
    // se(var) ~ expect sqrt(2/n)
    assert!((var - expect).abs() < 4.0 * expect * (2.0 / N as f64).sqrt(), "var = {var}");
}

#[test]
fn cauchy_subfamily_median() {
    let p = StableParams::new(1.0, 0.0, 1.0, 0.0, ParamForm::S0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    let mut sample: Vec<f64> = (0..N).map(|_| p.sample_cms(&mut rng)).collect();
    sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let med = sample[N / 2];
    // Cauchy density at the median is 1/pi.
    let se = 1.0 / (2.0 * (N as f64).sqrt() * core::f64::consts::FRAC_1_PI);
    assert!(med.abs() < 3.0 * se, "median = {med}");
}

#[test]
fn convolution_closure_for_small_counts() {
    // Sums of n independent draws follow Levy(n^2 gamma, n delta): the scale
    // roots add and the support points add. A nonzero delta exercises the
    // location bookkeeping.
    let levy = LevyParams::new(0.01, 0.5).unwrap();
    for n in [2usize, 3, 5] {
        let mut rng = ChaCha8Rng::seed_from_u64(47 + n as u64);
        let mut sums: Vec<f64> = (0..N)
            .map(|_| (0..n).map(|_| levy.sample_inverse_cdf(&mut rng)).sum())
            .collect();
        let nf = n as f64;
        let reference = LevyParams::new(nf * nf * 0.01, nf * 0.5).unwrap();
        let mut direct: Vec<f64> = (0..N).map(|_| reference.sample_inverse_cdf(&mut rng)).collect();
        let d2 = ks_two_sample(&mut sums, &mut direct);
        assert!(d2 < ks_two_sample_critical_1pct(N, N), "n = {n}: two-sample KS = {d2}");
        let d1 = ks_one_sample(&mut sums, |x| reference.cdf(x));
        assert!(d1 < ks_critical_1pct(N), "n = {n}: one-sample KS = {d1}");
    }
}

#[test]
fn s0_form_sampling_shifts_support() {
    // An S0-tagged Levy member has its support at delta - gamma; sampling it
    // and checking against the correspondingly shifted support-form CDF pins
    // the parameterization conversion.
    let gamma = 0.01;
    let p = StableParams::new(0.5, 1.0, gamma, 0.0, ParamForm::S0).unwrap();
    let shifted = LevyParams::new(gamma, -gamma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    let mut sample: Vec<f64> = (0..N).map(|_| p.sample_cms(&mut rng)).collect();
    assert!(sample.iter().all(|&x| x > -gamma));
    let d = ks_one_sample(&mut sample, |x| shifted.cdf(x));
    assert!(d < ks_critical_1pct(N), "KS = {d}");
}
