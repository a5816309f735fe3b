//! Shared oracles for the acceptance suite: KS statistics, quadrature, and
//! the twelve reference configurations.

#![allow(dead_code)]

use compound_levy::{CompoundModel, FrequencyModel, LevyParams};

/// The twelve reference parameter settings: six models, low and high
/// frequency, all with severity scale 0.01 and location 0.
pub fn reference_models() -> Vec<(&'static str, CompoundModel)> {
    let severity = LevyParams::new(0.01, 0.0).unwrap();
    let freqs: [(&'static str, FrequencyModel); 12] = [
        ("binomial low", FrequencyModel::Binomial { trials: 12, p: 0.1 }),
        ("binomial-beta low", FrequencyModel::BetaBinomial { trials: 12, alpha: 1.0, beta: 5.0 }),
        ("neg-binomial low", FrequencyModel::NegBinomial { r: 2, p: 0.1 }),
        (
            "neg-binomial-beta low",
            FrequencyModel::BetaNegBinomial { r: 2, alpha: 1.0, beta: 5.0 },
        ),
        ("poisson low", FrequencyModel::Poisson { lambda: 0.1 }),
        ("poisson-gamma low", FrequencyModel::PoissonGamma { shape: 1.0, rate: 0.1 }),
        ("binomial high", FrequencyModel::Binomial { trials: 12, p: 0.6 }),
        ("binomial-beta high", FrequencyModel::BetaBinomial { trials: 12, alpha: 5.0, beta: 1.0 }),
        ("neg-binomial high", FrequencyModel::NegBinomial { r: 10, p: 0.6 }),
        (
            "neg-binomial-beta high",
            FrequencyModel::BetaNegBinomial { r: 10, alpha: 5.0, beta: 1.0 },
        ),
        ("poisson high", FrequencyModel::Poisson { lambda: 10.0 }),
        ("poisson-gamma high", FrequencyModel::PoissonGamma { shape: 1.0, rate: 10.0 }),
    ];
    freqs
        .into_iter()
        .map(|(name, f)| (name, CompoundModel::new(f, severity).unwrap()))
        .collect()
}

/// 200 equally spaced points on [1, 200].
pub fn reference_grid() -> Vec<f64> {
    (1..=200).map(|i| i as f64).collect()
}

/// One-sample KS statistic of `sample` against the CDF `f`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &mut [f64], f: F) -> f64 {
    sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sample.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sample.iter().enumerate() {
        let c = f(x);
        d = d.max(c - i as f64 / n).max((i + 1) as f64 / n - c);
    }
    d
}

/// Two-sample KS statistic, tie-aware.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

pub fn ks_two_sample_critical_1pct(n: usize, m: usize) -> f64 {
    1.6276 * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Adaptive Simpson quadrature with a floating-point noise floor.
pub fn simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64 + Copy>(
        f: F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let err = left + right - whole;
        let floor = 4.0 * f64::EPSILON * (left.abs() + right.abs());
        if depth == 0 || err.abs() <= (15.0 * tol).max(floor) {
            return left + right + err / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm_, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm_ + fb);
    recurse(f, a, b, fa, fm_, fb, whole, tol, 30)
}
