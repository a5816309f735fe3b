//! Annual loss-count laws and their marginalised mixing weights.
//!
//! Six models: binomial, negative binomial and Poisson, plus their doubly
//! stochastic versions where the success probability is Beta-mixed or the
//! Poisson rate is Gamma-mixed. For the doubly stochastic laws the mixing
//! parameter integrates out in closed form through Beta/Gamma conjugacy, so
//! every probability here is an explicit ratio of Gamma/Beta functions,
//! computed entirely in log space.
//!
//! Conventions that matter:
//!
//! * `NegBinomial { r, p }` has `pmf(n) = C(n+r-1, n) (1-p)^r p^n`, so `p` is
//!   the continuation probability and the mean is `r p / (1-p)`.
//! * `BetaNegBinomial { r, a, b }` marginalises the likelihood
//!   `C(n+r-1, n) q^r (1-q)^n` over `q ~ Beta(a, b)` (posterior
//!   `Beta(a+r, b+n)`), giving `pmf(n) = C(n+r-1, n) B(a+r, b+n) / B(a, b)`.
//!   Its count tail is a power law `~ n^-(a+1)`: for `a <= 1` the mean is
//!   infinite, which the rest of the crate must (and does) survive.
//! * `PoissonGamma { shape, rate }` mixes the rate, `lambda ~ Gamma(shape,
//!   rate)`; the marginal equals a negative binomial with `r = shape` and
//!   continuation probability `1 / (1 + rate)`, term for term.
//! * `r` is restricted to positive integers, keeping all weights in
//!   factorial form.

use rand::Rng;
use rand_distr::{Beta, Binomial, Distribution, Gamma, Geometric, Poisson};

use crate::fm;
use crate::special::{ln_beta_raw, ln_gamma_ratio, ln_gamma_raw};

/// Errors from count-model validation and evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrequencyError {
    /// A parameter violates its constraint; carries the field name.
    InvalidParameter(&'static str),
    /// Count beyond the model's finite support.
    CountAboveSupport { n: u64, max: u64 },
}

impl core::fmt::Display for FrequencyError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FrequencyError::InvalidParameter(name) => {
                write!(f, "invalid frequency parameter: {name}")
            }
            FrequencyError::CountAboveSupport { n, max } => {
                write!(f, "count {n} above the support maximum {max}")
            }
        }
    }
}

impl core::error::Error for FrequencyError {}

/// Tagged union over the six counting laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrequencyModel {
    /// `Bi(M, p)`: `M` trials, success probability `p`.
    Binomial { trials: u64, p: f64 },
    /// `Bi(M, p)` with `p ~ Beta(alpha, beta)` marginalised out.
    BetaBinomial { trials: u64, alpha: f64, beta: f64 },
    /// `NB(r, p)`: `pmf(n) = C(n+r-1, n) (1-p)^r p^n`.
    NegBinomial { r: u64, p: f64 },
    /// `NB(r, q)` with the success probability `q ~ Beta(alpha, beta)`
    /// marginalised out.
    BetaNegBinomial { r: u64, alpha: f64, beta: f64 },
    /// `Po(lambda)`.
    Poisson { lambda: f64 },
    /// `Po(lambda)` with `lambda ~ Gamma(shape, rate)` marginalised out.
    /// `rate` is a rate, not a scale.
    PoissonGamma { shape: f64, rate: f64 },
}

fn prob_open(p: f64, name: &'static str) -> Result<(), FrequencyError> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(FrequencyError::InvalidParameter(name))
    }
}

fn positive(x: f64, name: &'static str) -> Result<(), FrequencyError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(FrequencyError::InvalidParameter(name))
    }
}

impl FrequencyModel {
    /// Check all parameter constraints.
    pub fn validate(&self) -> Result<(), FrequencyError> {
        match *self {
            FrequencyModel::Binomial { trials, p } => {
                if trials == 0 {
                    return Err(FrequencyError::InvalidParameter("trials"));
                }
                prob_open(p, "p")
            }
            FrequencyModel::BetaBinomial { trials, alpha, beta } => {
                if trials == 0 {
                    return Err(FrequencyError::InvalidParameter("trials"));
                }
                positive(alpha, "alpha")?;
                positive(beta, "beta")
            }
            FrequencyModel::NegBinomial { r, p } => {
                if r == 0 {
                    return Err(FrequencyError::InvalidParameter("r"));
                }
                prob_open(p, "p")
            }
            FrequencyModel::BetaNegBinomial { r, alpha, beta } => {
                if r == 0 {
                    return Err(FrequencyError::InvalidParameter("r"));
                }
                positive(alpha, "alpha")?;
                positive(beta, "beta")
            }
            FrequencyModel::Poisson { lambda } => positive(lambda, "lambda"),
            FrequencyModel::PoissonGamma { shape, rate } => {
                positive(shape, "gamma_shape")?;
                positive(rate, "gamma_rate")
            }
        }
    }

    /// Largest supported count, for the binomial family.
    pub fn support_max(&self) -> Option<u64> {
        match *self {
            FrequencyModel::Binomial { trials, .. }
            | FrequencyModel::BetaBinomial { trials, .. } => Some(trials),
            _ => None,
        }
    }

    /// Mean count; `None` when infinite (beta-negative-binomial with
    /// `alpha <= 1`).
    pub fn mean(&self) -> Option<f64> {
        match *self {
            FrequencyModel::Binomial { trials, p } => Some(trials as f64 * p),
            FrequencyModel::BetaBinomial { trials, alpha, beta } => {
                Some(trials as f64 * alpha / (alpha + beta))
            }
            FrequencyModel::NegBinomial { r, p } => Some(r as f64 * p / (1.0 - p)),
            FrequencyModel::BetaNegBinomial { r, alpha, beta } => {
                (alpha > 1.0).then(|| r as f64 * beta / (alpha - 1.0))
            }
            FrequencyModel::Poisson { lambda } => Some(lambda),
            FrequencyModel::PoissonGamma { shape, rate } => Some(shape / rate),
        }
    }

    /// Log-probability of observing `n` events.
    pub fn log_pmf(&self, n: u64) -> Result<f64, FrequencyError> {
        if let Some(max) = self.support_max() {
            if n > max {
                return Err(FrequencyError::CountAboveSupport { n, max });
            }
        }
        Ok(self.ln_pmf_unchecked(n))
    }

    /// Probability of observing `n` events.
    pub fn pmf(&self, n: u64) -> Result<f64, FrequencyError> {
        self.log_pmf(n).map(fm::exp)
    }

    /// Point mass at zero events (the atom of the compound distribution).
    pub fn zero_prob(&self) -> f64 {
        fm::exp(self.ln_pmf_unchecked(0))
    }

    /// `ln pmf(n)` without the support check. Counts beyond a binomial
    /// support yield `-inf`.
    pub(crate) fn ln_pmf_unchecked(&self, n: u64) -> f64 {
        let nf = n as f64;
        match *self {
            FrequencyModel::Binomial { trials, p } => {
                if n > trials {
                    return f64::NEG_INFINITY;
                }
                let m = trials as f64;
                ln_choose(m, nf) + nf * fm::ln(p) + (m - nf) * fm::ln_1p(-p)
            }
            FrequencyModel::BetaBinomial { trials, alpha, beta } => {
                if n > trials {
                    return f64::NEG_INFINITY;
                }
                let m = trials as f64;
                ln_choose(m, nf) + ln_beta_raw(alpha + nf, beta + m - nf)
                    - ln_beta_raw(alpha, beta)
            }
            FrequencyModel::NegBinomial { r, p } => {
                let rf = r as f64;
                ln_choose(nf + rf - 1.0, nf) + rf * fm::ln_1p(-p) + nf * fm::ln(p)
            }
            FrequencyModel::BetaNegBinomial { .. } => {
                // Written with Gamma-ratio differences so it stays accurate
                // for counts far beyond 2^53 (the power-law tail reaches
                // there before the truncation threshold does).
                self.beta_nb_ln_pmf_real(nf)
            }
            FrequencyModel::Poisson { lambda } => {
                -lambda + nf * fm::ln(lambda) - ln_gamma_raw(nf + 1.0)
            }
            FrequencyModel::PoissonGamma { shape, rate } => {
                ln_gamma_raw(shape + nf) - ln_gamma_raw(shape) - ln_gamma_raw(nf + 1.0)
                    + shape * (fm::ln(rate) - fm::ln_1p(rate))
                    - nf * fm::ln_1p(rate)
            }
        }
    }

    /// `pmf(n+1) / pmf(n)` as an exact rational, for incremental summation.
    pub(crate) fn pmf_ratio(&self, n: u64) -> f64 {
        let nf = n as f64;
        match *self {
            FrequencyModel::Binomial { trials, p } => {
                if n >= trials {
                    return 0.0;
                }
                (trials as f64 - nf) / (nf + 1.0) * p / (1.0 - p)
            }
            FrequencyModel::BetaBinomial { trials, alpha, beta } => {
                if n >= trials {
                    return 0.0;
                }
                let m = trials as f64;
                (m - nf) / (nf + 1.0) * (alpha + nf) / (beta + m - nf - 1.0)
            }
            FrequencyModel::NegBinomial { r, p } => (nf + r as f64) / (nf + 1.0) * p,
            FrequencyModel::BetaNegBinomial { r, alpha, beta } => {
                (nf + r as f64) / (nf + 1.0) * (beta + nf) / (alpha + beta + r as f64 + nf)
            }
            FrequencyModel::Poisson { lambda } => lambda / (nf + 1.0),
            FrequencyModel::PoissonGamma { shape, rate } => {
                (shape + nf) / (nf + 1.0) / (1.0 + rate)
            }
        }
    }

    /// Upper bound on the dropped mass `sum_{n > n0} pmf(n)`.
    ///
    /// Exact (to summation accuracy) for the exponential-tailed models; for
    /// the power-tailed beta-negative-binomial it is an analytic integral
    /// bound, tight to `O(1/n0)` relative.
    pub(crate) fn tail_mass_above(&self, n0: u64) -> f64 {
        if let Some(max) = self.support_max() {
            if n0 >= max {
                return 0.0;
            }
            let mut acc = 0.0;
            let mut w = fm::exp(self.ln_pmf_unchecked(n0 + 1));
            for n in n0 + 1..=max {
                acc += w;
                w *= self.pmf_ratio(n);
            }
            return acc;
        }
        if let FrequencyModel::BetaNegBinomial { alpha, .. } = *self {
            // Power-law tail (~ n^{-(alpha+1)}): direct summation cannot
            // reach the truncation depth, so evaluate the tail by
            // Euler-Maclaurin on the continuous extension of the pmf:
            //   sum_{n > N} g(n) = int_N^inf g - g(N)/2 - g'(N)/12 + O(g''').
            let n0f = n0 as f64;
            let g = |x: f64| fm::exp(self.beta_nb_ln_pmf_real(x));
            // Substitute x = N e^t; the integrand decays like e^{-alpha t}.
            let t_max = (45.0 / alpha).max(60.0);
            let integral = crate::quad::adaptive_simpson(
                |t| {
                    let x = n0f * fm::exp(t);
                    g(x) * x
                },
                0.0,
                t_max,
                1e-12 * g(n0f) * n0f / alpha,
            );
            let h = 1e-4 * n0f;
            let dln = (self.beta_nb_ln_pmf_real(n0f + h) - self.beta_nb_ln_pmf_real(n0f - h))
                / (2.0 * h);
            return (integral - 0.5 * g(n0f) - g(n0f) * dln / 12.0).max(0.0);
        }
        // Geometric-tailed models: sum the recurrence until the remainder
        // bound is negligible.
        let mut acc = 0.0;
        let mut w = fm::exp(self.ln_pmf_unchecked(n0 + 1));
        let mut n = n0 + 1;
        loop {
            acc += w;
            let rho = self.pmf_ratio(n);
            if rho < 1.0 && w * rho / (1.0 - rho) < 1e-18 * (acc + 1e-300) {
                break;
            }
            w *= rho;
            n += 1;
            if n > n0 + 100_000_000 {
                break;
            }
        }
        acc
    }

    /// Beta-negative-binomial log pmf at a real-valued count, the continuous
    /// extension used by the tail quadrature.
    fn beta_nb_ln_pmf_real(&self, x: f64) -> f64 {
        match *self {
            FrequencyModel::BetaNegBinomial { r, alpha, beta } => {
                let rf = r as f64;
                ln_gamma_ratio(x + 1.0, rf - 1.0) - ln_gamma_raw(rf) + ln_gamma_raw(alpha + rf)
                    - ln_gamma_ratio(beta + x, alpha + rf)
                    - ln_beta_raw(alpha, beta)
            }
            _ => unreachable!("only defined for the beta-negative-binomial"),
        }
    }

    /// Mass strictly below `n0` excluding the zero atom:
    /// `sum_{1 <= n < n0} pmf(n)`.
    pub(crate) fn head_mass_below(&self, n0: u64) -> f64 {
        if n0 <= 1 {
            return 0.0;
        }
        let mut acc = 0.0;
        let mut n = n0 - 1;
        let mut w = fm::exp(self.ln_pmf_unchecked(n));
        loop {
            acc += w;
            if n == 1 {
                break;
            }
            // Step downward: pmf(n-1) = pmf(n) / ratio(n-1).
            let rho = self.pmf_ratio(n - 1);
            if rho > 1.0 && w / rho < 1e-18 * (acc + 1e-300) {
                break;
            }
            w /= rho;
            n -= 1;
        }
        acc
    }

    /// Draw one count. Doubly stochastic models are drawn compositionally:
    /// first the mixing parameter, then the conditional count.
    pub fn sample_count<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match *self {
            FrequencyModel::Binomial { trials, p } => {
                Binomial::new(trials, p).expect("validated parameters").sample(rng)
            }
            FrequencyModel::BetaBinomial { trials, alpha, beta } => {
                let p = Beta::new(alpha, beta).expect("validated parameters").sample(rng);
                Binomial::new(trials, p.clamp(0.0, 1.0))
                    .expect("beta draw is a probability")
                    .sample(rng)
            }
            FrequencyModel::NegBinomial { r, p } => {
                sample_neg_binomial(r, 1.0 - p, rng)
            }
            FrequencyModel::BetaNegBinomial { r, alpha, beta } => {
                let q = loop {
                    let q = Beta::new(alpha, beta).expect("validated parameters").sample(rng);
                    if q > 0.0 {
                        break q;
                    }
                };
                sample_neg_binomial(r, q.min(1.0), rng)
            }
            FrequencyModel::Poisson { lambda } => {
                Poisson::new(lambda).expect("validated parameters").sample(rng) as u64
            }
            FrequencyModel::PoissonGamma { shape, rate } => {
                let lambda = Gamma::new(shape, 1.0 / rate)
                    .expect("validated parameters")
                    .sample(rng);
                if lambda > 0.0 {
                    Poisson::new(lambda).expect("positive rate").sample(rng) as u64
                } else {
                    0
                }
            }
        }
    }
}

/// Failures before the `r`-th success at success probability `q`.
fn sample_neg_binomial<R: Rng + ?Sized>(r: u64, q: f64, rng: &mut R) -> u64 {
    if q >= 1.0 {
        return 0;
    }
    let geo = Geometric::new(q).expect("q in (0,1)");
    (0..r).map(|_| geo.sample(rng)).sum()
}

/// `ln C(m, n)` for real `m >= n >= 0`.
fn ln_choose(m: f64, n: f64) -> f64 {
    if n == 0.0 || n == m {
        return 0.0;
    }
    ln_gamma_raw(m + 1.0) - ln_gamma_raw(n + 1.0) - ln_gamma_raw(m - n + 1.0)
}
