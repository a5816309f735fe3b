//! Closed-form annual-loss distribution for one risk cell.
//!
//! The annual loss `Z = X_1 + ... + X_N` with Levy severities is a mixture:
//! conditional on `N = n` the sum of `n` independent `Levy(gamma, delta)`
//! draws is `Levy(n^2 gamma, n delta)` (the scale roots add, the support
//! points add), so
//!
//! ```text
//! P(Z <= z) = P(N = 0) + sum_n P(N = n) erfc( sqrt(n^2 gamma / (2 (z - n delta))) )
//! ```
//!
//! with each term active only for `z` above the component's support point.
//! The series is truncated where its weights fall `e^-37` below their peak;
//! the retained index window is chosen once per model by
//! [`CompoundModel::bounds`] and the dropped probability mass is available
//! from [`CompoundModel::dropped_mass`].
//!
//! Series weights follow the per-model forms of the source theory: the
//! Poisson weight carries the extra factor `n` contributed by the component
//! scale root (`lambda^n / (n-1)!` shape), the negative-binomial and
//! gamma-mixed-Poisson weights are the plain count probabilities, and the
//! finite-support binomial family is always capped at its trial count. These
//! choices reproduce the reference truncation indices exactly.

use crate::fm;
use crate::frequency::{FrequencyError, FrequencyModel};
use crate::roots::bisect_quantile;
use crate::special;
use crate::stable::{LevyParams, StableError};

/// Default log-threshold for dropping series terms relative to the peak.
pub const DEFAULT_THRESHOLD_LOG: f64 = -37.0;

/// `sin(pi/4) Gamma(1/2) / pi = 1 / sqrt(2 pi)`, the `alpha = 1/2` tail
/// constant.
const C_HALF: f64 = 0.3989422804014327;

/// erfc arguments beyond this contribute less than `1e-29` of a term's
/// weight and are skipped.
const ERFC_CUT: f64 = 8.0;

/// Retained index window of the mixture series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationBounds {
    /// First retained index (`>= 1`; the zero atom is carried separately).
    pub n_lower: u64,
    /// Index of the peak series weight.
    pub n_mode: u64,
    /// Last retained index: the first index at or below the threshold
    /// (capped at the trial count for binomial-family frequencies).
    pub n_upper: u64,
    /// Log of the relative drop threshold (default `-37`).
    pub threshold_log: f64,
}

/// One Levy term of the mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureComponent {
    /// Count index (total count across cells for aggregated mixtures).
    pub n: u64,
    /// Mixing probability.
    pub weight: f64,
    /// Component scale.
    pub gamma: f64,
    /// Component support point.
    pub delta: f64,
}

impl MixtureComponent {
    pub fn levy(&self) -> LevyParams {
        LevyParams { gamma: self.gamma, delta: self.delta }
    }
}

/// Errors from compound-model construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelError {
    Frequency(FrequencyError),
    Severity(StableError),
    /// Threshold log must be finite and negative.
    InvalidThreshold(f64),
}

impl core::fmt::Display for ModelError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ModelError::Frequency(e) => write!(f, "frequency: {e}"),
            ModelError::Severity(e) => write!(f, "severity: {e}"),
            ModelError::InvalidThreshold(t) => {
                write!(f, "threshold_log = {t} must be finite and negative")
            }
        }
    }
}

impl core::error::Error for ModelError {}

impl From<FrequencyError> for ModelError {
    fn from(e: FrequencyError) -> Self {
        ModelError::Frequency(e)
    }
}

/// Errors from quantile inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuantileError {
    /// Probability level outside `(0, 1)`.
    OutOfDomain(f64),
    /// Level not resolvable at the current truncation: `q` exceeds the mass
    /// actually retained by the series.
    Unresolvable { q: f64, attainable: f64 },
}

impl core::fmt::Display for QuantileError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            QuantileError::OutOfDomain(q) => write!(f, "quantile level {q} outside (0, 1)"),
            QuantileError::Unresolvable { q, attainable } => write!(
                f,
                "quantile level {q} not resolvable at current truncation (retained mass {attainable})"
            ),
        }
    }
}

impl core::error::Error for QuantileError {}

/// Tail conditional expectation of an annual loss.
///
/// With `alpha = 1/2` severities the loss has infinite mean, so the expected
/// shortfall diverges at every level; the API says so instead of inventing a
/// number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailExpectation {
    Divergent,
}

/// One risk cell: a counting law, a Levy severity, and the retained series
/// window. Immutable after construction; evaluation is pure and thread-safe.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundModel {
    frequency: FrequencyModel,
    severity: LevyParams,
    bounds: TruncationBounds,
}

impl CompoundModel {
    pub fn new(frequency: FrequencyModel, severity: LevyParams) -> Result<Self, ModelError> {
        Self::with_threshold_log(frequency, severity, DEFAULT_THRESHOLD_LOG)
    }

    /// Build with a custom drop threshold (log scale, must be negative).
    pub fn with_threshold_log(
        frequency: FrequencyModel,
        severity: LevyParams,
        threshold_log: f64,
    ) -> Result<Self, ModelError> {
        frequency.validate()?;
        if !(severity.gamma > 0.0 && severity.gamma.is_finite() && severity.delta.is_finite()) {
            return Err(ModelError::Severity(StableError::InvalidScale(severity.gamma)));
        }
        if !(threshold_log < 0.0 && threshold_log.is_finite()) {
            return Err(ModelError::InvalidThreshold(threshold_log));
        }
        let bounds = compute_bounds(&frequency, threshold_log);
        Ok(CompoundModel { frequency, severity, bounds })
    }

    pub fn frequency(&self) -> &FrequencyModel {
        &self.frequency
    }

    pub fn severity(&self) -> LevyParams {
        self.severity
    }

    pub fn bounds(&self) -> TruncationBounds {
        self.bounds
    }

    /// The point mass at zero, `P(N = 0)`.
    pub fn zero_prob(&self) -> f64 {
        self.frequency.zero_prob()
    }

    /// The `n`-th mixture component: weight `P(N = n)`, scale `n^2 gamma`,
    /// support point `n delta`.
    pub fn component(&self, n: u64) -> MixtureComponent {
        let nf = n as f64;
        MixtureComponent {
            n,
            weight: fm::exp(self.frequency.ln_pmf_unchecked(n)),
            gamma: nf * nf * self.severity.gamma,
            delta: nf * self.severity.delta,
        }
    }

    /// Retained components, lazily. The window can be astronomically wide
    /// for power-tailed counting laws; collect with care.
    pub fn components(&self) -> impl Iterator<Item = MixtureComponent> + '_ {
        (self.bounds.n_lower..=self.bounds.n_upper).map(|n| self.component(n))
    }

    /// Largest index whose component can contribute at `z`: beyond it the
    /// erfc argument exceeds [`ERFC_CUT`]. `None` means no cutoff applies.
    fn max_contributing_n(&self, z: f64) -> Option<u64> {
        let g = self.severity.gamma;
        let d = self.severity.delta;
        if d < 0.0 {
            return None;
        }
        if z <= 0.0 {
            return Some(0);
        }
        let t2 = ERFC_CUT * ERFC_CUT;
        let n = (-t2 * d + ERFC_CUT * fm::sqrt(t2 * d * d + 2.0 * g * z)) / g;
        if n >= 9.0e18 {
            None
        } else {
            Some(n as u64 + 1)
        }
    }

    /// Distribution function `P(Z <= z)`.
    pub fn cdf(&self, z: f64) -> f64 {
        self.cdf_with_cap(z, self.bounds.n_upper)
    }

    /// Distribution function with the upper series index forced down to
    /// `cap`, for truncation-error studies.
    pub fn cdf_with_cap(&self, z: f64, cap: u64) -> f64 {
        if z < 0.0 || z.is_nan() {
            return 0.0;
        }
        let mut acc = self.zero_prob();
        let n_hi = match self.max_contributing_n(z) {
            Some(m) => m.min(cap).min(self.bounds.n_upper),
            None => cap.min(self.bounds.n_upper),
        };
        let g = self.severity.gamma;
        let d = self.severity.delta;
        let mut w = WeightIter::new(&self.frequency, self.bounds.n_lower);
        for n in self.bounds.n_lower..=n_hi {
            if n == 0 {
                break;
            }
            let nf = n as f64;
            let den = z - nf * d;
            if den <= 0.0 {
                if d >= 0.0 {
                    break; // support points only move right from here
                }
                w.advance(n);
                continue;
            }
            let arg = nf * fm::sqrt(g / (2.0 * den));
            acc += w.get(n) * special::erfc(arg);
            w.advance(n);
        }
        acc
    }

    /// Density of the continuous part; the atom at zero is reported
    /// separately by [`CompoundModel::zero_prob`]. Zero for `z <= 0`.
    pub fn density(&self, z: f64) -> f64 {
        if z <= 0.0 || z.is_nan() {
            return 0.0;
        }
        let n_hi = match self.max_contributing_n(z) {
            Some(m) => m.min(self.bounds.n_upper),
            None => self.bounds.n_upper,
        };
        let g = self.severity.gamma;
        let d = self.severity.delta;
        let half_gamma_over_pi = 1.0 / (2.0 * core::f64::consts::PI);
        let mut acc = 0.0;
        let mut w = WeightIter::new(&self.frequency, self.bounds.n_lower);
        for n in self.bounds.n_lower..=n_hi {
            let nf = n as f64;
            let den = z - nf * d;
            if den <= 0.0 {
                if d >= 0.0 {
                    break;
                }
                w.advance(n);
                continue;
            }
            let gamma_n = nf * nf * g;
            let e = -gamma_n / (2.0 * den);
            if e > -700.0 {
                acc += w.get(n)
                    * fm::sqrt(gamma_n * half_gamma_over_pi)
                    * fm::powf(den, -1.5)
                    * fm::exp(e);
            }
            w.advance(n);
        }
        acc
    }

    /// Upper-tail probability `P(Z > z)`, computed without the cancellation
    /// of `1 - cdf(z)`.
    pub fn survival(&self, z: f64) -> f64 {
        if z < 0.0 {
            return 1.0;
        }
        let n_hi = match self.max_contributing_n(z) {
            Some(m) => m.min(self.bounds.n_upper),
            None => self.bounds.n_upper,
        };
        let g = self.severity.gamma;
        let d = self.severity.delta;
        let mut acc = 0.0;
        let mut w = WeightIter::new(&self.frequency, self.bounds.n_lower);
        for n in self.bounds.n_lower..=n_hi {
            if n == 0 {
                break;
            }
            let nf = n as f64;
            let den = z - nf * d;
            acc += if den <= 0.0 {
                w.get(n)
            } else {
                w.get(n) * special::erf(nf * fm::sqrt(g / (2.0 * den)))
            };
            w.advance(n);
        }
        if n_hi < self.bounds.n_upper {
            // Components beyond the contribution cutoff sit almost entirely
            // above z; count their full mass.
            acc += self.frequency.tail_mass_above(n_hi)
                - self.frequency.tail_mass_above(self.bounds.n_upper);
        }
        acc
    }

    /// Power-law tail approximation
    /// `2 z^{-1/2} c_{1/2} sqrt(gamma) sum_n n P(N = n)`.
    ///
    /// `None` when the counting law has infinite mean (the coefficient
    /// series diverges and the `z^{-1/2}` decay is not the true tail). Only
    /// meaningful for `z` deep in the tail.
    pub fn tail_prob_asymptotic(&self, z: f64) -> Option<f64> {
        self.frequency.mean()?;
        let mut acc = 0.0;
        let mut w = WeightIter::new(&self.frequency, self.bounds.n_lower);
        for n in self.bounds.n_lower..=self.bounds.n_upper {
            let nf = n as f64;
            let term = nf * w.get(n);
            acc += term;
            let rho = self.frequency.pmf_ratio(n) * (nf + 1.0) / nf;
            if n > self.bounds.n_mode && rho < 0.999 && term < 1e-16 * acc {
                break;
            }
            w.advance(n);
        }
        Some(2.0 * fm::powf(z, -0.5) * C_HALF * fm::sqrt(self.severity.gamma) * acc)
    }

    /// The `q`-quantile of the annual loss (value at risk).
    ///
    /// Levels inside the zero atom return 0. Levels at or beyond the
    /// retained probability mass are not resolvable at the current
    /// truncation and error out.
    pub fn value_at_risk(&self, q: f64) -> Result<f64, QuantileError> {
        if !(q > 0.0 && q < 1.0) {
            return Err(QuantileError::OutOfDomain(q));
        }
        let atom = self.zero_prob();
        if q <= atom {
            return Ok(0.0);
        }
        let attainable = 1.0 - self.dropped_mass();
        if q >= attainable {
            return Err(QuantileError::Unresolvable { q, attainable });
        }
        // Seed the upper bracket by inverting the tail asymptote where it
        // exists, then expand geometrically until the CDF brackets q. Levy
        // tails are far too heavy for any fixed bracket.
        let mut hi = match self.tail_prob_asymptotic(1.0) {
            Some(coeff) if coeff > 0.0 => {
                let z0 = coeff / (1.0 - q);
                (z0 * z0).max(self.severity.gamma)
            }
            _ => self.severity.gamma.max(1.0),
        };
        let mut guard = 0;
        while self.cdf(hi) < q {
            hi *= 4.0;
            guard += 1;
            if guard > 600 {
                return Err(QuantileError::Unresolvable { q, attainable });
            }
        }
        Ok(bisect_quantile(|z| self.cdf(z), q, 0.0, hi, 1e-9))
    }

    /// Probability mass of the retained series window (excluding the atom).
    pub fn retained_mass(&self) -> f64 {
        let b = self.bounds;
        if b.n_upper - b.n_lower <= 4_000_000 {
            let mut acc = 0.0;
            let mut w = WeightIter::new(&self.frequency, b.n_lower);
            for n in b.n_lower..=b.n_upper {
                acc += w.get(n);
                w.advance(n);
            }
            acc
        } else {
            // Window too wide to enumerate: account from the complement.
            (1.0 - self.zero_prob() - self.dropped_mass()).max(0.0)
        }
    }

    /// Upper bound on the probability mass outside the retained window
    /// (excluding the atom).
    pub fn dropped_mass(&self) -> f64 {
        let b = self.bounds;
        self.frequency.head_mass_below(b.n_lower) + self.frequency.tail_mass_above(b.n_upper)
    }

    /// Expected shortfall. Divergent for every level: the severity has
    /// infinite mean.
    pub fn expected_shortfall(&self, _q: f64) -> TailExpectation {
        TailExpectation::Divergent
    }
}

/// Incremental weight evaluation along the count index. Multiplying exact
/// pmf ratios is O(1) per step; a periodic re-seed from the log pmf stops
/// rounding drift on very wide windows.
struct WeightIter<'a> {
    freq: &'a FrequencyModel,
    at: u64,
    w: f64,
    steps: u32,
}

impl<'a> WeightIter<'a> {
    fn new(freq: &'a FrequencyModel, start: u64) -> Self {
        WeightIter { freq, at: start, w: fm::exp(freq.ln_pmf_unchecked(start)), steps: 0 }
    }

    fn get(&mut self, n: u64) -> f64 {
        debug_assert_eq!(n, self.at);
        self.w
    }

    fn advance(&mut self, n: u64) {
        debug_assert_eq!(n, self.at);
        self.steps += 1;
        if self.steps >= 8192 {
            self.steps = 0;
            self.at = n + 1;
            self.w = fm::exp(self.freq.ln_pmf_unchecked(n + 1));
        } else {
            self.w *= self.freq.pmf_ratio(n);
            self.at = n + 1;
        }
    }
}

/// Log of the series weight driving truncation. The constant `sqrt(gamma)`
/// factor cancels in the relative threshold and is omitted.
fn ln_series_weight(freq: &FrequencyModel, n: u64) -> f64 {
    debug_assert!(n >= 1);
    let lp = freq.ln_pmf_unchecked(n);
    match freq {
        FrequencyModel::NegBinomial { .. } | FrequencyModel::PoissonGamma { .. } => lp,
        _ => fm::ln(n as f64) + lp,
    }
}

/// Stationarity condition of the log series weight, continuous in `n`
/// (Stirling form). Used to seed the integer mode search for the models
/// where it is well defined; the exact hill climb below owns correctness.
fn mode_equation(freq: &FrequencyModel, n: f64) -> Option<f64> {
    match *freq {
        FrequencyModel::Poisson { lambda } => Some(fm::ln(lambda) - fm::ln(n) - 0.5 / n),
        FrequencyModel::NegBinomial { r, p } => {
            let rf = r as f64;
            Some(
                fm::ln(n + rf - 1.0) + n / (n + rf - 0.5) + (rf - 0.5) / (n + rf - 1.0)
                    - 1.0
                    - fm::ln(n)
                    - 0.5 / n
                    + fm::ln(p),
            )
        }
        FrequencyModel::PoissonGamma { shape, rate } => Some(
            fm::ln(n + shape - 1.0) + n / (n + shape - 1.0) + (shape - 0.5) / (n + shape - 1.0)
                - fm::ln(n)
                - 1.0
                - 0.5 / n
                - fm::ln_1p(rate),
        ),
        _ => None,
    }
}

/// Integer where the stationarity condition changes sign, if it does.
fn mode_equation_root(freq: &FrequencyModel) -> Option<u64> {
    mode_equation(freq, 1.0)?;
    if mode_equation(freq, 1.0).unwrap() <= 0.0 {
        return Some(1);
    }
    let mut hi = 2u64;
    while mode_equation(freq, hi as f64).unwrap() > 0.0 {
        hi = hi.saturating_mul(2);
        if hi > 1 << 40 {
            return None;
        }
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if mode_equation(freq, mid as f64).unwrap() > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi)
}

/// Exact integer argmax of the series weight. The weight sequences are
/// unimodal (their term ratios cross 1 at most once), so a hill climb from
/// any seed lands on the global peak.
fn series_mode(freq: &FrequencyModel) -> u64 {
    let cap = freq.support_max();
    let mut seed = mode_equation_root(freq)
        .or_else(|| match *freq {
            // Ratio of successive weights crosses 1 near r beta / alpha.
            FrequencyModel::BetaNegBinomial { r, alpha, beta } => {
                Some(fm::round(r as f64 * beta / alpha) as u64)
            }
            _ => freq.mean().map(|m| fm::round(m) as u64),
        })
        .unwrap_or(1)
        .max(1);
    if let Some(m) = cap {
        seed = seed.min(m);
    }
    let mut n = seed;
    let mut w = ln_series_weight(freq, n);
    loop {
        let next_ok = cap.map_or(true, |m| n < m);
        if next_ok {
            let w2 = ln_series_weight(freq, n + 1);
            if w2 > w {
                n += 1;
                w = w2;
                continue;
            }
        }
        break;
    }
    while n > 1 {
        let w2 = ln_series_weight(freq, n - 1);
        if w2 > w {
            n -= 1;
            w = w2;
        } else {
            break;
        }
    }
    n
}

fn compute_bounds(freq: &FrequencyModel, threshold_log: f64) -> TruncationBounds {
    let n_mode = series_mode(freq);
    let thr = ln_series_weight(freq, n_mode) + threshold_log;
    let below = |n: u64| ln_series_weight(freq, n) <= thr;

    // Upper cut: the first index at or below the threshold. The weight is
    // nonincreasing past the mode, so bracket geometrically and bisect.
    let n_upper = match freq.support_max() {
        Some(m) => {
            if !below(m) {
                m
            } else {
                first_below(freq, n_mode, m, &below)
            }
        }
        None => {
            let mut hi = (n_mode + 1).max(2);
            while !below(hi) {
                hi = hi.saturating_mul(2);
                if hi >= 1 << 62 {
                    break;
                }
            }
            first_below(freq, n_mode, hi, &below)
        }
    };

    // Lower cut: the first retained index at or below the mode.
    let n_lower = if n_mode == 1 || !below(1) {
        1
    } else {
        // Weight nondecreasing on [1, mode]: bisect for the first index
        // above the threshold.
        let mut lo = 1u64; // below(lo)
        let mut hi = n_mode; // !below(hi)
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if below(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };

    TruncationBounds { n_lower, n_mode, n_upper, threshold_log }
}

/// Smallest `n` in `(lo, hi]` with `below(n)`, given `!below(lo)` and
/// `below(hi)`; monotone predicate.
fn first_below(
    _freq: &FrequencyModel,
    mut lo: u64,
    mut hi: u64,
    below: &dyn Fn(u64) -> bool,
) -> u64 {
    debug_assert!(below(hi));
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if below(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
