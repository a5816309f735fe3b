//! Stable-law parameter algebra, the analytic Levy sub-family, tail
//! asymptotics and variate generation.
//!
//! A stable law is written `S(alpha, beta, gamma, delta; k)` where `k` names
//! the location convention ([`ParamForm`]). The two conventions differ by
//! `beta * gamma * tan(pi alpha / 2)` away from `alpha = 1`; mixing them up
//! silently is the dominant bug class for stable laws, so the form is an
//! explicit field and every conversion goes through [`StableParams::to_s0`] /
//! [`StableParams::to_s1`].
//!
//! The Levy sub-family (`alpha = 1/2`, `beta = 1`) is the one member with
//! positive support and closed-form density and distribution functions; it is
//! carried by the dedicated [`LevyParams`] type. Its `(gamma, delta)` are the
//! support form: the density lives on `(delta, inf)`, which corresponds to
//! the S1 location convention of the general family.

use rand::Rng;

use crate::fm;
use crate::special;

/// Location-parameter convention for a stable law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamForm {
    /// Nolan's 0-parameterization (continuous in all parameters).
    S0,
    /// Nolan's 1-parameterization (locations add under convolution for
    /// `alpha != 1`; the Levy density support point).
    S1,
}

/// Errors from stable-parameter construction and algebra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StableError {
    /// `alpha` outside `(0, 2]`.
    InvalidAlpha(f64),
    /// `beta` outside `[-1, 1]`.
    InvalidBeta(f64),
    /// `gamma` not strictly positive (or non-finite scale/location).
    InvalidScale(f64),
    /// Affine transform with `a = 0` degenerates to a point mass.
    ZeroSlope,
    /// Convolution over laws with differing tail exponents.
    MixedAlpha { expected: f64, found: f64 },
    /// Convolution of an empty list.
    Empty,
    /// Convolution requires all inputs in the S0 form.
    NotS0,
}

impl core::fmt::Display for StableError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            StableError::InvalidAlpha(a) => write!(f, "alpha = {a} outside (0, 2]"),
            StableError::InvalidBeta(b) => write!(f, "beta = {b} outside [-1, 1]"),
            StableError::InvalidScale(g) => write!(f, "scale gamma = {g} must be positive"),
            StableError::ZeroSlope => write!(f, "affine transform with a = 0"),
            StableError::MixedAlpha { expected, found } => {
                write!(f, "convolution requires common alpha: {expected} vs {found}")
            }
            StableError::Empty => write!(f, "convolution of an empty list"),
            StableError::NotS0 => write!(f, "convolution requires S0-form parameters"),
        }
    }
}

impl core::error::Error for StableError {}

/// Four-parameter stable law with an explicit parameterization tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams {
    /// Tail exponent in `(0, 2]`.
    pub alpha: f64,
    /// Skew in `[-1, 1]`.
    pub beta: f64,
    /// Scale, `> 0`.
    pub gamma: f64,
    /// Location.
    pub delta: f64,
    /// Location convention.
    pub form: ParamForm,
}

impl StableParams {
    pub fn new(
        alpha: f64,
        beta: f64,
        gamma: f64,
        delta: f64,
        form: ParamForm,
    ) -> Result<Self, StableError> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(StableError::InvalidAlpha(alpha));
        }
        if !(-1.0..=1.0).contains(&beta) || beta.is_nan() {
            return Err(StableError::InvalidBeta(beta));
        }
        if !(gamma > 0.0 && gamma.is_finite() && delta.is_finite()) {
            return Err(StableError::InvalidScale(gamma));
        }
        Ok(StableParams { alpha, beta, gamma, delta, form })
    }

    /// Offset between the S0 and S1 locations: `delta0 = delta1 + shift`.
    fn form_shift(&self) -> f64 {
        if self.alpha == 1.0 {
            self.beta * core::f64::consts::FRAC_2_PI * self.gamma * fm::ln(self.gamma)
        } else {
            self.beta * self.gamma * fm::tan(core::f64::consts::FRAC_PI_2 * self.alpha)
        }
    }

    pub fn to_s0(&self) -> StableParams {
        match self.form {
            ParamForm::S0 => *self,
            ParamForm::S1 => StableParams {
                delta: self.delta + self.form_shift(),
                form: ParamForm::S0,
                ..*self
            },
        }
    }

    pub fn to_s1(&self) -> StableParams {
        match self.form {
            ParamForm::S1 => *self,
            ParamForm::S0 => StableParams {
                delta: self.delta - self.form_shift(),
                form: ParamForm::S1,
                ..*self
            },
        }
    }

    /// Law of `a X + b`.
    ///
    /// In the S0 form the rule is uniform in `alpha`:
    /// `S(alpha, sign(a) beta, |a| gamma, a delta + b; 0)`. The S1 form picks
    /// up an extra `-(2/pi) beta gamma a ln|a|` in the location at `alpha = 1`.
    pub fn affine(&self, a: f64, b: f64) -> Result<StableParams, StableError> {
        if a == 0.0 || !a.is_finite() || !b.is_finite() {
            return Err(StableError::ZeroSlope);
        }
        let beta = if a < 0.0 { -self.beta } else { self.beta };
        let gamma = fm::abs(a) * self.gamma;
        let delta = match self.form {
            ParamForm::S0 => a * self.delta + b,
            ParamForm::S1 if self.alpha == 1.0 => {
                a * self.delta + b
                    - core::f64::consts::FRAC_2_PI * self.beta * self.gamma * a * fm::ln(fm::abs(a))
            }
            ParamForm::S1 => a * self.delta + b,
        };
        StableParams::new(self.alpha, beta, gamma, delta, self.form)
    }

    /// Law of `X_1 + ... + X_n` for independent stable summands sharing one
    /// tail exponent, all in the S0 form.
    ///
    /// `gamma~^alpha = sum gamma_i^alpha`,
    /// `beta~ = sum beta_i gamma_i^alpha / sum gamma_i^alpha`, and the
    /// location follows the `alpha != 1` / `alpha = 1` branches.
    pub fn convolve(parts: &[StableParams]) -> Result<StableParams, StableError> {
        let first = parts.first().ok_or(StableError::Empty)?;
        if first.form != ParamForm::S0 {
            return Err(StableError::NotS0);
        }
        if parts.len() == 1 {
            return Ok(*first);
        }
        let alpha = first.alpha;
        let mut gamma_pow = 0.0;
        let mut beta_gamma_pow = 0.0;
        let mut delta_sum = 0.0;
        let mut beta_gamma = 0.0;
        let mut beta_gamma_ln = 0.0;
        for p in parts {
            if p.form != ParamForm::S0 {
                return Err(StableError::NotS0);
            }
            if p.alpha != alpha {
                return Err(StableError::MixedAlpha { expected: alpha, found: p.alpha });
            }
            let gp = fm::powf(p.gamma, alpha);
            gamma_pow += gp;
            beta_gamma_pow += p.beta * gp;
            delta_sum += p.delta;
            beta_gamma += p.beta * p.gamma;
            beta_gamma_ln += p.beta * p.gamma * fm::ln(p.gamma);
        }
        let gamma = fm::powf(gamma_pow, 1.0 / alpha);
        let beta = beta_gamma_pow / gamma_pow;
        let delta = if alpha == 1.0 {
            delta_sum
                + core::f64::consts::FRAC_2_PI * (beta * gamma * fm::ln(gamma) - beta_gamma_ln)
        } else {
            delta_sum
                + fm::tan(core::f64::consts::FRAC_PI_2 * alpha) * (beta * gamma - beta_gamma)
        };
        StableParams::new(alpha, beta, gamma, delta, ParamForm::S0)
    }

    /// Power-law upper-tail asymptote (only defined for `alpha < 2`).
    pub fn tail_asymptote(&self) -> Result<TailAsymptote, StableError> {
        if self.alpha >= 2.0 {
            return Err(StableError::InvalidAlpha(self.alpha));
        }
        let c_alpha = fm::sin(core::f64::consts::FRAC_PI_2 * self.alpha)
            * fm::exp(special::ln_gamma_raw(self.alpha))
            / core::f64::consts::PI;
        Ok(TailAsymptote {
            coefficient: fm::powf(self.gamma, self.alpha) * c_alpha * (1.0 + self.beta),
            exponent: self.alpha,
            scale: self.gamma,
        })
    }

    /// Draw one variate by the composite exponential/uniform transform.
    pub fn sample_cms<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let s1 = self.to_s1();
        let std = sample_standard_stable(self.alpha, self.beta, rng);
        if self.alpha == 1.0 {
            s1.gamma * std
                + core::f64::consts::FRAC_2_PI * self.beta * s1.gamma * fm::ln(s1.gamma)
                + s1.delta
        } else {
            s1.gamma * std + s1.delta
        }
    }
}

/// Standardized stable variate `S(alpha, beta, 1, 0; 1)`.
fn sample_standard_stable<R: Rng + ?Sized>(alpha: f64, beta: f64, rng: &mut R) -> f64 {
    let w = -fm::ln(open_unit(rng)); // Exp(1)
    let u = core::f64::consts::PI * (open_unit(rng) - 0.5); // Uniform(-pi/2, pi/2)
    if alpha == 1.0 {
        let half_pi = core::f64::consts::FRAC_PI_2;
        core::f64::consts::FRAC_2_PI
            * ((half_pi + beta * u) * fm::tan(u)
                - beta * fm::ln((half_pi * w * fm::cos(u)) / (half_pi + beta * u)))
    } else {
        let t = fm::tan(core::f64::consts::FRAC_PI_2 * alpha);
        let b = fm::atan(beta * t) / alpha;
        let s = fm::powf(1.0 + beta * beta * t * t, 0.5 / alpha);
        s * fm::sin(alpha * (u + b)) / fm::powf(fm::cos(u), 1.0 / alpha)
            * fm::powf(fm::cos(u - alpha * (u + b)) / w, (1.0 - alpha) / alpha)
    }
}

/// Uniform draw on the open interval `(0, 1)`.
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Power-law tail `P(X > x) ~ coefficient * x^-exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailAsymptote {
    pub coefficient: f64,
    pub exponent: f64,
    scale: f64,
}

impl TailAsymptote {
    /// Asymptotic survival probability at `x`.
    pub fn survival(&self, x: f64) -> f64 {
        self.coefficient * fm::powf(x, -self.exponent)
    }

    /// Whether `x` is far enough into the tail for the asymptote to be
    /// trustworthy (a hundred scale units).
    pub fn in_asymptotic_regime(&self, x: f64) -> bool {
        x >= 100.0 * self.scale
    }
}

/// The analytic positive-support sub-family: `alpha = 1/2`, `beta = 1`.
///
/// Density `sqrt(gamma / 2 pi) (x - delta)^{-3/2} exp(-gamma / (2 (x - delta)))`
/// and CDF `erfc(sqrt(gamma / (2 (x - delta))))` on `(delta, inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevyParams {
    /// Scale, `> 0`.
    pub gamma: f64,
    /// Support point (loss currency units).
    pub delta: f64,
}

impl LevyParams {
    pub fn new(gamma: f64, delta: f64) -> Result<Self, StableError> {
        if !(gamma > 0.0 && gamma.is_finite() && delta.is_finite()) {
            return Err(StableError::InvalidScale(gamma));
        }
        Ok(LevyParams { gamma, delta })
    }

    /// The same law in the general family (S1-form location: the support
    /// point).
    pub fn as_stable(&self) -> StableParams {
        StableParams {
            alpha: 0.5,
            beta: 1.0,
            gamma: self.gamma,
            delta: self.delta,
            form: ParamForm::S1,
        }
    }

    /// Density; exactly 0 for `x <= delta`.
    pub fn pdf(&self, x: f64) -> f64 {
        let d = x - self.delta;
        if d <= 0.0 {
            return 0.0;
        }
        let e = -self.gamma / (2.0 * d);
        if e < -700.0 {
            return 0.0;
        }
        fm::sqrt(self.gamma / (2.0 * core::f64::consts::PI)) * fm::powf(d, -1.5) * fm::exp(e)
    }

    /// Distribution function; exactly 0 for `x <= delta`.
    pub fn cdf(&self, x: f64) -> f64 {
        let d = x - self.delta;
        if d <= 0.0 {
            return 0.0;
        }
        special::erfc(fm::sqrt(self.gamma / (2.0 * d)))
    }

    /// Upper-tail probability `1 - cdf(x)`, computed without cancellation.
    pub fn survival(&self, x: f64) -> f64 {
        let d = x - self.delta;
        if d <= 0.0 {
            return 1.0;
        }
        special::erf(fm::sqrt(self.gamma / (2.0 * d)))
    }

    /// Quantile `delta + gamma / (2 erfc_inv(q)^2)` for `q` in `(0, 1)`.
    pub fn quantile(&self, q: f64) -> Result<f64, StableError> {
        if !(q > 0.0 && q < 1.0) {
            return Err(StableError::InvalidScale(q));
        }
        let x = special::erfc_inv(q).expect("q in (0,1) is inside erfc_inv domain");
        Ok(self.delta + self.gamma / (2.0 * x * x))
    }

    /// Density maximiser `delta + gamma / 3`.
    pub fn mode(&self) -> f64 {
        self.delta + self.gamma / 3.0
    }

    /// The median, i.e. `quantile(1/2)`.
    pub fn median(&self) -> f64 {
        self.quantile(0.5).expect("0.5 is a valid quantile")
    }

    /// Draw one variate by inverting the CDF at a uniform deviate.
    pub fn sample_inverse_cdf<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = open_unit(rng);
        let x = special::erfc_inv(u).expect("open-unit draw is inside erfc_inv domain");
        self.delta + self.gamma / (2.0 * x * x)
    }
}
