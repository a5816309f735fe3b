//! Closed-form annual-loss distributions for compound loss processes with
//! Levy-stable severities.
//!
//! An annual loss is a random sum `Z = X_1 + ... + X_N`: a counting law `N`
//! (the frequency) and a per-event loss law `X` (the severity). For the Levy
//! sub-family of stable laws the n-fold convolution of the severity stays in
//! the family, so the distribution of `Z` is an explicit mixture of Levy
//! terms weighted by the counting probabilities. This crate evaluates those
//! mixtures exactly:
//!
//! * [`special`] — scalar special functions (`erfc`, its inverse, log-gamma,
//!   log-beta) with tight accuracy contracts;
//! * [`stable`] — stable-law parameter algebra, the analytic Levy sub-family,
//!   tail asymptotics and variate generation;
//! * [`frequency`] — the six counting laws (binomial, beta-binomial, negative
//!   binomial, beta-negative-binomial, Poisson, Poisson-gamma) with
//!   marginalised mixing weights;
//! * [`compound`] — single risk-cell mixture density/CDF, series truncation
//!   and value-at-risk;
//! * [`aggregate`] — institution-wide aggregation of independent cells.
//!
//! The crate is `no_std`-compatible (`default-features = false`); only the
//! allocator is required.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod aggregate;
pub mod compound;
pub mod frequency;
pub mod special;
pub mod stable;

mod fm;
mod quad;
mod roots;

pub use aggregate::{AggregateError, AggregateModel};
pub use compound::{
    CompoundModel, MixtureComponent, ModelError, QuantileError, TailExpectation, TruncationBounds,
};
pub use frequency::{FrequencyError, FrequencyModel};
pub use stable::{LevyParams, ParamForm, StableError, StableParams, TailAsymptote};
