//! Simulation harness, configuration format and command layer around
//! [`compound_levy`].
//!
//! The closed forms in the core crate are validated here against a seeded,
//! block-parallel Monte Carlo oracle ([`montecarlo`]), driven either
//! programmatically or through the `compound-levy` binary ([`commands`]).

pub mod commands;
pub mod config;
pub mod montecarlo;
pub mod output;
