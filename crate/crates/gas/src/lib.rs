//! Score-driven time series models.
//!
//! This crate implements generalized autoregressive score (GAS) models:
//! observation-driven time series models in which the time-varying
//! parameters of a conditional distribution are updated by the scaled
//! score of the log-likelihood. It provides
//!
//! * a registry of distribution/parametrization pairs with densities,
//!   moments, scores, Fisher information, samplers, and starting-value
//!   heuristics ([`distribution`]),
//! * the score-driven filter with joint and separate regression dynamics,
//!   seven scaling options, and missing-value handling ([`dynamics`]),
//! * maximum-likelihood estimation with coefficient constraints, a
//!   starting grid, Nelder-Mead optimization, and Hessian-based
//!   inference ([`estimation`]),
//! * forecasting by zero-score mean paths or simulated paths, and model
//!   simulation ([`forecast`]),
//! * bootstrap and filtered-parameter uncertainty ([`uncertainty`]),
//! * a command-line front end ([`cli`]).
//!
//! See the `examples/` directory for one runnable example per capability.
//!
//! # Adding a distribution
//!
//! Implement [`distribution::ScoreDistribution`] (descriptor plus the
//! eight functions: parameter check, density/log-likelihood, mean,
//! variance, score, Fisher information, sampler, starting values) and
//! register it on a [`distribution::Registry`].

pub mod cli;
pub mod distribution;
pub mod dynamics;
pub mod error;
pub mod estimation;
pub mod forecast;
pub mod linalg;
pub mod matrix;
pub mod rng;
pub mod special;
pub mod stats;
pub mod uncertainty;

pub use error::{Error, Result};
pub use matrix::Mat;
