//! Gaussian-process models whose covariates are whole weighted networks.
//!
//! The library builds positive-definite Gram matrices from pairwise graph
//! distances (Frobenius and spectral) or a k-step random-walk kernel, and
//! runs Gibbs samplers on top of them for three tasks:
//!
//! * binary classification with a logistic link ([`classifier`]),
//! * one-class anomaly scoring derived from the classifier posterior ([`occ`]),
//! * semi-parametric survival analysis via Poisson-process thinning ([`survival`]).
//!
//! [`sim`] provides the random-graph generators used by the experiment
//! harness; [`graph`], [`distance`] and [`kernel`] are the numerical
//! foundation shared by all models.

pub mod classifier;
#[doc(hidden)]
pub mod diagnostics;
pub mod distance;
pub mod error;
pub mod graph;
pub mod kernel;
pub mod mcmc;
pub mod occ;
pub mod rng;
pub mod sim;
pub mod survival;

pub use error::{Error, Result};
pub use graph::Graph;
