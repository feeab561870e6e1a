//! Experiment harness: configuration, dataset I/O, cross-validation, and
//! the task implementations behind the `netgp` binary.

pub mod commands;
pub mod config;
pub mod cv;
pub mod dataset;
pub mod metrics;
