//! Localized neural network (LNN) estimation for nonparametric regression
//! and binary-outcome models with dependent data.
//!
//! The network is a one-hidden-layer sigmoid architecture whose weights are
//! predetermined: a cube partition of `[-a,a]^d` decides which neurons
//! activate, and within each cube the sigmoid layer reproduces the degree-q
//! polynomial basis up to a fixed rotation. Estimation therefore reduces to
//! `binom(d+q, d)` linear coefficients per cube — closed-form least squares
//! for the regression model, per-cube Newton likelihood maximization for the
//! binary model — and inference comes from two wild-bootstrap procedures
//! whose validity survives serially dependent errors.
//!
//! # Quick start
//!
//! ```
//! use lnn::architecture::{Architecture, LnnConfig};
//! use lnn::regress::{fit_regression, predict};
//! use lnn::sim::{gen_dataset, ModelKind};
//!
//! let config = LnnConfig { a: 3.0, d: 1, q: 3, ..LnnConfig::default() };
//! let data = gen_dataset(ModelKind::Reg, 800, 1, 3.0, 7)?;
//! let arch = Architecture::build(&config, Some(data.len()))?;
//! let model = fit_regression(&data, &arch)?;
//! let ghat = predict(&model, &[0.5]);
//! assert!(ghat.value().is_some());
//! # Ok::<(), lnn::Error>(())
//! ```
//!
//! The runnable examples cover each capability end to end: fitting and
//! prediction, bootstrap bands, binary outcomes, the per-point local
//! estimator, the kernel baseline, the Monte-Carlo harness, and an
//! architecture tour. `cargo run --example <name>`.

pub mod activation;
pub mod architecture;
pub mod basis;
pub mod binary;
pub mod bootstrap;
pub mod cli;
pub mod data;
mod error;
pub mod kernel;
pub mod linalg;
pub mod localfit;
pub mod persist;
pub mod regress;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
