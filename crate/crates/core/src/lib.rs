//! Hidden Gaussian model of market inefficiency.
//!
//! An unobserved "reasonable" log price `X0` follows Brownian motion with
//! drift; the market log price `X` chases it at rate `k` with noise of its
//! own. The crate simulates the pair, infers `X0` from `X`, fits the five
//! parameters by maximizing a Fourier-domain likelihood, turns the filtered
//! estimate into a per-step risk premium and backtests a position sized by
//! it. A Kalman filter and a dense Gaussian solve serve as exact oracles.
//!
//! Start with the runnable programs under `examples/`.

// `!(x > 0.0)` is used on purpose so NaN falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod estimation;
pub mod inference;
pub mod io;
pub mod likelihood;
pub mod model;
pub mod oracle;
pub mod strategy;
pub mod tridiag;
pub mod verify;

pub use error::{Error, Result};
pub use model::{simulate, HiddenPath, LogSeries, ModelParams, Scheme, SimulationOutput};
