//! Normalized stochastic first-order methods with Polyak, multi-extrapolated
//! and recursive momentum for smooth nonconvex problems under heavy-tailed
//! gradient noise.
//!
//! The crate is organised bottom-up:
//!
//! - [`vector`], [`rng`], [`oracle`], [`step`], [`record`]: numeric carriers,
//!   seeded sample streams, the gradient-oracle contract and the update rules.
//! - [`schedules`]: closed-form step-size / momentum / potential schedules.
//! - [`extrapolation`]: Vandermonde weights for multi-extrapolated momentum.
//! - [`optimizers`]: the three momentum methods and their unnormalized baselines.
//! - [`problems`]: data fitting, robust regression, a quadratic and the
//!   heavy-tailed noise model.
//! - [`harness`]: experiment runner, metrics, rate fitting and QQ export.
//! - [`validators`]: executable checks of the scalar inequalities the
//!   convergence analysis relies on.

pub mod error;
pub mod extrapolation;
pub mod harness;
pub mod optimizers;
pub mod oracle;
pub mod problems;
pub mod record;
pub mod rng;
pub mod schedules;
pub mod step;
pub mod validators;
pub mod vector;

pub use error::{Error, Result};
pub use extrapolation::{compute_weights, extrapolate, vandermonde_residual, vandermonde_row_residuals, ExtrapolationWeights};
pub use optimizers::{run, run_observed, Method, RunConfig, SampleMode, StepRule};
pub use oracle::{GradientOracle, NoiseDraw, NoiseSource, SampleStream};
pub use record::TrialRecord;
pub use rng::RngStream;
pub use schedules::{AlphaMode, ScheduleSpec};
pub use vector::DenseVector;
