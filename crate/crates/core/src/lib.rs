//! One-step-ahead forecasting of power-system bus voltages.
//!
//! A hybrid network maps the last `r` grid states (voltage magnitudes and
//! phase angles at `n` buses) to the next one: a 1D convolutional branch
//! forecasts the magnitudes and a stacked ReLU recurrent branch forecasts
//! the angles. Every layer has a hand-written backward pass; training uses
//! minibatch Adam. The crate also covers dataset ingestion, a synthetic
//! grid-state generator, baselines, and the metric suite.

pub mod data;
pub mod error;
pub mod evaluation;
pub mod forecaster;
pub mod layers;
pub mod linalg;
pub mod training;

pub use data::{PreparedData, Sample, StateSeries, StateVector};
pub use error::{Error, Result};
pub use forecaster::{init_model, Architecture, ForecastModel, ModelConfig};
pub use linalg::Matrix;
pub use training::{Hyperparams, TrainReport};
