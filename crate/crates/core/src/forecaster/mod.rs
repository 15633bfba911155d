//! The forecaster: a window of `r` lagged states in, the next state out.

mod config;
mod network;
mod persist;

pub use config::{param_count, Architecture, ModelConfig, ParamBreakdown, DEFAULT_LAG, DEFAULT_RNN_LAYERS};
pub use network::{weight_bound, CnnBranch, Network, NetworkCache, ParamShape, RnnBranch};
pub use persist::{load_model, model_from_str, model_to_string, save_model, MODEL_FORMAT_VERSION};

use crate::data::{NormalizerStats, StateVector};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Architecture, parameters, and the scaling applied to raw states.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastModel {
    pub config: ModelConfig,
    pub network: Network,
    pub normalizer: NormalizerStats,
}

impl ForecastModel {
    pub fn new(config: ModelConfig, network: Network, normalizer: NormalizerStats) -> Result<Self> {
        config.validate()?;
        network.check_against(&config)?;
        normalizer.validate()?;
        if normalizer.features() != config.n_features() {
            return Err(Error::shape(
                "normalizer features",
                config.n_features(),
                normalizer.features(),
            ));
        }
        Ok(Self {
            config,
            network,
            normalizer,
        })
    }

    pub fn n_buses(&self) -> usize {
        self.config.n_buses
    }

    pub fn check_window(&self, window: &Matrix) -> Result<()> {
        let expected = (self.config.n_features(), self.config.lag);
        if window.shape() != expected {
            return Err(Error::shape(
                "input window",
                format!("{}x{}", expected.0, expected.1),
                format!("{}x{}", window.rows(), window.cols()),
            ));
        }
        Ok(())
    }

    /// CNN branch on an already-normalized window; normalized magnitudes out.
    pub fn cnn_branch_forward(&self, window: &Matrix) -> Result<Vec<f64>> {
        self.check_window(window)?;
        self.network.cnn_forward(window)
    }

    /// RNN branch on an already-normalized window. For the hybrid model the
    /// result is the normalized angles; for the RNN-only model it is the
    /// whole normalized state.
    pub fn rnn_branch_forward(&self, window: &Matrix) -> Result<Vec<f64>> {
        self.check_window(window)?;
        self.network.rnn_forward(window)
    }

    /// Forecasts the state following a raw (physical-unit) window.
    pub fn forecast_next(&self, window: &Matrix) -> Result<StateVector> {
        self.check_window(window)?;
        if !window.is_finite() {
            return Err(Error::NonFinite("input window"));
        }
        let z = self.normalizer.apply_window(window)?;
        let (out, _) = self.network.forward(&z)?;
        StateVector::new(self.normalizer.invert(&out))
    }
}

/// A freshly initialized model with an identity normalizer.
pub fn init_model(config: &ModelConfig, seed: u64) -> Result<ForecastModel> {
    config.validate()?;
    ForecastModel::new(
        config.clone(),
        Network::init(config, seed),
        NormalizerStats::identity(config.n_features()),
    )
}
