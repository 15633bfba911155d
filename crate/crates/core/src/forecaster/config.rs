use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which network maps the lagged window to the next state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Architecture {
    /// CNN branch forecasts magnitudes, stacked RNN forecasts angles.
    Hybrid,
    /// Stacked RNN with a single `2n`-wide head forecasts both halves.
    RnnOnly,
}

impl std::fmt::Display for Architecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Architecture::Hybrid => "hybrid",
            Architecture::RnnOnly => "rnn-only",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub architecture: Architecture,
    pub n_buses: usize,
    pub lag: usize,
    pub conv_filters: usize,
    pub kernel: usize,
    pub pool: usize,
    pub dense1_width: usize,
    pub dense1_bias: bool,
    pub rnn_layers: usize,
    pub rnn_hidden: usize,
}

pub const DEFAULT_LAG: usize = 10;
pub const DEFAULT_RNN_LAYERS: usize = 3;

impl ModelConfig {
    /// Defaults: `n` filters of width 2, pool 2, a `2n`-wide first dense
    /// layer with bias, and three recurrent layers of width `2n`.
    pub fn new(n_buses: usize, lag: usize) -> Self {
        Self {
            architecture: Architecture::Hybrid,
            n_buses,
            lag,
            conv_filters: n_buses,
            kernel: 2,
            pool: 2,
            dense1_width: 2 * n_buses,
            dense1_bias: true,
            rnn_layers: DEFAULT_RNN_LAYERS,
            rnn_hidden: 2 * n_buses,
        }
    }

    pub fn rnn_only(n_buses: usize, lag: usize) -> Self {
        Self {
            architecture: Architecture::RnnOnly,
            ..Self::new(n_buses, lag)
        }
    }

    pub fn n_features(&self) -> usize {
        2 * self.n_buses
    }

    pub fn conv_positions(&self) -> usize {
        (self.lag + 1).saturating_sub(self.kernel)
    }

    pub fn pooled_width(&self) -> usize {
        self.conv_positions() / self.pool.max(1)
    }

    pub fn flat_width(&self) -> usize {
        self.conv_filters * self.pooled_width()
    }

    pub fn rnn_head_width(&self) -> usize {
        match self.architecture {
            Architecture::Hybrid => self.n_buses,
            Architecture::RnnOnly => 2 * self.n_buses,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n_buses < 1 {
            return fail("n_buses must be at least 1".into());
        }
        if self.lag < 2 {
            return fail(format!("lag must be at least 2, got {}", self.lag));
        }
        if self.rnn_layers < 1 || self.rnn_hidden < 1 {
            return fail("rnn needs at least one layer of positive width".into());
        }
        if self.architecture == Architecture::Hybrid {
            if self.conv_filters < 1 || self.dense1_width < 1 {
                return fail("cnn branch needs at least one filter and one dense unit".into());
            }
            if self.kernel != 2 || self.pool != 2 {
                return fail(format!(
                    "kernel and pool are fixed at 2, got kernel {} pool {}",
                    self.kernel, self.pool
                ));
            }
            if self.pooled_width() == 0 {
                return fail(format!(
                    "lag {} leaves no pooled positions (need lag >= {})",
                    self.lag,
                    self.kernel + self.pool - 1
                ));
            }
        }
        Ok(())
    }
}

/// Scalar parameter counts per block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ParamBreakdown {
    pub conv: usize,
    pub dense1: usize,
    pub dense2: usize,
    pub rnn: usize,
    pub rnn_head: usize,
}

impl ParamBreakdown {
    pub fn for_config(cfg: &ModelConfig) -> Self {
        let f = cfg.n_features();
        let h = cfg.rnn_hidden;
        let mut rnn = 0;
        for l in 0..cfg.rnn_layers {
            let inputs = if l == 0 { f } else { h };
            rnn += h * inputs + h * h + h;
        }
        let rnn_head = cfg.rnn_head_width() * (h + 1);
        match cfg.architecture {
            Architecture::Hybrid => Self {
                conv: cfg.conv_filters * (f * cfg.kernel + 1),
                dense1: cfg.dense1_width * cfg.flat_width()
                    + if cfg.dense1_bias { cfg.dense1_width } else { 0 },
                dense2: cfg.n_buses * (cfg.dense1_width + 1),
                rnn,
                rnn_head,
            },
            Architecture::RnnOnly => Self {
                rnn,
                rnn_head,
                ..Self::default()
            },
        }
    }

    pub fn total(&self) -> usize {
        self.conv + self.dense1 + self.dense2 + self.rnn + self.rnn_head
    }
}

/// Number of scalar learnable parameters implied by `cfg`.
pub fn param_count(cfg: &ModelConfig) -> usize {
    ParamBreakdown::for_config(cfg).total()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_block_counts() {
        let b = ParamBreakdown::for_config(&ModelConfig::new(118, 10));
        assert_eq!(b.conv, 55_814);
        assert_eq!(b.dense2, 27_966);
        assert_eq!(b.dense1, 236 * 472 + 236);
    }

    #[test]
    fn single_filter_conv_count() {
        let mut cfg = ModelConfig::new(1, 2);
        cfg.conv_filters = 1;
        assert_eq!(ParamBreakdown::for_config(&cfg).conv, 5);
    }

    #[test]
    fn full_scale_chain_widths() {
        let cfg = ModelConfig::new(118, 10);
        assert_eq!(cfg.conv_positions(), 9);
        assert_eq!(cfg.pooled_width(), 4);
        assert_eq!(cfg.flat_width(), 472);
        assert_eq!(cfg.dense1_width, 236);
        assert_eq!(cfg.rnn_hidden, 236);
    }

    #[test]
    fn validation() {
        assert!(ModelConfig::new(4, 10).validate().is_ok());
        assert!(ModelConfig::new(0, 10).validate().is_err());
        assert!(ModelConfig::new(4, 1).validate().is_err());
        // lag 2 leaves one conv position, nothing to pool.
        assert!(ModelConfig::new(4, 2).validate().is_err());
        assert!(ModelConfig::rnn_only(4, 2).validate().is_ok());
        let mut cfg = ModelConfig::new(4, 10);
        cfg.rnn_layers = 0;
        assert!(cfg.validate().is_err());
    }
}
