//! Minibatch Adam training of the forecaster on normalized windows.

mod adam;
mod loss;
mod multi_run;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use loss::{joint_loss, mse_loss};
pub use multi_run::{multi_run, MultiRunReport, RunOutcome};

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{PreparedData, Sample};
use crate::error::{Error, Result};
use crate::forecaster::{init_model, Architecture, ForecastModel, ModelConfig, Network};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Cnn,
    Rnn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub adam: AdamConfig,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub shuffle_each_epoch: bool,
    /// Branch whose parameters stay at their initial values.
    pub freeze: Option<Branch>,
}

pub const DEFAULT_EPOCHS: usize = 40;
pub const DEFAULT_BATCH_SIZE: usize = 32;

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            adam: AdamConfig::default(),
            batch_size: DEFAULT_BATCH_SIZE,
            epochs: DEFAULT_EPOCHS,
            seed: 0,
            shuffle_each_epoch: true,
            freeze: None,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        self.adam.validate()?;
        if self.batch_size < 1 {
            return Err(Error::InvalidArgument("batch size must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub architecture: Architecture,
    pub seed: u64,
    pub hyperparams: Hyperparams,
    pub n_train_windows: usize,
    /// Mean per-sample joint loss seen during each epoch (normalized units).
    pub epoch_losses: Vec<f64>,
    /// Mean joint loss over all training windows with the final parameters.
    pub final_train_loss: f64,
    pub test_nrmse: Option<f64>,
    /// Kept out of the serialized report so reruns produce identical bytes;
    /// the run manifest records it instead.
    #[serde(skip)]
    pub wall_clock_secs: f64,
}

/// Normalized `(window, target)` pairs ready for the network.
pub fn normalize_samples(model: &ForecastModel, samples: &[Sample]) -> Result<Vec<(Matrix, Vec<f64>)>> {
    samples
        .iter()
        .map(|s| {
            model.check_window(&s.window)?;
            Ok((
                model.normalizer.apply_window(&s.window)?,
                model.normalizer.apply(s.target.as_slice()),
            ))
        })
        .collect()
}

/// Joint loss on one normalized sample and its gradient for every parameter.
pub fn loss_and_grad(network: &Network, window: &Matrix, target: &[f64]) -> Result<(f64, Network)> {
    let (out, cache) = network.forward(window)?;
    let (loss, d_out) = joint_loss(&out, target)?;
    Ok((loss, network.backward(&cache, &d_out)?))
}

/// Mean joint loss over normalized samples.
pub fn mean_loss(network: &Network, samples: &[(Matrix, Vec<f64>)]) -> Result<f64> {
    let mut total = 0.0;
    for (x, y) in samples {
        let (out, _) = network.forward(x)?;
        total += joint_loss(&out, y)?.0;
    }
    Ok(total / samples.len().max(1) as f64)
}

/// Trains `model` on raw windows (normalized with the model's own stats).
/// Each batch averages per-sample gradients and takes one Adam step. The
/// epoch order is shuffled with a generator seeded from `hp.seed`.
pub fn train(
    mut model: ForecastModel,
    train_windows: &[Sample],
    hp: &Hyperparams,
) -> Result<(ForecastModel, TrainReport)> {
    hp.validate()?;
    if train_windows.is_empty() {
        return Err(Error::InvalidArgument("training needs at least one window".into()));
    }
    if hp.freeze == Some(Branch::Cnn) && model.network.cnn.is_none() {
        return Err(Error::InvalidArgument("cannot freeze the cnn branch of an rnn-only model".into()));
    }
    let started = Instant::now();
    let samples = normalize_samples(&model, train_windows)?;

    let mut flat = model.network.to_flat();
    let mut adam = AdamState::new(flat.len());
    let (cnn_range, rnn_range) = model.network.branch_ranges();
    let frozen = match hp.freeze {
        Some(Branch::Cnn) => Some(cnn_range),
        Some(Branch::Rnn) => Some(rnn_range),
        None => None,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    rng.set_stream(2);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut epoch_losses = Vec::with_capacity(hp.epochs);
    let mut grad = vec![0.0; flat.len()];

    for epoch in 0..hp.epochs {
        if hp.shuffle_each_epoch {
            order.shuffle(&mut rng);
        }
        let mut epoch_total = 0.0;
        for (batch, chunk) in order.chunks(hp.batch_size).enumerate() {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut batch_total = 0.0;
            for &i in chunk {
                let (x, y) = &samples[i];
                let (loss, g) = loss_and_grad(&model.network, x, y)?;
                batch_total += loss;
                let mut offset = 0;
                for (_, _, values) in g.named_params() {
                    for (acc, v) in grad[offset..offset + values.len()].iter_mut().zip(values) {
                        *acc += v;
                    }
                    offset += values.len();
                }
            }
            if !batch_total.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    batch,
                    loss: batch_total / chunk.len() as f64,
                });
            }
            epoch_total += batch_total;
            let scale = 1.0 / chunk.len() as f64;
            grad.iter_mut().for_each(|g| *g *= scale);
            if let Some(range) = &frozen {
                grad[range.clone()].iter_mut().for_each(|g| *g = 0.0);
            }
            adam_step(&mut flat, &grad, &mut adam, &hp.adam)?;
            model.network.set_flat(&flat)?;
        }
        epoch_losses.push(epoch_total / samples.len() as f64);
    }

    let final_train_loss = mean_loss(&model.network, &samples)?;
    let report = TrainReport {
        architecture: model.config.architecture,
        seed: hp.seed,
        hyperparams: hp.clone(),
        n_train_windows: samples.len(),
        epoch_losses,
        final_train_loss,
        test_nrmse: None,
        wall_clock_secs: started.elapsed().as_secs_f64(),
    };
    Ok((model, report))
}

/// Initializes a model from `hp.seed`, attaches the training normalizer,
/// trains it, and records its test nRMSE.
pub fn fit(
    config: &ModelConfig,
    data: &PreparedData,
    hp: &Hyperparams,
) -> Result<(ForecastModel, TrainReport)> {
    let mut model = init_model(config, hp.seed)?;
    model.normalizer = data.normalizer.clone();
    let (model, mut report) = train(model, &data.train_windows, hp)?;
    let (metrics, _) = crate::evaluation::evaluate(&model, &data.test_windows)?;
    report.test_nrmse = Some(metrics.nrmse);
    Ok((model, report))
}
