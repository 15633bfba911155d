//! Learnable parameters of both branches and the whole-network forward and
//! backward passes, all in normalized units.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Architecture, ModelConfig};
use crate::error::{Error, Result};
use crate::layers::{
    conv1d_backward, conv1d_forward, dense_backward, dense_forward, flatten, maxpool_backward,
    maxpool_forward, stacked_rnn_backward, stacked_rnn_forward, unflatten, Activation, ConvCache,
    ConvParams, DenseCache, DenseParams, PoolCache, RnnLayerParams, StackedRnnCache,
};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct CnnBranch {
    pub conv: ConvParams,
    pub dense1: DenseParams,
    pub dense2: DenseParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RnnBranch {
    pub layers: Vec<RnnLayerParams>,
    pub head: DenseParams,
}

/// Parameters of a forecaster. The same type carries gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub cnn: Option<CnnBranch>,
    pub rnn: RnnBranch,
}

#[derive(Debug, Clone)]
pub struct CnnCache {
    conv: ConvCache,
    pool: PoolCache,
    pooled_shape: (usize, usize),
    dense1: DenseCache,
    dense2: DenseCache,
}

#[derive(Debug, Clone)]
pub struct NetworkCache {
    cnn: Option<CnnCache>,
    rnn: StackedRnnCache,
    head: DenseCache,
}

impl Network {
    pub fn zeros(cfg: &ModelConfig) -> Self {
        let f = cfg.n_features();
        let cnn = (cfg.architecture == Architecture::Hybrid).then(|| CnnBranch {
            conv: ConvParams::zeros(cfg.conv_filters, f, cfg.kernel),
            dense1: DenseParams::zeros(
                cfg.dense1_width,
                cfg.flat_width(),
                cfg.dense1_bias,
                Activation::Relu,
            ),
            dense2: DenseParams::zeros(cfg.n_buses, cfg.dense1_width, true, Activation::Linear),
        });
        let layers = (0..cfg.rnn_layers)
            .map(|l| RnnLayerParams::zeros(cfg.rnn_hidden, if l == 0 { f } else { cfg.rnn_hidden }))
            .collect();
        Self {
            cnn,
            rnn: RnnBranch {
                layers,
                head: DenseParams::zeros(cfg.rnn_head_width(), cfg.rnn_hidden, true, Activation::Linear),
            },
        }
    }

    /// Scaled-uniform initialization: every weight matrix of shape
    /// `rows × cols` is drawn from `U(−b, b)` with `b = sqrt(6 / (rows + cols))`
    /// (a conv filter bank is the `filters × 2n·kernel` matrix); biases are
    /// zero. Draws follow [`Network::named_params`] order from a ChaCha8
    /// generator seeded with `seed`.
    pub fn init(cfg: &ModelConfig, seed: u64) -> Self {
        let mut net = Self::zeros(cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (_, shape, values) in net.named_params_mut() {
            let ParamShape::Weight { rows, cols } = shape else {
                continue;
            };
            let bound = weight_bound(rows, cols);
            for v in values.iter_mut() {
                *v = rng.random_range(-bound..=bound);
            }
        }
        net
    }

    /// Every parameter array with its name, in the documented order:
    ///
    /// `cnn.conv.weight`, `cnn.conv.bias`, `cnn.dense1.weight`,
    /// `cnn.dense1.bias` (when enabled), `cnn.dense2.weight`, `cnn.dense2.bias`,
    /// then for each layer `l`: `rnn.layer{l}.input_weight`,
    /// `rnn.layer{l}.recurrent_weight`, `rnn.layer{l}.bias`, and finally
    /// `rnn.head.weight`, `rnn.head.bias`. Weights are row-major.
    pub fn named_params(&self) -> Vec<(String, ParamShape, &[f64])> {
        let mut out: Vec<(String, ParamShape, &[f64])> = Vec::new();
        if let Some(cnn) = &self.cnn {
            out.push(("cnn.conv.weight".into(), ParamShape::of(&cnn.conv.weight), cnn.conv.weight.as_slice()));
            out.push(("cnn.conv.bias".into(), ParamShape::bias(&cnn.conv.bias), &cnn.conv.bias));
            push_dense(&mut out, "cnn.dense1", &cnn.dense1);
            push_dense(&mut out, "cnn.dense2", &cnn.dense2);
        }
        for (l, layer) in self.rnn.layers.iter().enumerate() {
            out.push((format!("rnn.layer{l}.input_weight"), ParamShape::of(&layer.input_weight), layer.input_weight.as_slice()));
            out.push((format!("rnn.layer{l}.recurrent_weight"), ParamShape::of(&layer.recurrent_weight), layer.recurrent_weight.as_slice()));
            out.push((format!("rnn.layer{l}.bias"), ParamShape::bias(&layer.bias), &layer.bias));
        }
        push_dense(&mut out, "rnn.head", &self.rnn.head);
        out
    }

    pub fn named_params_mut(&mut self) -> Vec<(String, ParamShape, &mut [f64])> {
        let mut out: Vec<(String, ParamShape, &mut [f64])> = Vec::new();
        if let Some(cnn) = &mut self.cnn {
            out.push(("cnn.conv.weight".into(), ParamShape::of(&cnn.conv.weight), cnn.conv.weight.as_mut_slice()));
            out.push(("cnn.conv.bias".into(), ParamShape::bias(&cnn.conv.bias), &mut cnn.conv.bias));
            push_dense_mut(&mut out, "cnn.dense1", &mut cnn.dense1);
            push_dense_mut(&mut out, "cnn.dense2", &mut cnn.dense2);
        }
        for (l, layer) in self.rnn.layers.iter_mut().enumerate() {
            out.push((format!("rnn.layer{l}.input_weight"), ParamShape::of(&layer.input_weight), layer.input_weight.as_mut_slice()));
            out.push((format!("rnn.layer{l}.recurrent_weight"), ParamShape::of(&layer.recurrent_weight), layer.recurrent_weight.as_mut_slice()));
            out.push((format!("rnn.layer{l}.bias"), ParamShape::bias(&layer.bias), &mut layer.bias));
        }
        push_dense_mut(&mut out, "rnn.head", &mut self.rnn.head);
        out
    }

    pub fn param_count(&self) -> usize {
        self.named_params().iter().map(|(_, _, v)| v.len()).sum()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.param_count());
        for (_, _, v) in self.named_params() {
            flat.extend_from_slice(v);
        }
        flat
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        let expected = self.param_count();
        if flat.len() != expected {
            return Err(Error::shape("flat parameter vector", expected, flat.len()));
        }
        let mut offset = 0;
        for (_, _, v) in self.named_params_mut() {
            v.copy_from_slice(&flat[offset..offset + v.len()]);
            offset += v.len();
        }
        Ok(())
    }

    /// Flat-vector index ranges of the CNN branch and the RNN branch.
    pub fn branch_ranges(&self) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let cnn_len: usize = self
            .named_params()
            .iter()
            .filter(|(name, _, _)| name.starts_with("cnn."))
            .map(|(_, _, v)| v.len())
            .sum();
        (0..cnn_len, cnn_len..self.param_count())
    }

    /// CNN branch on a normalized window; returns normalized magnitudes.
    pub fn cnn_forward(&self, window: &Matrix) -> Result<Vec<f64>> {
        let cnn = self.cnn.as_ref().ok_or_else(no_cnn)?;
        Ok(cnn_forward_cached(cnn, window)?.0)
    }

    /// RNN branch on a normalized window; returns the head output.
    pub fn rnn_forward(&self, window: &Matrix) -> Result<Vec<f64>> {
        let (h, _) = stacked_rnn_forward(&self.rnn.layers, window)?;
        Ok(dense_forward(&self.rnn.head, &h)?.0)
    }

    /// Full forward pass. The output is always magnitudes then angles.
    pub fn forward(&self, window: &Matrix) -> Result<(Vec<f64>, NetworkCache)> {
        let (h, rnn_cache) = stacked_rnn_forward(&self.rnn.layers, window)?;
        let (head_out, head_cache) = dense_forward(&self.rnn.head, &h)?;
        let (out, cnn_cache) = match &self.cnn {
            Some(cnn) => {
                let (mut magnitudes, cache) = cnn_forward_cached(cnn, window)?;
                magnitudes.extend_from_slice(&head_out);
                (magnitudes, Some(cache))
            }
            None => (head_out, None),
        };
        Ok((
            out,
            NetworkCache {
                cnn: cnn_cache,
                rnn: rnn_cache,
                head: head_cache,
            },
        ))
    }

    /// Gradient of a scalar loss with respect to every parameter, given the
    /// loss gradient with respect to the forward output.
    pub fn backward(&self, cache: &NetworkCache, d_output: &[f64]) -> Result<Network> {
        let n_out = self.rnn.head.outputs() + self.cnn.as_ref().map_or(0, |c| c.dense2.outputs());
        if d_output.len() != n_out {
            return Err(Error::shape("network output gradient", n_out, d_output.len()));
        }
        let (d_cnn, d_rnn) = match &self.cnn {
            Some(c) => d_output.split_at(c.dense2.outputs()),
            None => (&d_output[..0], d_output),
        };

        let cnn_grads = match (&self.cnn, &cache.cnn) {
            (Some(cnn), Some(c)) => Some(cnn_backward(cnn, c, d_cnn)?),
            (None, None) => None,
            _ => return Err(Error::MissingCache("cnn branch")),
        };
        let (head_grads, d_hidden) = dense_backward(&self.rnn.head, &cache.head, d_rnn)?;
        let (layer_grads, _) = stacked_rnn_backward(&self.rnn.layers, &cache.rnn, &d_hidden)?;
        Ok(Network {
            cnn: cnn_grads,
            rnn: RnnBranch {
                layers: layer_grads,
                head: head_grads,
            },
        })
    }

    /// Checks that every array matches the shapes implied by `cfg`.
    pub fn check_against(&self, cfg: &ModelConfig) -> Result<()> {
        let reference = Network::zeros(cfg);
        let mine = self.named_params();
        let theirs = reference.named_params();
        if mine.len() != theirs.len() {
            return Err(Error::shape("parameter array count", theirs.len(), mine.len()));
        }
        for ((name, shape, _), (ref_name, ref_shape, _)) in mine.iter().zip(&theirs) {
            if name != ref_name || shape != ref_shape {
                return Err(Error::shape(
                    "parameter array",
                    format!("{ref_name} {ref_shape:?}"),
                    format!("{name} {shape:?}"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamShape {
    Weight { rows: usize, cols: usize },
    Bias { len: usize },
}

impl ParamShape {
    fn of(m: &Matrix) -> Self {
        ParamShape::Weight {
            rows: m.rows(),
            cols: m.cols(),
        }
    }

    fn bias(b: &[f64]) -> Self {
        ParamShape::Bias { len: b.len() }
    }

    pub fn len(&self) -> usize {
        match *self {
            ParamShape::Weight { rows, cols } => rows * cols,
            ParamShape::Bias { len } => len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn weight_bound(rows: usize, cols: usize) -> f64 {
    (6.0 / (rows + cols) as f64).sqrt()
}

fn push_dense<'a>(out: &mut Vec<(String, ParamShape, &'a [f64])>, prefix: &str, d: &'a DenseParams) {
    out.push((format!("{prefix}.weight"), ParamShape::of(&d.weight), d.weight.as_slice()));
    if let Some(b) = &d.bias {
        out.push((format!("{prefix}.bias"), ParamShape::bias(b), b));
    }
}

fn push_dense_mut<'a>(
    out: &mut Vec<(String, ParamShape, &'a mut [f64])>,
    prefix: &str,
    d: &'a mut DenseParams,
) {
    out.push((format!("{prefix}.weight"), ParamShape::of(&d.weight), d.weight.as_mut_slice()));
    if let Some(b) = &mut d.bias {
        out.push((format!("{prefix}.bias"), ParamShape::Bias { len: b.len() }, b));
    }
}

fn no_cnn() -> Error {
    Error::InvalidArgument("model has no cnn branch".into())
}

fn cnn_forward_cached(cnn: &CnnBranch, window: &Matrix) -> Result<(Vec<f64>, CnnCache)> {
    let (maps, conv) = conv1d_forward(window, &cnn.conv)?;
    let (pooled, pool) = maxpool_forward(&maps, 2)?;
    let flat = flatten(&pooled);
    let (hidden, dense1) = dense_forward(&cnn.dense1, &flat)?;
    let (out, dense2) = dense_forward(&cnn.dense2, &hidden)?;
    Ok((
        out,
        CnnCache {
            conv,
            pool,
            pooled_shape: pooled.shape(),
            dense1,
            dense2,
        },
    ))
}

fn cnn_backward(cnn: &CnnBranch, cache: &CnnCache, d_out: &[f64]) -> Result<CnnBranch> {
    let (dense2, d_hidden) = dense_backward(&cnn.dense2, &cache.dense2, d_out)?;
    let (dense1, d_flat) = dense_backward(&cnn.dense1, &cache.dense1, &d_hidden)?;
    let (rows, cols) = cache.pooled_shape;
    let d_pooled = unflatten(&d_flat, rows, cols)?;
    let d_maps = maxpool_backward(&cache.pool, &d_pooled)?;
    let (conv, _) = conv1d_backward(&cnn.conv, &cache.conv, &d_maps)?;
    Ok(CnnBranch { conv, dense1, dense2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_round_trip() {
        let cfg = ModelConfig::new(2, 5);
        let net = Network::init(&cfg, 3);
        let mut other = Network::zeros(&cfg);
        other.set_flat(&net.to_flat()).unwrap();
        assert_eq!(net, other);
        assert!(other.set_flat(&[0.0; 3]).is_err());
    }

    #[test]
    fn branch_ranges_cover_everything() {
        let cfg = ModelConfig::new(3, 6);
        let net = Network::zeros(&cfg);
        let (cnn, rnn) = net.branch_ranges();
        assert_eq!(cnn.start, 0);
        assert_eq!(cnn.end, rnn.start);
        assert_eq!(rnn.end, net.param_count());

        let only = Network::zeros(&ModelConfig::rnn_only(3, 6));
        let (cnn, rnn) = only.branch_ranges();
        assert!(cnn.is_empty());
        assert_eq!(rnn, 0..only.param_count());
    }

    #[test]
    fn output_layout() {
        let cfg = ModelConfig::new(3, 6);
        let mut net = Network::zeros(&cfg);
        net.cnn.as_mut().unwrap().dense2.bias = Some(vec![1.0, 2.0, 3.0]);
        net.rnn.head.bias = Some(vec![-1.0, -2.0, -3.0]);
        let (out, _) = net.forward(&Matrix::zeros(6, 6)).unwrap();
        assert_eq!(out, vec![1.0, 2.0, 3.0, -1.0, -2.0, -3.0]);
    }

    #[test]
    fn rejects_wrong_window() {
        let net = Network::zeros(&ModelConfig::new(3, 6));
        assert!(net.forward(&Matrix::zeros(5, 6)).is_err());
    }
}
