//! Forward and backward kernels for every layer of the hybrid network.
//!
//! Forward functions are pure: they return the output together with the
//! cache the matching backward function needs. [`layer_backward`] is a
//! uniform entry point over all layer kinds for callers that hold caches
//! in a heterogeneous list.

mod activation;
mod conv;
mod dense;
mod pool;
mod rnn;

pub use activation::{relu, relu_backward, Activation};
pub use conv::{conv1d_backward, conv1d_forward, ConvCache, ConvParams};
pub use dense::{dense_backward, dense_forward, DenseCache, DenseParams};
pub use pool::{flatten, maxpool_backward, maxpool_forward, unflatten, PoolCache};
pub use rnn::{
    rnn_cell_backward, rnn_cell_forward, rnn_cell_step, stacked_rnn_backward,
    stacked_rnn_forward, RnnCellCache, RnnCellGrads, RnnLayerParams, StackedRnnCache,
};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// A layer and, where it has them, its parameters.
#[derive(Debug, Clone, Copy)]
pub enum Layer<'a> {
    Relu,
    Conv1d(&'a ConvParams),
    MaxPool,
    Flatten,
    Dense(&'a DenseParams),
    RnnCell(&'a RnnLayerParams),
    StackedRnn(&'a [RnnLayerParams]),
}

impl Layer<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Layer::Relu => "relu",
            Layer::Conv1d(_) => "conv1d",
            Layer::MaxPool => "maxpool",
            Layer::Flatten => "flatten",
            Layer::Dense(_) => "dense",
            Layer::RnnCell(_) => "rnn cell",
            Layer::StackedRnn(_) => "stacked rnn",
        }
    }
}

#[derive(Debug, Clone)]
pub enum ForwardCache {
    Relu(Vec<f64>),
    Conv1d(ConvCache),
    MaxPool(PoolCache),
    Flatten { rows: usize, cols: usize },
    Dense(DenseCache),
    RnnCell(RnnCellCache),
    StackedRnn(StackedRnnCache),
}

/// Activation or gradient flowing between layers.
#[derive(Debug, Clone, PartialEq)]
pub enum Signal {
    Vector(Vec<f64>),
    Matrix(Matrix),
}

impl Signal {
    fn as_vector(&self, context: &'static str) -> Result<&[f64]> {
        match self {
            Signal::Vector(v) => Ok(v),
            Signal::Matrix(m) => Err(Error::shape(context, "vector", format!("{:?} matrix", m.shape()))),
        }
    }

    fn as_matrix(&self, context: &'static str) -> Result<&Matrix> {
        match self {
            Signal::Matrix(m) => Ok(m),
            Signal::Vector(v) => Err(Error::shape(context, "matrix", format!("vector of {}", v.len()))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum ParamGrads {
    None,
    Conv1d(ConvParams),
    Dense(DenseParams),
    RnnCell(RnnLayerParams),
    StackedRnn(Vec<RnnLayerParams>),
}

#[derive(Debug, Clone)]
pub struct LayerGrads {
    pub params: ParamGrads,
    pub input: Signal,
    /// Gradient with respect to the previous hidden state (recurrent cell only).
    pub prev_hidden: Option<Vec<f64>>,
}

/// Runs `layer` forward on `input`, returning the output and its cache.
/// Max pooling uses a window of 2.
pub fn layer_forward(layer: Layer<'_>, input: &Signal) -> Result<(Signal, ForwardCache)> {
    Ok(match layer {
        Layer::Relu => {
            let x = input.as_vector("relu input")?;
            (Signal::Vector(relu(x)), ForwardCache::Relu(x.to_vec()))
        }
        Layer::Conv1d(p) => {
            let (out, cache) = conv1d_forward(input.as_matrix("conv1d input")?, p)?;
            (Signal::Matrix(out), ForwardCache::Conv1d(cache))
        }
        Layer::MaxPool => {
            let (out, cache) = maxpool_forward(input.as_matrix("maxpool input")?, 2)?;
            (Signal::Matrix(out), ForwardCache::MaxPool(cache))
        }
        Layer::Flatten => {
            let m = input.as_matrix("flatten input")?;
            (
                Signal::Vector(flatten(m)),
                ForwardCache::Flatten {
                    rows: m.rows(),
                    cols: m.cols(),
                },
            )
        }
        Layer::Dense(p) => {
            let (out, cache) = dense_forward(p, input.as_vector("dense input")?)?;
            (Signal::Vector(out), ForwardCache::Dense(cache))
        }
        Layer::RnnCell(p) => {
            let zero = vec![0.0; p.hidden()];
            let (out, cache) = rnn_cell_forward(p, input.as_vector("rnn cell input")?, &zero)?;
            (Signal::Vector(out), ForwardCache::RnnCell(cache))
        }
        Layer::StackedRnn(layers) => {
            let (out, cache) = stacked_rnn_forward(layers, input.as_matrix("stacked rnn input")?)?;
            (Signal::Vector(out), ForwardCache::StackedRnn(cache))
        }
    })
}

/// Gradient of `layer` with respect to its parameters and input, contracted
/// with `upstream`. Fails with [`Error::MissingCache`] when `cache` is absent
/// or belongs to a different layer kind.
pub fn layer_backward(
    layer: Layer<'_>,
    cache: Option<&ForwardCache>,
    upstream: &Signal,
) -> Result<LayerGrads> {
    let missing = || Error::MissingCache(layer.name());
    let cache = cache.ok_or_else(missing)?;
    let plain = |input: Signal| LayerGrads {
        params: ParamGrads::None,
        input,
        prev_hidden: None,
    };
    Ok(match (layer, cache) {
        (Layer::Relu, ForwardCache::Relu(x)) => {
            let up = upstream.as_vector("relu upstream")?;
            if up.len() != x.len() {
                return Err(Error::shape("relu upstream", x.len(), up.len()));
            }
            plain(Signal::Vector(relu_backward(x, up)))
        }
        (Layer::Conv1d(p), ForwardCache::Conv1d(c)) => {
            let (g, dx) = conv1d_backward(p, c, upstream.as_matrix("conv1d upstream")?)?;
            LayerGrads {
                params: ParamGrads::Conv1d(g),
                input: Signal::Matrix(dx),
                prev_hidden: None,
            }
        }
        (Layer::MaxPool, ForwardCache::MaxPool(c)) => plain(Signal::Matrix(maxpool_backward(
            c,
            upstream.as_matrix("maxpool upstream")?,
        )?)),
        (Layer::Flatten, ForwardCache::Flatten { rows, cols }) => plain(Signal::Matrix(
            unflatten(upstream.as_vector("flatten upstream")?, *rows, *cols)?,
        )),
        (Layer::Dense(p), ForwardCache::Dense(c)) => {
            let (g, dx) = dense_backward(p, c, upstream.as_vector("dense upstream")?)?;
            LayerGrads {
                params: ParamGrads::Dense(g),
                input: Signal::Vector(dx),
                prev_hidden: None,
            }
        }
        (Layer::RnnCell(p), ForwardCache::RnnCell(c)) => {
            let g = rnn_cell_backward(p, c, upstream.as_vector("rnn cell upstream")?)?;
            LayerGrads {
                params: ParamGrads::RnnCell(g.params),
                input: Signal::Vector(g.below),
                prev_hidden: Some(g.prev_hidden),
            }
        }
        (Layer::StackedRnn(layers), ForwardCache::StackedRnn(c)) => {
            let (g, dx) =
                stacked_rnn_backward(layers, c, upstream.as_vector("stacked rnn upstream")?)?;
            LayerGrads {
                params: ParamGrads::StackedRnn(g),
                input: Signal::Matrix(dx),
                prev_hidden: None,
            }
        }
        _ => return Err(missing()),
    })
}
