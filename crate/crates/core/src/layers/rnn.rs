//! Simple ReLU recurrent layers stacked vertically.
//!
//! Layer `l` at step `t` computes
//! `h[l][t] = relu(input_weight · h[l-1][t] + recurrent_weight · h[l][t-1] + bias)`
//! where `h[0][t]` is column `t` of the input sequence and every `h[l][-1]`
//! is the zero vector.

use serde::{Deserialize, Serialize};

use super::activation::relu_scalar;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RnnLayerParams {
    /// `H × D`, applied to the layer below.
    pub input_weight: Matrix,
    /// `H × H`, applied to this layer's previous hidden state.
    pub recurrent_weight: Matrix,
    pub bias: Vec<f64>,
}

impl RnnLayerParams {
    pub fn zeros(hidden: usize, inputs: usize) -> Self {
        Self {
            input_weight: Matrix::zeros(hidden, inputs),
            recurrent_weight: Matrix::zeros(hidden, hidden),
            bias: vec![0.0; hidden],
        }
    }

    pub fn hidden(&self) -> usize {
        self.recurrent_weight.rows()
    }

    pub fn inputs(&self) -> usize {
        self.input_weight.cols()
    }

    fn check(&self) -> Result<()> {
        let h = self.recurrent_weight.rows();
        if self.recurrent_weight.cols() != h {
            return Err(Error::shape(
                "rnn recurrent weight",
                format!("{h}x{h}"),
                format!("{h}x{}", self.recurrent_weight.cols()),
            ));
        }
        if self.input_weight.rows() != h {
            return Err(Error::shape("rnn input weight rows", h, self.input_weight.rows()));
        }
        if self.bias.len() != h {
            return Err(Error::shape("rnn bias", h, self.bias.len()));
        }
        Ok(())
    }

    fn pre_activation(&self, below: &[f64], prev_hidden: &[f64]) -> Vec<f64> {
        let mut z = self.input_weight.matvec(below);
        let rec = self.recurrent_weight.matvec(prev_hidden);
        for ((zi, ri), bi) in z.iter_mut().zip(&rec).zip(&self.bias) {
            *zi += ri + bi;
        }
        z
    }
}

#[derive(Debug, Clone)]
pub struct RnnCellCache {
    pub below: Vec<f64>,
    pub prev_hidden: Vec<f64>,
    pub pre_activation: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct StackedRnnCache {
    pub sequence: Matrix,
    /// `pre_activation[l][t]`
    pub pre_activation: Vec<Vec<Vec<f64>>>,
    /// `hidden[l][t]`, post-activation.
    pub hidden: Vec<Vec<Vec<f64>>>,
}

/// Gradients of one recurrent step.
#[derive(Debug, Clone)]
pub struct RnnCellGrads {
    pub params: RnnLayerParams,
    pub below: Vec<f64>,
    pub prev_hidden: Vec<f64>,
}

pub fn rnn_cell_step(
    params: &RnnLayerParams,
    below: &[f64],
    prev_hidden: &[f64],
) -> Result<Vec<f64>> {
    Ok(rnn_cell_forward(params, below, prev_hidden)?.0)
}

pub fn rnn_cell_forward(
    params: &RnnLayerParams,
    below: &[f64],
    prev_hidden: &[f64],
) -> Result<(Vec<f64>, RnnCellCache)> {
    params.check()?;
    if below.len() != params.inputs() {
        return Err(Error::shape("rnn cell input", params.inputs(), below.len()));
    }
    if prev_hidden.len() != params.hidden() {
        return Err(Error::shape(
            "rnn cell previous hidden",
            params.hidden(),
            prev_hidden.len(),
        ));
    }
    let pre = params.pre_activation(below, prev_hidden);
    let out = pre.iter().map(|&v| relu_scalar(v)).collect();
    Ok((
        out,
        RnnCellCache {
            below: below.to_vec(),
            prev_hidden: prev_hidden.to_vec(),
            pre_activation: pre,
        },
    ))
}

pub fn rnn_cell_backward(
    params: &RnnLayerParams,
    cache: &RnnCellCache,
    upstream: &[f64],
) -> Result<RnnCellGrads> {
    params.check()?;
    if upstream.len() != params.hidden() {
        return Err(Error::shape("rnn cell upstream", params.hidden(), upstream.len()));
    }
    let mut grads = RnnLayerParams::zeros(params.hidden(), params.inputs());
    let mut d_below = vec![0.0; params.inputs()];
    let mut d_prev = vec![0.0; params.hidden()];
    accumulate_step(
        params,
        &cache.pre_activation,
        &cache.below,
        Some(&cache.prev_hidden),
        upstream,
        &mut grads,
        &mut d_below,
        &mut d_prev,
    );
    Ok(RnnCellGrads {
        params: grads,
        below: d_below,
        prev_hidden: d_prev,
    })
}

/// Backpropagates `upstream` through one step, accumulating into `grads`
/// and writing the input and recurrent gradients into the (zeroed) buffers.
#[allow(clippy::too_many_arguments)]
fn accumulate_step(
    params: &RnnLayerParams,
    pre: &[f64],
    below: &[f64],
    prev_hidden: Option<&[f64]>,
    upstream: &[f64],
    grads: &mut RnnLayerParams,
    d_below: &mut [f64],
    d_prev: &mut [f64],
) {
    let delta: Vec<f64> = upstream
        .iter()
        .zip(pre)
        .map(|(&g, &z)| if z > 0.0 { g } else { 0.0 })
        .collect();
    grads.input_weight.add_outer(&delta, below);
    if let Some(prev) = prev_hidden {
        grads.recurrent_weight.add_outer(&delta, prev);
    }
    grads
        .bias
        .iter_mut()
        .zip(&delta)
        .for_each(|(b, d)| *b += d);
    params.input_weight.add_matvec_transposed(&delta, d_below);
    params.recurrent_weight.add_matvec_transposed(&delta, d_prev);
}

fn check_stack(layers: &[RnnLayerParams], input_rows: usize) -> Result<()> {
    if layers.is_empty() {
        return Err(Error::InvalidArgument("stacked rnn needs at least one layer".into()));
    }
    let mut expected = input_rows;
    for layer in layers {
        layer.check()?;
        if layer.inputs() != expected {
            return Err(Error::shape("stacked rnn layer input", expected, layer.inputs()));
        }
        expected = layer.hidden();
    }
    Ok(())
}

/// Runs every layer over the full sequence (columns consumed left to right)
/// and returns the top layer's final hidden state.
pub fn stacked_rnn_forward(
    layers: &[RnnLayerParams],
    sequence: &Matrix,
) -> Result<(Vec<f64>, StackedRnnCache)> {
    check_stack(layers, sequence.rows())?;
    let steps = sequence.cols();
    let mut pre_all = Vec::with_capacity(layers.len());
    let mut hidden_all: Vec<Vec<Vec<f64>>> = Vec::with_capacity(layers.len());
    for (l, layer) in layers.iter().enumerate() {
        let mut pre_l = Vec::with_capacity(steps);
        let mut hidden_l: Vec<Vec<f64>> = Vec::with_capacity(steps);
        let zero = vec![0.0; layer.hidden()];
        for t in 0..steps {
            let below = if l == 0 {
                sequence.column(t)
            } else {
                hidden_all[l - 1][t].clone()
            };
            let prev = if t == 0 { &zero } else { &hidden_l[t - 1] };
            let pre = layer.pre_activation(&below, prev);
            hidden_l.push(pre.iter().map(|&v| relu_scalar(v)).collect());
            pre_l.push(pre);
        }
        pre_all.push(pre_l);
        hidden_all.push(hidden_l);
    }
    let out = hidden_all
        .last()
        .and_then(|h| h.last())
        .cloned()
        .ok_or_else(|| Error::InvalidArgument("empty sequence".into()))?;
    Ok((
        out,
        StackedRnnCache {
            sequence: sequence.clone(),
            pre_activation: pre_all,
            hidden: hidden_all,
        },
    ))
}

/// Backpropagation through time over every step and layer. `upstream` is
/// the gradient with respect to the top layer's final hidden state.
pub fn stacked_rnn_backward(
    layers: &[RnnLayerParams],
    cache: &StackedRnnCache,
    upstream: &[f64],
) -> Result<(Vec<RnnLayerParams>, Matrix)> {
    check_stack(layers, cache.sequence.rows())?;
    let top = layers.last().expect("checked non-empty");
    if upstream.len() != top.hidden() {
        return Err(Error::shape("stacked rnn upstream", top.hidden(), upstream.len()));
    }
    let steps = cache.sequence.cols();
    if cache.hidden.len() != layers.len() || cache.hidden.iter().any(|h| h.len() != steps) {
        return Err(Error::MissingCache("stacked rnn"));
    }

    let mut grads: Vec<RnnLayerParams> = layers
        .iter()
        .map(|p| RnnLayerParams::zeros(p.hidden(), p.inputs()))
        .collect();

    // Gradient flowing into h[l][t] from the layer above (or the head).
    let mut from_above: Vec<Vec<f64>> = vec![vec![0.0; top.hidden()]; steps];
    from_above[steps - 1].copy_from_slice(upstream);

    for l in (0..layers.len()).rev() {
        let layer = &layers[l];
        let mut carry = vec![0.0; layer.hidden()];
        let mut to_below = vec![vec![0.0; layer.inputs()]; steps];
        for t in (0..steps).rev() {
            let dh: Vec<f64> = from_above[t].iter().zip(&carry).map(|(a, b)| a + b).collect();
            let below = if l == 0 {
                cache.sequence.column(t)
            } else {
                cache.hidden[l - 1][t].clone()
            };
            let prev = (t > 0).then(|| cache.hidden[l][t - 1].as_slice());
            let mut d_prev = vec![0.0; layer.hidden()];
            accumulate_step(
                layer,
                &cache.pre_activation[l][t],
                &below,
                prev,
                &dh,
                &mut grads[l],
                &mut to_below[t],
                &mut d_prev,
            );
            carry = d_prev;
        }
        from_above = to_below;
    }

    let columns: Vec<&[f64]> = from_above.iter().map(Vec::as_slice).collect();
    let d_sequence = Matrix::from_columns(&columns)?;
    Ok((grads, d_sequence))
}
