use serde::{Deserialize, Serialize};

use super::activation::Activation;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Fully connected layer `activation(W·x + b)`. `weight` is `out × in`;
/// `bias` is absent when the layer is configured without one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseParams {
    pub weight: Matrix,
    pub bias: Option<Vec<f64>>,
    pub activation: Activation,
}

#[derive(Debug, Clone)]
pub struct DenseCache {
    pub input: Vec<f64>,
    pub pre_activation: Vec<f64>,
}

impl DenseParams {
    pub fn zeros(outputs: usize, inputs: usize, with_bias: bool, activation: Activation) -> Self {
        Self {
            weight: Matrix::zeros(outputs, inputs),
            bias: with_bias.then(|| vec![0.0; outputs]),
            activation,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weight.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weight.rows()
    }

    fn check(&self, x_len: usize) -> Result<()> {
        if x_len != self.inputs() {
            return Err(Error::shape("dense input", self.inputs(), x_len));
        }
        if let Some(b) = &self.bias {
            if b.len() != self.outputs() {
                return Err(Error::shape("dense bias", self.outputs(), b.len()));
            }
        }
        Ok(())
    }
}

pub fn dense_forward(params: &DenseParams, x: &[f64]) -> Result<(Vec<f64>, DenseCache)> {
    params.check(x.len())?;
    let mut pre = params.weight.matvec(x);
    if let Some(b) = &params.bias {
        pre.iter_mut().zip(b).for_each(|(p, bi)| *p += bi);
    }
    let out = pre.iter().map(|&v| params.activation.apply(v)).collect();
    Ok((
        out,
        DenseCache {
            input: x.to_vec(),
            pre_activation: pre,
        },
    ))
}

/// Returns `(parameter gradients, input gradient)`.
pub fn dense_backward(
    params: &DenseParams,
    cache: &DenseCache,
    upstream: &[f64],
) -> Result<(DenseParams, Vec<f64>)> {
    params.check(cache.input.len())?;
    if upstream.len() != params.outputs() {
        return Err(Error::shape(
            "dense upstream gradient",
            params.outputs(),
            upstream.len(),
        ));
    }
    let delta: Vec<f64> = upstream
        .iter()
        .zip(&cache.pre_activation)
        .map(|(&g, &z)| g * params.activation.derivative(z))
        .collect();
    let mut grads = DenseParams::zeros(
        params.outputs(),
        params.inputs(),
        params.bias.is_some(),
        params.activation,
    );
    grads.weight.add_outer(&delta, &cache.input);
    if let Some(b) = grads.bias.as_mut() {
        b.copy_from_slice(&delta);
    }
    let mut d_input = vec![0.0; params.inputs()];
    params.weight.add_matvec_transposed(&delta, &mut d_input);
    Ok((grads, d_input))
}
