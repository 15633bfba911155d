//! One-dimensional convolution over the time axis of a lagged-state window.
//!
//! Each filter spans every feature row and `kernel` adjacent columns, so a
//! `rows × r` input produces one feature map of length `r − kernel + 1` per
//! filter. Positions are ordered chronologically: position `p` covers input
//! columns `p..p + kernel`.

use serde::{Deserialize, Serialize};

use super::activation::relu_scalar;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Filter bank. Row `k` of `weight` is filter `k`'s `in_rows × kernel`
/// weight matrix flattened row-major; `bias[k]` is its scalar bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvParams {
    pub kernel: usize,
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvCache {
    pub input: Matrix,
    pub pre_activation: Matrix,
}

impl ConvParams {
    pub fn zeros(filters: usize, in_rows: usize, kernel: usize) -> Self {
        Self {
            kernel,
            weight: Matrix::zeros(filters, in_rows * kernel),
            bias: vec![0.0; filters],
        }
    }

    /// Builds a filter bank from per-filter `(weight, bias)` pairs.
    pub fn from_filters(filters: &[(Matrix, f64)]) -> Result<Self> {
        let (first, _) = filters
            .first()
            .ok_or_else(|| Error::InvalidArgument("filter bank needs at least one filter".into()))?;
        let (in_rows, kernel) = first.shape();
        let mut params = Self::zeros(filters.len(), in_rows, kernel);
        for (k, (w, b)) in filters.iter().enumerate() {
            if w.shape() != (in_rows, kernel) {
                return Err(Error::shape(
                    "ConvParams::from_filters",
                    format!("{in_rows}x{kernel}"),
                    format!("{}x{}", w.rows(), w.cols()),
                ));
            }
            params.weight.row_mut(k).copy_from_slice(w.as_slice());
            params.bias[k] = *b;
        }
        Ok(params)
    }

    pub fn filters(&self) -> usize {
        self.weight.rows()
    }

    pub fn in_rows(&self) -> usize {
        self.weight.cols() / self.kernel
    }

    pub fn filter_weight(&self, k: usize) -> Matrix {
        Matrix::from_vec(self.in_rows(), self.kernel, self.weight.row(k).to_vec())
            .expect("filter row has in_rows * kernel entries")
    }

    fn check(&self, input: &Matrix) -> Result<()> {
        if self.kernel == 0 || !self.weight.cols().is_multiple_of(self.kernel) {
            return Err(Error::shape(
                "conv1d filter bank",
                "width divisible by kernel",
                format!("width {} with kernel {}", self.weight.cols(), self.kernel),
            ));
        }
        if self.bias.len() != self.filters() {
            return Err(Error::shape("conv1d bias", self.filters(), self.bias.len()));
        }
        if input.rows() != self.in_rows() {
            return Err(Error::shape("conv1d input rows", self.in_rows(), input.rows()));
        }
        if input.cols() < self.kernel {
            return Err(Error::shape(
                "conv1d input columns",
                format!(">= {}", self.kernel),
                input.cols(),
            ));
        }
        Ok(())
    }
}

/// Valid (stride 1, no padding) convolution followed by ReLU.
pub fn conv1d_forward(input: &Matrix, params: &ConvParams) -> Result<(Matrix, ConvCache)> {
    params.check(input)?;
    let kernel = params.kernel;
    let positions = input.cols() - kernel + 1;
    let mut pre = Matrix::zeros(params.filters(), positions);
    for k in 0..params.filters() {
        let w = params.weight.row(k);
        for p in 0..positions {
            let mut acc = params.bias[k];
            for i in 0..input.rows() {
                let x = &input.row(i)[p..p + kernel];
                let wi = &w[i * kernel..(i + 1) * kernel];
                for (a, b) in wi.iter().zip(x) {
                    acc += a * b;
                }
            }
            pre.set(k, p, acc);
        }
    }
    let mut out = pre.clone();
    out.as_mut_slice().iter_mut().for_each(|v| *v = relu_scalar(*v));
    Ok((
        out,
        ConvCache {
            input: input.clone(),
            pre_activation: pre,
        },
    ))
}

/// Returns `(parameter gradients, input gradient)`.
pub fn conv1d_backward(
    params: &ConvParams,
    cache: &ConvCache,
    upstream: &Matrix,
) -> Result<(ConvParams, Matrix)> {
    if upstream.shape() != cache.pre_activation.shape() {
        return Err(Error::shape(
            "conv1d upstream gradient",
            format!("{:?}", cache.pre_activation.shape()),
            format!("{:?}", upstream.shape()),
        ));
    }
    params.check(&cache.input)?;
    let kernel = params.kernel;
    let input = &cache.input;
    let mut grads = ConvParams::zeros(params.filters(), params.in_rows(), kernel);
    let mut d_input = Matrix::zeros(input.rows(), input.cols());

    for k in 0..params.filters() {
        let w = params.weight.row(k);
        for p in 0..upstream.cols() {
            let g = if cache.pre_activation.get(k, p) > 0.0 {
                upstream.get(k, p)
            } else {
                0.0
            };
            if g == 0.0 {
                continue;
            }
            grads.bias[k] += g;
            let dw = grads.weight.row_mut(k);
            for i in 0..input.rows() {
                let x = &input.row(i)[p..p + kernel];
                for j in 0..kernel {
                    dw[i * kernel + j] += g * x[j];
                }
            }
            for i in 0..input.rows() {
                let dx = &mut d_input.row_mut(i)[p..p + kernel];
                for j in 0..kernel {
                    dx[j] += g * w[i * kernel + j];
                }
            }
        }
    }
    Ok((grads, d_input))
}
