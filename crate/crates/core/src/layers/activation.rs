use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Linear,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => relu_scalar(x),
            Activation::Linear => x,
        }
    }

    /// Derivative evaluated at the pre-activation `x`. ReLU uses 0 at exactly 0.
    #[inline]
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
        }
    }
}

#[inline]
pub(crate) fn relu_scalar(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

pub fn relu(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| relu_scalar(v)).collect()
}

/// Gradient of `relu` at `input`, contracted with `upstream`.
pub fn relu_backward(input: &[f64], upstream: &[f64]) -> Vec<f64> {
    input
        .iter()
        .zip(upstream)
        .map(|(&x, &g)| if x > 0.0 { g } else { 0.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_sign_boundaries() {
        assert_eq!(relu(&[-1.0, 0.0, 2.5]), vec![0.0, 0.0, 2.5]);
        assert_eq!(relu(&[0.0; 5]), vec![0.0; 5]);
        assert_eq!(relu(&[3.0]), vec![3.0]);
    }

    #[test]
    fn relu_gradient_is_zero_at_zero() {
        assert_eq!(relu_backward(&[-2.0, 0.0, 1.0], &[5.0, 5.0, 5.0]), vec![0.0, 0.0, 5.0]);
        assert_eq!(Activation::Relu.derivative(0.0), 0.0);
    }

    #[test]
    fn dead_relu_blocks_gradient() {
        assert_eq!(relu_backward(&[-1.0, -3.0], &[0.7, -0.2]), vec![0.0, 0.0]);
    }
}
