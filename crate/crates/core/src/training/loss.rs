use crate::error::{Error, Result};

/// Mean squared error and its gradient `2 (pred − target) / len`.
pub fn mse_loss(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    if pred.len() != target.len() {
        return Err(Error::shape("mse target", pred.len(), target.len()));
    }
    if pred.is_empty() {
        return Err(Error::InvalidArgument("mse over an empty vector".into()));
    }
    let len = pred.len() as f64;
    let mut loss = 0.0;
    let grad = pred
        .iter()
        .zip(target)
        .map(|(p, t)| {
            let d = p - t;
            loss += d * d;
            2.0 * d / len
        })
        .collect();
    Ok((loss / len, grad))
}

/// `MSE(magnitudes) + MSE(angles)` for a state laid out magnitudes first.
pub fn joint_loss(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    if pred.len() != target.len() || !pred.len().is_multiple_of(2) {
        return Err(Error::shape("joint loss target", pred.len(), target.len()));
    }
    let n = pred.len() / 2;
    let (vm_loss, mut grad) = mse_loss(&pred[..n], &target[..n])?;
    let (va_loss, va_grad) = mse_loss(&pred[n..], &target[n..])?;
    grad.extend(va_grad);
    Ok((vm_loss + va_loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction() {
        let (l, g) = mse_loss(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!(l, 0.0);
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn uniform_error() {
        let (l, _) = mse_loss(&[1.5, 2.5, 3.5], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(l, 0.25);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let pred = [0.3, -1.2, 2.0, 0.7];
        let target = [0.1, -1.0, 1.5, 0.9];
        let (_, g) = mse_loss(&pred, &target).unwrap();
        let h = 1e-6;
        for i in 0..pred.len() {
            let mut up = pred;
            let mut down = pred;
            up[i] += h;
            down[i] -= h;
            let fd = (mse_loss(&up, &target).unwrap().0 - mse_loss(&down, &target).unwrap().0) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-8, "{i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn length_mismatch() {
        assert!(mse_loss(&[1.0], &[1.0, 2.0]).is_err());
        assert!(joint_loss(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn joint_loss_sums_halves() {
        let (l, g) = joint_loss(&[1.0, 0.0, 0.0, 3.0], &[0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(l, 0.5 + 4.5);
        assert_eq!(g, vec![1.0, 0.0, 0.0, 3.0]);
    }
}
