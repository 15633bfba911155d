use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Input shape plus, for every pooled element, the input column that won.
#[derive(Debug, Clone)]
pub struct PoolCache {
    pub input_shape: (usize, usize),
    pub pool: usize,
    pub argmax: Vec<usize>,
}

/// Non-overlapping max pooling along each row with stride equal to `pool`.
/// A trailing remainder shorter than `pool` is dropped. Ties go to the
/// earliest position.
pub fn maxpool_forward(maps: &Matrix, pool: usize) -> Result<(Matrix, PoolCache)> {
    if pool == 0 {
        return Err(Error::InvalidArgument("pool width must be positive".into()));
    }
    if maps.cols() < pool {
        return Err(Error::shape(
            "maxpool input width",
            format!(">= {pool}"),
            maps.cols(),
        ));
    }
    let out_cols = maps.cols() / pool;
    let mut out = Matrix::zeros(maps.rows(), out_cols);
    let mut argmax = Vec::with_capacity(maps.rows() * out_cols);
    for k in 0..maps.rows() {
        let row = maps.row(k);
        for q in 0..out_cols {
            let start = q * pool;
            let mut best = start;
            for j in start + 1..start + pool {
                if row[j] > row[best] {
                    best = j;
                }
            }
            out.set(k, q, row[best]);
            argmax.push(best);
        }
    }
    Ok((
        out,
        PoolCache {
            input_shape: maps.shape(),
            pool,
            argmax,
        },
    ))
}

pub fn maxpool_backward(cache: &PoolCache, upstream: &Matrix) -> Result<Matrix> {
    let (rows, cols) = cache.input_shape;
    let out_cols = cols / cache.pool;
    if upstream.shape() != (rows, out_cols) {
        return Err(Error::shape(
            "maxpool upstream gradient",
            format!("{rows}x{out_cols}"),
            format!("{}x{}", upstream.rows(), upstream.cols()),
        ));
    }
    let mut d_input = Matrix::zeros(rows, cols);
    for k in 0..rows {
        for q in 0..out_cols {
            let j = cache.argmax[k * out_cols + q];
            let v = d_input.get(k, j) + upstream.get(k, q);
            d_input.set(k, j, v);
        }
    }
    Ok(d_input)
}

/// Map-major flattening: all positions of map 0, then map 1, and so on.
pub fn flatten(pooled: &Matrix) -> Vec<f64> {
    pooled.as_slice().to_vec()
}

pub fn unflatten(flat: &[f64], rows: usize, cols: usize) -> Result<Matrix> {
    Matrix::from_vec(rows, cols, flat.to_vec())
}
