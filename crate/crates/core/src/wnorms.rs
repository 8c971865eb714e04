//! Weighted inner products, weighted norms and operator norms.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{self, Matrix};
use crate::tensor::DenseTensor;
use crate::winverse::{wsvd, Weight, WeightPair};

fn check_vector(op: &'static str, x: &DenseTensor, wt: &Weight) -> Result<()> {
    if !x.is_vector_like() || x.row_shape() != wt.shape() {
        return Err(Error::ShapeMismatch {
            op,
            left: x.shape_label(),
            right: format!("weight {:?}", wt.shape()),
        });
    }
    Ok(())
}

/// `<X, Y>_M = <M X, Y> = Y^H M X`.
pub fn weighted_inner(x: &DenseTensor, y: &DenseTensor, wt: &Weight) -> Result<Complex64> {
    check_vector("weighted_inner", x, wt)?;
    check_vector("weighted_inner", y, wt)?;
    wt.tensor().ein(x).inner(y)
}

/// `||X||_M = ||M^{1/2} X||`.
pub fn weighted_vec_norm(x: &DenseTensor, wt: &Weight) -> Result<f64> {
    check_vector("weighted_vec_norm", x, wt)?;
    Ok(wt.sqrt_tensor().ein(x).norm())
}

/// Spectral norm: the largest singular value of the reshaped tensor.
pub fn op_norm(a: &DenseTensor) -> Result<f64> {
    matrix_op_norm(&a.to_matrix())
}

fn matrix_op_norm(m: &Matrix) -> Result<f64> {
    Ok(matrix::svd(m)?.s.first().copied().unwrap_or(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `||A||_{MN} = ||M^{1/2} A N^{-1/2}||` for `A` in `C^{I x J}`.
    MN,
    /// `||B||_{NM} = ||N^{1/2} B M^{-1/2}||` for `B` in `C^{J x I}`.
    NM,
}

/// Weighted operator norm. `w` is always the pair `(M, N)` of the forward
/// tensor; `Direction::NM` measures tensors of the transposed shape such as
/// `A^†_{M,N}`.
pub fn weighted_op_norm(a: &DenseTensor, w: &WeightPair, direction: Direction) -> Result<f64> {
    let m = match direction {
        Direction::MN => {
            w.check("weighted_op_norm", a)?;
            w.m().sqrt().matmul(&a.to_matrix()).matmul(w.n().inv_sqrt())
        }
        Direction::NM => {
            w.swapped().check("weighted_op_norm", a)?;
            w.n().sqrt().matmul(&a.to_matrix()).matmul(w.m().inv_sqrt())
        }
    };
    matrix_op_norm(&m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    pub spectral: f64,
    pub weighted_mn: f64,
    /// `||X||_{NM}` of the supplied inverse `X`.
    pub weighted_nm: f64,
    pub mu_max: f64,
    /// Smallest nonzero (M,N) singular value; zero for the zero tensor.
    pub mu_min: f64,
}

pub fn norm_report(a: &DenseTensor, inverse: &DenseTensor, w: &WeightPair) -> Result<NormReport> {
    let f = wsvd(a, w)?;
    let mu = f.mu();
    Ok(NormReport {
        spectral: op_norm(a)?,
        weighted_mn: weighted_op_norm(a, w, Direction::MN)?,
        weighted_nm: weighted_op_norm(inverse, w, Direction::NM)?,
        mu_max: mu.first().copied().unwrap_or(0.0),
        mu_min: mu.last().copied().unwrap_or(0.0),
    })
}
