//! Eigenvalues of even-order square tensors and the weighted
//! self-conjugate / normal / EP predicates.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{self, Matrix};
use crate::tensor::DenseTensor;
use crate::winverse::{wmp_inverse, Weight, WeightPair};

pub const DEFAULT_TOL: f64 = 1e-9;

/// Eigenvalues ordered by descending modulus, then ascending argument.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<Complex64>,
    pub shape: Vec<usize>,
}

impl Spectrum {
    pub fn radius(&self) -> f64 {
        self.values.first().map_or(0.0, |z| z.norm())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Distance from `z` to the nearest eigenvalue.
    pub fn distance_to(&self, z: Complex64) -> f64 {
        self.values.iter().map(|v| (v - z).norm()).fold(f64::INFINITY, f64::min)
    }
}

fn require_square(op: &'static str, a: &DenseTensor) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            op,
            shape: a.shape_label(),
        })
    }
}

pub fn eigenvalues(a: &DenseTensor) -> Result<Spectrum> {
    require_square("eigenvalues", a)?;
    let values = matrix::gen_eig(&a.to_matrix())?;
    Ok(Spectrum {
        values,
        shape: a.row_shape().to_vec(),
    })
}

pub fn spectral_radius(a: &DenseTensor) -> Result<f64> {
    Ok(eigenvalues(a)?.radius())
}

fn wrap(m: &Matrix, like: &DenseTensor) -> DenseTensor {
    DenseTensor::from_matrix(m, like.row_shape(), like.col_shape()).expect("same shape as operand")
}

fn check_weight(op: &'static str, a: &DenseTensor, n: &Weight) -> Result<()> {
    require_square(op, a)?;
    if a.row_shape() != n.shape() {
        return Err(Error::ShapeMismatch {
            op,
            left: a.shape_label(),
            right: format!("weight {:?}", n.shape()),
        });
    }
    Ok(())
}

/// Similarity transform `N^{1/2} A N^{-1/2}`.
pub fn tilde_n(a: &DenseTensor, n: &Weight) -> Result<DenseTensor> {
    check_weight("tilde_n", a, n)?;
    Ok(wrap(&n.sqrt().matmul(&a.to_matrix()).matmul(n.inv_sqrt()), a))
}

/// Congruence transform `M^{1/2} A N^{-1/2}`.
pub fn tilde_mn(a: &DenseTensor, w: &WeightPair) -> Result<DenseTensor> {
    w.check("tilde_mn", a)?;
    Ok(wrap(&w.m().sqrt().matmul(&a.to_matrix()).matmul(w.n().inv_sqrt()), a))
}

/// Weighted conjugate transpose with a single weight, `N^{-1} A^H N`.
pub fn sharp_nn(a: &DenseTensor, n: &Weight) -> Result<DenseTensor> {
    check_weight("sharp_nn", a, n)?;
    Ok(wrap(&n.inv().matmul(&a.to_matrix().adjoint()).matmul(n.matrix()), a))
}

/// `||A^#_{NN} - A|| / (1 + ||A||)`.
pub fn self_conjugate_residual(a: &DenseTensor, n: &Weight) -> Result<f64> {
    let s = sharp_nn(a, n)?;
    Ok(s.distance(a) / (1.0 + a.frobenius_norm()))
}

/// `||A^#_{NN} A - A A^#_{NN}|| / (1 + ||A||^2)`.
pub fn normal_residual(a: &DenseTensor, n: &Weight) -> Result<f64> {
    let s = sharp_nn(a, n)?;
    let d = s.ein(a).distance(&a.ein(&s));
    let na = a.frobenius_norm();
    Ok(d / (1.0 + na * na))
}

/// `||A X - X A|| / (1 + ||A|| ||X||)` with `X = A^†_{M,N}`.
pub fn ep_residual(a: &DenseTensor, w: &WeightPair) -> Result<f64> {
    require_square("ep_residual", a)?;
    let x = wmp_inverse(a, w)?;
    let d = a.ein(&x).distance(&x.ein(a));
    Ok(d / (1.0 + a.frobenius_norm() * x.frobenius_norm()))
}

pub fn is_weighted_self_conjugate(a: &DenseTensor, n: &Weight, tol: f64) -> Result<bool> {
    Ok(self_conjugate_residual(a, n)? <= tol)
}

pub fn is_weighted_normal(a: &DenseTensor, n: &Weight, tol: f64) -> Result<bool> {
    Ok(normal_residual(a, n)? <= tol)
}

pub fn is_weighted_ep(a: &DenseTensor, w: &WeightPair, tol: f64) -> Result<bool> {
    Ok(ep_residual(a, w)? <= tol)
}

/// Greedy nearest pairing of two equally sized eigenvalue lists (already in
/// spectrum order); returns the largest paired distance, or infinity when the
/// counts differ.
pub fn match_spectra(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .fold((usize::MAX, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}
