//! Weighted SVD, Moore-Penrose and weighted Moore-Penrose inverses.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{self, KernelError, Matrix, HERMITIAN_TOL};
use crate::tensor::{unravel, DenseTensor};

const OFF_DIAGONAL_TOL: f64 = 1e-12;

/// A validated Hermitian positive definite weight with cached factors.
#[derive(Debug, Clone)]
pub struct Weight {
    tensor: DenseTensor,
    matrix: Matrix,
    sqrt: Matrix,
    inv_sqrt: Matrix,
    inv: Matrix,
}

impl Weight {
    /// `which` labels the weight in error messages (for example `"M"`).
    pub fn new(which: &'static str, tensor: DenseTensor) -> Result<Self> {
        if !tensor.is_square() {
            return Err(Error::NotSquare {
                op: "weight",
                shape: tensor.shape_label(),
            });
        }
        let matrix = tensor.to_matrix();
        let asymmetry = matrix.hermitian_defect();
        if asymmetry > HERMITIAN_TOL {
            return Err(Error::WeightNotHermitian { which, asymmetry });
        }
        let (sqrt, inv_sqrt, inv) = matrix::hpd_factors(&matrix).map_err(|e| match e {
            KernelError::NotPositiveDefinite { min_eigenvalue } => {
                Error::WeightNotPositiveDefinite { which, min_eigenvalue }
            }
            KernelError::NotHermitian { asymmetry } => Error::WeightNotHermitian { which, asymmetry },
            other => Error::Kernel(other),
        })?;
        Ok(Self {
            tensor,
            matrix,
            sqrt,
            inv_sqrt,
            inv,
        })
    }

    pub fn identity(shape: &[usize]) -> Self {
        let n: usize = shape.iter().product();
        let id = Matrix::identity(n);
        Self {
            tensor: DenseTensor::identity(shape),
            matrix: id.clone(),
            sqrt: id.clone(),
            inv_sqrt: id.clone(),
            inv: id,
        }
    }

    pub fn shape(&self) -> &[usize] {
        self.tensor.row_shape()
    }

    pub fn tensor(&self) -> &DenseTensor {
        &self.tensor
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn sqrt(&self) -> &Matrix {
        &self.sqrt
    }

    pub fn inv_sqrt(&self) -> &Matrix {
        &self.inv_sqrt
    }

    pub fn inv(&self) -> &Matrix {
        &self.inv
    }

    pub fn sqrt_tensor(&self) -> DenseTensor {
        self.wrap(&self.sqrt)
    }

    pub fn inv_sqrt_tensor(&self) -> DenseTensor {
        self.wrap(&self.inv_sqrt)
    }

    pub fn inv_tensor(&self) -> DenseTensor {
        self.wrap(&self.inv)
    }

    fn wrap(&self, m: &Matrix) -> DenseTensor {
        DenseTensor::from_matrix(m, self.shape(), self.shape()).expect("weight factors share the weight shape")
    }
}

/// Weights `(M, N)` for tensors in `C^{I x J}`: `M` acts on the row group,
/// `N` on the column group.
#[derive(Debug, Clone)]
pub struct WeightPair {
    m: Weight,
    n: Weight,
}

impl WeightPair {
    pub fn new(m: DenseTensor, n: DenseTensor) -> Result<Self> {
        Ok(Self {
            m: Weight::new("M", m)?,
            n: Weight::new("N", n)?,
        })
    }

    pub fn from_weights(m: Weight, n: Weight) -> Self {
        Self { m, n }
    }

    pub fn identity(row_shape: &[usize], col_shape: &[usize]) -> Self {
        Self {
            m: Weight::identity(row_shape),
            n: Weight::identity(col_shape),
        }
    }

    /// The pair `(N, N)` used by the square-tensor predicates.
    pub fn same(n: DenseTensor) -> Result<Self> {
        let w = Weight::new("N", n)?;
        Ok(Self { m: w.clone(), n: w })
    }

    pub fn m(&self) -> &Weight {
        &self.m
    }

    pub fn n(&self) -> &Weight {
        &self.n
    }

    /// Checks that `a` lives in `C^{I x J}` for this pair.
    pub fn check(&self, op: &'static str, a: &DenseTensor) -> Result<()> {
        if a.row_shape() != self.m.shape() || a.col_shape() != self.n.shape() {
            return Err(Error::ShapeMismatch {
                op,
                left: a.shape_label(),
                right: format!("weights {:?}/{:?}", self.m.shape(), self.n.shape()),
            });
        }
        Ok(())
    }

    /// The pair for tensors in `C^{J x I}`.
    pub fn swapped(&self) -> WeightPair {
        WeightPair {
            m: self.n.clone(),
            n: self.m.clone(),
        }
    }
}

/// Weighted SVD `A = U *_M S *_N V^H` with `U^H M U = I` and `V^H N^{-1} V = I`.
#[derive(Debug, Clone)]
pub struct WsvdFactors {
    pub u: DenseTensor,
    /// The `min(prod I, prod J)` hyperdiagonal entries of `S`, nonincreasing.
    pub s: Vec<f64>,
    pub v: DenseTensor,
    pub rank: usize,
}

impl WsvdFactors {
    pub fn row_shape(&self) -> &[usize] {
        self.u.row_shape()
    }

    pub fn col_shape(&self) -> &[usize] {
        self.v.row_shape()
    }

    /// The hyperdiagonal tensor `S` in `C^{I x J}`.
    pub fn s_tensor(&self) -> DenseTensor {
        let mut m = Matrix::zeros(self.u.rows(), self.v.rows());
        for (k, &s) in self.s.iter().enumerate() {
            m[(k, k)] = Complex64::new(s, 0.0);
        }
        DenseTensor::from_matrix(&m, self.row_shape(), self.col_shape()).expect("S has the shape of A")
    }

    /// Multi-index position `(i, j)` of the `k`-th hyperdiagonal entry.
    pub fn position(&self, k: usize) -> (Vec<usize>, Vec<usize>) {
        let mut i = vec![0; self.row_shape().len()];
        let mut j = vec![0; self.col_shape().len()];
        unravel(k, self.row_shape(), &mut i);
        unravel(k, self.col_shape(), &mut j);
        (i, j)
    }

    /// The nonzero (M,N) singular values.
    pub fn mu(&self) -> &[f64] {
        &self.s[..self.rank]
    }

    /// `||U S V^H - A||_F`.
    pub fn reconstruction_residual(&self, a: &DenseTensor) -> f64 {
        let usv = self.u.ein(&self.s_tensor()).ein(&self.v.conj_transpose());
        usv.distance(a)
    }

    /// Largest entrywise deviations of `U^H M U` and `V^H N^{-1} V` from the identity.
    pub fn orthogonality_residuals(&self, w: &WeightPair) -> (f64, f64) {
        let u = self.u.to_matrix();
        let v = self.v.to_matrix();
        let gu = u.adjoint().matmul(w.m().matrix()).matmul(&u);
        let gv = v.adjoint().matmul(w.n().inv()).matmul(&v);
        (
            gu.max_abs_diff(&Matrix::identity(u.cols())),
            gv.max_abs_diff(&Matrix::identity(v.cols())),
        )
    }
}

pub fn wsvd(a: &DenseTensor, w: &WeightPair) -> Result<WsvdFactors> {
    w.check("wsvd", a)?;
    let at = w.m().sqrt().matmul(&a.to_matrix()).matmul(w.n().inv_sqrt());
    let f = matrix::svd(&at)?;
    let rank = f.rank();
    let u = w.m().inv_sqrt().matmul(&f.u);
    let v = w.n().sqrt().matmul(&f.v);
    let mut s = f.s;
    for x in s.iter_mut().skip(rank) {
        *x = 0.0;
    }
    Ok(WsvdFactors {
        u: DenseTensor::from_matrix(&u, a.row_shape(), a.row_shape())?,
        s,
        v: DenseTensor::from_matrix(&v, a.col_shape(), a.col_shape())?,
        rank,
    })
}

/// Pseudo-inverse of a hyperdiagonal tensor: reciprocals on the nonzero
/// hyperdiagonal entries, with the mode groups swapped.
pub fn hyperdiag_pinv(s: &DenseTensor) -> Result<DenseTensor> {
    let m = s.to_matrix();
    let k = m.rows().min(m.cols());
    let total = m.frobenius_norm();
    let off = Matrix::from_fn(m.rows(), m.cols(), |i, j| if i == j { Complex64::new(0.0, 0.0) } else { m[(i, j)] })
        .frobenius_norm();
    if off > OFF_DIAGONAL_TOL * total.max(1.0) {
        return Err(Error::NotHyperdiagonal { mass: off });
    }
    let largest = (0..k).map(|i| m[(i, i)].norm()).fold(0.0, f64::max);
    let cutoff = (m.rows().max(m.cols()) as f64) * f64::EPSILON * largest;
    let mut out = Matrix::zeros(m.cols(), m.rows());
    for i in 0..k {
        let d = m[(i, i)];
        if d.norm() > cutoff && d.norm() > 0.0 {
            out[(i, i)] = d.inv();
        }
    }
    DenseTensor::from_matrix(&out, s.col_shape(), s.row_shape())
}

/// Moore-Penrose inverse `A^†`.
pub fn mp_inverse(a: &DenseTensor) -> Result<DenseTensor> {
    let p = matrix::pinv(&a.to_matrix())?;
    DenseTensor::from_matrix(&p, a.col_shape(), a.row_shape())
}

/// Weighted Moore-Penrose inverse `A^†_{M,N} = N^{-1} V S^† U^H M` from the WSVD.
pub fn wmp_inverse(a: &DenseTensor, w: &WeightPair) -> Result<DenseTensor> {
    let f = wsvd(a, w)?;
    let u = f.u.to_matrix();
    let v = f.v.to_matrix();
    let mut vs = Matrix::zeros(v.rows(), u.cols());
    for k in 0..f.rank {
        let inv = 1.0 / f.s[k];
        for (dst, &src) in vs.col_mut(k).iter_mut().zip(v.col(k)) {
            *dst = src * inv;
        }
    }
    let x = w
        .n()
        .inv()
        .matmul(&vs)
        .matmul(&u.adjoint())
        .matmul(w.m().matrix());
    DenseTensor::from_matrix(&x, a.col_shape(), a.row_shape())
}

/// The congruence route `N^{-1/2} (M^{1/2} A N^{-1/2})^† M^{1/2}`.
pub fn wmp_inverse_via_congruence(a: &DenseTensor, w: &WeightPair) -> Result<DenseTensor> {
    w.check("wmp_inverse_via_congruence", a)?;
    let at = w.m().sqrt().matmul(&a.to_matrix()).matmul(w.n().inv_sqrt());
    let x = w.n().inv_sqrt().matmul(&matrix::pinv(&at)?).matmul(w.m().sqrt());
    DenseTensor::from_matrix(&x, a.col_shape(), a.row_shape())
}

/// Weighted conjugate transpose `A^#_{MN} = N^{-1} A^H M`.
pub fn weighted_conj_transpose(a: &DenseTensor, w: &WeightPair) -> Result<DenseTensor> {
    w.check("weighted_conj_transpose", a)?;
    let x = w.n().inv().matmul(&a.to_matrix().adjoint()).matmul(w.m().matrix());
    DenseTensor::from_matrix(&x, a.col_shape(), a.row_shape())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `(λI + A^# A)^{-1} A^#`
    Left,
    /// `A^# (λI + A A^#)^{-1}`
    Right,
}

/// Tikhonov-type approximation of `A^†_{M,N}` that converges as `λ -> 0`.
///
/// With `B = M^{1/2} A N^{-1/2}` both forms equal
/// `N^{-1/2} (λI + B^H B)^{-1} B^H M^{1/2}`; they are evaluated through QR
/// factors of `[B; sqrt(λ) I]` (left) and `[B^H; sqrt(λ) I]` (right) so the
/// Gram products are never formed.
pub fn wmp_limit(a: &DenseTensor, w: &WeightPair, lambda: f64, side: Side) -> Result<DenseTensor> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::NonPositiveLambda(lambda));
    }
    w.check("wmp_limit", a)?;
    let b = w.m().sqrt().matmul(&a.to_matrix()).matmul(w.n().inv_sqrt());
    let core = match side {
        Side::Left => matrix::tikhonov_inverse(&b, lambda)?,
        Side::Right => matrix::tikhonov_inverse(&b.adjoint(), lambda)?.adjoint(),
    };
    let x = w.n().inv_sqrt().matmul(&core).matmul(w.m().sqrt());
    DenseTensor::from_matrix(&x, a.col_shape(), a.row_shape())
}

/// Frobenius residuals of the four defining equations
/// `AXA = A`, `XAX = X`, `(MAX)^H = MAX`, `(NXA)^H = NXA`.
pub fn penrose_residuals(a: &DenseTensor, x: &DenseTensor, w: &WeightPair) -> Result<[f64; 4]> {
    w.check("penrose_residuals", a)?;
    if x.row_shape() != a.col_shape() || x.col_shape() != a.row_shape() {
        return Err(Error::ShapeMismatch {
            op: "penrose_residuals",
            left: a.shape_label(),
            right: x.shape_label(),
        });
    }
    let am = a.to_matrix();
    let xm = x.to_matrix();
    let ax = am.matmul(&xm);
    let xa = xm.matmul(&am);
    let max = w.m().matrix().matmul(&ax);
    let nxa = w.n().matrix().matmul(&xa);
    Ok([
        ax.matmul(&am).sub(&am).frobenius_norm(),
        xa.matmul(&xm).sub(&xm).frobenius_norm(),
        max.adjoint().sub(&max).frobenius_norm(),
        nxa.adjoint().sub(&nxa).frobenius_norm(),
    ])
}
