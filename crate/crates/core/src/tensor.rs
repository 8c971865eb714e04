//! Dense complex tensors with an explicit row-mode / column-mode split.
//!
//! A tensor in `C^{I_1 x .. x I_M x J_1 x .. x J_N}` stores its entries
//! column-major over the concatenated index `(i_1, .., i_M, j_1, .., j_N)`,
//! first index fastest. Because the row group is linearized exactly like the
//! rows of a column-major matrix, the flat buffer *is* the column-major
//! buffer of the reshaped `prod(I) x prod(J)` matrix: reshaping in either
//! direction is a relabelling, and the Einstein product over the column
//! group is a matrix product on those buffers.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Number of row and column modes of a tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeSplit {
    pub m: usize,
    pub n: usize,
}

impl ModeSplit {
    pub fn order(self) -> usize {
        self.m + self.n
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    row_shape: Vec<usize>,
    col_shape: Vec<usize>,
    data: Vec<Complex64>,
}

fn check_extents(shape: &[usize]) -> Result<()> {
    if shape.contains(&0) {
        return Err(Error::InvalidShape(format!("zero-extent mode in {shape:?}")));
    }
    Ok(())
}

fn product(shape: &[usize]) -> usize {
    shape.iter().product()
}

impl DenseTensor {
    /// Validated constructor: extents positive, length matches, entries finite.
    pub fn new(row_shape: Vec<usize>, col_shape: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        check_extents(&row_shape)?;
        check_extents(&col_shape)?;
        let expected = product(&row_shape) * product(&col_shape);
        if data.len() != expected {
            return Err(Error::InvalidShape(format!(
                "data length {} does not match shape {:?} x {:?} ({} entries)",
                data.len(),
                row_shape,
                col_shape,
                expected
            )));
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { index: pos });
        }
        Ok(Self {
            row_shape,
            col_shape,
            data,
        })
    }

    /// Builds from real column-major data.
    pub fn from_real(row_shape: Vec<usize>, col_shape: Vec<usize>, data: &[f64]) -> Result<Self> {
        Self::new(row_shape, col_shape, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(row_shape: &[usize], col_shape: &[usize]) -> Self {
        let len = product(row_shape) * product(col_shape);
        Self {
            row_shape: row_shape.to_vec(),
            col_shape: col_shape.to_vec(),
            data: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    /// Identity tensor in `C^{I x I}` for the given mode group `I`.
    pub fn identity(shape: &[usize]) -> Self {
        Self::from_matrix(&Matrix::identity(product(shape)), shape, shape)
            .expect("identity dimensions are consistent")
    }

    /// Tensor whose entry at the (0-based) multi-index `(rows, cols)` is `f(rows, cols)`.
    pub fn from_fn(
        row_shape: &[usize],
        col_shape: &[usize],
        mut f: impl FnMut(&[usize], &[usize]) -> Complex64,
    ) -> Self {
        let rows = product(row_shape);
        let cols = product(col_shape);
        let mut ri = vec![0; row_shape.len()];
        let mut ci = vec![0; col_shape.len()];
        let mut data = Vec::with_capacity(rows * cols);
        for c in 0..cols {
            unravel(c, col_shape, &mut ci);
            for r in 0..rows {
                unravel(r, row_shape, &mut ri);
                data.push(f(&ri, &ci));
            }
        }
        Self {
            row_shape: row_shape.to_vec(),
            col_shape: col_shape.to_vec(),
            data,
        }
    }

    /// Inverse reshape: reinterprets a `prod(row_shape) x prod(col_shape)` matrix.
    pub fn from_matrix(m: &Matrix, row_shape: &[usize], col_shape: &[usize]) -> Result<Self> {
        check_extents(row_shape)?;
        check_extents(col_shape)?;
        if m.rows() != product(row_shape) || m.cols() != product(col_shape) {
            return Err(Error::InvalidShape(format!(
                "cannot reshape {}x{} matrix into {:?} x {:?}",
                m.rows(),
                m.cols(),
                row_shape,
                col_shape
            )));
        }
        Ok(Self {
            row_shape: row_shape.to_vec(),
            col_shape: col_shape.to_vec(),
            data: m.data().to_vec(),
        })
    }

    /// Reshape to the `prod(row_shape) x prod(col_shape)` matrix.
    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_col_major(self.rows(), self.cols(), self.data.clone())
    }

    pub fn row_shape(&self) -> &[usize] {
        &self.row_shape
    }

    pub fn col_shape(&self) -> &[usize] {
        &self.col_shape
    }

    pub fn shape(&self) -> Vec<usize> {
        self.row_shape.iter().chain(&self.col_shape).copied().collect()
    }

    pub fn split(&self) -> ModeSplit {
        ModeSplit {
            m: self.row_shape.len(),
            n: self.col_shape.len(),
        }
    }

    /// Product of the row extents.
    pub fn rows(&self) -> usize {
        product(&self.row_shape)
    }

    /// Product of the column extents (1 for vector-like tensors).
    pub fn cols(&self) -> usize {
        product(&self.col_shape)
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Even-order square: row and column groups coincide.
    pub fn is_square(&self) -> bool {
        self.row_shape == self.col_shape
    }

    pub fn is_vector_like(&self) -> bool {
        self.col_shape.is_empty()
    }

    /// Entry at the 0-based multi-index `(rows, cols)`.
    pub fn get(&self, rows: &[usize], cols: &[usize]) -> Complex64 {
        self.data[ravel(rows, &self.row_shape) + self.rows() * ravel(cols, &self.col_shape)]
    }

    /// Entry at a 0-based index over all modes.
    pub fn at(&self, index: &[usize]) -> Complex64 {
        let m = self.row_shape.len();
        self.get(&index[..m], &index[m..])
    }

    /// Regroups the same data under a different split of the mode list.
    pub fn with_split(&self, row_modes: usize) -> Result<Self> {
        let shape = self.shape();
        if row_modes > shape.len() {
            return Err(Error::InvalidShape(format!(
                "cannot take {row_modes} row modes from order-{} tensor",
                shape.len()
            )));
        }
        Ok(Self {
            row_shape: shape[..row_modes].to_vec(),
            col_shape: shape[row_modes..].to_vec(),
            data: self.data.clone(),
        })
    }

    pub fn einstein_product(&self, rhs: &DenseTensor) -> Result<DenseTensor> {
        if self.col_shape != rhs.row_shape {
            return Err(Error::ShapeMismatch {
                op: "einstein_product",
                left: self.shape_label(),
                right: rhs.shape_label(),
            });
        }
        let prod = self.to_matrix().matmul(&rhs.to_matrix());
        Ok(Self {
            row_shape: self.row_shape.clone(),
            col_shape: rhs.col_shape.clone(),
            data: prod.into_data(),
        })
    }

    /// Panicking form of [`einstein_product`](Self::einstein_product) for
    /// operands already known to conform.
    pub fn ein(&self, rhs: &DenseTensor) -> DenseTensor {
        self.einstein_product(rhs).expect("conformable Einstein product")
    }

    /// `A^H`: swaps the mode groups and conjugates.
    pub fn conj_transpose(&self) -> DenseTensor {
        let adj = self.to_matrix().adjoint();
        Self {
            row_shape: self.col_shape.clone(),
            col_shape: self.row_shape.clone(),
            data: adj.into_data(),
        }
    }

    /// π-transpose: mode `k` of the result is mode `perm[k]` of `self`, so
    /// `B[i_{π(0)}, .., i_{π(K-1)}] = A[i_0, .., i_{K-1}]`. The first
    /// `row_modes` result modes form the row group.
    pub fn pi_transpose(&self, perm: &[usize], row_modes: usize) -> Result<DenseTensor> {
        let order = self.row_shape.len() + self.col_shape.len();
        let mut seen = vec![false; order];
        if perm.len() != order || perm.iter().any(|&p| p >= order || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidPermutation {
                perm: perm.to_vec(),
                order,
            });
        }
        if row_modes > order {
            return Err(Error::InvalidShape(format!("row_modes {row_modes} exceeds order {order}")));
        }
        let shape = self.shape();
        let new_shape: Vec<usize> = perm.iter().map(|&p| shape[p]).collect();
        let source = self.with_split(order)?;
        let mut src_index = vec![0; order];
        let out = DenseTensor::from_fn(&new_shape, &[], |idx, _| {
            for (k, &p) in perm.iter().enumerate() {
                src_index[p] = idx[k];
            }
            source.get(&src_index, &[])
        });
        out.with_split(row_modes)
    }

    /// Embeds a square `B` as the leading block of `[[B, O], [O, O]]`, whose
    /// every mode extent is doubled.
    pub fn block_diag_embed(&self) -> Result<DenseTensor> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                op: "block_diag_embed",
                shape: self.shape_label(),
            });
        }
        let doubled: Vec<usize> = self.row_shape.iter().map(|&e| 2 * e).collect();
        let inner = &self.row_shape;
        Ok(DenseTensor::from_fn(&doubled, &doubled, |r, c| {
            let inside = r.iter().zip(inner).all(|(&i, &e)| i < e) && c.iter().zip(inner).all(|(&j, &e)| j < e);
            if inside {
                self.get(r, c)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// `<X, Y> = Y^H *_N X` for vector-like tensors of equal shape.
    pub fn inner(&self, other: &DenseTensor) -> Result<Complex64> {
        if !self.is_vector_like() || self.row_shape != other.row_shape || other.col_shape != self.col_shape {
            return Err(Error::ShapeMismatch {
                op: "inner",
                left: self.shape_label(),
                right: other.shape_label(),
            });
        }
        Ok(self.data.iter().zip(&other.data).map(|(x, y)| y.conj() * x).sum())
    }

    /// Norm induced by [`inner`](Self::inner); for non-vector tensors this is
    /// the Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.frobenius_norm()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: Complex64) -> DenseTensor {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> DenseTensor {
        Self {
            row_shape: self.row_shape.clone(),
            col_shape: self.col_shape.clone(),
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn add(&self, rhs: &DenseTensor) -> Result<DenseTensor> {
        self.zip_with("add", rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &DenseTensor) -> Result<DenseTensor> {
        self.zip_with("sub", rhs, |a, b| a - b)
    }

    fn zip_with(
        &self,
        op: &'static str,
        rhs: &DenseTensor,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<DenseTensor> {
        if self.row_shape != rhs.row_shape || self.col_shape != rhs.col_shape {
            return Err(Error::ShapeMismatch {
                op,
                left: self.shape_label(),
                right: rhs.shape_label(),
            });
        }
        Ok(Self {
            row_shape: self.row_shape.clone(),
            col_shape: self.col_shape.clone(),
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Frobenius norm of the difference; infinite when shapes differ.
    pub fn distance(&self, other: &DenseTensor) -> f64 {
        self.sub(other).map_or(f64::INFINITY, |d| d.frobenius_norm())
    }

    /// Largest entrywise modulus of the difference; infinite when shapes differ.
    pub fn max_abs_diff(&self, other: &DenseTensor) -> f64 {
        self.sub(other).map_or(f64::INFINITY, |d| d.max_abs())
    }

    pub(crate) fn shape_label(&self) -> String {
        format!("{:?}x{:?}", self.row_shape, self.col_shape)
    }
}

/// Column-major (first index fastest) linear index of a 0-based multi-index.
pub fn ravel(index: &[usize], shape: &[usize]) -> usize {
    debug_assert_eq!(index.len(), shape.len());
    let mut lin = 0;
    let mut stride = 1;
    for (&i, &e) in index.iter().zip(shape) {
        debug_assert!(i < e);
        lin += i * stride;
        stride *= e;
    }
    lin
}

/// Inverse of [`ravel`].
pub fn unravel(mut lin: usize, shape: &[usize], out: &mut [usize]) {
    for (o, &e) in out.iter_mut().zip(shape) {
        *o = lin % e;
        lin /= e;
    }
}

/// Reshape isomorphism `rsh`.
pub fn rsh(a: &DenseTensor) -> Matrix {
    a.to_matrix()
}

/// Inverse reshape `rsh^{-1}`.
pub fn rsh_inv(m: &Matrix, row_shape: &[usize], col_shape: &[usize]) -> Result<DenseTensor> {
    DenseTensor::from_matrix(m, row_shape, col_shape)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_tensor, rng_from_seed};
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Index-loop Einstein product, written straight from the defining sum.
    fn einstein_bruteforce(a: &DenseTensor, b: &DenseTensor) -> DenseTensor {
        let k_shape = a.col_shape().to_vec();
        let k_total: usize = k_shape.iter().product();
        let mut k_idx = vec![0; k_shape.len()];
        DenseTensor::from_fn(a.row_shape(), b.col_shape(), |i, j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for lin in 0..k_total {
                let mut rem = lin;
                for (slot, &e) in k_idx.iter_mut().zip(&k_shape) {
                    *slot = rem % e;
                    rem /= e;
                }
                acc += a.get(i, &k_idx) * b.get(&k_idx, j);
            }
            acc
        })
    }

    fn example_a() -> DenseTensor {
        // A(:,:,1) = [[1,0],[0,0]], A(:,:,2) = [[0,1],[0,0]]
        DenseTensor::from_real(vec![2, 2], vec![2], &[1., 0., 0., 0., 0., 0., 1., 0.]).unwrap()
    }

    #[test]
    fn example_reshape() {
        let m = rsh(&example_a());
        let expected = Matrix::from_real_rows(&[&[1., 0.], &[0., 0.], &[0., 1.], &[0., 0.]]);
        assert_eq!(m, expected);
        assert_eq!(rsh(&DenseTensor::identity(&[2, 3])), Matrix::identity(6));
    }

    #[test]
    fn example_u_times_s() {
        // U and S as printed for the worked WSVD example.
        let u = Matrix::from_real_rows(&[
            &[0., 1., 0., 0.],
            &[0., 0., 1., 0.],
            &[1., 0., 0., 0.],
            &[0., 0., 0., 0.5],
        ]);
        let s = Matrix::from_real_rows(&[&[1., 0.], &[0., 0.5], &[0., 0.], &[0., 0.]]);
        let ut = rsh_inv(&u, &[2, 2], &[2, 2]).unwrap();
        let st = rsh_inv(&s, &[2, 2], &[2]).unwrap();
        let us = ut.einstein_product(&st).unwrap();
        // (:,:,1) = [[0,1],[0,0]], (:,:,2) = [[1/2,0],[0,0]]
        assert_eq!(us.get(&[0, 1], &[0]), c(1.0));
        assert_eq!(us.get(&[0, 0], &[1]), c(0.5));
        assert_eq!(us.frobenius_norm(), (1.25f64).sqrt());
    }

    #[test]
    fn identity_product() {
        let mut rng = rng_from_seed(1);
        let x = random_tensor(&mut rng, &[2, 3], &[]);
        let i = DenseTensor::identity(&[2, 3]);
        assert_eq!(i.einstein_product(&x).unwrap(), x);
        assert_eq!(i.conj_transpose(), i);
    }

    #[test]
    fn shape_mismatch_names_shapes() {
        let a = DenseTensor::zeros(&[2], &[3]);
        let b = DenseTensor::zeros(&[2], &[3]);
        let err = a.einstein_product(&b).unwrap_err().to_string();
        assert!(err.contains("[2]x[3]"), "{err}");
    }

    #[test]
    fn rejects_zero_extent_and_bad_length() {
        assert!(DenseTensor::new(vec![0], vec![1], vec![]).is_err());
        assert!(DenseTensor::from_real(vec![2], vec![2], &[1.0; 3]).is_err());
        assert!(DenseTensor::from_real(vec![1], vec![], &[f64::NAN]).is_err());
    }

    #[test]
    fn einstein_matches_bruteforce_222() {
        let mut rng = rng_from_seed(2);
        for _ in 0..20 {
            let a = random_tensor(&mut rng, &[2], &[2, 2]);
            let b = random_tensor(&mut rng, &[2, 2], &[2]);
            let fast = a.einstein_product(&b).unwrap();
            let slow = einstein_bruteforce(&a, &b);
            assert!(fast.max_abs_diff(&slow) <= 1e-13 * (1.0 + slow.max_abs()));
        }
    }

    #[test]
    fn conj_transpose_example() {
        let u = Matrix::from_real_rows(&[
            &[0., 1., 0., 0.],
            &[0., 0., 1., 0.],
            &[1., 0., 0., 0.],
            &[0., 0., 0., 0.5],
        ]);
        let ut = rsh_inv(&u, &[2, 2], &[2, 2]).unwrap();
        let uh = ut.conj_transpose();
        // printed U^H slices: (:,:,1,1)=[[0,0],[1,0]], (:,:,2,1)=[[0,1],[0,0]],
        // (:,:,1,2)=[[1,0],[0,0]], (:,:,2,2)=[[0,0],[0,1/2]]
        assert_eq!(uh.get(&[1, 0], &[0, 0]), c(1.0));
        assert_eq!(uh.get(&[0, 1], &[1, 0]), c(1.0));
        assert_eq!(uh.get(&[0, 0], &[0, 1]), c(1.0));
        assert_eq!(uh.get(&[1, 1], &[1, 1]), c(0.5));
        assert!((uh.frobenius_norm() - ut.frobenius_norm()).abs() < 1e-15);
    }

    #[test]
    fn pi_transpose_cases() {
        let mut rng = rng_from_seed(3);
        let a = random_tensor(&mut rng, &[2, 3], &[4, 2]);
        assert_eq!(a.pi_transpose(&[0, 1, 2, 3], 2).unwrap(), a);
        // real data: swapping the groups is the conjugate transpose
        let real = a.map(|z| Complex64::new(z.re, 0.0));
        let swapped = real.pi_transpose(&[2, 3, 0, 1], 2).unwrap();
        assert_eq!(swapped, real.conj_transpose());
        let inv = [1, 0, 3, 2];
        let twice = a.pi_transpose(&inv, 2).unwrap().pi_transpose(&inv, 2).unwrap();
        assert_eq!(twice, a);
        // non-square group swap keeps the requested split
        let b = random_tensor(&mut rng, &[2], &[3, 4]).map(|z| Complex64::new(z.re, 0.0));
        assert_eq!(b.pi_transpose(&[1, 2, 0], 2).unwrap(), b.conj_transpose());
        assert!(a.pi_transpose(&[0, 1, 2], 2).is_err());
        assert!(a.pi_transpose(&[0, 1, 1, 2], 2).is_err());
    }

    #[test]
    fn block_embed_scalar() {
        let b = DenseTensor::from_real(vec![1], vec![1], &[2.0]).unwrap();
        let e = b.block_diag_embed().unwrap();
        assert_eq!(rsh(&e), Matrix::from_real_rows(&[&[2., 0.], &[0., 0.]]));
        assert!(DenseTensor::zeros(&[2], &[3]).block_diag_embed().is_err());
    }

    #[test]
    fn inner_product_basics() {
        let e = DenseTensor::from_fn(&[2, 2], &[], |i, _| c(if i == [1, 0] { 1.0 } else { 0.0 }));
        assert_eq!(e.inner(&e).unwrap(), c(1.0));
        let mut rng = rng_from_seed(4);
        for _ in 0..20 {
            let x = random_tensor(&mut rng, &[2, 3], &[]);
            let y = random_tensor(&mut rng, &[2, 3], &[]);
            assert!((x.inner(&y).unwrap() - y.inner(&x).unwrap().conj()).norm() < 1e-14);
            // <W x, y> = <x, W^H y>
            let w = random_tensor(&mut rng, &[4], &[2, 3]);
            let z = random_tensor(&mut rng, &[4], &[]);
            let lhs = w.ein(&x).inner(&z).unwrap();
            let rhs = x.inner(&w.conj_transpose().ein(&z)).unwrap();
            assert!((lhs - rhs).norm() < 1e-13);
        }
        assert!(DenseTensor::zeros(&[2], &[]).inner(&DenseTensor::zeros(&[3], &[])).is_err());
    }

    fn shape_strategy() -> impl Strategy<Value = Vec<usize>> {
        prop::collection::vec(1usize..=3, 0..=2)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn rsh_is_multiplicative(a_rows in shape_strategy(), k in shape_strategy(), b_cols in shape_strategy(), seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let a = random_tensor(&mut rng, &a_rows, &k);
            let b = random_tensor(&mut rng, &k, &b_cols);
            let lhs = rsh(&a.einstein_product(&b).unwrap());
            let rhs = rsh(&a).matmul(&rsh(&b));
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-13 * (1.0 + rhs.max_abs()));
            let slow = einstein_bruteforce(&a, &b);
            prop_assert!(rsh(&slow).max_abs_diff(&rhs) <= 1e-13 * (1.0 + rhs.max_abs()));
        }

        #[test]
        fn conj_transpose_involution_and_reshape(rows in shape_strategy(), cols in shape_strategy(), seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let a = random_tensor(&mut rng, &rows, &cols);
            prop_assert_eq!(a.conj_transpose().conj_transpose(), a.clone());
            prop_assert_eq!(rsh(&a.conj_transpose()), rsh(&a).adjoint());
            let back = rsh_inv(&rsh(&a), &rows, &cols).unwrap();
            prop_assert_eq!(back, a);
        }

        #[test]
        fn einstein_associative(p in shape_strategy(), q in shape_strategy(), r in shape_strategy(), s in shape_strategy(), seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let a = random_tensor(&mut rng, &p, &q);
            let b = random_tensor(&mut rng, &q, &r);
            let cc = random_tensor(&mut rng, &r, &s);
            let left = a.ein(&b).ein(&cc);
            let right = a.ein(&b.ein(&cc));
            prop_assert!(left.max_abs_diff(&right) <= 1e-13 * (1.0 + left.max_abs()));
        }

        #[test]
        fn cauchy_schwarz(shape in shape_strategy(), seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let x = random_tensor(&mut rng, &shape, &[]);
            let y = random_tensor(&mut rng, &shape, &[]);
            prop_assert!(x.inner(&y).unwrap().norm() <= x.norm() * y.norm() + 1e-12);
            prop_assert!(x.norm() >= 0.0);
        }
    }
}
