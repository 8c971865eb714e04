//! Dense complex matrix kernels.
//!
//! Every tensor computation in this crate is carried out on the matrix image
//! of the reshape isomorphism, so these routines are the numerical backbone:
//! one-sided Jacobi SVD, cyclic Jacobi for Hermitian eigenproblems,
//! Hessenberg + shifted QR for general spectra, Hermitian positive definite
//! square roots and LU-based inversion. All of them target desk-scale
//! problems (dimension up to about 64).

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

const EPS: f64 = f64::EPSILON;
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Relative Hermitian-ness tolerance accepted by [`herm_eig`] and the HPD roots.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Relative smallest-eigenvalue threshold below which a matrix is not HPD.
pub const HPD_TOL: f64 = 1e-10;
/// Relative pivot threshold for [`inverse`] and [`solve`].
pub const PIVOT_TOL: f64 = 1e-12;

const SVD_MAX_SWEEPS: usize = 80;
const EIGH_MAX_SWEEPS: usize = 100;
const QR_ITERS_PER_EIGENVALUE: usize = 60;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("{routine} did not converge within {iterations} iterations")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
    },
    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:.6e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("matrix is singular (pivot {pivot} has magnitude {magnitude:.3e})")]
    Singular { pivot: usize, magnitude: f64 },
    #[error("{op}: expected a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("{op}: dimension mismatch {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
}

/// Column-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>10.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i + j * self.rows]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i + j * self.rows]
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Wraps column-major data. Panics if the length is wrong.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols, "column-major data length");
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a real matrix from row-major nested rows (handy in tests).
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn diag(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> Complex64 {
        self.diag().into_iter().sum()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix, KernelError> {
        if self.cols != rhs.rows {
            return Err(KernelError::DimensionMismatch {
                op: "mul",
                left: (self.rows, self.cols),
                right: (rhs.rows, rhs.cols),
            });
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            for k in 0..self.cols {
                let b = rhs[(k, j)];
                if b == ZERO {
                    continue;
                }
                let a_col = self.col(k);
                let out_col = out.col_mut(j);
                for (o, &a) in out_col.iter_mut().zip(a_col) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Product of conformable matrices; panics on a shape mismatch.
    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        self.mul(rhs).expect("matmul: nonconformable operands")
    }

    pub fn add(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Matrix::from_col_major(self.rows, self.cols, data)
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Matrix::from_col_major(self.rows, self.cols, data)
    }

    pub fn scale(&self, s: Complex64) -> Matrix {
        Matrix::from_col_major(self.rows, self.cols, self.data.iter().map(|a| a * s).collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Frobenius norm of `A - A^H`, relative to `‖A‖_F` (0 for the zero matrix).
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        self.sub(&self.adjoint()).frobenius_norm() / norm
    }

    /// `(A + A^H) / 2`.
    pub fn hermitian_part(&self) -> Matrix {
        let mut h = self.add(&self.adjoint());
        h.data.iter_mut().for_each(|z| *z *= 0.5);
        h
    }
}

fn require_square(op: &'static str, a: &Matrix) -> Result<(), KernelError> {
    if a.is_square() {
        Ok(())
    } else {
        Err(KernelError::NotSquare {
            op,
            rows: a.rows,
            cols: a.cols,
        })
    }
}

fn dot_h(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Full singular value decomposition `A = U diag(s) V^H`.
///
/// `u` is `m x m`, `v` is `n x n`, `s` has `min(m, n)` nonincreasing entries.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl SvdResult {
    /// The `m x n` rectangular diagonal factor.
    pub fn sigma(&self) -> Matrix {
        let mut out = Matrix::zeros(self.u.rows(), self.v.rows());
        for (i, &s) in self.s.iter().enumerate() {
            out[(i, i)] = Complex64::new(s, 0.0);
        }
        out
    }

    pub fn reconstruct(&self) -> Matrix {
        self.u.matmul(&self.sigma()).matmul(&self.v.adjoint())
    }

    /// Numerical rank under the default cutoff `max(m, n) * eps * s_1`.
    pub fn rank(&self) -> usize {
        rank(&self.s, self.u.rows(), self.v.rows())
    }
}

/// Singular value decomposition by one-sided (Hestenes) Jacobi rotations.
///
/// Factors are sign-canonicalized: the largest-magnitude entry of every
/// column of `U` is real and positive, with the compensating phase moved
/// into the matching column of `V`.
pub fn svd(a: &Matrix) -> Result<SvdResult, KernelError> {
    if a.rows() < a.cols() {
        let t = svd_tall(&a.adjoint())?;
        let mut out = SvdResult {
            u: t.v,
            s: t.s,
            v: t.u,
        };
        canonicalize_phases(&mut out);
        return Ok(out);
    }
    let mut out = svd_tall(a)?;
    canonicalize_phases(&mut out);
    Ok(out)
}

fn svd_tall(a: &Matrix) -> Result<SvdResult, KernelError> {
    let (m, n) = (a.rows(), a.cols());
    debug_assert!(m >= n);
    let mut w = a.clone();
    let mut v = Matrix::identity(n);
    let tol = EPS * (m as f64).sqrt();
    // columns this small are numerical zeros; rotating them against large
    // columns only stirs rounding noise and never settles
    let negligible = (EPS * a.frobenius_norm()).powi(2);

    let mut converged = n < 2;
    for _ in 0..SVD_MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let alpha = w.col(p).iter().map(|z| z.norm_sqr()).sum::<f64>();
                let beta = w.col(q).iter().map(|z| z.norm_sqr()).sum::<f64>();
                let gamma = dot_h(w.col(p), w.col(q));
                let g = gamma.norm();
                if g == 0.0 || alpha.min(beta) <= negligible || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_cols(&mut w, p, q, c, s, phase);
                rotate_cols(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(KernelError::NoConvergence {
            routine: "svd",
            iterations: SVD_MAX_SWEEPS,
        });
    }

    let mut order: Vec<(usize, f64)> = (0..n).map(|j| (j, norm2(w.col(j)))).collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));

    let s_max = order.first().map_or(0.0, |o| o.1);
    let cutoff = s_max * EPS * (m.max(n) as f64);
    let mut u = Matrix::zeros(m, m);
    let mut v_sorted = Matrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    let mut filled = vec![false; m];
    for (k, &(j, sv)) in order.iter().enumerate() {
        s.push(sv);
        v_sorted.col_mut(k).copy_from_slice(v.col(j));
        if sv > cutoff && sv > 0.0 {
            let inv = 1.0 / sv;
            for (dst, &src) in u.col_mut(k).iter_mut().zip(w.col(j)) {
                *dst = src * inv;
            }
            filled[k] = true;
        }
    }
    complete_orthonormal(&mut u, &filled);
    Ok(SvdResult { u, s, v: v_sorted })
}

/// Applies the complex plane rotation that orthogonalizes columns `p` and `q`.
fn rotate_cols(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    let rows = m.rows();
    let phase_conj = phase.conj();
    for i in 0..rows {
        let xp = m[(i, p)];
        let xq = m[(i, q)] * phase_conj;
        m[(i, p)] = xp * c - xq * s;
        m[(i, q)] = xp * s + xq * c;
    }
}

/// Fills the columns of `u` not marked in `filled` with an orthonormal
/// completion: each new column is the coordinate vector with the largest
/// residual after projecting out the current basis (twice, for stability).
fn complete_orthonormal(u: &mut Matrix, filled: &[bool]) {
    let m = u.rows();
    let mut basis: Vec<usize> = (0..u.cols()).filter(|&k| filled[k]).collect();
    for (k, &done) in filled.iter().enumerate().take(u.cols()) {
        if done {
            continue;
        }
        let mut best: Option<(f64, Vec<Complex64>)> = None;
        for candidate in 0..m {
            let mut x = vec![ZERO; m];
            x[candidate] = ONE;
            for _ in 0..2 {
                for &b in &basis {
                    let proj = dot_h(u.col(b), &x);
                    for (xi, &bi) in x.iter_mut().zip(u.col(b)) {
                        *xi -= proj * bi;
                    }
                }
            }
            let nx = norm2(&x);
            if best.as_ref().is_none_or(|(bn, _)| nx > *bn) {
                best = Some((nx, x));
            }
        }
        let (nx, x) = best.expect("matrix has at least one row");
        for (dst, xi) in u.col_mut(k).iter_mut().zip(x) {
            *dst = xi / nx;
        }
        basis.push(k);
    }
}

fn canonicalize_phases(svd: &mut SvdResult) {
    let m = svd.u.rows();
    let n = svd.v.rows();
    for k in 0..m {
        let col = svd.u.col(k);
        let mut best = 0;
        let mut best_abs = -1.0;
        for (i, z) in col.iter().enumerate() {
            // first index wins ties so the choice is reproducible
            if z.norm() > best_abs * (1.0 + 1e-12) {
                best_abs = z.norm();
                best = i;
            }
        }
        if best_abs <= 0.0 {
            continue;
        }
        let phase = col[best] / best_abs;
        let rot = phase.conj();
        svd.u.col_mut(k).iter_mut().for_each(|z| *z *= rot);
        svd.u[(best, k)] = Complex64::new(svd.u[(best, k)].re, 0.0);
        if k < n && k < svd.s.len() {
            svd.v.col_mut(k).iter_mut().for_each(|z| *z *= rot);
        }
    }
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the unitary matrix whose
/// columns are the matching eigenvectors. Ties keep the order in which the
/// Jacobi sweep left them (stable sort), which makes the choice of basis
/// vector deterministic.
pub fn herm_eig(a: &Matrix) -> Result<(Vec<f64>, Matrix), KernelError> {
    require_square("herm_eig", a)?;
    let defect = a.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(KernelError::NotHermitian { asymmetry: defect });
    }
    let n = a.rows();
    let mut h = a.hermitian_part();
    let mut v = Matrix::identity(n);
    let scale = h.frobenius_norm();
    if n > 1 && scale > 0.0 {
        let mut converged = false;
        for _ in 0..EIGH_MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|j| (0..n).filter(move |&i| i != j).map(move |i| (i, j)))
                .map(|(i, j)| h[(i, j)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= EPS * scale * 1e-2 {
                converged = true;
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let b = h[(p, q)];
                    let bn = b.norm();
                    if bn == 0.0 {
                        continue;
                    }
                    let app = h[(p, p)].re;
                    let aqq = h[(q, q)].re;
                    if bn <= EPS * 1e-3 * (app.abs() + aqq.abs()) {
                        h[(p, q)] = ZERO;
                        h[(q, p)] = ZERO;
                        continue;
                    }
                    let phase_conj = (b / bn).conj();
                    let theta = (aqq - app) / (2.0 * bn);
                    let t = if theta == 0.0 {
                        1.0
                    } else {
                        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                    };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    // G = diag(1, e^{-i phi}) * [[c, s], [-s, c]]
                    let g_pp = Complex64::new(c, 0.0);
                    let g_pq = Complex64::new(s, 0.0);
                    let g_qp = phase_conj * (-s);
                    let g_qq = phase_conj * c;
                    for k in 0..n {
                        let hp = h[(k, p)];
                        let hq = h[(k, q)];
                        h[(k, p)] = hp * g_pp + hq * g_qp;
                        h[(k, q)] = hp * g_pq + hq * g_qq;
                    }
                    for k in 0..n {
                        let hp = h[(p, k)];
                        let hq = h[(q, k)];
                        h[(p, k)] = g_pp.conj() * hp + g_qp.conj() * hq;
                        h[(q, k)] = g_pq.conj() * hp + g_qq.conj() * hq;
                    }
                    h[(p, q)] = ZERO;
                    h[(q, p)] = ZERO;
                    h[(p, p)] = Complex64::new(h[(p, p)].re, 0.0);
                    h[(q, q)] = Complex64::new(h[(q, q)].re, 0.0);
                    for k in 0..n {
                        let vp = v[(k, p)];
                        let vq = v[(k, q)];
                        v[(k, p)] = vp * g_pp + vq * g_qp;
                        v[(k, q)] = vp * g_pq + vq * g_qq;
                    }
                }
            }
        }
        if !converged {
            return Err(KernelError::NoConvergence {
                routine: "herm_eig",
                iterations: EIGH_MAX_SWEEPS,
            });
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| h[(x, x)].re.total_cmp(&h[(y, y)].re));
    let vals = order.iter().map(|&k| h[(k, k)].re).collect();
    let vecs = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok((vals, vecs))
}

/// Eigenvalues of a general square matrix, with multiplicity.
///
/// Householder reduction to upper Hessenberg form followed by single-shift
/// complex QR iteration with Wilkinson shifts. Output is sorted by
/// descending modulus, then ascending argument.
pub fn gen_eig(a: &Matrix) -> Result<Vec<Complex64>, KernelError> {
    require_square("gen_eig", a)?;
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = hessenberg(a);
    let mut eig = vec![ZERO; n];
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let cap = QR_ITERS_PER_EIGENVALUE * n;
    let scale = a.max_abs().max(f64::MIN_POSITIVE);

    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        // locate the top of the active unreduced block
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let diag = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let reference = if diag == 0.0 { scale } else { diag };
            if sub <= EPS * reference {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > cap {
            return Err(KernelError::NoConvergence {
                routine: "gen_eig",
                iterations: total,
            });
        }
        let mu = if iter.is_multiple_of(11) {
            // exceptional shift breaks rare cycles
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.25 * h[(hi, hi - 1)].norm())
        } else {
            wilkinson_shift(&h, hi)
        };
        qr_step(&mut h, l, hi, mu);
    }
    sort_spectrum(&mut eig);
    Ok(eig)
}

/// Sorts by descending modulus, ties broken by ascending argument.
pub fn sort_spectrum(values: &mut [Complex64]) {
    values.sort_by(|a, b| {
        let (ma, mb) = (a.norm(), b.norm());
        let rel = 1e-12 * ma.max(mb).max(1e-300);
        if (ma - mb).abs() > rel {
            mb.total_cmp(&ma)
        } else {
            a.arg().total_cmp(&b.arg())
        }
    });
}

fn hessenberg(a: &Matrix) -> Matrix {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = norm2(&x);
        if xnorm == 0.0 {
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = norm2(&v);
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= vnorm);
        // H <- P H with P = I - 2 v v^H acting on rows k+1..n
        for j in 0..n {
            let mut d = ZERO;
            for (t, vi) in v.iter().enumerate() {
                d += vi.conj() * h[(k + 1 + t, j)];
            }
            for (t, vi) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= *vi * d * 2.0;
            }
        }
        // H <- H P acting on columns k+1..n
        for i in 0..n {
            let mut d = ZERO;
            for (t, vi) in v.iter().enumerate() {
                d += h[(i, k + 1 + t)] * vi;
            }
            for (t, vi) in v.iter().enumerate() {
                h[(i, k + 1 + t)] -= d * vi.conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

fn wilkinson_shift(h: &Matrix, hi: usize) -> Complex64 {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let l1 = mean + disc;
    let l2 = mean - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One explicit shifted QR step on the Hessenberg block `lo..=hi`.
fn qr_step(h: &mut Matrix, lo: usize, hi: usize, mu: Complex64) {
    for i in lo..=hi {
        h[(i, i)] -= mu;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let x = h[(k, k)];
        let y = h[(k + 1, k)];
        let r = x.norm().hypot(y.norm());
        let (c, s) = if r == 0.0 {
            (1.0, ZERO)
        } else if x.norm() == 0.0 {
            (0.0, ONE)
        } else {
            let c = x.norm() / r;
            (c, (x / x.norm()) * y.conj() / r)
        };
        for j in k..=hi {
            let a = h[(k, j)];
            let b = h[(k + 1, j)];
            h[(k, j)] = a * c + s * b;
            h[(k + 1, j)] = -s.conj() * a + b * c;
        }
        h[(k + 1, k)] = ZERO;
        rotations.push((c, s));
    }
    for (offset, &(c, s)) in rotations.iter().enumerate() {
        let k = lo + offset;
        let top = (k + 2).min(hi);
        for i in lo..=top {
            let a = h[(i, k)];
            let b = h[(i, k + 1)];
            h[(i, k)] = a * c + s.conj() * b;
            h[(i, k + 1)] = -s * a + b * c;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += mu;
    }
}

fn check_hpd(a: &Matrix) -> Result<(Vec<f64>, Matrix), KernelError> {
    let (vals, vecs) = herm_eig(a)?;
    let max = vals.last().copied().unwrap_or(0.0);
    let min = vals.first().copied().unwrap_or(0.0);
    if max <= 0.0 || min <= HPD_TOL * max {
        return Err(KernelError::NotPositiveDefinite { min_eigenvalue: min });
    }
    Ok((vals, vecs))
}

fn spectral_function(vals: &[f64], vecs: &Matrix, f: impl Fn(f64) -> f64) -> Matrix {
    let n = vals.len();
    let mut scaled = vecs.clone();
    for (j, &lam) in vals.iter().enumerate() {
        let fj = f(lam);
        scaled.col_mut(j).iter_mut().for_each(|z| *z *= fj);
    }
    let out = scaled.matmul(&vecs.adjoint());
    debug_assert_eq!(out.rows(), n);
    out.hermitian_part()
}

/// Principal square root of a Hermitian positive definite matrix.
pub fn hpd_sqrt(a: &Matrix) -> Result<Matrix, KernelError> {
    let (vals, vecs) = check_hpd(a)?;
    Ok(spectral_function(&vals, &vecs, f64::sqrt))
}

/// Inverse of the principal square root of a Hermitian positive definite matrix.
pub fn hpd_inv_sqrt(a: &Matrix) -> Result<Matrix, KernelError> {
    let (vals, vecs) = check_hpd(a)?;
    Ok(spectral_function(&vals, &vecs, |x| 1.0 / x.sqrt()))
}

/// `(sqrt, inv_sqrt, inverse)` of an HPD matrix from a single eigendecomposition.
pub fn hpd_factors(a: &Matrix) -> Result<(Matrix, Matrix, Matrix), KernelError> {
    let (vals, vecs) = check_hpd(a)?;
    Ok((
        spectral_function(&vals, &vecs, f64::sqrt),
        spectral_function(&vals, &vecs, |x| 1.0 / x.sqrt()),
        spectral_function(&vals, &vecs, |x| 1.0 / x),
    ))
}

struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

fn lu_factor(a: &Matrix) -> Result<Lu, KernelError> {
    require_square("lu", a)?;
    let n = a.rows();
    let threshold = PIVOT_TOL * a.frobenius_norm();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (p, mag) = (k..n)
            .map(|i| (i, lu[(i, k)].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if mag <= threshold || mag == 0.0 {
            return Err(KernelError::Singular { pivot: k, magnitude: mag });
        }
        if p != k {
            perm.swap(p, k);
            for j in 0..n {
                let tmp = lu[(p, j)];
                lu[(p, j)] = lu[(k, j)];
                lu[(k, j)] = tmp;
            }
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / pivot;
            lu[(i, k)] = f;
            if f == ZERO {
                continue;
            }
            for j in k + 1..n {
                let u = lu[(k, j)];
                lu[(i, j)] -= f * u;
            }
        }
    }
    Ok(Lu { lu, perm })
}

impl Lu {
    fn solve(&self, b: &Matrix) -> Matrix {
        let n = self.lu.rows();
        let mut x = Matrix::zeros(n, b.cols());
        for c in 0..b.cols() {
            let mut y: Vec<Complex64> = self.perm.iter().map(|&p| b[(p, c)]).collect();
            for i in 0..n {
                let acc: Complex64 = (0..i).map(|j| self.lu[(i, j)] * y[j]).sum();
                y[i] -= acc;
            }
            for i in (0..n).rev() {
                let acc: Complex64 = (i + 1..n).map(|j| self.lu[(i, j)] * y[j]).sum();
                y[i] = (y[i] - acc) / self.lu[(i, i)];
            }
            x.col_mut(c).copy_from_slice(&y);
        }
        x
    }
}

/// Inverse of a square nonsingular matrix (LU with partial pivoting).
pub fn inverse(a: &Matrix) -> Result<Matrix, KernelError> {
    let lu = lu_factor(a)?;
    Ok(lu.solve(&Matrix::identity(a.rows())))
}

/// Solves `A X = B`.
pub fn solve(a: &Matrix, b: &Matrix) -> Result<Matrix, KernelError> {
    if a.rows() != b.rows() {
        return Err(KernelError::DimensionMismatch {
            op: "solve",
            left: (a.rows(), a.cols()),
            right: (b.rows(), b.cols()),
        });
    }
    let lu = lu_factor(a)?;
    Ok(lu.solve(b))
}

/// Counts singular values above `max(m, n) * eps * s_1`.
pub fn rank(s: &[f64], m: usize, n: usize) -> usize {
    let Some(&s1) = s.first() else { return 0 };
    let tol = (m.max(n) as f64) * EPS * s1;
    s.iter().filter(|&&x| x > tol).count()
}

/// Moore-Penrose inverse of a matrix from its SVD, `V diag(1/s) U^H` with
/// the default rank cutoff.
pub fn pinv(a: &Matrix) -> Result<Matrix, KernelError> {
    let f = svd(a)?;
    let r = f.rank();
    let mut out = Matrix::zeros(a.cols(), a.rows());
    for k in 0..r {
        let inv = 1.0 / f.s[k];
        for j in 0..a.rows() {
            let uj = f.u[(j, k)].conj() * inv;
            for i in 0..a.cols() {
                out[(i, j)] += f.v[(i, k)] * uj;
            }
        }
    }
    Ok(out)
}

/// Thin Householder QR of a tall matrix: `A = Q R` with `Q` `m x n`
/// orthonormal and `R` `n x n` upper triangular.
pub fn qr_thin(a: &Matrix) -> (Matrix, Matrix) {
    let (m, n) = (a.rows(), a.cols());
    assert!(m >= n, "qr_thin expects rows >= cols");
    let mut r = a.clone();
    let mut reflectors: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for k in 0..n {
        let x: Vec<Complex64> = (k..m).map(|i| r[(i, k)]).collect();
        let nx = norm2(&x);
        let mut v = x;
        if nx > 0.0 {
            let phase = if v[0].norm() == 0.0 { ONE } else { v[0] / v[0].norm() };
            v[0] += phase * nx;
            let nv = norm2(&v);
            v.iter_mut().for_each(|z| *z /= nv);
            apply_reflector(&mut r, &v, k, k);
        } else {
            v.iter_mut().for_each(|z| *z = ZERO);
        }
        reflectors.push(v);
    }
    let mut q = Matrix::zeros(m, n);
    for j in 0..n {
        q[(j, j)] = ONE;
    }
    for (k, v) in reflectors.iter().enumerate().rev() {
        apply_reflector(&mut q, v, k, 0);
    }
    let r = Matrix::from_fn(n, n, |i, j| if i <= j { r[(i, j)] } else { ZERO });
    (q, r)
}

/// `A[k.., c..] <- (I - 2 v v^H) A[k.., c..]` for a unit vector `v`.
fn apply_reflector(a: &mut Matrix, v: &[Complex64], k: usize, first_col: usize) {
    for j in first_col..a.cols() {
        let col = &mut a.col_mut(j)[k..];
        let proj = dot_h(v, col) * 2.0;
        for (c, &vi) in col.iter_mut().zip(v) {
            *c -= proj * vi;
        }
    }
}

/// `(λ I + B^H B)^{-1} B^H` for `λ > 0`, computed from the QR factors of
/// the stacked matrix `[B; sqrt(λ) I]` so that `B^H B` is never formed.
pub fn tikhonov_inverse(b: &Matrix, lambda: f64) -> Result<Matrix, KernelError> {
    let (m, n) = (b.rows(), b.cols());
    let root = Complex64::new(lambda.sqrt(), 0.0);
    let stacked = Matrix::from_fn(m + n, n, |i, j| {
        if i < m {
            b[(i, j)]
        } else if i - m == j {
            root
        } else {
            ZERO
        }
    });
    let (q, r) = qr_thin(&stacked);
    // solve R X = Q1^H by back substitution
    let threshold = PIVOT_TOL * r.frobenius_norm();
    let mut x = Matrix::from_fn(n, m, |i, j| q[(j, i)].conj());
    for c in 0..m {
        for i in (0..n).rev() {
            let mut acc = x[(i, c)];
            for j in i + 1..n {
                acc -= r[(i, j)] * x[(j, c)];
            }
            let d = r[(i, i)];
            if d.norm() <= threshold || d.norm() == 0.0 {
                return Err(KernelError::Singular {
                    pivot: i,
                    magnitude: d.norm(),
                });
            }
            x[(i, c)] = acc / d;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Matrix {
        Matrix::from_fn(m, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
        random(rng, n, n).hermitian_part()
    }

    fn unitary_defect(u: &Matrix) -> f64 {
        u.adjoint().matmul(u).max_abs_diff(&Matrix::identity(u.cols()))
    }

    #[test]
    fn qr_and_tikhonov() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let m = rng.random_range(1..=12);
            let n = rng.random_range(1..=m);
            let a = random(&mut rng, m, n);
            let (q, r) = qr_thin(&a);
            assert!(q.matmul(&r).max_abs_diff(&a) < 1e-13);
            assert!(q.adjoint().matmul(&q).max_abs_diff(&Matrix::identity(n)) < 1e-13);
            for i in 0..n {
                for j in 0..i {
                    assert_eq!(r[(i, j)], ZERO);
                }
            }
            let lam = 1e-2;
            let b = random(&mut rng, n, m);
            let normal = Matrix::identity(m).scale(c(lam)).add(&b.adjoint().matmul(&b));
            let expected = solve(&normal, &b.adjoint()).unwrap();
            assert!(tikhonov_inverse(&b, lam).unwrap().max_abs_diff(&expected) < 1e-11);
        }
        let z = Matrix::zeros(3, 2);
        assert!(tikhonov_inverse(&z, 0.5).unwrap().max_abs() < 1e-15);
    }

    /// Leibniz expansion; independent of every factorization here.
    fn det_leibniz(a: &Matrix) -> Complex64 {
        fn perms(n: usize) -> Vec<(Vec<usize>, f64)> {
            if n == 1 {
                return vec![(vec![0], 1.0)];
            }
            let mut out = Vec::new();
            for (p, sign) in perms(n - 1) {
                for pos in 0..n {
                    let mut q = p.clone();
                    q.insert(pos, n - 1);
                    let flips = (n - 1 - pos) as i32;
                    out.push((q, sign * if flips % 2 == 0 { 1.0 } else { -1.0 }));
                }
            }
            out
        }
        perms(a.rows())
            .into_iter()
            .map(|(p, sign)| p.iter().enumerate().map(|(i, &j)| a[(i, j)]).product::<Complex64>() * sign)
            .sum()
    }

    #[test]
    fn svd_diagonal() {
        let a = Matrix::from_real_diag(&[3.0, 1.0]);
        let f = svd(&a).unwrap();
        assert!((f.s[0] - 3.0).abs() < 1e-15 && (f.s[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn svd_random_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let m = rng.random_range(1..=16);
            let n = rng.random_range(1..=16);
            let a = random(&mut rng, m, n);
            let f = svd(&a).unwrap();
            let smax = f.s[0];
            let resid = f.reconstruct().sub(&a).frobenius_norm();
            assert!(resid <= 10.0 * EPS * (m.max(n) as f64) * smax, "resid {resid}");
            assert!(unitary_defect(&f.u) < 1e-12);
            assert!(unitary_defect(&f.v) < 1e-12);
            assert!(f.s.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn svd_five_by_three_and_rank_deficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random(&mut rng, 5, 3);
        let f = svd(&a).unwrap();
        assert!(f.reconstruct().sub(&a).frobenius_norm() <= 1e-12);
        // rank 1 outer product
        let x = random(&mut rng, 4, 1);
        let y = random(&mut rng, 1, 3);
        let r1 = x.matmul(&y);
        let f = svd(&r1).unwrap();
        assert_eq!(f.rank(), 1);
        assert!(unitary_defect(&f.u) < 1e-12);
        assert!(f.reconstruct().sub(&r1).frobenius_norm() < 1e-13);
        // zero matrix
        let f = svd(&Matrix::zeros(3, 2)).unwrap();
        assert_eq!(f.rank(), 0);
        assert!(unitary_defect(&f.u) < 1e-15);
    }

    #[test]
    fn svd_integer_rank_deficient_converges() {
        // repeated integer columns leave rounding-level columns behind
        let a = Matrix::from_real_rows(&[
            &[1., 1., 2., 2., 1., 3.],
            &[1., 2., 2., 4., 1., 3.],
            &[1., 1., 2., 2., 1., 3.],
            &[1., 2., 2., 4., 1., 3.],
            &[2., 1., 1., 2., 2., 3.],
            &[2., 1., 1., 2., 2., 3.],
        ]);
        let f = svd(&a).unwrap();
        assert_eq!(f.rank(), 3);
        assert!(f.reconstruct().sub(&a).frobenius_norm() < 1e-13);
        assert!(unitary_defect(&f.u) < 1e-13 && unitary_defect(&f.v) < 1e-13);
    }

    #[test]
    fn svd_phase_canonical() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random(&mut rng, 4, 4);
        let f = svd(&a).unwrap();
        for k in 0..4 {
            let col = f.u.col(k);
            let big = col.iter().cloned().fold(ZERO, |b, z| if z.norm() > b.norm() { z } else { b });
            assert!(big.im.abs() < 1e-15 && big.re > 0.0);
        }
    }

    #[test]
    fn herm_eig_examples() {
        let (vals, _) = herm_eig(&Matrix::from_real_diag(&[1.0, 2.0])).unwrap();
        assert_eq!(vals, vec![1.0, 2.0]);
        // char poly (2 - x)^2 - 1 = 0 -> x in {1, 3}
        let (vals, vecs) = herm_eig(&Matrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        assert!(unitary_defect(&vecs) < 1e-14);
    }

    #[test]
    fn herm_eig_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.random_range(1..=16);
            let a = random_hermitian(&mut rng, n);
            let (vals, vecs) = herm_eig(&a).unwrap();
            let lhs = a.matmul(&vecs);
            let rhs = vecs.matmul(&Matrix::from_real_diag(&vals));
            assert!(lhs.sub(&rhs).frobenius_norm() <= 1e-11 * a.frobenius_norm().max(1.0));
            assert!(unitary_defect(&vecs) < 1e-12);
            assert!((vals.iter().sum::<f64>() - a.trace().re).abs() < 1e-10);
            assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let a = Matrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(herm_eig(&a), Err(KernelError::NotHermitian { .. })));
    }

    #[test]
    fn gen_eig_examples() {
        let mut shift = Matrix::zeros(4, 4);
        for k in 0..3 {
            shift[(k, k + 1)] = ONE;
        }
        let vals = gen_eig(&shift).unwrap();
        assert!(vals.iter().all(|z| z.norm() < 1e-12));
        let vals = gen_eig(&Matrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]])).unwrap();
        assert!((vals[0] - c(2.0)).norm() < 1e-14);
        assert!(vals[1].norm() < 1e-14);
    }

    #[test]
    fn gen_eig_determinant_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let a = random(&mut rng, 4, 4);
            let prod: Complex64 = gen_eig(&a).unwrap().into_iter().product();
            let det = det_leibniz(&a);
            assert!((prod - det).norm() <= 1e-8 * det.norm().max(1e-300), "{prod} vs {det}");
        }
    }

    #[test]
    fn gen_eig_agrees_with_herm_eig() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..100 {
            let n = rng.random_range(1..=16);
            let a = random_hermitian(&mut rng, n);
            let mut g: Vec<f64> = gen_eig(&a).unwrap().iter().map(|z| z.re).collect();
            g.sort_by(f64::total_cmp);
            let (h, _) = herm_eig(&a).unwrap();
            for (x, y) in g.iter().zip(&h) {
                assert!((x - y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn gen_eig_trace_random_large() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for n in [8, 24, 64] {
            let a = random(&mut rng, n, n);
            let vals = gen_eig(&a).unwrap();
            assert_eq!(vals.len(), n);
            let sum: Complex64 = vals.iter().sum();
            assert!((sum - a.trace()).norm() < 1e-9 * n as f64);
        }
    }

    #[test]
    fn hpd_roots() {
        let r = hpd_sqrt(&Matrix::from_real_diag(&[4.0, 1.0])).unwrap();
        assert!(r.max_abs_diff(&Matrix::from_real_diag(&[2.0, 1.0])) < 1e-15);
        let i = hpd_sqrt(&Matrix::identity(3)).unwrap();
        assert!(i.max_abs_diff(&Matrix::identity(3)) < 1e-15);
        // square-it-back oracle for [[2,1],[1,2]]
        let a = Matrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let r = hpd_sqrt(&a).unwrap();
        let s3 = 3f64.sqrt();
        let expected = Matrix::from_real_rows(&[&[(s3 + 1.0) / 2.0, (s3 - 1.0) / 2.0], &[(s3 - 1.0) / 2.0, (s3 + 1.0) / 2.0]]);
        assert!(expected.matmul(&expected).max_abs_diff(&a) < 1e-14);
        assert!(r.max_abs_diff(&expected) < 1e-14);
        let ri = hpd_inv_sqrt(&a).unwrap();
        assert!(ri.matmul(&r).max_abs_diff(&Matrix::identity(2)) < 1e-14);
    }

    #[test]
    fn hpd_rejects_indefinite() {
        let a = Matrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        match hpd_sqrt(&a) {
            Err(KernelError::NotPositiveDefinite { min_eigenvalue }) => assert!((min_eigenvalue + 1.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn hpd_random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..100 {
            let n = rng.random_range(1..=12);
            let b = random(&mut rng, n, n);
            let a = b.matmul(&b.adjoint()).add(&Matrix::identity(n).scale(c(0.5)));
            let r = hpd_sqrt(&a).unwrap();
            assert!(r.hermitian_defect() < 1e-15);
            assert!(r.matmul(&r).sub(&a).frobenius_norm() <= 1e-11 * a.frobenius_norm());
        }
    }

    #[test]
    fn inverse_and_solve() {
        let inv = inverse(&Matrix::from_real_diag(&[2.0, 4.0])).unwrap();
        assert!(inv.max_abs_diff(&Matrix::from_real_diag(&[0.5, 0.25])) < 1e-16);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let n = rng.random_range(1..=16);
            let a = random(&mut rng, n, n);
            let inv = inverse(&a).unwrap();
            assert!(a.matmul(&inv).max_abs_diff(&Matrix::identity(n)) < 1e-10);
            let b = random(&mut rng, n, 2);
            let x = solve(&a, &b).unwrap();
            assert!(a.matmul(&x).max_abs_diff(&b) < 1e-10);
        }
        let singular = Matrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(inverse(&singular), Err(KernelError::Singular { .. })));
    }

    #[test]
    fn rank_cutoff() {
        assert_eq!(rank(&[1.0, 0.5], 2, 2), 2);
        assert_eq!(rank(&[1.0, 1e-20], 2, 2), 1);
        assert_eq!(rank(&[], 2, 2), 0);
        assert_eq!(rank(&[0.0, 0.0], 2, 2), 0);
    }
}
