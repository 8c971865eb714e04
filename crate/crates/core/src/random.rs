//! Seeded generators for test instances and sampling.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix::{svd, Matrix};
use crate::tensor::DenseTensor;

pub type Rng64 = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator seeded by `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> Rng64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Entries uniform in the unit square `[-1, 1) x [-1, 1)`.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_real_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| Complex64::new(rng.random_range(-1.0..1.0), 0.0))
}

pub fn random_tensor<R: Rng + ?Sized>(rng: &mut R, row_shape: &[usize], col_shape: &[usize]) -> DenseTensor {
    let rows: usize = row_shape.iter().product();
    let cols: usize = col_shape.iter().product();
    DenseTensor::from_matrix(&random_matrix(rng, rows, cols), row_shape, col_shape)
        .expect("shape products match")
}

/// Haar-like unitary from the left singular vectors of a random matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Matrix {
    let g = Matrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    svd(&g).expect("svd of a small random matrix").u
}

/// `Q diag(d) Q^H` with eigenvalues drawn from `[lo, hi]`.
pub fn random_hpd<R: Rng + ?Sized>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Matrix {
    let q = random_unitary(rng, n);
    let d: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    q.matmul(&Matrix::from_real_diag(&d)).matmul(&q.adjoint()).hermitian_part()
}

pub fn random_hpd_tensor<R: Rng + ?Sized>(rng: &mut R, shape: &[usize], lo: f64, hi: f64) -> DenseTensor {
    let n: usize = shape.iter().product();
    DenseTensor::from_matrix(&random_hpd(rng, n, lo, hi), shape, shape).expect("square shape")
}

/// `U diag(s) V^H` with `s` uniform in `[lo, hi]` on the first `rank`
/// positions and zero after.
pub fn random_with_singular_values<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    rank: usize,
    lo: f64,
    hi: f64,
) -> Matrix {
    let u = random_unitary(rng, rows);
    let v = random_unitary(rng, cols);
    let mut sigma = Matrix::zeros(rows, cols);
    for k in 0..rank.min(rows).min(cols) {
        sigma[(k, k)] = Complex64::new(rng.random_range(lo..=hi), 0.0);
    }
    u.matmul(&sigma).matmul(&v.adjoint())
}

/// Normal matrix `Q diag(d) Q^H` with complex eigenvalues in the unit square;
/// the last `zeros` eigenvalues are set to zero.
pub fn random_normal<R: Rng + ?Sized>(rng: &mut R, n: usize, zeros: usize) -> Matrix {
    let q = random_unitary(rng, n);
    let d: Vec<Complex64> = (0..n)
        .map(|k| {
            if k + zeros >= n {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            }
        })
        .collect();
    q.matmul(&Matrix::from_diag(&d)).matmul(&q.adjoint())
}

/// A random split of `total` modes into extents whose product is at most `max_product`.
pub fn random_shape<R: Rng + ?Sized>(rng: &mut R, max_modes: usize, max_product: usize) -> Vec<usize> {
    let modes = rng.random_range(1..=max_modes);
    let mut shape = Vec::with_capacity(modes);
    let mut prod = 1;
    for _ in 0..modes {
        let cap = (max_product / prod).clamp(1, 4);
        let e = rng.random_range(1..=cap);
        prod *= e;
        shape.push(e);
    }
    shape
}
