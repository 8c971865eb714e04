//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use einrange::io::read_tensor;
use einrange::matrix::herm_eig;
use einrange::winverse::WeightPair;
use einrange::{DenseTensor, Matrix};
use num_complex::Complex64;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture(name: &str) -> DenseTensor {
    read_tensor(&fixture_path(name)).unwrap_or_else(|e| panic!("{e}")).0
}

pub fn weights(m: &str, n: &str) -> WeightPair {
    WeightPair::new(fixture(m), fixture(n)).expect("fixture weights are HPD")
}

pub fn real(rows: &[&[f64]]) -> DenseTensor {
    let m = Matrix::from_real_rows(rows);
    DenseTensor::from_matrix(&m, &[m.rows()], &[m.cols()]).unwrap()
}

fn odometer(idx: &mut [usize], shape: &[usize]) -> bool {
    for k in 0..idx.len() {
        idx[k] += 1;
        if idx[k] < shape[k] {
            return true;
        }
        idx[k] = 0;
    }
    false
}

fn multi_indices(shape: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx = vec![0; shape.len()];
    loop {
        out.push(idx.clone());
        if !odometer(&mut idx, shape) {
            return out;
        }
    }
}

/// Einstein product by explicit summation over the contracted multi-index,
/// never touching the reshaped matrices.
pub fn brute_ein(a: &DenseTensor, b: &DenseTensor) -> DenseTensor {
    assert_eq!(a.col_shape(), b.row_shape());
    let inner = multi_indices(a.col_shape());
    DenseTensor::from_fn(a.row_shape(), b.col_shape(), |i, j| {
        inner.iter().map(|k| a.get(i, k) * b.get(k, j)).sum()
    })
}

/// Conjugate transpose by index swapping.
pub fn brute_h(a: &DenseTensor) -> DenseTensor {
    DenseTensor::from_fn(a.col_shape(), a.row_shape(), |i, j| a.get(j, i).conj())
}

pub fn frob(a: &DenseTensor) -> f64 {
    a.data().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn diff(a: &DenseTensor, b: &DenseTensor) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_diff(a: &DenseTensor, b: &DenseTensor) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// The four defining residuals of `X = A^†_{M,N}` computed with `brute_ein`.
pub fn penrose_oracle(a: &DenseTensor, x: &DenseTensor, m: &DenseTensor, n: &DenseTensor) -> [f64; 4] {
    let ax = brute_ein(a, x);
    let xa = brute_ein(x, a);
    let max = brute_ein(m, &ax);
    let nxa = brute_ein(n, &xa);
    [
        diff(&brute_ein(&ax, a), a),
        diff(&brute_ein(&xa, x), x),
        diff(&brute_h(&max), &max),
        diff(&brute_h(&nxa), &nxa),
    ]
}

/// Residuals of a WSVD triple: `||U S V^H - A||`, `||U^H M U - I||`,
/// `||V^H N^{-1} V - I||`, with `N^{-1}` supplied by the caller.
pub fn wsvd_oracle(
    a: &DenseTensor,
    u: &DenseTensor,
    s: &DenseTensor,
    v: &DenseTensor,
    m: &DenseTensor,
    n_inv: &DenseTensor,
) -> [f64; 3] {
    let recon = brute_ein(&brute_ein(u, s), &brute_h(v));
    let gu = brute_ein(&brute_ein(&brute_h(u), m), u);
    let gv = brute_ein(&brute_ein(&brute_h(v), n_inv), v);
    [
        diff(&recon, a),
        diff(&gu, &DenseTensor::identity(u.col_shape())),
        diff(&gv, &DenseTensor::identity(v.col_shape())),
    ]
}

/// Lower Cholesky factor of an HPD matrix.
pub fn cholesky(h: &Matrix) -> Matrix {
    let n = h.rows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = h[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        assert!(d > 0.0, "not positive definite");
        let d = d.sqrt();
        l[(j, j)] = Complex64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = h[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    l
}

/// Inverse of a lower-triangular matrix by forward substitution.
pub fn lower_inverse(l: &Matrix) -> Matrix {
    let n = l.rows();
    let mut inv = Matrix::zeros(n, n);
    for c in 0..n {
        for i in c..n {
            let mut s = if i == c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            for k in c..i {
                s -= l[(i, k)] * inv[(k, c)];
            }
            inv[(i, c)] = s / l[(i, i)];
        }
    }
    inv
}

/// Squares of the `(M, N)` singular values, largest first, from the
/// Cholesky congruence `C = L_M^H A L_N^{-H}` (`M = L_M L_M^H`, `N = L_N L_N^H`).
pub fn weighted_gram_spectrum(a: &Matrix, m: &Matrix, n: &Matrix) -> Vec<f64> {
    let lm = cholesky(m);
    let ln_inv = lower_inverse(&cholesky(n));
    let c = lm.adjoint().matmul(a).matmul(&ln_inv.adjoint());
    let (mut vals, _) = herm_eig(&c.adjoint().matmul(&c)).unwrap();
    vals.sort_by(|x, y| y.total_cmp(x));
    vals
}

/// Numerical radius of a 2x2 matrix from its elliptical numerical range
/// (foci at the eigenvalues, minor axis `sqrt(||A||_F^2 - |l1|^2 - |l2|^2)`),
/// maximized over a dense parametrization of the ellipse.
pub fn radius_2x2(a: [[Complex64; 2]; 2]) -> f64 {
    let tr = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = (tr * tr - det * 4.0).sqrt();
    let (l1, l2) = ((tr + disc) / 2.0, (tr - disc) / 2.0);
    let fro2: f64 = a.iter().flatten().map(|z| z.norm_sqr()).sum();
    let minor = (fro2 - l1.norm_sqr() - l2.norm_sqr()).max(0.0).sqrt();
    let focal = (l1 - l2).norm();
    let major = (minor * minor + focal * focal).sqrt();
    let center = (l1 + l2) / 2.0;
    let dir = if focal > 0.0 { (l1 - l2) / focal } else { Complex64::new(1.0, 0.0) };
    (0..200_000)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / 200_000.0;
            (center + dir * Complex64::new(major / 2.0 * t.cos(), minor / 2.0 * t.sin())).norm()
        })
        .fold(0.0, f64::max)
}
