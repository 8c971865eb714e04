//! Numerical range approximation and numerical radius.
//!
//! The boundary is traced with the support-function sweep: for each angle
//! `θ`, the top eigenvector of the Hermitian part of `e^{iθ} A` gives a point
//! of `W(A)` on its supporting line in direction `e^{-iθ}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hull::{hull_of, Hull2D};
use crate::matrix::{self, Matrix};
use crate::random::{complex_gaussian, rng_stream};
use crate::tensor::DenseTensor;
use crate::winverse::{wmp_inverse, WeightPair};

pub const DEFAULT_THETAS: usize = 500;
pub const MIN_THETAS: usize = 8;
const SAMPLE_CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub theta: f64,
    pub point: Complex64,
    /// Largest eigenvalue of the Hermitian part of `e^{iθ} A`, i.e.
    /// `max { Re(e^{iθ} z) : z in W(A) }`.
    pub support: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NRApprox {
    pub boundary: Vec<BoundaryPoint>,
    pub samples: Vec<Complex64>,
    pub radius: f64,
}

impl NRApprox {
    /// Convex hull of the boundary points: an inner approximation of `W(A)`.
    pub fn hull(&self) -> Hull2D {
        let pts: Vec<Complex64> = self.boundary.iter().map(|b| b.point).collect();
        hull_of(&pts).expect("boundary has at least MIN_THETAS points")
    }

    /// `min_θ (h(θ) - Re(e^{iθ} z))` over the grid. A negative value proves
    /// `z` lies outside `W(A)` by at least its magnitude; a positive value
    /// bounds the distance from `z` to the boundary from above.
    pub fn support_margin(&self, z: Complex64) -> f64 {
        self.boundary
            .iter()
            .map(|b| b.support - (Complex64::from_polar(1.0, b.theta) * z).re)
            .fold(f64::INFINITY, f64::min)
    }

    /// Membership of `z` decided with a certified clearance `band`: `Some(true)`
    /// if the inner hull holds `z` at depth ≥ `band`, `Some(false)` if a
    /// supporting line separates it by ≥ `band`, `None` otherwise.
    pub fn certified_contains(&self, z: Complex64, band: f64) -> Option<bool> {
        if self.hull().signed_distance(z) >= band {
            Some(true)
        } else if self.support_margin(z) <= -band {
            Some(false)
        } else {
            None
        }
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

/// `<A X, X> / ||X||^2`.
pub fn rayleigh(a: &DenseTensor, x: &DenseTensor) -> Result<Complex64> {
    require_square("rayleigh", a)?;
    let nx = x.norm();
    if nx == 0.0 {
        return Err(Error::ZeroTensor("X"));
    }
    let ax = a.einstein_product(x)?;
    Ok(ax.inner(x)? / (nx * nx))
}

fn quadratic_form(a: &Matrix, x: &[Complex64]) -> Complex64 {
    let n = x.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let col = a.col(j);
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..n {
            s += x[i].conj() * col[i];
        }
        acc += s * x[j];
    }
    let nn: f64 = x.iter().map(|z| z.norm_sqr()).sum();
    acc / nn
}

fn sweep_point(a: &Matrix, theta: f64) -> Result<BoundaryPoint> {
    let rotated = a.scale(Complex64::from_polar(1.0, theta));
    let (vals, vecs) = matrix::herm_eig(&rotated.hermitian_part())?;
    let top = *vals.last().expect("nonempty matrix");
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // first basis vector of the (numerically) top eigenspace
    let k = vals
        .iter()
        .position(|&v| v >= top - 1e-12 * scale)
        .unwrap_or(vals.len() - 1);
    Ok(BoundaryPoint {
        theta,
        point: quadratic_form(a, vecs.col(k)),
        support: top,
    })
}

/// Boundary sweep over `θ_k = 2πk / n_theta`, ordered by `k`.
pub fn nr_boundary(a: &DenseTensor, n_theta: usize) -> Result<NRApprox> {
    require_square("nr_boundary", a)?;
    if n_theta < MIN_THETAS {
        return Err(Error::InvalidArgument(format!(
            "n_theta must be at least {MIN_THETAS}, got {n_theta}"
        )));
    }
    let m = a.to_matrix();
    let boundary = (0..n_theta)
        .into_par_iter()
        .map(|k| sweep_point(&m, 2.0 * PI * k as f64 / n_theta as f64))
        .collect::<Result<Vec<_>>>()?;
    let radius = boundary.iter().map(|b| b.point.norm()).fold(0.0, f64::max);
    Ok(NRApprox {
        boundary,
        samples: Vec::new(),
        radius,
    })
}

/// Rayleigh points at normalized complex-Gaussian random vectors. Chunk `c`
/// of 256 draws uses stream `c` of the seeded generator, so the output does
/// not depend on thread scheduling.
pub fn nr_sample(a: &DenseTensor, n_samples: usize, seed: u64) -> Result<Vec<Complex64>> {
    require_square("nr_sample", a)?;
    let m = a.to_matrix();
    let n = m.rows();
    let chunks = n_samples.div_ceil(SAMPLE_CHUNK);
    let out: Vec<Vec<Complex64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_stream(seed, c as u64);
            let count = SAMPLE_CHUNK.min(n_samples - c * SAMPLE_CHUNK);
            let mut x = vec![Complex64::new(0.0, 0.0); n];
            (0..count)
                .map(|_| {
                    loop {
                        x.iter_mut().for_each(|z| *z = complex_gaussian(&mut rng));
                        if x.iter().any(|z| z.norm_sqr() > 0.0) {
                            break;
                        }
                    }
                    quadratic_form(&m, &x)
                })
                .collect()
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}

/// Boundary sweep plus random interior samples; the radius covers both.
pub fn numerical_range(a: &DenseTensor, n_theta: usize, n_samples: usize, seed: u64) -> Result<NRApprox> {
    let mut nr = nr_boundary(a, n_theta)?;
    nr.samples = nr_sample(a, n_samples, seed)?;
    nr.radius = nr.samples.iter().map(|z| z.norm()).fold(nr.radius, f64::max);
    Ok(nr)
}

pub fn numerical_radius(a: &DenseTensor, n_theta: usize) -> Result<f64> {
    Ok(nr_boundary(a, n_theta)?.radius)
}

/// The `n x n` weighted shift with superdiagonal `a` (`a.len() == n - 1`).
pub fn wshift_build(a: &[Complex64], n: usize) -> Result<DenseTensor> {
    if n == 0 || a.len() + 1 != n {
        return Err(Error::InvalidArgument(format!(
            "a weighted shift of size {n} needs {} weights, got {}",
            n.saturating_sub(1),
            a.len()
        )));
    }
    let mut m = Matrix::zeros(n, n);
    for (k, &ak) in a.iter().enumerate() {
        m[(k, k + 1)] = ak;
    }
    DenseTensor::from_matrix(&m, &[n], &[n])
}

/// Closed-form `A^†_{M,N}` of a weighted shift under positive diagonal
/// weights: reciprocals on the subdiagonal, zero where `a_k = 0`.
pub fn wshift_closed_form(a: &[Complex64]) -> DenseTensor {
    let n = a.len() + 1;
    let mut m = Matrix::zeros(n, n);
    for (k, &ak) in a.iter().enumerate() {
        if ak != Complex64::new(0.0, 0.0) {
            m[(k + 1, k)] = ak.inv();
        }
    }
    DenseTensor::from_matrix(&m, &[n], &[n]).expect("square shape")
}

#[derive(Debug, Clone)]
pub struct WshiftCheck {
    pub computed: DenseTensor,
    pub closed_form: DenseTensor,
    pub deviation: f64,
}

/// Computes `A^†_{M,N}` of the weighted shift and compares it with the closed form.
pub fn wshift_wmp(a: &[Complex64], m_diag: &[f64], n_diag: &[f64]) -> Result<WshiftCheck> {
    let n = a.len() + 1;
    if m_diag.len() != n || n_diag.len() != n {
        return Err(Error::InvalidArgument(format!("diagonal weights must have {n} entries")));
    }
    let shift = wshift_build(a, n)?;
    let diag = |d: &[f64]| DenseTensor::from_matrix(&Matrix::from_real_diag(d), &[n], &[n]);
    let w = WeightPair::new(diag(m_diag)?, diag(n_diag)?)?;
    let computed = wmp_inverse(&shift, &w)?;
    let closed_form = wshift_closed_form(a);
    let deviation = computed.max_abs_diff(&closed_form);
    Ok(WshiftCheck {
        computed,
        closed_form,
        deviation,
    })
}
