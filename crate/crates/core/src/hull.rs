//! Planar convex hulls of complex points.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Convex polygon with counterclockwise vertices. One vertex is a point,
/// two vertices a segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Hull2D {
    vertices: Vec<Complex64>,
}

fn cross(o: Complex64, a: Complex64, b: Complex64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Distance from `z` to the segment `[a, b]`.
fn segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + d * t)).norm()
}

fn segments_cross(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let d1 = cross(a, b, c);
    let d2 = cross(a, b, d);
    let d3 = cross(c, d, a);
    let d4 = cross(c, d, b);
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0 && d3 != 0.0 && d4 != 0.0
}

/// Andrew's monotone chain; collinear points are dropped.
pub fn hull_of(points: &[Complex64]) -> Result<Hull2D> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let mut pts: Vec<Complex64> = points.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup();
    if pts.len() < 3 {
        return Ok(Hull2D { vertices: pts });
    }
    let mut lower: Vec<Complex64> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Complex64> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    Ok(Hull2D { vertices: lower })
}

impl Hull2D {
    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }

    fn edges(&self) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        let n = self.vertices.len();
        let count = match n {
            1 => 1,
            2 => 1,
            _ => n,
        };
        (0..count).map(move |k| (self.vertices[k], self.vertices[(k + 1) % n]))
    }

    /// Whether `z` lies strictly inside a polygon with at least three vertices.
    fn interior_contains(&self, z: Complex64) -> bool {
        self.vertices.len() >= 3 && self.edges().all(|(a, b)| cross(a, b, z) >= 0.0)
    }

    /// Euclidean distance from `z` to the filled polygon (zero inside).
    pub fn distance(&self, z: Complex64) -> f64 {
        if self.interior_contains(z) {
            return 0.0;
        }
        self.edges().map(|(a, b)| segment_distance(z, a, b)).fold(f64::INFINITY, f64::min)
    }

    /// Distance to the polygon boundary, signed positive inside.
    pub fn signed_distance(&self, z: Complex64) -> f64 {
        let edge = self.edges().map(|(a, b)| segment_distance(z, a, b)).fold(f64::INFINITY, f64::min);
        if self.interior_contains(z) {
            edge
        } else {
            -edge
        }
    }

    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        self.distance(z) <= tol
    }

    pub fn max_modulus(&self) -> f64 {
        self.vertices.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Hull2D {
        let pts: Vec<Complex64> = self.vertices.iter().map(|&z| f(z)).collect();
        hull_of(&pts).expect("nonempty vertex list")
    }
}

pub fn hull_contains(h: &Hull2D, z: Complex64, tol: f64) -> bool {
    h.contains(z, tol)
}

/// Whether the filled polygons, each dilated by `tol`, meet.
pub fn hulls_intersect(h1: &Hull2D, h2: &Hull2D, tol: f64) -> bool {
    if h1.vertices.iter().any(|&v| h2.contains(v, tol)) || h2.vertices.iter().any(|&v| h1.contains(v, tol)) {
        return true;
    }
    h1.edges()
        .any(|(a, b)| h2.edges().any(|(c, d)| segments_cross(a, b, c, d)))
}

/// Hausdorff distance between the filled polygons.
pub fn hull_hausdorff(h1: &Hull2D, h2: &Hull2D) -> f64 {
    let one = h1.vertices.iter().map(|&v| h2.distance(v)).fold(0.0, f64::max);
    let two = h2.vertices.iter().map(|&v| h1.distance(v)).fold(0.0, f64::max);
    one.max(two)
}
