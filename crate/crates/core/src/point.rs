//! Points in `R^d`, `d ≤ 3`, stored as fixed arrays with unused trailing
//! coordinates set to zero.

use crate::error::{Error, Result};

pub type P3 = [f64; 3];

pub const MAX_DIM: usize = 3;

pub fn check_dim(d: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&d) {
        Ok(())
    } else {
        Err(Error::invalid(format!("dimension must be 1, 2 or 3 (got {d})")))
    }
}

pub fn from_slice(x: &[f64], d: usize) -> Result<P3> {
    if x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() });
    }
    let mut p = [0.0; 3];
    p[..d].copy_from_slice(x);
    Ok(p)
}

#[inline]
pub fn dot(a: &P3, b: &P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: &P3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn scale(a: &P3, s: f64) -> P3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn add(a: &P3, b: &P3) -> P3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: &P3, b: &P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Unit vector of a nonzero point.
pub fn normalize(a: &P3) -> Option<P3> {
    let n = norm(a);
    if n > 0.0 && n.is_finite() {
        Some(scale(a, 1.0 / n))
    } else {
        None
    }
}

/// Orthonormal pair spanning the plane orthogonal to a unit vector in `R^3`.
pub fn orthonormal_complement(n: &P3) -> (P3, P3) {
    let a = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let u = normalize(&sub(&a, &scale(n, dot(&a, n)))).expect("non-degenerate");
    let v = [n[1] * u[2] - n[2] * u[1], n[2] * u[0] - n[0] * u[2], n[0] * u[1] - n[1] * u[0]];
    (u, v)
}
