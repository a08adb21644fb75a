//! Points of C³ and the small amount of real linear algebra needed on R⁶.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

/// A point (x, y, z) of C³.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexPoint3 {
    pub x: Complex64,
    pub y: Complex64,
    pub z: Complex64,
}

impl ComplexPoint3 {
    pub const ORIGIN: ComplexPoint3 = ComplexPoint3 {
        x: Complex64::new(0.0, 0.0),
        y: Complex64::new(0.0, 0.0),
        z: Complex64::new(0.0, 0.0),
    };

    pub fn new(x: Complex64, y: Complex64, z: Complex64) -> Self {
        Self { x, y, z }
    }

    /// Point with real coordinates.
    pub fn real(x: f64, y: f64, z: f64) -> Self {
        Self::new(x.into(), y.into(), z.into())
    }

    pub fn coords(&self) -> [Complex64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_coords(c: [Complex64; 3]) -> Self {
        Self::new(c[0], c[1], c[2])
    }

    pub fn is_finite(&self) -> bool {
        self.coords().iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x.norm_sqr() + self.y.norm_sqr() + self.z.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn distance(&self, other: &ComplexPoint3) -> f64 {
        (*self - *other).norm()
    }

    /// Real coordinates (Re x, Im x, Re y, Im y, Re z, Im z).
    pub fn to_real(&self) -> [f64; 6] {
        [self.x.re, self.x.im, self.y.re, self.y.im, self.z.re, self.z.im]
    }

    pub fn from_real(v: &[f64; 6]) -> Self {
        Self::new(
            Complex64::new(v[0], v[1]),
            Complex64::new(v[2], v[3]),
            Complex64::new(v[4], v[5]),
        )
    }

    /// Coordinate-wise complex scaling.
    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Add for ComplexPoint3 {
    type Output = ComplexPoint3;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for ComplexPoint3 {
    type Output = ComplexPoint3;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for ComplexPoint3 {
    type Output = ComplexPoint3;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

pub type Vec6 = [f64; 6];

pub fn dot(a: &Vec6, b: &Vec6) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

pub fn norm(a: &Vec6) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(alpha: f64, x: &Vec6, y: &mut Vec6) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Removes from `v` its components along the orthonormal vectors `basis`.
pub fn reject(v: &Vec6, basis: &[Vec6]) -> Vec6 {
    let mut out = *v;
    for b in basis {
        let c = dot(&out, b);
        axpy(-c, b, &mut out);
    }
    out
}

/// Gram–Schmidt; vectors whose residual norm falls below `tol` (relative to
/// their input norm) are dropped.
pub fn orthonormalize(vectors: &[Vec6], tol: f64) -> Vec<Vec6> {
    let mut basis: Vec<Vec6> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let n0 = norm(v);
        if n0 == 0.0 {
            continue;
        }
        // two passes for numerical orthogonality
        let w = reject(&reject(v, &basis), &basis);
        let n = norm(&w);
        if n > tol * n0 {
            basis.push(w.map(|c| c / n));
        }
    }
    basis
}

/// Completes an orthonormal family to an orthonormal basis of the
/// complement of `normals` with `count` vectors.
pub fn complement_basis(normals: &[Vec6], count: usize) -> Vec<Vec6> {
    let mut basis = normals.to_vec();
    let start = basis.len();
    for axis in 0..6 {
        if basis.len() - start == count {
            break;
        }
        let mut e = [0.0; 6];
        e[axis] = 1.0;
        let w = reject(&reject(&e, &basis), &basis);
        let n = norm(&w);
        if n > 1e-6 {
            basis.push(w.map(|c| c / n));
        }
    }
    basis.split_off(start)
}

/// Square root of the Gram determinant: the k-volume spanned by `vectors`.
pub fn span_volume(vectors: &[Vec6]) -> f64 {
    let k = vectors.len();
    let mut gram = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..=i {
            let d = dot(&vectors[i], &vectors[j]);
            gram[i][j] = d;
            gram[j][i] = d;
        }
    }
    determinant(gram).max(0.0).sqrt()
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap_or(col);
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for c in col..n {
                m[row][c] -= f * m[col][c];
            }
        }
    }
    det
}

/// Real vector of a complex triple (tangent vectors use the same layout as points).
pub fn complex_to_real(v: [Complex64; 3]) -> Vec6 {
    ComplexPoint3::from_coords(v).to_real()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn real_roundtrip() {
        let p = ComplexPoint3::new(
            Complex64::new(1.0, -2.0),
            Complex64::new(0.5, 0.25),
            Complex64::new(-3.0, 4.0),
        );
        assert_eq!(ComplexPoint3::from_real(&p.to_real()), p);
        assert_relative_eq!(p.norm(), norm(&p.to_real()));
    }

    #[test]
    fn unit_square_volume() {
        let a = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let b = [1.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        assert_relative_eq!(span_volume(&[a, b]), 1.0, epsilon = 1e-14);
        assert_relative_eq!(span_volume(&[a, a]), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn complement_is_orthogonal() {
        let n = orthonormalize(&[[1.0, 1.0, 0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0, 0.0, 2.0]], 1e-12);
        let c = complement_basis(&n, 4);
        assert_eq!(c.len(), 4);
        for u in &c {
            for v in &n {
                assert!(dot(u, v).abs() < 1e-12);
            }
        }
    }
}
