//! Closed-form 2x2 real matrix arithmetic.
//!
//! Every inversion in the CRLB chain is a 2x2 solve, so these go through the
//! adjugate/determinant form rather than a general factorization.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Row-major 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[0.0, 0.0], [0.0, 0.0]]);
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Mat2([[m11, m12], [m21, m22]])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn transpose(&self) -> Mat2 {
        let m = &self.0;
        Mat2::new(m[0][0], m[1][0], m[0][1], m[1][1])
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn adjugate(&self) -> Mat2 {
        let m = &self.0;
        Mat2::new(m[1][1], -m[0][1], -m[1][0], m[0][0])
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        let m = &self.0;
        Mat2::new(s * m[0][0], s * m[0][1], s * m[1][0], s * m[1][1])
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Frobenius-norm condition number `‖A‖·‖A⁻¹‖`; infinite when singular.
    pub fn condition(&self) -> f64 {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return f64::INFINITY;
        }
        // ‖adj A‖_F == ‖A‖_F for 2x2 matrices.
        let n = self.norm();
        n * n / det.abs()
    }

    /// Inverse via the adjugate, or `None` when the condition number
    /// exceeds `max_condition`.
    pub fn try_inverse(&self, max_condition: f64) -> Option<Mat2> {
        let cond = self.condition();
        if !(cond.is_finite() && cond <= max_condition) {
            return None;
        }
        Some(self.adjugate().scale(1.0 / self.det()))
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn sym_eigenvalues(&self) -> [f64; 2] {
        let m = &self.0;
        let off = 0.5 * (m[0][1] + m[1][0]);
        let mean = 0.5 * (m[0][0] + m[1][1]);
        let half_gap = (0.5 * (m[0][0] - m[1][1])).hypot(off);
        [mean - half_gap, mean + half_gap]
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        let scale = self.norm().max(f64::MIN_POSITIVE);
        (self.0[0][1] - self.0[1][0]).abs() <= rel_tol * scale
    }

    /// Symmetric and both eigenvalues strictly positive.
    pub fn is_positive_definite(&self) -> bool {
        self.is_symmetric(1e-9) && self.sym_eigenvalues()[0] > 0.0
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        Mat2::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + (-rhs)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}
