//! Small fixed-size linear algebra for the planar fibres.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// A vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_zero(self) -> bool {
        self.x == 0.0 && self.y == 0.0
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn scale(self, s: f64) -> Self {
        Vec2 { x: s * self.x, y: s * self.y }
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Row-major 2×2 real matrix `(a b; c d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// Tolerance on `|det − 1|` for members of SL(2,ℝ).
pub const SL2_DET_TOL: f64 = 1e-12;

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub const fn diag(p: f64, q: f64) -> Self {
        Mat2 { a: p, b: 0.0, c: 0.0, d: q }
    }

    /// Counter-clockwise rotation by `angle` radians.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Mat2 { a: c, b: -s, c: s, d: c }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn is_sl2(&self) -> bool {
        (self.det() - 1.0).abs() <= SL2_DET_TOL
    }

    /// Inverse of a unimodular matrix, `(d −b; −c a)`.
    pub fn sl2_inverse(&self) -> Self {
        Mat2 { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// General inverse; `None` for singular input.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(Mat2 { a: self.d / det, b: -self.b / det, c: -self.c / det, d: self.a / det })
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2 { x: self.a * v.x + self.b * v.y, y: self.c * v.x + self.d * v.y }
    }

    pub fn scale(&self, s: f64) -> Self {
        Mat2 { a: s * self.a, b: s * self.b, c: s * self.c, d: s * self.d }
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    /// Operator (spectral) norm.
    pub fn norm(&self) -> f64 {
        let s = 0.5 * (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d);
        let det = self.det();
        let disc = (s * s - det * det).max(0.0);
        // s + sqrt(disc) never cancels.
        (s + disc.sqrt()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

impl Mul<Vec2> for Mat2 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        self.apply(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_of_diagonal_and_rotation() {
        assert!((Mat2::diag(2.0, 0.5).norm() - 2.0).abs() < 1e-15);
        assert!((Mat2::rotation(0.7).norm() - 1.0).abs() < 1e-15);
        // rank-one matrix: norm = |u||v|
        let m = Mat2::new(1.0, 2.0, 2.0, 4.0);
        assert!((m.norm() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn sl2_inverse_is_inverse() {
        let m = Mat2::diag(2.0, 0.5) * Mat2::rotation(0.3);
        let p = m * m.sl2_inverse();
        assert!((p.a - 1.0).abs() < 1e-15 && p.b.abs() < 1e-15);
        assert!(p.c.abs() < 1e-15 && (p.d - 1.0).abs() < 1e-15);
        assert!(m.is_sl2());
        assert!(Mat2::new(1.0, 2.0, 2.0, 4.0).inverse().is_none());
    }
}
