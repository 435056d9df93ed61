//! Fixed-size planar vectors and matrices.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point or direction in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vector2 {
    pub x1: f64,
    pub x2: f64,
}

impl Vector2 {
    pub const ZERO: Vector2 = Vector2 { x1: 0.0, x2: 0.0 };

    #[inline]
    pub const fn new(x1: f64, x2: f64) -> Self {
        Vector2 { x1, x2 }
    }

    #[inline]
    pub fn dot(self, other: Vector2) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2
    }

    /// z-component of the planar cross product; positive when `other` is
    /// counter-clockwise of `self`.
    #[inline]
    pub fn cross(self, other: Vector2) -> f64 {
        self.x1 * other.x2 - self.x2 * other.x1
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x1.hypot(self.x2)
    }

    #[inline]
    pub fn norm_inf(self) -> f64 {
        self.x1.abs().max(self.x2.abs())
    }

    #[inline]
    pub fn scale(self, s: f64) -> Vector2 {
        Vector2::new(s * self.x1, s * self.x2)
    }

    /// `(1 - t) * self + t * other`.
    #[inline]
    pub fn lerp(self, other: Vector2, t: f64) -> Vector2 {
        Vector2::new(
            (1.0 - t) * self.x1 + t * other.x1,
            (1.0 - t) * self.x2 + t * other.x2,
        )
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }

    pub fn distance(self, other: Vector2) -> f64 {
        (self - other).norm()
    }
}

impl From<[f64; 2]> for Vector2 {
    fn from(a: [f64; 2]) -> Self {
        Vector2::new(a[0], a[1])
    }
}

impl From<Vector2> for [f64; 2] {
    fn from(v: Vector2) -> Self {
        [v.x1, v.x2]
    }
}

impl Add for Vector2 {
    type Output = Vector2;
    #[inline]
    fn add(self, o: Vector2) -> Vector2 {
        Vector2::new(self.x1 + o.x1, self.x2 + o.x2)
    }
}

impl AddAssign for Vector2 {
    #[inline]
    fn add_assign(&mut self, o: Vector2) {
        self.x1 += o.x1;
        self.x2 += o.x2;
    }
}

impl Sub for Vector2 {
    type Output = Vector2;
    #[inline]
    fn sub(self, o: Vector2) -> Vector2 {
        Vector2::new(self.x1 - o.x1, self.x2 - o.x2)
    }
}

impl Neg for Vector2 {
    type Output = Vector2;
    #[inline]
    fn neg(self) -> Vector2 {
        Vector2::new(-self.x1, -self.x2)
    }
}

impl Mul<Vector2> for f64 {
    type Output = Vector2;
    #[inline]
    fn mul(self, v: Vector2) -> Vector2 {
        v.scale(self)
    }
}

/// Row-major 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[[f64; 2]; 2]", into = "[[f64; 2]; 2]")]
pub struct Matrix2 {
    pub m: [[f64; 2]; 2],
}

impl Matrix2 {
    pub const ZERO: Matrix2 = Matrix2 { m: [[0.0; 2]; 2] };
    pub const IDENTITY: Matrix2 = Matrix2 {
        m: [[1.0, 0.0], [0.0, 1.0]],
    };

    #[inline]
    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Matrix2 {
            m: [[a11, a12], [a21, a22]],
        }
    }

    /// Matrix whose first column is `c` and whose second column is zero.
    pub const fn from_column(c: Vector2) -> Self {
        Matrix2::new(c.x1, 0.0, c.x2, 0.0)
    }

    pub fn from_columns(c1: Vector2, c2: Vector2) -> Self {
        Matrix2::new(c1.x1, c2.x1, c1.x2, c2.x2)
    }

    pub fn column(&self, j: usize) -> Vector2 {
        Vector2::new(self.m[0][j], self.m[1][j])
    }

    #[inline]
    pub fn transpose(&self) -> Matrix2 {
        Matrix2::new(self.m[0][0], self.m[1][0], self.m[0][1], self.m[1][1])
    }

    #[inline]
    pub fn apply(&self, v: Vector2) -> Vector2 {
        Vector2::new(
            self.m[0][0] * v.x1 + self.m[0][1] * v.x2,
            self.m[1][0] * v.x1 + self.m[1][1] * v.x2,
        )
    }

    /// `selfᵀ v` without forming the transpose.
    #[inline]
    pub fn apply_transpose(&self, v: Vector2) -> Vector2 {
        Vector2::new(
            self.m[0][0] * v.x1 + self.m[1][0] * v.x2,
            self.m[0][1] * v.x1 + self.m[1][1] * v.x2,
        )
    }

    #[inline]
    pub fn scale(&self, s: f64) -> Matrix2 {
        let m = self.m;
        Matrix2::new(s * m[0][0], s * m[0][1], s * m[1][0], s * m[1][1])
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .fold(0.0_f64, |a, &b| a.max(b.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|v| v.is_finite())
    }

    pub fn to_rows(&self) -> [[f64; 2]; 2] {
        self.m
    }
}

impl From<[[f64; 2]; 2]> for Matrix2 {
    fn from(m: [[f64; 2]; 2]) -> Self {
        Matrix2 { m }
    }
}

impl From<Matrix2> for [[f64; 2]; 2] {
    fn from(m: Matrix2) -> Self {
        m.m
    }
}

impl Add for Matrix2 {
    type Output = Matrix2;
    fn add(self, o: Matrix2) -> Matrix2 {
        let (a, b) = (self.m, o.m);
        Matrix2::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl Sub for Matrix2 {
    type Output = Matrix2;
    fn sub(self, o: Matrix2) -> Matrix2 {
        self + (-o)
    }
}

impl Neg for Matrix2 {
    type Output = Matrix2;
    fn neg(self) -> Matrix2 {
        self.scale(-1.0)
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    #[inline]
    fn mul(self, o: Matrix2) -> Matrix2 {
        let (a, b) = (self.m, o.m);
        Matrix2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<Vector2> for Matrix2 {
    type Output = Vector2;
    #[inline]
    fn mul(self, v: Vector2) -> Vector2 {
        self.apply(v)
    }
}
