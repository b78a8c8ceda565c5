//! Minimal 2D vector arithmetic shared by the mesh, tracking and assembly code.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// A point or vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Rotation by -90 degrees: (x, y) -> (y, -x).
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(self.y, -self.x)
    }

    #[inline]
    pub fn scale(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }

    #[inline]
    pub fn dist(self, other: Vec2) -> f64 {
        (self - other).norm()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        self.scale(s)
    }
}

/// Twice the signed area of the triangle (a, b, c); positive for
/// counter-clockwise orientation.
#[inline]
pub fn cross2(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Barycentric coordinates of `x` with respect to triangle (a, b, c).
///
/// Returns (l0, l1, l2) with l0 + l1 + l2 = 1; all three are non-negative
/// exactly when `x` lies in the closed triangle.
#[inline]
pub fn barycentric(a: Vec2, b: Vec2, c: Vec2, x: Vec2) -> (f64, f64, f64) {
    let area2 = cross2(a, b, c);
    let l1 = cross2(a, x, c) / area2;
    let l2 = cross2(a, b, x) / area2;
    (1.0 - l1 - l2, l1, l2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn barycentric_at_vertices_and_centroid() {
        let (a, b, c) = (Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(0.0, 1.0));
        let (l0, l1, l2) = barycentric(a, b, c, a);
        assert!((l0 - 1.0).abs() < 1e-15 && l1.abs() < 1e-15 && l2.abs() < 1e-15);
        let centroid = (a + b + c).scale(1.0 / 3.0);
        let (m0, m1, m2) = barycentric(a, b, c, centroid);
        assert!((m0 - 1.0 / 3.0).abs() < 1e-14);
        assert!((m1 - 1.0 / 3.0).abs() < 1e-14);
        assert!((m2 - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn perp_is_orthogonal_and_preserves_norm() {
        let v = Vec2::new(3.0, -4.0);
        assert_eq!(v.dot(v.perp()), 0.0);
        assert_eq!(v.perp().norm(), 5.0);
    }
}
