//! Planar vector helpers on `[f64; 2]`.

use serde::{Deserialize, Serialize};

pub type Point = [f64; 2];

#[inline]
pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

/// Closed disk; used for the workspace, obstacles, regions and entity balls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Point,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Point, radius: f64) -> Self {
        Disk { center, radius }
    }

    /// True when the ball of radius `r` at `p` lies inside this disk.
    pub fn contains_ball(&self, p: Point, r: f64) -> bool {
        dist(p, self.center) + r <= self.radius
    }

    /// Signed gap between the boundaries of two disjoint disks.
    pub fn gap(&self, other: &Disk) -> f64 {
        dist(self.center, other.center) - self.radius - other.radius
    }
}

/// Row-major 2×2 matrix.
pub type Mat2 = [[f64; 2]; 2];

pub fn mat_vec(m: &Mat2, v: Point) -> Point {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// `mᵀ v`.
pub fn mat_t_vec(m: &Mat2, v: Point) -> Point {
    [m[0][0] * v[0] + m[1][0] * v[1], m[0][1] * v[0] + m[1][1] * v[1]]
}

pub fn det(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Solves `m y = v`; `None` when `m` is numerically singular.
pub fn solve(m: &Mat2, v: Point) -> Option<Point> {
    let d = det(m);
    let size = m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
    if !d.is_finite() || d.abs() <= 1e-300_f64.max(size * size * 1e-14) {
        return None;
    }
    Some([(m[1][1] * v[0] - m[0][1] * v[1]) / d, (m[0][0] * v[1] - m[1][0] * v[0]) / d])
}
