//! Minimal 3-D point arithmetic for link geometry.

use serde::{Deserialize, Serialize};

use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Point3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Point3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn minus(self, other: Self) -> Self {
        Self::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Self) -> T {
        self.minus(other).norm()
    }
}

/// Spherical obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Sphere<T> {
    pub center: Point3<T>,
    pub radius: T,
}

/// Euclidean distance from `point` to the closed segment `[a, b]`.
pub fn segment_point_distance<T: Scalar>(a: Point3<T>, b: Point3<T>, point: Point3<T>) -> T {
    let ab = b.minus(a);
    let len_sq = ab.dot(ab);
    if len_sq <= T::zero() {
        return point.distance(a);
    }
    let t = (point.minus(a).dot(ab) / len_sq)
        .max(T::zero())
        .min(T::one());
    let closest = Point3::new(a.x + t * ab.x, a.y + t * ab.y, a.z + t * ab.z);
    point.distance(closest)
}
