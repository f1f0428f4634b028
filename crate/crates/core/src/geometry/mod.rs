//! Exact planar convex geometry.
//!
//! Convex bodies are polygons with counter-clockwise vertices; measures on the
//! circle are finite sums of weighted unit normals. Everything here is
//! deterministic floating point with no mesh or iteration involved.

mod hausdorff;
mod measure;
mod minkowski;
mod polygon;
mod wulff;

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

pub use hausdorff::{hausdorff_distance, HausdorffResult};
pub use measure::{build_measure, hemisphere_check, DiscreteMeasure, NORMAL_MERGE_TOL};
pub use minkowski::minkowski_combine;
pub use polygon::{polygon_metrics, support_function, ConvexPolygon, Facet, PolygonMetrics};
pub use wulff::{clean_support_vector, wulff_shape, SupportVector};
pub(crate) use wulff::wulff_from_values;

/// Ambient dimension. Formulas that carry `n` in their exponents use this.
pub const DIM: usize = 2;

/// Homogeneity degree of torsional rigidity, `n + 2`.
pub const RIGIDITY_DEGREE: f64 = (DIM + 2) as f64;

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

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Rotation by -90 degrees; the outward normal direction of a CCW edge.
    pub fn perp_cw(self) -> Vec2 {
        Vec2::new(self.y, -self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
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

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        Vec2::new(self * v.x, self * v.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        s * self
    }
}

/// A direction on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 2]", try_from = "[f64; 2]")]
pub struct UnitVector(Vec2);

impl UnitVector {
    /// Normalizes `v`; `None` for zero or non-finite input.
    pub fn new(v: Vec2) -> Option<Self> {
        let n = v.norm();
        if !v.is_finite() || n == 0.0 || !n.is_finite() {
            return None;
        }
        Some(UnitVector(Vec2::new(v.x / n, v.y / n)))
    }

    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        UnitVector(Vec2::new(c, s))
    }

    pub fn e1() -> Self {
        UnitVector(Vec2::new(1.0, 0.0))
    }

    pub fn e2() -> Self {
        UnitVector(Vec2::new(0.0, 1.0))
    }

    pub fn x(self) -> f64 {
        self.0.x
    }

    pub fn y(self) -> f64 {
        self.0.y
    }

    pub fn vec(self) -> Vec2 {
        self.0
    }

    /// Angle in `[0, 2π)`.
    pub fn angle(self) -> f64 {
        let a = self.0.y.atan2(self.0.x);
        if a < 0.0 {
            a + 2.0 * PI
        } else {
            a
        }
    }

    /// Angle between the two directions, in `[0, π]`.
    pub fn angular_distance(self, o: UnitVector) -> f64 {
        self.0.cross(o.0).atan2(self.0.dot(o.0)).abs()
    }

    pub fn dot(self, v: Vec2) -> f64 {
        self.0.dot(v)
    }
}

impl From<UnitVector> for [f64; 2] {
    fn from(u: UnitVector) -> Self {
        [u.0.x, u.0.y]
    }
}

impl TryFrom<[f64; 2]> for UnitVector {
    type Error = String;
    fn try_from(v: [f64; 2]) -> Result<Self, String> {
        UnitVector::new(Vec2::new(v[0], v[1])).ok_or_else(|| format!("not a direction: {v:?}"))
    }
}

/// Wraps an angle into `[0, 2π)`.
pub(crate) fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r >= 2.0 * PI {
        0.0
    } else {
        r
    }
}
