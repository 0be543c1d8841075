//! Special Lipschitz domains `D = {y > h(x)}` with `supp h = [0, d]`.
//!
//! The boundary splits into the flat part `Γ₁` (`y = 0` outside `[0, d]`) and
//! the perturbed graph `Γ₂ = {(x, h(x)) : x ∈ [0, d]}` that carries the unknown
//! densities.

mod mesh;
mod mollify;
mod profile;

pub use mesh::{BoundaryMesh, MeshNode, MeshOptions, Panel};
pub use mollify::MollifiedFamily;
pub use profile::BoundaryProfile;

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("a profile needs at least two breakpoints, got {0}")]
    TooFewPoints(usize),
    #[error("breakpoint abscissae must be strictly increasing (index {0})")]
    NonMonotoneX(usize),
    #[error("profile height must vanish at both ends, got h = {0}")]
    NonZeroEndpoints(f64),
    #[error("profile must start at x = 0, got x = {0}")]
    NonZeroStart(f64),
    #[error("breakpoint {0} is not finite")]
    NonFinite(usize),
    #[error("mesh needs at least 4 panels and one per segment, got {0}")]
    TooFewPanels(usize),
    #[error("grading exponent must be >= 1, got {0}")]
    InvalidGrading(f64),
    #[error("at least one Gauss point per panel is required")]
    InvalidGaussOrder,
    #[error("rounding radius {radius} is too large for the shortest segment ({segment})")]
    RadiusTooLarge { radius: f64, segment: f64 },
    #[error("could not build an upward rounding at the corner x = {0}")]
    CornerTooSharp(f64),
}

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the planar cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Reflection across the line `y = 0`.
    pub fn mirror(self) -> Point {
        Point::new(self.x, -self.y)
    }

    pub fn normalized(self) -> Point {
        self * (1.0 / self.norm())
    }

    /// Rotation by `angle` radians counter-clockwise.
    pub fn rotated(self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Left-hand unit normal of a direction.
    pub fn left_normal(self) -> Point {
        Point::new(-self.y, self.x)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Distance from `p` to the segment `[a, b]`.
pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}
