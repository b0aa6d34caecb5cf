//! Planar geometry: points, convex polygons, halfspace clipping, density
//! integration, grid regions, minimum enclosing circles, and the
//! to-ball-boundary motion map.
//!
//! Everything is double precision. Positional tolerances are 1e-9 m, far
//! below the motion scales of the simulator, so no exact predicates are
//! needed.

mod density;
mod grid;
mod mec;
mod polygon;

pub use density::{DensityField, GaussianComponent};
pub use grid::GridRegion;
pub use mec::min_enclosing_circle;
pub use polygon::{ConvexPolygon, Halfspace};

use std::ops::{Add, Mul, Sub};

/// Positional tolerance in meters for vertex merging and membership tests.
pub const EPS: f64 = 1e-9;

/// A point (or free vector) in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// 2-D cross product (signed parallelogram area).
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn dist_sq(self, other: Point) -> f64 {
        (self - other).norm_sq()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
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

/// A closed ball `{ q : ||q - center|| <= radius }`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedBall {
    pub center: Point,
    pub radius: f64,
}

impl ClosedBall {
    pub fn new(center: Point, radius: f64) -> Self {
        debug_assert!(radius >= 0.0);
        ClosedBall { center, radius }
    }

    pub fn contains(&self, q: Point) -> bool {
        q.dist(self.center) <= self.radius + EPS
    }

    /// Orthogonal projection of `q` onto the ball (identity for interior points).
    pub fn project(&self, q: Point) -> Point {
        let d = q.dist(self.center);
        if d <= self.radius {
            q
        } else {
            self.center + (q - self.center) * (self.radius / d)
        }
    }
}

/// To-ball-boundary map: move `p` at most `delta` toward `q`, stopping on the
/// boundary of the ball of radius `r` around `q`.
///
/// If the projection of `p` onto the ball is at least `delta` away, the
/// result is `p + delta * unit(q - p)`; otherwise it is the projection
/// itself. Degenerate `p == q` returns `p` (the target is already reached,
/// there is no direction to move in).
pub fn tbb(p: Point, delta: f64, q: Point, r: f64) -> Point {
    debug_assert!(delta >= 0.0 && r >= 0.0);
    let to_target = q - p;
    let dist = to_target.norm();
    if dist <= EPS {
        return p;
    }
    let ball = ClosedBall::new(q, r);
    let proj = ball.project(p);
    if p.dist(proj) >= delta {
        p + to_target * (delta / dist)
    } else {
        proj
    }
}
