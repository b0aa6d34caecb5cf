//! Convex polygons and halfspace clipping.

use super::{Point, EPS};
use crate::{Error, Result};

/// The closed halfspace of points at least as close to `p` as to `o`,
/// i.e. `{ q : ||q - p|| <= ||q - o|| }`. Its boundary is the perpendicular
/// bisector of segment `[p, o]`.
#[derive(Debug, Clone, Copy)]
pub struct Halfspace {
    pub p: Point,
    pub o: Point,
}

impl Halfspace {
    pub fn new(p: Point, o: Point) -> Self {
        debug_assert!(p.dist(o) > EPS, "halfspace requires distinct sites");
        Halfspace { p, o }
    }

    /// Signed value, negative inside (closer to `p`), zero on the bisector.
    /// Linear in `q`, which keeps clip intersections exact.
    #[inline]
    pub fn signed(&self, q: Point) -> f64 {
        let d = self.o - self.p;
        2.0 * q.dot(d) - (self.o.norm_sq() - self.p.norm_sq())
    }

    pub fn contains(&self, q: Point) -> bool {
        self.signed(q) <= EPS * (1.0 + self.p.dist(self.o))
    }
}

/// A convex polygon with counter-clockwise vertices, or the empty polygon
/// (no vertices). Near-duplicate and collinear vertices are merged with a
/// 1e-9 m tolerance so that cascades of clips stay clean.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    /// Builds a polygon from vertices, validating convexity and orientation.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("non-finite polygon vertex".into()));
        }
        let poly = ConvexPolygon::from_raw(vertices);
        if poly.vertices.len() < 3 {
            return Err(Error::InvalidConfig(
                "polygon needs at least 3 non-collinear vertices".into(),
            ));
        }
        let n = poly.vertices.len();
        for i in 0..n {
            let a = poly.vertices[i];
            let b = poly.vertices[(i + 1) % n];
            let c = poly.vertices[(i + 2) % n];
            if (b - a).cross(c - b) <= 0.0 {
                return Err(Error::InvalidConfig(
                    "polygon vertices must be strictly convex counter-clockwise".into(),
                ));
            }
        }
        Ok(poly)
    }

    /// Internal constructor used by clipping: cleans up near-duplicate and
    /// collinear vertices but trusts convexity/orientation.
    fn from_raw(vertices: Vec<Point>) -> Self {
        let mut poly = ConvexPolygon { vertices };
        poly.merge_degenerate_vertices();
        poly
    }

    pub fn empty() -> Self {
        ConvexPolygon {
            vertices: Vec::new(),
        }
    }

    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        ConvexPolygon::new(vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    /// Shoelace area (non-negative for the CCW polygons we construct).
    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return 0.0;
        }
        let mut sum = 0.0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            sum += a.cross(b);
        }
        0.5 * sum
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| self.vertices[i].dist(self.vertices[(i + 1) % n]))
            .sum()
    }

    /// Max pairwise vertex distance; for a convex polygon this is the
    /// diameter of the whole set.
    pub fn diameter(&self) -> f64 {
        let mut best: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                best = best.max(a.dist(*b));
            }
        }
        best
    }

    /// `(min, max)` corners of the bounding box. Empty polygon -> zero box.
    pub fn bounding_box(&self) -> (Point, Point) {
        if self.vertices.is_empty() {
            return (Point::default(), Point::default());
        }
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        (lo, hi)
    }

    /// Closed membership test with tolerance `tol` (meters).
    pub fn contains_with_tol(&self, q: Point, tol: f64) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let e = b - a;
            let len = e.norm().max(EPS);
            if e.cross(q - a) < -tol * len {
                return false;
            }
        }
        true
    }

    pub fn contains(&self, q: Point) -> bool {
        self.contains_with_tol(q, EPS)
    }

    /// Clips against a halfspace; the result stays convex and may be empty.
    pub fn clip(&self, hs: &Halfspace) -> ConvexPolygon {
        let n = self.vertices.len();
        if n < 3 {
            return ConvexPolygon::empty();
        }
        // Tolerance on the (linear) signed value so that vertices sitting on
        // the bisector are kept rather than jittered across clips.
        let tol = EPS * (1.0 + hs.p.dist(hs.o));
        let mut out = Vec::with_capacity(n + 2);
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let sa = hs.signed(a);
            let sb = hs.signed(b);
            let a_in = sa <= tol;
            if a_in {
                out.push(a);
            }
            if (sa > tol && sb < -tol) || (sa < -tol && sb > tol) {
                let t = sa / (sa - sb);
                out.push(a + (b - a) * t);
            }
        }
        ConvexPolygon::from_raw(out)
    }

    /// Intersection of two convex polygons (clip by every bisector-free edge
    /// halfplane of `other`). Used by tests and rendering, not hot paths.
    pub fn intersect(&self, other: &ConvexPolygon) -> ConvexPolygon {
        let n = other.vertices.len();
        if n < 3 || self.is_empty() {
            return ConvexPolygon::empty();
        }
        let mut cur = self.vertices.clone();
        for i in 0..n {
            let a = other.vertices[i];
            let b = other.vertices[(i + 1) % n];
            let e = b - a;
            let mut out = Vec::with_capacity(cur.len() + 2);
            let m = cur.len();
            if m == 0 {
                break;
            }
            for j in 0..m {
                let p0 = cur[j];
                let p1 = cur[(j + 1) % m];
                let s0 = e.cross(p0 - a);
                let s1 = e.cross(p1 - a);
                let in0 = s0 >= -EPS;
                let in1 = s1 >= -EPS;
                if in0 {
                    out.push(p0);
                }
                if (in0 && s1 < -EPS && s0 > EPS) || (!in0 && in1 && s1 > EPS) {
                    let t = s0 / (s0 - s1);
                    out.push(p0 + (p1 - p0) * t);
                }
            }
            cur = out;
        }
        ConvexPolygon::from_raw(cur)
    }

    /// Merges vertices closer than 1e-9 m and drops collinear ones (deviation
    /// below 1e-9 m from the neighboring edge).
    fn merge_degenerate_vertices(&mut self) {
        // Drop near-duplicates first.
        let mut dedup: Vec<Point> = Vec::with_capacity(self.vertices.len());
        for &v in &self.vertices {
            if dedup.last().is_none_or(|&u| u.dist(v) > EPS) {
                dedup.push(v);
            }
        }
        while dedup.len() >= 2 && dedup[0].dist(*dedup.last().unwrap()) <= EPS {
            dedup.pop();
        }
        if dedup.len() < 3 {
            self.vertices = Vec::new();
            return;
        }
        // Drop collinear vertices one at a time, re-evaluating neighbors
        // after every removal: two near-coincident vertices can each look
        // collinear against neighbors that include the other, and removing
        // both at once would delete a real corner.
        loop {
            let n = dedup.len();
            if n < 3 {
                dedup.clear();
                break;
            }
            let mut removed = false;
            for i in 0..n {
                let a = dedup[(i + n - 1) % n];
                let b = dedup[i];
                let c = dedup[(i + 1) % n];
                let chord = (c - a).norm();
                // Perpendicular deviation of b from segment a-c.
                if chord <= EPS || (c - a).cross(b - a).abs() <= EPS * chord {
                    dedup.remove(i);
                    removed = true;
                    break;
                }
            }
            if !removed {
                break;
            }
        }
        self.vertices = if dedup.len() < 3 { Vec::new() } else { dedup };
    }
}
