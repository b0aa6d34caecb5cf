//! Smallest enclosing circle of a point set, expected linear time.
//!
//! Incremental Welzl construction over a shuffled copy of the input. The
//! shuffle uses a fixed-seed generator so results are reproducible run to
//! run, which the simulator's determinism contract depends on.

use super::{Point, EPS};
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
struct Circle {
    center: Point,
    radius: f64,
}

impl Circle {
    fn invalid() -> Self {
        Circle {
            center: Point::default(),
            radius: -1.0,
        }
    }

    fn contains(&self, q: Point) -> bool {
        self.radius >= 0.0 && q.dist(self.center) <= self.radius * (1.0 + 1e-12) + 1e-12
    }
}

fn diameter_circle(a: Point, b: Point) -> Circle {
    let center = (a + b) * 0.5;
    Circle {
        center,
        radius: center.dist(a).max(center.dist(b)),
    }
}

fn circumcircle(a: Point, b: Point, c: Point) -> Circle {
    // Translate near the centroid for conditioning.
    let o = Point::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0);
    let (pa, pb, pc) = (a - o, b - o, c - o);
    let d = 2.0 * (pa.x * (pb.y - pc.y) + pb.x * (pc.y - pa.y) + pc.x * (pa.y - pb.y));
    if d.abs() < 1e-14 {
        return Circle::invalid();
    }
    let ux = (pa.norm_sq() * (pb.y - pc.y)
        + pb.norm_sq() * (pc.y - pa.y)
        + pc.norm_sq() * (pa.y - pb.y))
        / d;
    let uy = (pa.norm_sq() * (pc.x - pb.x)
        + pb.norm_sq() * (pa.x - pc.x)
        + pc.norm_sq() * (pb.x - pa.x))
        / d;
    let center = Point::new(ux, uy) + o;
    Circle {
        center,
        radius: center.dist(a).max(center.dist(b)).max(center.dist(c)),
    }
}

fn circle_two_fixed(points: &[Point], p: Point, q: Point) -> Circle {
    let circ = diameter_circle(p, q);
    let mut left = Circle::invalid();
    let mut right = Circle::invalid();
    let pq = q - p;
    for &r in points {
        if circ.contains(r) {
            continue;
        }
        let cross = pq.cross(r - p);
        let c = circumcircle(p, q, r);
        if c.radius < 0.0 {
            continue;
        }
        let side = pq.cross(c.center - p);
        if cross > 0.0 && (left.radius < 0.0 || side > pq.cross(left.center - p)) {
            left = c;
        } else if cross < 0.0 && (right.radius < 0.0 || side < pq.cross(right.center - p)) {
            right = c;
        }
    }
    match (left.radius >= 0.0, right.radius >= 0.0) {
        (false, false) => circ,
        (true, false) => left,
        (false, true) => right,
        (true, true) => {
            if left.radius <= right.radius {
                left
            } else {
                right
            }
        }
    }
}

fn circle_one_fixed(points: &[Point], p: Point) -> Circle {
    let mut c = Circle {
        center: p,
        radius: 0.0,
    };
    for (i, &q) in points.iter().enumerate() {
        if !c.contains(q) {
            c = if c.radius <= EPS {
                diameter_circle(p, q)
            } else {
                circle_two_fixed(&points[..=i], p, q)
            };
        }
    }
    c
}

/// Smallest circle containing all points. Errors on an empty input; a single
/// point yields radius 0.
pub fn min_enclosing_circle(points: &[Point]) -> Result<(Point, f64)> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let mut shuffled = points.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c12c ^ points.len() as u64);
    shuffled.shuffle(&mut rng);

    let mut c = Circle::invalid();
    for (i, &p) in shuffled.iter().enumerate() {
        if c.radius < 0.0 || !c.contains(p) {
            c = circle_one_fixed(&shuffled[..=i], p);
        }
    }
    Ok((c.center, c.radius))
}
