//! Shared helpers for integration tests: seeded random geometry and a
//! convex-hull constructor independent of the library's polygon code.

use kcoverage::geometry::{ConvexPolygon, Point};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_point_in_box(r: &mut ChaCha8Rng, lo: Point, hi: Point) -> Point {
    Point::new(r.gen_range(lo.x..hi.x), r.gen_range(lo.y..hi.y))
}

/// Distinct random sites in a box, in a way that keeps pairwise distances
/// comfortably above the library's coincidence threshold.
pub fn random_sites(r: &mut ChaCha8Rng, n: usize, lo: Point, hi: Point) -> Vec<Point> {
    let mut sites: Vec<Point> = Vec::with_capacity(n);
    while sites.len() < n {
        let p = random_point_in_box(r, lo, hi);
        if sites.iter().all(|s| s.dist(p) > 1e-3) {
            sites.push(p);
        }
    }
    sites
}

/// Andrew's monotone chain, returning a CCW hull. Test-side oracle helper,
/// intentionally separate from the library's clipping machinery.
pub fn convex_hull(mut pts: Vec<Point>) -> Vec<Point> {
    pts.sort_by(|a, b| {
        a.x.partial_cmp(&b.x)
            .unwrap()
            .then(a.y.partial_cmp(&b.y).unwrap())
    });
    pts.dedup_by(|a, b| a.dist(*b) < 1e-12);
    let n = pts.len();
    if n < 3 {
        return pts;
    }
    let cross = |o: Point, a: Point, b: Point| (a - o).cross(b - o);
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// A random convex polygon with a guaranteed-positive area.
pub fn random_convex_polygon(r: &mut ChaCha8Rng, lo: Point, hi: Point) -> ConvexPolygon {
    loop {
        let pts: Vec<Point> = (0..12).map(|_| random_point_in_box(r, lo, hi)).collect();
        let hull = convex_hull(pts);
        if hull.len() >= 3 {
            if let Ok(poly) = ConvexPolygon::new(hull) {
                if poly.area() > 0.05 * (hi.x - lo.x) * (hi.y - lo.y) {
                    return poly;
                }
            }
        }
    }
}
