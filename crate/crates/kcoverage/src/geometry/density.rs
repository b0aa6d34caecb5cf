//! Density fields and integration of mass, first moments and polar moments
//! over convex polygons and grid regions.
//!
//! Uniform densities use closed-form polygon formulas (exact). Smooth
//! Gaussian mixtures use a fixed symmetric triangle quadrature rule on a fan
//! triangulation, with each fan triangle subdivided until its edges are small
//! relative to the narrowest mixture component.

use super::{ConvexPolygon, GridRegion, Point};
use crate::{Error, Result};

/// A Gaussian bump `weight * exp(-||q - mean||^2 / (2 sigma^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianComponent {
    pub mean: Point,
    pub sigma: f64,
    pub weight: f64,
}

/// The density `phi` over the domain: uniform or a Gaussian mixture.
/// Evaluates to a finite non-negative value everywhere.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityField {
    Uniform(f64),
    GaussianMixture(Vec<GaussianComponent>),
}

impl DensityField {
    pub fn uniform(value: f64) -> Result<Self> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::InvalidConfig("uniform density must be >= 0".into()));
        }
        Ok(DensityField::Uniform(value))
    }

    pub fn gaussian_mixture(components: Vec<GaussianComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidConfig("empty gaussian mixture".into()));
        }
        for c in &components {
            if !(c.sigma > 0.0 && c.weight > 0.0 && c.mean.is_finite()) {
                return Err(Error::InvalidConfig(
                    "gaussian component needs sigma > 0, weight > 0, finite mean".into(),
                ));
            }
        }
        Ok(DensityField::GaussianMixture(components))
    }

    #[inline]
    pub fn eval(&self, q: Point) -> f64 {
        match self {
            DensityField::Uniform(v) => *v,
            DensityField::GaussianMixture(cs) => cs
                .iter()
                .map(|c| c.weight * (-q.dist_sq(c.mean) / (2.0 * c.sigma * c.sigma)).exp())
                .sum(),
        }
    }

    /// Narrowest length scale of the field, used to pick quadrature
    /// subdivision depth. Uniform fields have no scale (returns None).
    fn min_scale(&self) -> Option<f64> {
        match self {
            DensityField::Uniform(_) => None,
            DensityField::GaussianMixture(cs) => cs
                .iter()
                .map(|c| c.sigma)
                .fold(None, |acc, s| Some(acc.map_or(s, |a: f64| a.min(s)))),
        }
    }
}

// Symmetric triangle quadrature rule (16 points, exact through degree 8).
// Weights are normalized to sum to one and applied as
// `area * sum(w_i * f(x_i))`. An all-positive rule is used so strongly
// peaked densities can never produce negative masses.
const QUAD_W_CENTER: f64 = 0.144315607677787;
const QUAD_3: [(f64, f64); 3] = [
    (0.095091634413923, 0.081414823414554),
    (0.103217370534718, 0.658861384496480),
    (0.032458497623198, 0.898905543365938),
];
const QUAD_6: (f64, f64, f64) = (0.027230314174435, 0.008394777409958, 0.263112829634638);

fn quadrature_points() -> Vec<(f64, f64, f64, f64)> {
    // (weight, l1, l2, l3) barycentric entries; normalized below.
    let mut pts = Vec::with_capacity(16);
    pts.push((QUAD_W_CENTER, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0));
    for &(w, a) in &QUAD_3 {
        let b = (1.0 - a) / 2.0;
        pts.push((w, a, b, b));
        pts.push((w, b, a, b));
        pts.push((w, b, b, a));
    }
    let (w, a, b) = QUAD_6;
    let c = 1.0 - a - b;
    for &(l1, l2, l3) in &[
        (a, b, c),
        (a, c, b),
        (b, a, c),
        (b, c, a),
        (c, a, b),
        (c, b, a),
    ] {
        pts.push((w, l1, l2, l3));
    }
    let total: f64 = pts.iter().map(|p| p.0).sum();
    for p in &mut pts {
        p.0 /= total;
    }
    pts
}

/// Accumulated zeroth/first moments of a region: mass and `integral of q phi`.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    mass: f64,
    mx: f64,
    my: f64,
}

/// Signed area of triangle (a, b, c).
fn tri_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * (b - a).cross(c - a)
}

/// Exact polar moment of a uniform-density triangle about `center`
/// (density 1; multiply by the density value outside).
fn tri_polar_uniform(a: Point, b: Point, c: Point, center: Point) -> f64 {
    let p1 = a - center;
    let p2 = b - center;
    let p3 = c - center;
    let area = tri_area(a, b, c);
    area / 6.0 * (p1.norm_sq() + p2.norm_sq() + p3.norm_sq() + p1.dot(p2) + p2.dot(p3) + p3.dot(p1))
}

/// Applies `f` at the rule points of triangle (a, b, c), subdividing to
/// `depth` levels of 4-way midpoint splits first.
fn integrate_triangle<F: FnMut(Point, f64)>(
    a: Point,
    b: Point,
    c: Point,
    depth: usize,
    rule: &[(f64, f64, f64, f64)],
    f: &mut F,
) {
    if depth == 0 {
        let area = tri_area(a, b, c);
        for &(w, l1, l2, l3) in rule {
            let q = Point::new(
                l1 * a.x + l2 * b.x + l3 * c.x,
                l1 * a.y + l2 * b.y + l3 * c.y,
            );
            f(q, w * area);
        }
        return;
    }
    let ab = (a + b) * 0.5;
    let bc = (b + c) * 0.5;
    let ca = (c + a) * 0.5;
    integrate_triangle(a, ab, ca, depth - 1, rule, f);
    integrate_triangle(ab, b, bc, depth - 1, rule, f);
    integrate_triangle(ca, bc, c, depth - 1, rule, f);
    integrate_triangle(ab, bc, ca, depth - 1, rule, f);
}

/// Subdivision depth so triangle edges shrink below ~0.6 of the narrowest
/// density scale. Capped to keep worst cases bounded.
fn subdivision_depth(longest_edge: f64, scale: Option<f64>) -> usize {
    match scale {
        None => 0,
        Some(s) => {
            let target = 0.6 * s;
            if longest_edge <= target {
                0
            } else {
                ((longest_edge / target).log2().ceil() as usize).min(7)
            }
        }
    }
}

/// Runs `f(point, weight)` over a quadrature of the polygon against `phi`'s
/// length scale. Weights sum to the polygon area.
fn for_each_quad_point<F: FnMut(Point, f64)>(poly: &ConvexPolygon, phi: &DensityField, mut f: F) {
    let verts = poly.vertices();
    if verts.len() < 3 {
        return;
    }
    let rule = quadrature_points();
    let scale = phi.min_scale();
    let v0 = verts[0];
    for i in 1..verts.len() - 1 {
        let (a, b, c) = (v0, verts[i], verts[i + 1]);
        let longest = a.dist(b).max(b.dist(c)).max(c.dist(a));
        let depth = subdivision_depth(longest, scale);
        integrate_triangle(a, b, c, depth, &rule, &mut f);
    }
}

fn polygon_moments(poly: &ConvexPolygon, phi: &DensityField) -> Moments {
    match phi {
        DensityField::Uniform(v) => {
            // Closed form: shoelace area and the standard polygon centroid.
            let verts = poly.vertices();
            let n = verts.len();
            if n < 3 {
                return Moments::default();
            }
            let mut area2 = 0.0;
            let mut cx = 0.0;
            let mut cy = 0.0;
            for i in 0..n {
                let a = verts[i];
                let b = verts[(i + 1) % n];
                let cr = a.cross(b);
                area2 += cr;
                cx += (a.x + b.x) * cr;
                cy += (a.y + b.y) * cr;
            }
            let area = 0.5 * area2;
            Moments {
                mass: v * area,
                mx: v * cx / 6.0,
                my: v * cy / 6.0,
            }
        }
        DensityField::GaussianMixture(_) => {
            let mut m = Moments::default();
            for_each_quad_point(poly, phi, |q, w| {
                let d = w * phi.eval(q);
                m.mass += d;
                m.mx += d * q.x;
                m.my += d * q.y;
            });
            m
        }
    }
}

impl ConvexPolygon {
    /// Integral of `phi` over the polygon. Empty polygons have mass 0.
    pub fn mass(&self, phi: &DensityField) -> f64 {
        polygon_moments(self, phi).mass.max(0.0)
    }

    /// Mass-weighted mean point. Errors on zero-mass regions.
    pub fn centroid(&self, phi: &DensityField) -> Result<Point> {
        let m = polygon_moments(self, phi);
        if m.mass <= 0.0 {
            return Err(Error::DegenerateRegion);
        }
        Ok(Point::new(m.mx / m.mass, m.my / m.mass))
    }

    /// `integral of ||q - center||^2 phi(q) dq` over the polygon.
    pub fn polar_moment(&self, center: Point, phi: &DensityField) -> f64 {
        match phi {
            DensityField::Uniform(v) => {
                let verts = self.vertices();
                if verts.len() < 3 {
                    return 0.0;
                }
                let v0 = verts[0];
                let mut total = 0.0;
                for i in 1..verts.len() - 1 {
                    total += tri_polar_uniform(v0, verts[i], verts[i + 1], center);
                }
                (v * total).max(0.0)
            }
            DensityField::GaussianMixture(_) => {
                let mut total = 0.0;
                for_each_quad_point(self, phi, |q, w| {
                    total += w * phi.eval(q) * q.dist_sq(center);
                });
                total.max(0.0)
            }
        }
    }
}

impl GridRegion {
    /// Sum over marked cells of `phi(cell center) * h^2`.
    pub fn mass(&self, phi: &DensityField) -> f64 {
        let h2 = self.cell_size() * self.cell_size();
        let mut total = 0.0;
        self.for_each_marked(|c| total += phi.eval(c) * h2);
        total
    }

    /// Mass-weighted mean of marked cell centers. Errors on zero mass.
    pub fn centroid(&self, phi: &DensityField) -> Result<Point> {
        let h2 = self.cell_size() * self.cell_size();
        let mut m = Moments::default();
        self.for_each_marked(|c| {
            let d = phi.eval(c) * h2;
            m.mass += d;
            m.mx += d * c.x;
            m.my += d * c.y;
        });
        if m.mass <= 0.0 {
            return Err(Error::DegenerateRegion);
        }
        Ok(Point::new(m.mx / m.mass, m.my / m.mass))
    }

    /// `sum ||c - center||^2 phi(c) h^2` over marked cell centers.
    pub fn polar_moment(&self, center: Point, phi: &DensityField) -> f64 {
        let h2 = self.cell_size() * self.cell_size();
        let mut total = 0.0;
        self.for_each_marked(|c| total += phi.eval(c) * h2 * c.dist_sq(center));
        total
    }
}
