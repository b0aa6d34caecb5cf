//! Axis-aligned boolean grids over a domain bounding box. These carry the
//! conservative rasterizations of guaranteed / dual-guaranteed cells, whose
//! exact boundaries are hyperbolic arcs we never represent directly.

use super::{ConvexPolygon, Point};

/// A grid of square cells with a boolean mask. Cell `(ix, iy)` spans
/// `[origin + (ix*h, iy*h), origin + ((ix+1)*h, (iy+1)*h)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRegion {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    mask: Vec<bool>,
}

impl GridRegion {
    /// An all-unmarked grid; `cell > 0`, `nx * ny > 0`.
    pub fn new_empty(origin: Point, cell: f64, nx: usize, ny: usize) -> Self {
        assert!(cell > 0.0 && nx > 0 && ny > 0, "degenerate grid");
        GridRegion {
            origin,
            cell,
            nx,
            ny,
            mask: vec![false; nx * ny],
        }
    }

    /// Grid covering the bounding box of `domain` with `res` cells along the
    /// longer side (square cells).
    pub fn covering(domain: &ConvexPolygon, res: usize) -> Self {
        let (lo, hi) = domain.bounding_box();
        let w = hi.x - lo.x;
        let h = hi.y - lo.y;
        let cell = w.max(h) / res as f64;
        let nx = (w / cell).ceil().max(1.0) as usize;
        let ny = (h / cell).ceil().max(1.0) as usize;
        GridRegion::new_empty(lo, cell, nx, ny)
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn cell_center(&self, ix: usize, iy: usize) -> Point {
        Point::new(
            self.origin.x + (ix as f64 + 0.5) * self.cell,
            self.origin.y + (iy as f64 + 0.5) * self.cell,
        )
    }

    #[inline]
    pub fn is_marked(&self, ix: usize, iy: usize) -> bool {
        self.mask[iy * self.nx + ix]
    }

    #[inline]
    pub fn set(&mut self, ix: usize, iy: usize, value: bool) {
        self.mask[iy * self.nx + ix] = value;
    }

    /// Number of marked cells.
    pub fn marked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    /// Calls `f` with the center of every marked cell, row-major order.
    pub fn for_each_marked<F: FnMut(Point)>(&self, mut f: F) {
        for iy in 0..self.ny {
            let row = iy * self.nx;
            for ix in 0..self.nx {
                if self.mask[row + ix] {
                    f(self.cell_center(ix, iy));
                }
            }
        }
    }

    /// True if every marked cell of `self` is marked in `other`
    /// (grids must share geometry).
    pub fn is_subset_of(&self, other: &GridRegion) -> bool {
        assert!(self.same_geometry(other), "grid geometry mismatch");
        self.mask
            .iter()
            .zip(other.mask.iter())
            .all(|(&a, &b)| !a || b)
    }

    pub fn same_geometry(&self, other: &GridRegion) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && (self.cell - other.cell).abs() < 1e-12
            && self.origin.dist(other.origin) < 1e-12
    }

    /// Corner points sufficient to span the convex hull of the marked set:
    /// for each row, the four outer corners of its marked span. Every other
    /// marked-cell corner lies on a segment between these.
    pub fn hull_corner_candidates(&self) -> Vec<Point> {
        let mut pts = Vec::new();
        for iy in 0..self.ny {
            let row = iy * self.nx;
            let mut first = None;
            let mut last = None;
            for ix in 0..self.nx {
                if self.mask[row + ix] {
                    if first.is_none() {
                        first = Some(ix);
                    }
                    last = Some(ix);
                }
            }
            if let (Some(a), Some(b)) = (first, last) {
                let y0 = self.origin.y + iy as f64 * self.cell;
                let y1 = y0 + self.cell;
                let x0 = self.origin.x + a as f64 * self.cell;
                let x1 = self.origin.x + (b + 1) as f64 * self.cell;
                pts.push(Point::new(x0, y0));
                pts.push(Point::new(x0, y1));
                pts.push(Point::new(x1, y0));
                pts.push(Point::new(x1, y1));
            }
        }
        pts
    }
}
