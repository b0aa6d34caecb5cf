//! k-order Voronoi partitions and dominant cells.
//!
//! Exact cells come from iterated halfspace clipping against every
//! (member, non-member) bisector. Under positional uncertainty the guaranteed
//! and dual-guaranteed dominant cells have hyperbolic-arc boundaries, so they
//! are carried as conservative grid masks instead: the guaranteed mask
//! under-approximates and the dual-guaranteed mask over-approximates, which
//! is exactly the direction the `bnd` safety bound needs.

use crate::geometry::{
    min_enclosing_circle, ConvexPolygon, DensityField, GridRegion, Halfspace, Point,
};
use crate::{Error, Result};

/// Distance below which two sites are considered coincident.
const COINCIDENT_TOL: f64 = 1e-9;
/// Perturbation applied to the higher-id site of a coincident pair.
const PERTURB_STEP: f64 = 1e-7;

/// Sorted tuple of agent indices naming a k-order cell.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellIndex {
    ids: Vec<usize>,
}

impl CellIndex {
    /// Builds an index from agent ids; they are sorted and must be distinct.
    pub fn new(mut ids: Vec<usize>) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::InvalidConfig("empty cell index".into()));
        }
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig("repeated id in cell index".into()));
        }
        Ok(CellIndex { ids })
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn order(&self) -> usize {
        self.ids.len()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.ids.binary_search(&id).is_ok()
    }
}

impl std::fmt::Display for CellIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: Vec<String> = self.ids.iter().map(|i| i.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// A site whose true position is only known to lie in a closed ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertainSite {
    pub center: Point,
    pub radius: f64,
}

impl UncertainSite {
    pub fn exact(center: Point) -> Self {
        UncertainSite {
            center,
            radius: 0.0,
        }
    }
}

/// All C(n, k) k-order cells of a configuration, in lexicographic index
/// order. Cells with empty interiors are kept (as empty polygons).
#[derive(Debug, Clone)]
pub struct KOrderDiagram {
    k: usize,
    cells: Vec<(CellIndex, ConvexPolygon)>,
}

impl KOrderDiagram {
    pub fn order(&self) -> usize {
        self.k
    }

    pub fn cells(&self) -> &[(CellIndex, ConvexPolygon)] {
        &self.cells
    }

    pub fn cell(&self, index: &CellIndex) -> Option<&ConvexPolygon> {
        self.cells
            .binary_search_by(|(i, _)| i.cmp(index))
            .ok()
            .map(|pos| &self.cells[pos].1)
    }

    /// Sum of all cell areas (should equal the domain area).
    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|(_, c)| c.area()).sum()
    }

    /// The dominant cell of one agent: its nonempty constituent cells.
    pub fn dominant_cell(&self, agent: usize) -> DominantCell {
        let pieces = self
            .cells
            .iter()
            .filter(|(i, c)| i.contains(agent) && !c.is_empty())
            .map(|(_, c)| c.clone())
            .collect();
        DominantCell { agent, pieces }
    }
}

/// The region an agent helps cover: the union of its k-order cells. The
/// union may be non-convex, so it is stored as the list of convex pieces.
#[derive(Debug, Clone)]
pub struct DominantCell {
    pub agent: usize,
    pub pieces: Vec<ConvexPolygon>,
}

impl DominantCell {
    pub fn mass(&self, phi: &DensityField) -> f64 {
        self.pieces.iter().map(|p| p.mass(phi)).sum()
    }

    pub fn area(&self) -> f64 {
        self.pieces.iter().map(|p| p.area()).sum()
    }

    /// Mass-weighted combination of the piece centroids.
    pub fn centroid(&self, phi: &DensityField) -> Result<Point> {
        let mut mass = 0.0;
        let mut mx = 0.0;
        let mut my = 0.0;
        for piece in &self.pieces {
            let m = piece.mass(phi);
            if m <= 0.0 {
                continue;
            }
            let c = piece.centroid(phi)?;
            mass += m;
            mx += m * c.x;
            my += m * c.y;
        }
        if mass <= 0.0 {
            return Err(Error::DegenerateRegion);
        }
        Ok(Point::new(mx / mass, my / mass))
    }

    pub fn contains(&self, q: Point) -> bool {
        self.pieces.iter().any(|p| p.contains(q))
    }
}

/// Replaces coincident sites (within 1e-9 m) by shifting the higher-id site
/// 1e-7 m in +x, repeating until all pairs are separated. Bisectors between
/// coincident sites are undefined; this is a measure-zero event under random
/// initialization.
pub fn separate_sites(positions: &[Point]) -> Vec<Point> {
    let mut sites = positions.to_vec();
    loop {
        let mut clean = true;
        for i in 0..sites.len() {
            for j in (i + 1)..sites.len() {
                if sites[i].dist(sites[j]) <= COINCIDENT_TOL {
                    sites[j].x += PERTURB_STEP;
                    clean = false;
                }
            }
        }
        if clean {
            return sites;
        }
    }
}

/// Calls `f` on every strictly increasing k-subset of `0..n` (lexicographic)
/// until `f` returns true; returns whether any call did. `k = 0` yields the
/// single empty subset.
fn any_combination<F: FnMut(&[usize]) -> bool>(n: usize, k: usize, mut f: F) -> bool {
    if k > n {
        return false;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if f(&idx) {
            return true;
        }
        if k == 0 {
            return false;
        }
        // Advance to the next combination, right to left.
        let mut i = k;
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return false;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn for_each_combination<F: FnMut(&[usize])>(n: usize, k: usize, mut f: F) {
    any_combination(n, k, |c| {
        f(c);
        false
    });
}

fn cell_from_members(members: &[usize], sites: &[Point], domain: &ConvexPolygon) -> ConvexPolygon {
    let mut cell = domain.clone();
    for &i in members {
        for (j, &pj) in sites.iter().enumerate() {
            if members.contains(&j) {
                continue;
            }
            cell = cell.clip(&Halfspace::new(sites[i], pj));
            if cell.is_empty() {
                return ConvexPolygon::empty();
            }
        }
    }
    cell
}

/// The k-order cell of the agents in `index`: all points of the domain at
/// least as close to every member as to every non-member. Convex, possibly
/// empty. `k = n` returns the whole domain.
pub fn korder_cell(
    index: &CellIndex,
    positions: &[Point],
    domain: &ConvexPolygon,
) -> Result<ConvexPolygon> {
    let n = positions.len();
    if index.order() > n || index.ids().iter().any(|&i| i >= n) {
        return Err(Error::UnknownAgent(*index.ids().last().unwrap()));
    }
    let sites = separate_sites(positions);
    Ok(cell_from_members(index.ids(), &sites, domain))
}

/// All C(n, k) k-order cells.
pub fn korder_diagram(
    positions: &[Point],
    k: usize,
    domain: &ConvexPolygon,
) -> Result<KOrderDiagram> {
    let n = positions.len();
    if k == 0 || k > n {
        return Err(Error::InvalidConfig(format!(
            "order k = {k} must satisfy 1 <= k <= n = {n}"
        )));
    }
    let sites = separate_sites(positions);
    let mut cells = Vec::new();
    for_each_combination(n, k, |members| {
        let index = CellIndex {
            ids: members.to_vec(),
        };
        let cell = cell_from_members(members, &sites, domain);
        cells.push((index, cell));
    });
    Ok(KOrderDiagram { k, cells })
}

/// The dominant cell of `agent` without building the whole diagram: only the
/// C(n-1, k-1) cells containing the agent are constructed.
pub fn dominant_cell(
    agent: usize,
    positions: &[Point],
    k: usize,
    domain: &ConvexPolygon,
) -> Result<DominantCell> {
    let n = positions.len();
    if agent >= n {
        return Err(Error::UnknownAgent(agent));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidConfig(format!(
            "order k = {k} must satisfy 1 <= k <= n = {n}"
        )));
    }
    let sites = separate_sites(positions);
    let others: Vec<usize> = (0..n).filter(|&j| j != agent).collect();
    let mut pieces = Vec::new();
    let mut members = Vec::with_capacity(k);
    for_each_combination(others.len(), k - 1, |chosen| {
        members.clear();
        members.push(agent);
        members.extend(chosen.iter().map(|&c| others[c]));
        members.sort_unstable();
        let cell = cell_from_members(&members, &sites, domain);
        if !cell.is_empty() {
            pieces.push(cell);
        }
    });
    Ok(DominantCell { agent, pieces })
}

/// Sorts sites by distance to `q` (ties broken by lower id) and returns the
/// k nearest ids as a cell index. Test oracle for the clipped construction.
pub fn brute_force_classify(q: Point, positions: &[Point], k: usize) -> Result<CellIndex> {
    let n = positions.len();
    if k == 0 || k > n {
        return Err(Error::InvalidConfig(format!(
            "order k = {k} must satisfy 1 <= k <= n = {n}"
        )));
    }
    let sites = separate_sites(positions);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        q.dist_sq(sites[a])
            .partial_cmp(&q.dist_sq(sites[b]))
            .unwrap()
            .then(a.cmp(&b))
    });
    CellIndex::new(order[..k].to_vec())
}

/// Guaranteed and dual-guaranteed dominant cells of `sites[owner]`, computed
/// in one pass over a grid covering the domain bounding box.
///
/// A cell center `q` belongs to the guaranteed mask if there is a k-subset I
/// containing the owner with
/// `||q - p_i|| + r_i + m <= ||q - p_j|| - r_j - m` for every member i and
/// non-member j, with margin `m = h / sqrt(2)` (half the cell diagonal)
/// applied on both sides: any point of the cell can raise a member distance
/// by m and lower a non-member distance by m at once, so each side needs its
/// own margin for the whole cell to satisfy the un-margined inequality. The
/// dual mask uses `||q - p_i|| - r_i - m <= ||q - p_j|| + r_j + m`, the same
/// margins on the permissive side. Cell centers outside the domain are never
/// marked.
pub fn uncertain_dominant_cells(
    owner: usize,
    sites: &[UncertainSite],
    k: usize,
    domain: &ConvexPolygon,
    grid_res: usize,
) -> Result<(GridRegion, GridRegion)> {
    let uniform = DensityField::Uniform(1.0);
    let s = uncertain_cells_summary(owner, sites, k, domain, grid_res, &uniform)?;
    Ok((s.guaranteed, s.dual))
}

/// Masks plus every aggregate the motion/update laws need, accumulated in
/// the same grid pass: mass and first moment of the guaranteed mask, mass of
/// the dual mask, and the dual mask's hull corner candidates. This is the
/// hot path of the simulator; everything downstream (bnd, centroid) is then
/// cheap. The aggregates equal what `GridRegion::mass` / `centroid` /
/// `hull_corner_candidates` would return on the produced masks.
#[derive(Debug, Clone)]
pub(crate) struct MaskSummary {
    pub guaranteed: GridRegion,
    pub dual: GridRegion,
    pub g_mass: f64,
    pub g_mx: f64,
    pub g_my: f64,
    pub dual_mass: f64,
    pub dual_corners: Vec<Point>,
}

impl MaskSummary {
    pub fn g_centroid(&self) -> Option<Point> {
        (self.g_mass > 0.0).then(|| Point::new(self.g_mx / self.g_mass, self.g_my / self.g_mass))
    }

    /// Same bound as [`bnd`], from the fused aggregates.
    pub fn bound(&self) -> Result<f64> {
        if self.dual_corners.is_empty() || self.dual_mass <= 0.0 {
            return Err(Error::DegenerateDualCell);
        }
        let (_, cr) = min_enclosing_circle(&self.dual_corners)?;
        let ratio = (self.g_mass / self.dual_mass).clamp(0.0, 1.0);
        Ok(2.0 * cr * (1.0 - ratio))
    }
}

pub(crate) fn uncertain_cells_summary(
    owner: usize,
    sites: &[UncertainSite],
    k: usize,
    domain: &ConvexPolygon,
    grid_res: usize,
    phi: &DensityField,
) -> Result<MaskSummary> {
    let ns = sites.len();
    if owner >= ns {
        return Err(Error::UnknownAgent(owner));
    }
    if k == 0 || k > ns {
        return Err(Error::InvalidConfig(format!(
            "order k = {k} must satisfy 1 <= k <= site count = {ns}"
        )));
    }
    let mut guaranteed = GridRegion::covering(domain, grid_res);
    let mut dual = guaranteed.clone();
    let h = guaranteed.cell_size();
    let margin = h / std::f64::consts::SQRT_2;
    let (nx, ny) = (guaranteed.nx(), guaranteed.ny());
    let origin = guaranteed.origin();

    // Pre-enumerate every candidate subset (owner plus k-1 others) into one
    // flat buffer so the per-cell loop below stays allocation-free and
    // cache-friendly: ids[start..mid] are the members, ids[mid..end] the
    // complement.
    let others: Vec<usize> = (0..ns).filter(|&j| j != owner).collect();
    let mut plan_ids: Vec<u32> = Vec::new();
    let mut plan_spans: Vec<(u32, u32, u32)> = Vec::new();
    for_each_combination(others.len(), k - 1, |chosen| {
        let start = plan_ids.len() as u32;
        plan_ids.push(owner as u32);
        plan_ids.extend(chosen.iter().map(|&c| others[c] as u32));
        let mid = plan_ids.len() as u32;
        plan_ids.extend(
            others
                .iter()
                .enumerate()
                .filter(|(oi, _)| !chosen.contains(oi))
                .map(|(_, &j)| j as u32),
        );
        plan_spans.push((start, mid, plan_ids.len() as u32));
    });
    let cxs: Vec<f64> = (0..nx).map(|ix| origin.x + (ix as f64 + 0.5) * h).collect();
    let cell_area = h * h;
    // Row-major per-site cost rows: hi = d + r + m, lo = d - r - m. The
    // guaranteed rule compares member hi against complement lo; the dual
    // rule member lo against complement hi. Plans are evaluated with
    // elementwise max/min over whole rows so the inner loops vectorize.
    let mut hi_rows = vec![0.0f64; ns * nx];
    let mut lo_rows = vec![0.0f64; ns * nx];
    let mut acc_in = vec![0.0f64; nx];
    let mut acc_out = vec![0.0f64; nx];
    let mut g_row = vec![false; nx];
    let mut dg_row = vec![false; nx];

    let mut g_mass = 0.0;
    let mut g_mx = 0.0;
    let mut g_my = 0.0;
    let mut dual_mass = 0.0;
    let mut dual_corners = Vec::new();

    for iy in 0..ny {
        let cy = origin.y + (iy as f64 + 0.5) * h;
        let Some((x_lo, x_hi)) = domain_row_span(domain, cy) else {
            continue;
        };
        for (j, site) in sites.iter().enumerate() {
            let dy2 = (cy - site.center.y) * (cy - site.center.y);
            let sx = site.center.x;
            let slack = site.radius + margin;
            let hi = &mut hi_rows[j * nx..(j + 1) * nx];
            let lo = &mut lo_rows[j * nx..(j + 1) * nx];
            for ((h_val, l_val), &cx) in hi.iter_mut().zip(lo.iter_mut()).zip(cxs.iter()) {
                let dx = cx - sx;
                let d = (dx * dx + dy2).sqrt();
                *h_val = d + slack;
                *l_val = d - slack;
            }
        }
        g_row.iter_mut().for_each(|b| *b = false);
        dg_row.iter_mut().for_each(|b| *b = false);
        for &(start, mid, end) in &plan_spans {
            let members = &plan_ids[start as usize..mid as usize];
            let complement = &plan_ids[mid as usize..end as usize];
            if complement.is_empty() {
                // k equals the site count: no constraints, whole domain.
                g_row.iter_mut().for_each(|b| *b = true);
                dg_row.iter_mut().for_each(|b| *b = true);
                continue;
            }
            // Guaranteed: max member hi <= min complement lo.
            row_copy(&mut acc_in, &hi_rows, members[0] as usize, nx);
            for &j in &members[1..] {
                row_max(&mut acc_in, &hi_rows, j as usize, nx);
            }
            row_copy(&mut acc_out, &lo_rows, complement[0] as usize, nx);
            for &j in &complement[1..] {
                row_min(&mut acc_out, &lo_rows, j as usize, nx);
            }
            for ((g, a), b) in g_row.iter_mut().zip(acc_in.iter()).zip(acc_out.iter()) {
                *g |= a <= b;
            }
            // Dual: max member lo <= min complement hi. Any plan passing the
            // guaranteed rule passes this one too.
            row_copy(&mut acc_in, &lo_rows, members[0] as usize, nx);
            for &j in &members[1..] {
                row_max(&mut acc_in, &lo_rows, j as usize, nx);
            }
            row_copy(&mut acc_out, &hi_rows, complement[0] as usize, nx);
            for &j in &complement[1..] {
                row_min(&mut acc_out, &hi_rows, j as usize, nx);
            }
            for ((g, a), b) in dg_row.iter_mut().zip(acc_in.iter()).zip(acc_out.iter()) {
                *g |= a <= b;
            }
        }
        let mut dual_row: Option<(usize, usize)> = None;
        for ix in 0..nx {
            let cx = cxs[ix];
            if cx < x_lo || cx > x_hi || !dg_row[ix] {
                continue;
            }
            if g_row[ix] {
                guaranteed.set(ix, iy, true);
                let w = phi.eval(Point::new(cx, cy)) * cell_area;
                g_mass += w;
                g_mx += w * cx;
                g_my += w * cy;
            }
            dual.set(ix, iy, true);
            dual_mass += phi.eval(Point::new(cx, cy)) * cell_area;
            dual_row = Some(match dual_row {
                None => (ix, ix),
                Some((a, _)) => (a, ix),
            });
        }
        if let Some((a, b)) = dual_row {
            let y0 = origin.y + iy as f64 * h;
            let y1 = y0 + h;
            let x0 = origin.x + a as f64 * h;
            let x1 = origin.x + (b + 1) as f64 * h;
            dual_corners.push(Point::new(x0, y0));
            dual_corners.push(Point::new(x0, y1));
            dual_corners.push(Point::new(x1, y0));
            dual_corners.push(Point::new(x1, y1));
        }
    }
    Ok(MaskSummary {
        guaranteed,
        dual,
        g_mass,
        g_mx,
        g_my,
        dual_mass,
        dual_corners,
    })
}

#[inline]
fn row_copy(acc: &mut [f64], rows: &[f64], j: usize, nx: usize) {
    acc.copy_from_slice(&rows[j * nx..(j + 1) * nx]);
}

#[inline]
fn row_max(acc: &mut [f64], rows: &[f64], j: usize, nx: usize) {
    for (a, &v) in acc.iter_mut().zip(rows[j * nx..(j + 1) * nx].iter()) {
        *a = a.max(v);
    }
}

#[inline]
fn row_min(acc: &mut [f64], rows: &[f64], j: usize, nx: usize) {
    for (a, &v) in acc.iter_mut().zip(rows[j * nx..(j + 1) * nx].iter()) {
        *a = a.min(v);
    }
}

/// Horizontal span `[x_lo, x_hi]` of a convex polygon at height `y` (None if
/// the line misses the polygon).
fn domain_row_span(domain: &ConvexPolygon, y: f64) -> Option<(f64, f64)> {
    let verts = domain.vertices();
    let n = verts.len();
    if n < 3 {
        return None;
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        if (a.y - y) * (b.y - y) <= 0.0 && a.y != b.y {
            let t = (y - a.y) / (b.y - a.y);
            if (0.0..=1.0).contains(&t) {
                let x = a.x + t * (b.x - a.x);
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Guaranteed dominant cell of `sites[owner]` as a conservative
/// under-approximating grid mask.
pub fn guaranteed_dominant_cell(
    owner: usize,
    sites: &[UncertainSite],
    k: usize,
    domain: &ConvexPolygon,
    grid_res: usize,
) -> Result<GridRegion> {
    Ok(uncertain_dominant_cells(owner, sites, k, domain, grid_res)?.0)
}

/// Dual-guaranteed dominant cell as a conservative over-approximating mask.
pub fn dual_guaranteed_dominant_cell(
    owner: usize,
    sites: &[UncertainSite],
    k: usize,
    domain: &ConvexPolygon,
    grid_res: usize,
) -> Result<GridRegion> {
    Ok(uncertain_dominant_cells(owner, sites, k, domain, grid_res)?.1)
}

/// Uncertainty bound `2 * cr(dgW) * (1 - M(gW) / M(dgW))`. The circumradius
/// comes from the minimum enclosing circle of the dual mask's hull corners,
/// which over-approximates the true cell and therefore errs on the safe
/// (larger) side.
pub fn bnd(gw: &GridRegion, dgw: &GridRegion, phi: &DensityField) -> Result<f64> {
    let mass_dual = dgw.mass(phi);
    if dgw.is_empty() || mass_dual <= 0.0 {
        return Err(Error::DegenerateDualCell);
    }
    let mass_g = gw.mass(phi);
    let corners = dgw.hull_corner_candidates();
    let (_, cr) = min_enclosing_circle(&corners)?;
    let ratio = (mass_g / mass_dual).clamp(0.0, 1.0);
    Ok(2.0 * cr * (1.0 - ratio))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square50() -> ConvexPolygon {
        ConvexPolygon::rect(0.0, 0.0, 50.0, 50.0).unwrap()
    }

    fn uniform() -> DensityField {
        DensityField::uniform(1.0).unwrap()
    }

    #[test]
    fn cell_index_sorts_and_rejects_duplicates() {
        let i = CellIndex::new(vec![3, 1]).unwrap();
        assert_eq!(i.ids(), &[1, 3]);
        assert!(CellIndex::new(vec![2, 2]).is_err());
        assert!(CellIndex::new(vec![]).is_err());
    }

    #[test]
    fn two_sites_first_order_halfplane() {
        let s = ConvexPolygon::rect(0.0, 0.0, 4.0, 4.0).unwrap();
        let positions = [Point::new(1.0, 1.0), Point::new(3.0, 1.0)];
        let cell = korder_cell(&CellIndex::new(vec![0]).unwrap(), &positions, &s).unwrap();
        assert!((cell.area() - 8.0).abs() < 1e-9);
        let (lo, hi) = cell.bounding_box();
        assert!(lo.x.abs() < 1e-9 && (hi.x - 2.0).abs() < 1e-9);
        assert!((hi.y - 4.0).abs() < 1e-9);
    }

    #[test]
    fn k_equals_n_cell_is_domain() {
        let s = square50();
        let positions = [
            Point::new(10.0, 10.0),
            Point::new(30.0, 20.0),
            Point::new(20.0, 40.0),
        ];
        let idx = CellIndex::new(vec![0, 1, 2]).unwrap();
        let cell = korder_cell(&idx, &positions, &s).unwrap();
        assert!((cell.area() - s.area()).abs() < 1e-9);
    }

    #[test]
    fn diagram_partitions_the_domain() {
        let s = square50();
        let positions = [
            Point::new(5.0, 7.0),
            Point::new(42.0, 11.0),
            Point::new(25.0, 30.0),
            Point::new(12.0, 44.0),
            Point::new(38.0, 41.0),
        ];
        for k in 1..=3 {
            let d = korder_diagram(&positions, k, &s).unwrap();
            assert_eq!(d.cells().len(), binomial(5, k));
            let total = d.total_area();
            assert!(
                ((total - s.area()) / s.area()).abs() < 1e-9,
                "k={k} total {total}"
            );
        }
    }

    fn binomial(n: usize, k: usize) -> usize {
        (1..=k).fold(1, |acc, i| acc * (n - i + 1) / i)
    }

    #[test]
    fn collinear_sites_middle_shares_both_ends() {
        let s = square50();
        let positions = [
            Point::new(10.0, 25.0),
            Point::new(25.0, 25.0),
            Point::new(40.0, 25.0),
        ];
        let d = korder_diagram(&positions, 2, &s).unwrap();
        let c01 = d.cell(&CellIndex::new(vec![0, 1]).unwrap()).unwrap();
        let c12 = d.cell(&CellIndex::new(vec![1, 2]).unwrap()).unwrap();
        let c02 = d.cell(&CellIndex::new(vec![0, 2]).unwrap()).unwrap();
        assert!(c01.area() > 1.0);
        assert!(c12.area() > 1.0);
        assert!(c02.area() < 1e-9, "end agents share a measure-zero strip");
    }

    #[test]
    fn two_agents_k1_halfplanes_k2_whole() {
        let s = square50();
        let positions = [Point::new(10.0, 25.0), Point::new(40.0, 25.0)];
        let d1 = korder_diagram(&positions, 1, &s).unwrap();
        assert_eq!(d1.cells().len(), 2);
        for (_, c) in d1.cells() {
            assert!((c.area() - 1250.0).abs() < 1e-9);
        }
        let w1 = dominant_cell(0, &positions, 2, &s).unwrap();
        let w2 = dominant_cell(1, &positions, 2, &s).unwrap();
        assert!((w1.area() - 2500.0).abs() < 1e-9);
        assert!((w2.area() - 2500.0).abs() < 1e-9);
    }

    #[test]
    fn dominant_cell_k1_is_single_voronoi_cell() {
        let s = square50();
        let positions = [
            Point::new(5.0, 7.0),
            Point::new(42.0, 11.0),
            Point::new(25.0, 30.0),
        ];
        let w = dominant_cell(2, &positions, 1, &s).unwrap();
        assert_eq!(w.pieces.len(), 1);
        let d = korder_diagram(&positions, 1, &s).unwrap();
        let v = d.cell(&CellIndex::new(vec![2]).unwrap()).unwrap();
        assert!((w.area() - v.area()).abs() < 1e-9);
    }

    #[test]
    fn classify_trivial_cases() {
        let positions = [
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(3.0, 0.0),
        ];
        let i = brute_force_classify(Point::new(0.0, 0.0), &positions, 2).unwrap();
        assert_eq!(i.ids(), &[0, 1]);
        // Tie between the two sites: lower id wins.
        let tied = [Point::new(-1.0, 0.0), Point::new(1.0, 0.0)];
        let t = brute_force_classify(Point::new(0.0, 0.0), &tied, 1).unwrap();
        assert_eq!(t.ids(), &[0]);
    }

    #[test]
    fn coincident_sites_are_separated() {
        let p = Point::new(5.0, 5.0);
        let sites = separate_sites(&[p, p, p]);
        for i in 0..3 {
            for j in i + 1..3 {
                assert!(sites[i].dist(sites[j]) > COINCIDENT_TOL);
            }
        }
        // Lower id keeps its place.
        assert_eq!(sites[0], p);
    }

    #[test]
    fn guaranteed_empty_when_radii_cover_domain() {
        let s = square50();
        let diam = s.diameter();
        let sites = vec![
            UncertainSite::exact(Point::new(10.0, 10.0)),
            UncertainSite {
                center: Point::new(40.0, 40.0),
                radius: diam,
            },
            UncertainSite {
                center: Point::new(25.0, 10.0),
                radius: diam,
            },
        ];
        let (g, dg) = uncertain_dominant_cells(0, &sites, 1, &s, 64).unwrap();
        assert!(g.is_empty());
        // Dual mask covers the whole domain: the inequality is always
        // satisfiable when radii exceed the diameter.
        assert_eq!(dg.marked_count(), 64 * 64);
    }

    #[test]
    fn zero_radius_masks_bracket_exact_cell() {
        let s = square50();
        let positions = [
            Point::new(12.0, 14.0),
            Point::new(36.0, 20.0),
            Point::new(24.0, 40.0),
        ];
        let sites: Vec<UncertainSite> =
            positions.iter().map(|&p| UncertainSite::exact(p)).collect();
        let (g, dg) = uncertain_dominant_cells(0, &sites, 2, &s, 128).unwrap();
        assert!(g.is_subset_of(&dg));
        let w = dominant_cell(0, &positions, 2, &s).unwrap();
        // Guaranteed mask inside the true cell, dual mask containing it.
        let mut g_ok = true;
        g.for_each_marked(|c| g_ok &= w.contains(c));
        assert!(g_ok, "guaranteed mask must lie inside the dominant cell");
        let mut missing = 0usize;
        for iy in 0..dg.ny() {
            for ix in 0..dg.nx() {
                let c = dg.cell_center(ix, iy);
                if w.contains(c) && !dg.is_marked(ix, iy) {
                    missing += 1;
                }
            }
        }
        assert_eq!(missing, 0, "dual mask must cover the dominant cell");
    }

    #[test]
    fn guaranteed_corner_check_oracle() {
        // Every marked guaranteed cell's 4 corners satisfy the un-margined
        // inequality for some valid subset, brute-forced over all pairs.
        let s = square50();
        let sites = vec![
            UncertainSite::exact(Point::new(20.0, 22.0)),
            UncertainSite {
                center: Point::new(38.0, 15.0),
                radius: 1.0,
            },
            UncertainSite {
                center: Point::new(10.0, 40.0),
                radius: 1.0,
            },
            UncertainSite {
                center: Point::new(40.0, 42.0),
                radius: 1.0,
            },
        ];
        let k = 2;
        let (g, _) = uncertain_dominant_cells(0, &sites, k, &s, 64).unwrap();
        let h = g.cell_size();
        let mut violations = 0usize;
        for iy in 0..g.ny() {
            for ix in 0..g.nx() {
                if !g.is_marked(ix, iy) {
                    continue;
                }
                let c = g.cell_center(ix, iy);
                for (dx, dy) in [(-0.5, -0.5), (0.5, -0.5), (-0.5, 0.5), (0.5, 0.5)] {
                    let corner = Point::new(c.x + dx * h, c.y + dy * h);
                    let ok = any_combination(3, k - 1, |chosen| {
                        let others = [1usize, 2, 3];
                        let mut max_in = corner.dist(sites[0].center) + sites[0].radius;
                        for &c2 in chosen {
                            let j = others[c2];
                            max_in = max_in.max(corner.dist(sites[j].center) + sites[j].radius);
                        }
                        others.iter().enumerate().all(|(oi, &j)| {
                            chosen.contains(&oi)
                                || corner.dist(sites[j].center) - sites[j].radius >= max_in - 1e-9
                        })
                    });
                    if !ok {
                        violations += 1;
                    }
                }
            }
        }
        assert_eq!(violations, 0);
    }

    #[test]
    fn bnd_zero_radii_small_and_gw_empty_full() {
        let s = square50();
        let positions = [
            Point::new(12.0, 14.0),
            Point::new(36.0, 20.0),
            Point::new(24.0, 40.0),
            Point::new(40.0, 44.0),
        ];
        let sites: Vec<UncertainSite> =
            positions.iter().map(|&p| UncertainSite::exact(p)).collect();
        let (g, dg) = uncertain_dominant_cells(0, &sites, 2, &s, 256).unwrap();
        let b = bnd(&g, &dg, &uniform()).unwrap();
        let corners = dg.hull_corner_candidates();
        let (_, cr) = min_enclosing_circle(&corners).unwrap();
        let layer = 1.0 - g.mass(&uniform()) / dg.mass(&uniform());
        assert!((b - 2.0 * cr * layer).abs() < 1e-9);
        assert!(b >= 0.0);

        // Empty guaranteed mask: bnd = 2 cr.
        let mut empty_g = g.clone();
        for iy in 0..empty_g.ny() {
            for ix in 0..empty_g.nx() {
                empty_g.set(ix, iy, false);
            }
        }
        let b_full = bnd(&empty_g, &dg, &uniform()).unwrap();
        assert!((b_full - 2.0 * cr).abs() < 1e-12);
    }

    #[test]
    fn bnd_errors_on_empty_dual() {
        let s = square50();
        let g = GridRegion::covering(&s, 32);
        let dg = GridRegion::covering(&s, 32);
        assert_eq!(
            bnd(&g, &dg, &uniform()).unwrap_err(),
            Error::DegenerateDualCell
        );
    }

    #[test]
    fn combination_walker_counts() {
        let mut count = 0;
        for_each_combination(5, 2, |_| count += 1);
        assert_eq!(count, 10);
        let mut empty = 0;
        for_each_combination(4, 0, |c| {
            assert!(c.is_empty());
            empty += 1;
        });
        assert_eq!(empty, 1);
        assert!(!any_combination(3, 4, |_| true));
    }
}
