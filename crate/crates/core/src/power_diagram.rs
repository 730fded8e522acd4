//! Power diagrams restricted to a convex domain.
//!
//! Cell `i` is the set where the affine function `x . p_i + h_i` attains the
//! maximum over all sites, intersected with the domain. Each cell is built
//! by clipping the domain against the `k - 1` half-planes
//! `x . (p_j - p_i) <= h_i - h_j`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{clip_labeled, merge_same_label, ClipOutcome, HalfPlane, Point2, Polygon, Segment, REL_EPS};

/// Sites `p_1..p_k` together with their heights `h_1..h_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteSet {
    points: Vec<Point2>,
    heights: Vec<f64>,
}

impl SiteSet {
    pub fn new(points: Vec<Point2>, heights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::LengthMismatch {
                what: "sites",
                expected: 1,
                found: 0,
            });
        }
        if points.len() != heights.len() {
            return Err(Error::LengthMismatch {
                what: "heights",
                expected: points.len(),
                found: heights.len(),
            });
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("site coordinates"));
        }
        if heights.iter().any(|h| !h.is_finite()) {
            return Err(Error::NonFinite("heights"));
        }
        Ok(SiteSet { points, heights })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn with_heights(&self, heights: Vec<f64>) -> Result<Self> {
        SiteSet::new(self.points.clone(), heights)
    }

    /// Value of the max-affine potential `max_i (x . p_i + h_i)`.
    pub fn potential(&self, x: Point2) -> f64 {
        self.points
            .iter()
            .zip(&self.heights)
            .map(|(p, h)| x.dot(*p) + h)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the site attaining the maximum at `x` (first one on ties).
    pub fn argmax(&self, x: Point2) -> usize {
        argmax_site(&self.points, &self.heights, x)
    }
}

pub fn argmax_site(points: &[Point2], heights: &[f64], x: Point2) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, (p, h)) in points.iter().zip(heights).enumerate() {
        let v = x.dot(*p) + h;
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    best
}

/// Rejects site sets with two points closer than `eps`.
pub fn check_distinct(points: &[Point2], eps: f64) -> Result<()> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].x.total_cmp(&points[b].x));
    for (n, &a) in order.iter().enumerate() {
        for &b in &order[n + 1..] {
            if points[b].x - points[a].x > eps {
                break;
            }
            if points[a].dist(points[b]) <= eps {
                return Err(Error::DuplicateSites(a.min(b), a.max(b)));
            }
        }
    }
    Ok(())
}

/// What produced a given side of a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeLabel {
    /// Side `e` of the clipping region.
    Region(usize),
    /// Bisector with site `j`.
    Site(usize),
}

/// Segment shared by the cells of sites `i` and `j`, with `i < j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagramEdge {
    pub i: usize,
    pub j: usize,
    pub segment: Segment,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerDiagram {
    /// One polygon per computed site; empty polygons keep indices aligned.
    pub cells: Vec<Polygon>,
    pub edges: Vec<DiagramEdge>,
    /// Per cell, the parts of its boundary lying on the clipping region.
    pub boundary_edges: Vec<Vec<Segment>>,
    labels: Vec<Vec<EdgeLabel>>,
    eps: f64,
}

impl PowerDiagram {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn areas(&self) -> Vec<f64> {
        self.cells.iter().map(Polygon::area).collect()
    }

    /// Edge labels of cell `i`, aligned with its vertices.
    pub fn labels(&self, i: usize) -> &[EdgeLabel] {
        &self.labels[i]
    }

    pub fn all_cells_nonempty(&self) -> bool {
        self.cells.iter().all(|c| !c.is_empty())
    }

    /// True when cell `i` touches the clipping region.
    pub fn touches_region(&self, i: usize) -> bool {
        self.labels[i].iter().any(|l| matches!(l, EdgeLabel::Region(_)))
    }

    /// Whether the nonempty cells among the first `n` form a connected
    /// adjacency graph.
    pub fn is_connected(&self, n: usize) -> bool {
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in &self.edges {
            if e.i < n && e.j < n {
                let (a, b) = (find(&mut parent, e.i), find(&mut parent, e.j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        let mut root = None;
        for i in 0..n.min(self.cells.len()) {
            if self.cells[i].is_empty() {
                continue;
            }
            let r = find(&mut parent, i);
            match root {
                None => root = Some(r),
                Some(r0) if r0 != r => return false,
                _ => {}
            }
        }
        true
    }
}

/// Power diagram of `sites` restricted to `omega`.
pub fn build_diagram(sites: &SiteSet, omega: &Polygon) -> Result<PowerDiagram> {
    if omega.is_empty() {
        return Err(Error::InvalidPolygon("empty domain"));
    }
    let eps = REL_EPS * omega.diameter();
    check_distinct(sites.points(), eps)?;
    Ok(build_cells(sites.points(), sites.heights(), omega, sites.len(), eps))
}

/// Cells of the first `n` sites clipped against all sites and the region.
/// Edges are reported for pairs `(i, j)` with `i < n`, `i < j`.
pub(crate) fn build_cells(points: &[Point2], heights: &[f64], region: &Polygon, n: usize, eps: f64) -> PowerDiagram {
    let compute = |i: usize| compute_cell(i, points, heights, region, eps);

    #[cfg(feature = "parallel")]
    let raw: Vec<(Vec<Point2>, Vec<EdgeLabel>)> = {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(compute).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let raw: Vec<(Vec<Point2>, Vec<EdgeLabel>)> = (0..n).map(compute).collect();

    let mut cells = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut edges = Vec::new();
    let mut boundary_edges = Vec::with_capacity(n);
    for (i, (v, l)) in raw.into_iter().enumerate() {
        let poly = Polygon::from_ccw_unchecked(v);
        let mut bnd = Vec::new();
        for (e, seg) in poly.edges().enumerate() {
            match l[e] {
                EdgeLabel::Region(_) => bnd.push(seg),
                EdgeLabel::Site(j) => {
                    if (j > i || j >= n) && seg.length() > eps {
                        edges.push(DiagramEdge { i, j, segment: seg });
                    }
                }
            }
        }
        cells.push(poly);
        labels.push(l);
        boundary_edges.push(bnd);
    }
    PowerDiagram {
        cells,
        edges,
        boundary_edges,
        labels,
        eps,
    }
}

fn compute_cell(
    i: usize,
    points: &[Point2],
    heights: &[f64],
    region: &Polygon,
    eps: f64,
) -> (Vec<Point2>, Vec<EdgeLabel>) {
    let mut v: Vec<Point2> = region.vertices().to_vec();
    let mut l: Vec<EdgeLabel> = (0..v.len()).map(EdgeLabel::Region).collect();
    let (pi, hi) = (points[i], heights[i]);
    for (j, (&pj, &hj)) in points.iter().zip(heights).enumerate() {
        if j == i {
            continue;
        }
        let hp = HalfPlane::new(pj - pi, hi - hj);
        match clip_labeled(&v, &l, &hp, EdgeLabel::Site(j), eps) {
            ClipOutcome::Unchanged => {}
            ClipOutcome::Empty => return (Vec::new(), Vec::new()),
            ClipOutcome::Clipped(nv, nl) => {
                v = nv;
                l = nl;
            }
        }
    }
    merge_same_label(&mut v, &mut l);
    (v, l)
}

/// Heights for a power diagram with power weights `w_i`:
/// `h_i = -(|p_i|^2 + w_i) / 2`.
pub fn heights_from_weights(points: &[Point2], weights: &[f64]) -> Vec<f64> {
    assert_eq!(points.len(), weights.len(), "length mismatch");
    points
        .iter()
        .zip(weights)
        .map(|(p, w)| -(p.norm_sq() + w) / 2.0)
        .collect()
}

/// Inverse of [`heights_from_weights`]: `w_i = -2 h_i - |p_i|^2`.
pub fn weights_from_heights(points: &[Point2], heights: &[f64]) -> Vec<f64> {
    assert_eq!(points.len(), heights.len(), "length mismatch");
    points
        .iter()
        .zip(heights)
        .map(|(p, h)| -2.0 * h - p.norm_sq())
        .collect()
}

/// Heights giving the ordinary Voronoi diagram (zero power weights).
pub fn voronoi_heights(points: &[Point2]) -> Vec<f64> {
    points.iter().map(|p| -0.5 * p.norm_sq()).collect()
}

/// Finds heights for which every cell meets `omega` in positive area.
///
/// The Voronoi heights are tried first. Otherwise the sites are ordered along
/// a generic direction so that each new site is extreme among those before
/// it; its height is lowered until every earlier cell keeps an interior
/// witness point with a fixed margin, and the new cell gets a witness far out
/// along the direction. The resulting diagram has nonempty cells in the whole
/// plane; scaling the heights about the centre of `omega` then pulls every
/// witness inside the domain.
pub fn feasible_heights(points: &[Point2], omega: &Polygon) -> Result<Vec<f64>> {
    if omega.is_empty() {
        return Err(Error::InvalidPolygon("empty domain"));
    }
    let eps = REL_EPS * omega.diameter();
    check_distinct(points, eps)?;
    let k = points.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    if k == 1 {
        return Ok(vec![0.0]);
    }
    let all_nonempty = |h: &[f64]| build_cells(points, h, omega, k, eps).all_cells_nonempty();

    let vor = voronoi_heights(points);
    if all_nonempty(&vor) {
        return Ok(vor);
    }

    let center = omega.centroid();
    let inradius = omega.inset_distance(center);
    if inradius <= 0.0 {
        return Err(Error::FeasibilityFailed);
    }
    let (order, dir) = extreme_order(points).ok_or(Error::FeasibilityFailed)?;
    let spread = points
        .iter()
        .flat_map(|a| points.iter().map(move |b| a.dist(*b)))
        .fold(0.0, f64::max);
    let margin = spread * inradius;

    // Heights and witnesses in coordinates centred at `center`.
    let mut local = vec![0.0; k];
    let mut witness = vec![Point2::ORIGIN; k];
    for (n, &s) in order.iter().enumerate().skip(1) {
        let ps = points[s];
        let placed = &order[..n];
        let t = placed
            .iter()
            .map(|&j| points[j].dot(witness[j]) + local[j] - ps.dot(witness[j]))
            .fold(f64::INFINITY, f64::min)
            - margin;
        local[s] = t;
        let reach = placed
            .iter()
            .map(|&j| (local[j] - t + margin) / (ps - points[j]).dot(dir))
            .fold(f64::NEG_INFINITY, f64::max);
        witness[s] = dir * reach;
    }

    // Each witness keeps a disc of radius margin / spread inside its cell.
    let guard = margin / spread;
    let far = witness.iter().map(|w| w.norm() + guard).fold(0.0, f64::max);
    let lambda_min = inradius / far;
    let to_global = |lambda: f64| -> Vec<f64> { (0..k).map(|i| lambda * local[i] - points[i].dot(center)).collect() };
    let mut lambda = 1.0_f64;
    while lambda > lambda_min {
        let h = to_global(lambda);
        if all_nonempty(&h) {
            return Ok(h);
        }
        lambda *= 0.5;
    }
    let h = to_global(lambda_min * (1.0 - 1e-9));
    if all_nonempty(&h) {
        Ok(h)
    } else {
        log::warn!("feasible start failed verification");
        Err(Error::FeasibilityFailed)
    }
}

/// Orders sites by their projection on a direction with pairwise distinct
/// projections, so every site lies outside the hull of those before it.
fn extreme_order(points: &[Point2]) -> Option<(Vec<usize>, Point2)> {
    let spread = points
        .iter()
        .map(|p| p.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    // Irrational-ish angles avoid axis-aligned ties.
    for step in 0..64 {
        let theta = 0.618_033_988_75 + 0.377_2 * step as f64;
        let dir = Point2::new(libm::cos(theta), libm::sin(theta));
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a].dot(dir).total_cmp(&points[b].dot(dir)));
        let gap = order
            .windows(2)
            .map(|w| (points[w[1]] - points[w[0]]).dot(dir))
            .fold(f64::INFINITY, f64::min);
        if gap > 1e-9 * spread {
            return Some((order, dir));
        }
    }
    None
}
