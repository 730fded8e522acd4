//! Legendre dual of a max-affine function.
//!
//! For `u(x) = max_i (x . p_i + h_i)` the dual restricted to `conv(P)` is the
//! lower envelope of the lifted points `(p_i, -h_i)`. Each lower face is a
//! cell of the dual subdivision; its slope is the corresponding vertex of
//! the power diagram.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{convex_hull_indices, Point2, Polygon};
use crate::power_diagram::{check_distinct, SiteSet};

/// A cell of the dual subdivision where `w(y) = gradient . y + offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualFace {
    /// Counterclockwise indices into [`PlConvexFunction::points`].
    pub vertices: Vec<usize>,
    pub gradient: Point2,
    pub offset: f64,
}

/// Piecewise linear convex function on the hull of its lifted points.
#[derive(Clone, Debug)]
pub struct PlConvexFunction {
    points: Vec<Point2>,
    values: Vec<f64>,
    is_vertex: Vec<bool>,
    faces: Vec<DualFace>,
    hull: Polygon,
    eps: f64,
}

impl PlConvexFunction {
    /// Every lifted point, including ones that ended up above the envelope.
    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    /// Lifted values; at subdivision vertices these are the values of `w`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_vertex(&self, i: usize) -> bool {
        self.is_vertex[i]
    }

    /// `(point, value)` for every vertex of the subdivision.
    pub fn vertices(&self) -> impl Iterator<Item = (usize, Point2, f64)> + '_ {
        (0..self.points.len())
            .filter(|&i| self.is_vertex[i])
            .map(|i| (i, self.points[i], self.values[i]))
    }

    pub fn faces(&self) -> &[DualFace] {
        &self.faces
    }

    /// The convex hull of the points, where `w` is defined.
    pub fn domain(&self) -> &Polygon {
        &self.hull
    }

    /// `w(y)` as the maximum of the face planes. Meaningful on [`Self::domain`].
    pub fn eval(&self, y: Point2) -> f64 {
        self.faces
            .iter()
            .map(|f| f.gradient.dot(y) + f.offset)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the point at `p`, if any.
    pub fn find(&self, p: Point2) -> Option<usize> {
        self.points.iter().position(|q| q.dist(p) <= self.eps)
    }

    /// Index lists of the faces, as stored.
    pub fn cells(&self) -> Vec<Vec<usize>> {
        self.faces.iter().map(|f| f.vertices.clone()).collect()
    }
}

fn plane_through(q: [Point2; 3], z: [f64; 3]) -> Option<(Point2, f64)> {
    let (e1, e2) = (q[1] - q[0], q[2] - q[0]);
    let det = e1.cross(e2);
    if det == 0.0 {
        return None;
    }
    let (d1, d2) = (z[1] - z[0], z[2] - z[0]);
    let g = Point2::new((d1 * e2.y - d2 * e1.y) / det, (e1.x * d2 - e2.x * d1) / det);
    Some((g, z[0] - g.dot(q[0])))
}

/// Lower envelope of the lifts `(p_i, -h_i)`.
///
/// Every non-degenerate triple is tested against all other points, which is
/// cubic in the number of candidate planes but exact up to a relative height
/// tolerance; coplanar lower points are merged into one polygonal face. A
/// flat lift gives a single face covering the hull.
pub fn legendre_dual(sites: &SiteSet) -> Result<PlConvexFunction> {
    let points = sites.points().to_vec();
    let values: Vec<f64> = sites.heights().iter().map(|h| -h).collect();
    lower_envelope(points, values)
}

pub(crate) fn lower_envelope(points: Vec<Point2>, values: Vec<f64>) -> Result<PlConvexFunction> {
    let n = points.len();
    let hull_idx = convex_hull_indices(&points);
    if hull_idx.len() < 3 {
        return Err(Error::CollinearSites);
    }
    let hull = Polygon::from_ccw_unchecked(hull_idx.iter().map(|&i| points[i]).collect());
    let diam = hull.diameter();
    let eps = 1e-9 * diam;
    check_distinct(&points, eps)?;
    let zmin = values.iter().copied().fold(f64::INFINITY, f64::min);
    let zmax = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_det = 1e-12 * diam * diam;

    let mut faces: Vec<DualFace> = Vec::new();
    let mut seen: Vec<Vec<usize>> = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let q = [points[a], points[b], points[c]];
                if (q[1] - q[0]).cross(q[2] - q[0]).abs() <= min_det {
                    continue;
                }
                let Some((g, off)) = plane_through(q, [values[a], values[b], values[c]]) else {
                    continue;
                };
                let tol = 1e-10 * ((zmax - zmin) + diam * g.norm()) + f64::MIN_POSITIVE;
                let gap = |l: usize| values[l] - (g.dot(points[l]) + off);
                if (0..n).any(|l| gap(l) < -tol) {
                    continue;
                }
                let on: Vec<usize> = (0..n).filter(|&l| gap(l).abs() <= tol).collect();
                if seen.contains(&on) {
                    continue;
                }
                let local: Vec<Point2> = on.iter().map(|&l| points[l]).collect();
                let ring: Vec<usize> = convex_hull_indices(&local).into_iter().map(|i| on[i]).collect();
                let (gradient, offset) = best_plane(&ring, &points, &values).unwrap_or((g, off));
                seen.push(on);
                faces.push(DualFace {
                    vertices: ring,
                    gradient,
                    offset,
                });
            }
        }
    }
    let mut is_vertex = alloc::vec![false; n];
    for f in &faces {
        for &v in &f.vertices {
            is_vertex[v] = true;
        }
    }
    Ok(PlConvexFunction {
        points,
        values,
        is_vertex,
        faces,
        hull,
        eps,
    })
}

/// Plane through the largest triangle on a face ring.
fn best_plane(ring: &[usize], points: &[Point2], values: &[f64]) -> Option<(Point2, f64)> {
    let m = ring.len();
    let mut best = (0.0, [0usize; 3]);
    for i in 0..m {
        for j in i + 1..m {
            for l in j + 1..m {
                let (a, b, c) = (ring[i], ring[j], ring[l]);
                let area = (points[b] - points[a]).cross(points[c] - points[a]).abs();
                if area > best.0 {
                    best = (area, [a, b, c]);
                }
            }
        }
    }
    let [a, b, c] = best.1;
    if best.0 == 0.0 {
        return None;
    }
    plane_through([points[a], points[b], points[c]], [values[a], values[b], values[c]])
}

/// Area of the hull of the slopes of `w` on the faces around `vertex`.
pub fn discrete_hessian_det(w: &PlConvexFunction, vertex: Point2) -> Result<f64> {
    let i = w.find(vertex).ok_or(Error::NotAVertex)?;
    if !w.is_vertex(i) {
        return Err(Error::NotAVertex);
    }
    if w.domain().inset_distance(w.points[i]) <= w.eps {
        return Err(Error::BoundaryVertex);
    }
    let slopes: Vec<Point2> = w
        .faces
        .iter()
        .filter(|f| f.vertices.contains(&i))
        .map(|f| f.gradient)
        .collect();
    let ring = convex_hull_indices(&slopes);
    if ring.len() < 3 {
        return Ok(0.0);
    }
    Ok(Polygon::from_ccw_unchecked(ring.into_iter().map(|j| slopes[j]).collect()).area())
}
