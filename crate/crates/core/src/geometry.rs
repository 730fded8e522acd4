//! Planar convex-polygon primitives: half-plane clipping, hulls, exact
//! polynomial moments.
//!
//! Polygons are stored counterclockwise. Clipping is Sutherland-Hodgman
//! against one half-plane at a time; the labelled variant carries a tag per
//! edge so callers can recover which constraint produced each side.

use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Relative tolerance used for collinearity and emptiness decisions.
pub const REL_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    #[inline]
    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    #[inline]
    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Counterclockwise rotation by a quarter turn.
    #[inline]
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    #[inline]
    pub fn lerp(self, o: Point2, t: f64) -> Point2 {
        Point2::new(self.x + t * (o.x - self.x), self.y + t * (o.y - self.y))
    }
}

impl Add for Point2 {
    type Output = Point2;
    #[inline]
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Point2 {
    #[inline]
    fn add_assign(&mut self, o: Point2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Point2 {
    type Output = Point2;
    #[inline]
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    #[inline]
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    #[inline]
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Div<f64> for Point2 {
    type Output = Point2;
    #[inline]
    fn div(self, s: f64) -> Point2 {
        Point2::new(self.x / s, self.y / s)
    }
}

/// The closed half-plane `{ x : normal . x <= offset }`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfPlane {
    pub normal: Point2,
    pub offset: f64,
}

impl HalfPlane {
    pub fn new(normal: Point2, offset: f64) -> Self {
        debug_assert!(normal.norm_sq() > 0.0, "half-plane normal must be nonzero");
        HalfPlane { normal, offset }
    }

    /// Positive outside, negative inside. Scaled by `|normal|`.
    #[inline]
    pub fn excess(&self, p: Point2) -> f64 {
        self.normal.dot(p) - self.offset
    }

    #[inline]
    pub fn contains(&self, p: Point2) -> bool {
        self.excess(p) <= 0.0
    }

    pub fn complement(&self) -> HalfPlane {
        HalfPlane::new(-self.normal, -self.offset)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
}

impl Segment {
    pub fn new(a: Point2, b: Point2) -> Self {
        Segment { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn midpoint(&self) -> Point2 {
        self.a.lerp(self.b, 0.5)
    }

    pub fn direction(&self) -> Point2 {
        self.b - self.a
    }
}

/// Convex polygon with counterclockwise vertices. Zero vertices means empty.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point2>,
}

impl Polygon {
    pub fn empty() -> Self {
        Polygon { vertices: Vec::new() }
    }

    /// Validates and normalizes a vertex loop: clockwise input is reversed,
    /// repeated consecutive vertices are dropped, and convexity is checked.
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("polygon vertices"));
        }
        let mut vertices = vertices;
        vertices.dedup();
        while vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::InvalidPolygon("fewer than three distinct vertices"));
        }
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        let poly = Polygon { vertices };
        let eps = REL_EPS * poly.diameter();
        if poly.area() <= eps * eps {
            return Err(Error::InvalidPolygon("zero area"));
        }
        if !poly.is_convex(eps) {
            return Err(Error::InvalidPolygon("not convex"));
        }
        Ok(poly)
    }

    /// Trusts the caller: counterclockwise, convex, no repeats.
    pub fn from_ccw_unchecked(vertices: Vec<Point2>) -> Self {
        Polygon { vertices }
    }

    pub fn rectangle(min: Point2, max: Point2) -> Self {
        Polygon {
            vertices: alloc::vec![min, Point2::new(max.x, min.y), max, Point2::new(min.x, max.y)],
        }
    }

    pub fn unit_square() -> Self {
        Self::rectangle(Point2::ORIGIN, Point2::new(1.0, 1.0))
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Point2> {
        self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| Segment::new(self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace area, zero for fewer than three vertices.
    pub fn area(&self) -> f64 {
        if self.vertices.len() < 3 {
            return 0.0;
        }
        signed_area(&self.vertices).max(0.0)
    }

    pub fn centroid(&self) -> Point2 {
        let m = self.moments(1);
        if m.get(0, 0) > 0.0 {
            Point2::new(m.get(1, 0) / m.get(0, 0), m.get(0, 1) / m.get(0, 0))
        } else if self.vertices.is_empty() {
            Point2::ORIGIN
        } else {
            let s = self.vertices.iter().fold(Point2::ORIGIN, |a, &b| a + b);
            s / self.vertices.len() as f64
        }
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(a.dist(*b));
            }
        }
        d
    }

    pub fn bounding_box(&self) -> (Point2, Point2) {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    /// Every turn is a left turn up to `eps` (scaled by edge lengths).
    pub fn is_convex(&self, eps: f64) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return true;
        }
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            let e1 = b - a;
            let e2 = c - b;
            e1.cross(e2) >= -eps * e1.norm().max(e2.norm())
        })
    }

    /// Membership with a tolerance measured as distance to the edge lines.
    pub fn contains(&self, p: Point2, eps: f64) -> bool {
        if self.is_empty() {
            return false;
        }
        self.edges().all(|e| {
            let d = e.direction();
            let len = d.norm();
            len == 0.0 || d.cross(p - e.a) >= -eps * len
        })
    }

    /// Distance from `p` to the nearest edge line, negative outside.
    pub fn inset_distance(&self, p: Point2) -> f64 {
        self.edges()
            .filter_map(|e| {
                let d = e.direction();
                let len = d.norm();
                (len > 0.0).then(|| d.cross(p - e.a) / len)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Intersection with a half-plane using the tolerance `REL_EPS * diameter`.
    pub fn clip(&self, hp: &HalfPlane) -> Polygon {
        self.clip_with_tolerance(hp, REL_EPS * self.diameter())
    }

    pub fn clip_with_tolerance(&self, hp: &HalfPlane, eps: f64) -> Polygon {
        let labels = alloc::vec![(); self.vertices.len()];
        match clip_labeled(&self.vertices, &labels, hp, (), eps) {
            ClipOutcome::Unchanged => self.clone(),
            ClipOutcome::Empty => Polygon::empty(),
            ClipOutcome::Clipped(v, _) => Polygon { vertices: v },
        }
    }

    pub fn translate(&self, t: Point2) -> Polygon {
        Polygon {
            vertices: self.vertices.iter().map(|&p| p + t).collect(),
        }
    }

    /// Exact moments `integral of x^a y^b` for `a + b <= degree` (degree at most 4).
    pub fn moments(&self, degree: usize) -> MomentTable {
        MomentTable::of(&self.vertices, degree)
    }

    /// Exact integral of a bivariate polynomial of total degree at most 4.
    pub fn integrate(&self, f: &Poly2) -> f64 {
        integrate_poly(&self.vertices, f)
    }
}

fn signed_area(v: &[Point2]) -> f64 {
    let n = v.len();
    if n < 3 {
        return 0.0;
    }
    let o = v[0];
    let mut s = 0.0;
    for i in 1..n - 1 {
        s += (v[i] - o).cross(v[i + 1] - o);
    }
    0.5 * s
}

pub(crate) enum ClipOutcome<L> {
    Unchanged,
    Empty,
    Clipped(Vec<Point2>, Vec<L>),
}

/// Sutherland-Hodgman against a single half-plane, tracking one label per
/// edge (`labels[i]` belongs to the edge `v[i] -> v[i+1]`). Edges created on
/// the clip line receive `new_label`. Vertices closer than `eps` are merged
/// and outputs with collapsed area are reported as empty.
pub(crate) fn clip_labeled<L: Copy + PartialEq>(
    v: &[Point2],
    labels: &[L],
    hp: &HalfPlane,
    new_label: L,
    eps: f64,
) -> ClipOutcome<L> {
    let n = v.len();
    if n < 3 {
        return ClipOutcome::Empty;
    }
    // Vertices within rounding distance of the line count as inside, so
    // clipping a polygon twice against the same half-plane is a no-op.
    let reach = v.iter().fold(0.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs()));
    let tau = 16.0 * f64::EPSILON * (hp.offset.abs() + hp.normal.norm() * reach);
    let s: Vec<f64> = v
        .iter()
        .map(|&p| {
            let e = hp.excess(p);
            if e <= tau {
                e.min(0.0)
            } else {
                e
            }
        })
        .collect();
    if s.iter().all(|&x| x <= 0.0) {
        return ClipOutcome::Unchanged;
    }
    if s.iter().all(|&x| x > 0.0) {
        return ClipOutcome::Empty;
    }
    let mut out_v = Vec::with_capacity(n + 1);
    let mut out_l = Vec::with_capacity(n + 1);
    for i in 0..n {
        let j = (i + 1) % n;
        let (a, b) = (v[i], v[j]);
        let (sa, sb) = (s[i], s[j]);
        let a_in = sa <= 0.0;
        let b_in = sb <= 0.0;
        match (a_in, b_in) {
            (true, true) => {
                out_v.push(a);
                out_l.push(labels[i]);
            }
            (true, false) => {
                out_v.push(a);
                out_l.push(labels[i]);
                let t = (sa / (sa - sb)).clamp(0.0, 1.0);
                out_v.push(a.lerp(b, t));
                out_l.push(new_label);
            }
            (false, true) => {
                let t = (sa / (sa - sb)).clamp(0.0, 1.0);
                out_v.push(a.lerp(b, t));
                out_l.push(labels[i]);
            }
            (false, false) => {}
        }
    }
    merge_close(&mut out_v, &mut out_l, eps);
    if out_v.len() < 3 || signed_area(&out_v) <= eps * eps {
        return ClipOutcome::Empty;
    }
    ClipOutcome::Clipped(out_v, out_l)
}

/// Drops every vertex whose outgoing edge is shorter than `eps`; the
/// surviving successor keeps its own outgoing label.
fn merge_close<L: Copy>(v: &mut Vec<Point2>, l: &mut Vec<L>, eps: f64) {
    let mut i = 0;
    while v.len() > 1 && i < v.len() {
        let j = (i + 1) % v.len();
        if v[i].dist(v[j]) <= eps {
            v.remove(i);
            l.remove(i);
            if i > 0 {
                i -= 1;
            }
        } else {
            i += 1;
        }
    }
}

/// Joins consecutive edges carrying the same label (they are collinear pieces
/// of one constraint line).
pub(crate) fn merge_same_label<L: Copy + PartialEq>(v: &mut Vec<Point2>, l: &mut Vec<L>) {
    let mut i = 0;
    while v.len() > 3 && i < v.len() {
        let prev = (i + v.len() - 1) % v.len();
        if l[prev] == l[i] {
            v.remove(i);
            l.remove(i);
            if i > 0 {
                i -= 1;
            }
        } else {
            i += 1;
        }
    }
}

/// Andrew's monotone chain. Collinear points are dropped; the result is
/// counterclockwise. Degenerate inputs give fewer than three vertices.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    convex_hull_indices(points).into_iter().map(|i| points[i]).collect()
}

/// Indices of the hull vertices, counterclockwise. Of several identical
/// points only the first index can appear.
pub fn convex_hull_indices(points: &[Point2]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| {
        let (p, q) = (points[a], points[b]);
        p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)).then(a.cmp(&b))
    });
    idx.dedup_by(|b, a| points[*a] == points[*b]);
    if idx.len() < 3 {
        return idx;
    }
    let turn = |o: usize, a: usize, b: usize| (points[a] - points[o]).cross(points[b] - points[o]);
    let mut hull: Vec<usize> = Vec::with_capacity(2 * idx.len());
    for &p in &idx {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in idx.iter().rev().skip(1) {
        while hull.len() >= lower_len && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Maximum supported total degree of [`Poly2`] and [`MomentTable`].
pub const MAX_DEGREE: usize = 4;
const N_COEFFS: usize = (MAX_DEGREE + 1) * (MAX_DEGREE + 2) / 2;

#[inline]
const fn mono_index(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

const FACT: [f64; 11] = [
    1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0, 5040.0, 40320.0, 362880.0, 3628800.0,
];

#[inline]
fn ipow(x: f64, n: usize) -> f64 {
    let mut r = 1.0;
    for _ in 0..n {
        r *= x;
    }
    r
}

#[inline]
fn binom(n: usize, k: usize) -> f64 {
    FACT[n] / (FACT[k] * FACT[n - k])
}

/// Bivariate polynomial of total degree at most [`MAX_DEGREE`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Poly2 {
    c: [f64; N_COEFFS],
    degree: usize,
}

impl Poly2 {
    pub fn zero() -> Self {
        Poly2 {
            c: [0.0; N_COEFFS],
            degree: 0,
        }
    }

    pub fn constant(v: f64) -> Self {
        let mut p = Self::zero();
        p.c[0] = v;
        p
    }

    /// `cx * x + cy * y + c0`
    pub fn linear(cx: f64, cy: f64, c0: f64) -> Self {
        let mut p = Self::constant(c0);
        p.set(1, 0, cx);
        p.set(0, 1, cy);
        p
    }

    pub fn monomial(a: usize, b: usize) -> Self {
        let mut p = Self::zero();
        p.set(a, b, 1.0);
        p
    }

    /// `|x - q|^2`
    pub fn squared_distance(q: Point2) -> Self {
        let mut p = Self::constant(q.norm_sq());
        p.set(1, 0, -2.0 * q.x);
        p.set(0, 1, -2.0 * q.y);
        p.set(2, 0, 1.0);
        p.set(0, 2, 1.0);
        p
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        if a + b > MAX_DEGREE {
            0.0
        } else {
            self.c[mono_index(a, b)]
        }
    }

    pub fn set(&mut self, a: usize, b: usize, v: f64) {
        assert!(a + b <= MAX_DEGREE, "polynomial degree exceeds {MAX_DEGREE}");
        self.c[mono_index(a, b)] = v;
        if v != 0.0 {
            self.degree = self.degree.max(a + b);
        }
    }

    pub fn eval(&self, p: Point2) -> f64 {
        let mut s = 0.0;
        for d in 0..=self.degree {
            for b in 0..=d {
                let a = d - b;
                let c = self.c[mono_index(a, b)];
                if c != 0.0 {
                    s += c * ipow(p.x, a) * ipow(p.y, b);
                }
            }
        }
        s
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.c.iter_mut().for_each(|c| *c *= s);
        out
    }

    pub fn add(&self, o: &Poly2) -> Self {
        let mut out = *self;
        for (c, d) in out.c.iter_mut().zip(o.c.iter()) {
            *c += d;
        }
        out.degree = self.degree.max(o.degree);
        out
    }

    /// Product; panics if the result would exceed [`MAX_DEGREE`].
    pub fn mul(&self, o: &Poly2) -> Self {
        assert!(
            self.degree + o.degree <= MAX_DEGREE,
            "polynomial product degree exceeds {MAX_DEGREE}"
        );
        let mut out = Self::zero();
        for d1 in 0..=self.degree {
            for b1 in 0..=d1 {
                let c1 = self.c[mono_index(d1 - b1, b1)];
                if c1 == 0.0 {
                    continue;
                }
                for d2 in 0..=o.degree {
                    for b2 in 0..=d2 {
                        let c2 = o.c[mono_index(d2 - b2, b2)];
                        if c2 != 0.0 {
                            let idx = mono_index(d1 - b1 + d2 - b2, b1 + b2);
                            out.c[idx] += c1 * c2;
                        }
                    }
                }
            }
        }
        out.degree = self.degree + o.degree;
        out
    }

    /// Returns `q` with `q(x) = self(x + r)`.
    pub fn shifted(&self, r: Point2) -> Self {
        let mut out = Self::zero();
        out.degree = self.degree;
        for d in 0..=self.degree {
            for b in 0..=d {
                let a = d - b;
                let c = self.c[mono_index(a, b)];
                if c == 0.0 {
                    continue;
                }
                for i in 0..=a {
                    let cx = binom(a, i) * ipow(r.x, a - i);
                    for j in 0..=b {
                        let cy = binom(b, j) * ipow(r.y, b - j);
                        out.c[mono_index(i, j)] += c * cx * cy;
                    }
                }
            }
        }
        out
    }
}

/// Table of exact monomial integrals over a polygon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentTable {
    m: [f64; N_COEFFS],
    degree: usize,
}

impl MomentTable {
    fn of(v: &[Point2], degree: usize) -> Self {
        assert!(degree <= MAX_DEGREE, "moment degree exceeds {MAX_DEGREE}");
        let mut m = [0.0; N_COEFFS];
        if v.len() >= 3 {
            for d in 0..=degree {
                for b in 0..=d {
                    m[mono_index(d - b, b)] = fan_monomial(v, Point2::ORIGIN, d - b, b);
                }
            }
        }
        MomentTable { m, degree }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `integral of x^a y^b dA`; panics when `a + b` exceeds the table degree.
    pub fn get(&self, a: usize, b: usize) -> f64 {
        assert!(a + b <= self.degree, "moment ({a},{b}) not in table");
        self.m[mono_index(a, b)]
    }
}

/// Integral of `x^a y^b` over the polygon, where coordinates are taken
/// relative to `origin`. Each edge contributes the closed-form integral over
/// the triangle it spans with the origin.
fn fan_monomial(v: &[Point2], origin: Point2, a: usize, b: usize) -> f64 {
    let n = v.len();
    let norm = FACT[a] * FACT[b] / FACT[a + b + 2];
    let mut total = 0.0;
    for k in 0..n {
        let p = v[k] - origin;
        let q = v[(k + 1) % n] - origin;
        let cr = p.cross(q);
        if cr == 0.0 {
            continue;
        }
        let mut s = 0.0;
        for i in 0..=a {
            let xi = ipow(p.x, i) * ipow(q.x, a - i);
            for j in 0..=b {
                let yj = ipow(p.y, j) * ipow(q.y, b - j);
                s += binom(i + j, i) * binom(a + b - i - j, a - i) * xi * yj;
            }
        }
        total += cr * s;
    }
    norm * total
}

/// Exact polygon integral of `f`, evaluated in coordinates centred on the
/// first vertex so that far-from-origin cells keep their precision.
pub(crate) fn integrate_poly(v: &[Point2], f: &Poly2) -> f64 {
    if v.len() < 3 {
        return 0.0;
    }
    let r = v[0];
    let g = f.shifted(r);
    let mut s = 0.0;
    for d in 0..=g.degree {
        for b in 0..=d {
            let c = g.c[mono_index(d - b, b)];
            if c != 0.0 {
                s += c * fan_monomial(v, r, d - b, b);
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn tri() -> Polygon {
        Polygon::new(alloc::vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0)
        ])
        .unwrap()
    }

    #[test]
    fn clip_bisects_square() {
        let sq = Polygon::unit_square();
        let half = sq.clip(&HalfPlane::new(Point2::new(1.0, 0.0), 0.5));
        assert_relative_eq!(half.area(), 0.5, epsilon = 1e-15);
        let (lo, hi) = half.bounding_box();
        assert_eq!((lo.x, lo.y, hi.x, hi.y), (0.0, 0.0, 0.5, 1.0));
    }

    #[test]
    fn clip_containment_and_disjoint() {
        let sq = Polygon::unit_square();
        assert_eq!(sq.clip(&HalfPlane::new(Point2::new(1.0, 0.0), 2.0)), sq);
        assert!(sq.clip(&HalfPlane::new(Point2::new(1.0, 0.0), -1.0)).is_empty());
        assert_eq!(sq.clip(&HalfPlane::new(Point2::new(1.0, 0.0), -1.0)).area(), 0.0);
    }

    #[test]
    fn clip_touching_corner_is_empty() {
        let sq = Polygon::unit_square();
        // Only the corner (0,0) satisfies x + y <= 0.
        let c = sq.clip(&HalfPlane::new(Point2::new(1.0, 1.0), 0.0));
        assert!(c.is_empty());
    }

    #[test]
    fn areas() {
        assert_eq!(Polygon::unit_square().area(), 1.0);
        assert_eq!(tri().area(), 0.5);
        assert_eq!(Polygon::empty().area(), 0.0);
    }

    #[test]
    fn moments_of_square_and_triangle() {
        let m = Polygon::unit_square().moments(2);
        assert_relative_eq!(m.get(1, 0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(m.get(2, 0), 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(m.get(1, 1), 0.25, epsilon = 1e-15);
        assert_relative_eq!(tri().moments(0).get(0, 0), 0.5, epsilon = 1e-15);
        // integral of x^2 y over the unit triangle = 1/60
        assert_relative_eq!(tri().moments(3).get(2, 1), 1.0 / 60.0, epsilon = 1e-15);
        // integral of x^4 over the unit square
        assert_relative_eq!(Polygon::unit_square().moments(4).get(4, 0), 0.2, epsilon = 1e-15);
    }

    #[test]
    fn polygon_new_fixes_orientation_and_rejects_nonconvex() {
        let cw = Polygon::new(alloc::vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0)
        ])
        .unwrap();
        assert!(signed_area(cw.vertices()) > 0.0);
        let dart = Polygon::new(alloc::vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(0.5, 0.5),
            Point2::new(0.0, 2.0)
        ]);
        assert_eq!(dart, Err(Error::InvalidPolygon("not convex")));
        assert!(Polygon::new(alloc::vec![Point2::ORIGIN, Point2::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn hull_drops_interior_and_collinear() {
        let pts = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.5, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
            Point2::new(0.5, 0.5),
        ];
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 4);
        assert_relative_eq!(Polygon::from_ccw_unchecked(h).area(), 1.0);
    }

    #[test]
    fn shifted_polynomial_matches_direct_evaluation() {
        let f = Poly2::squared_distance(Point2::new(0.3, -0.7)).mul(&Poly2::linear(2.0, -1.0, 0.5));
        let r = Point2::new(10.0, -3.0);
        let g = f.shifted(r);
        let x = Point2::new(0.25, 1.5);
        assert_relative_eq!(g.eval(x), f.eval(x + r), max_relative = 1e-12);
    }

    fn arb_convex() -> impl Strategy<Value = Polygon> {
        proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..12).prop_filter_map("degenerate hull", |pts| {
            let pts: Vec<Point2> = pts.into_iter().map(|(x, y)| Point2::new(x, y)).collect();
            let h = convex_hull(&pts);
            (h.len() >= 3)
                .then(|| Polygon::from_ccw_unchecked(h))
                .filter(|p| p.area() > 1e-3)
        })
    }

    fn arb_halfplane() -> impl Strategy<Value = HalfPlane> {
        (0.0f64..core::f64::consts::TAU, -4.0f64..4.0)
            .prop_map(|(t, o)| HalfPlane::new(Point2::new(libm::cos(t), libm::sin(t)), o))
    }

    proptest! {
        #[test]
        fn clip_splits_area(p in arb_convex(), hp in arb_halfplane()) {
            let a = p.clip(&hp).area();
            let b = p.clip(&hp.complement()).area();
            prop_assert!((a + b - p.area()).abs() <= 1e-12 * p.area().max(1.0));
        }

        #[test]
        fn clip_is_idempotent_and_convex(p in arb_convex(), hp in arb_halfplane()) {
            let once = p.clip(&hp);
            let twice = once.clip(&hp);
            prop_assert_eq!(once.len(), twice.len());
            for (a, b) in once.vertices().iter().zip(twice.vertices()) {
                prop_assert!(a.dist(*b) <= 1e-9 * p.diameter());
            }
            prop_assert!(once.is_convex(1e-9 * p.diameter()));
            prop_assert!(signed_area(once.vertices()) >= 0.0);
        }

        #[test]
        fn zeroth_moment_is_area(p in arb_convex()) {
            prop_assert!((p.moments(0).get(0, 0) - p.area()).abs() <= 1e-12 * p.area().max(1.0));
        }

        #[test]
        fn integrate_is_translation_consistent(p in arb_convex(), tx in -50.0f64..50.0, ty in -50.0f64..50.0) {
            let t = Point2::new(tx, ty);
            let f = Poly2::squared_distance(Point2::new(1.0, 2.0));
            let moved = p.translate(t);
            let a = p.integrate(&f);
            let b = moved.integrate(&f.shifted(-t));
            prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
        }
    }
}
