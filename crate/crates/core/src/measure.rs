//! Densities on the domain and the integrals the energy needs.
//!
//! Uniform and affine densities are integrated exactly with polygon moments.
//! A grid density is the bilinear interpolant of its node values; each cell
//! is cut along the grid lines and every piece is integrated exactly, since
//! the density is a degree-2 polynomial on it.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{HalfPlane, Point2, Poly2, Polygon, Segment};
use crate::power_diagram::{PowerDiagram, SiteSet};

/// Bilinear density sampled on an `nx` by `ny` grid of nodes spanning
/// `[min.x, max.x] x [min.y, max.y]`. Values are row-major: node `(i, j)` is
/// `values[j * nx + i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDensity {
    nx: usize,
    ny: usize,
    min: Point2,
    max: Point2,
    values: Vec<f64>,
}

impl GridDensity {
    pub fn new(nx: usize, ny: usize, min: Point2, max: Point2, values: Vec<f64>) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidDensity("grid needs at least 2x2 nodes"));
        }
        if values.len() != nx * ny {
            return Err(Error::LengthMismatch {
                what: "grid values",
                expected: nx * ny,
                found: values.len(),
            });
        }
        if !(min.is_finite() && max.is_finite()) || max.x <= min.x || max.y <= min.y {
            return Err(Error::InvalidDensity("grid bounds are empty or non-finite"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid values"));
        }
        if values.iter().any(|&v| v <= 0.0) {
            return Err(Error::NonPositiveDensity);
        }
        Ok(GridDensity {
            nx,
            ny,
            min,
            max,
            values,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn bounds(&self) -> (Point2, Point2) {
        (self.min, self.max)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn spacing(&self) -> Point2 {
        Point2::new(
            (self.max.x - self.min.x) / (self.nx - 1) as f64,
            (self.max.y - self.min.y) / (self.ny - 1) as f64,
        )
    }

    fn node(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    fn node_pos(&self, i: usize, j: usize) -> Point2 {
        let d = self.spacing();
        Point2::new(self.min.x + i as f64 * d.x, self.min.y + j as f64 * d.y)
    }

    /// Grid cell containing `p`, clamped to the grid.
    fn locate(&self, p: Point2) -> (usize, usize) {
        let d = self.spacing();
        let fi = libm::floor((p.x - self.min.x) / d.x);
        let fj = libm::floor((p.y - self.min.y) / d.y);
        let i = (fi.max(0.0) as usize).min(self.nx - 2);
        let j = (fj.max(0.0) as usize).min(self.ny - 2);
        (i, j)
    }

    pub fn value(&self, p: Point2) -> f64 {
        let (i, j) = self.locate(p);
        self.cell_poly(i, j).eval(p)
    }

    /// The bilinear interpolant on grid cell `(i, j)` as a polynomial in x, y.
    fn cell_poly(&self, i: usize, j: usize) -> Poly2 {
        let d = self.spacing();
        let f00 = self.node(i, j);
        let f10 = self.node(i + 1, j);
        let f01 = self.node(i, j + 1);
        let f11 = self.node(i + 1, j + 1);
        let mut local = Poly2::linear((f10 - f00) / d.x, (f01 - f00) / d.y, f00);
        local.set(1, 1, (f00 - f10 - f01 + f11) / (d.x * d.y));
        local.shifted(-self.node_pos(i, j))
    }

    fn cell_rect(&self, i: usize, j: usize) -> [HalfPlane; 4] {
        let a = self.node_pos(i, j);
        let b = self.node_pos(i + 1, j + 1);
        [
            HalfPlane::new(Point2::new(-1.0, 0.0), -a.x),
            HalfPlane::new(Point2::new(1.0, 0.0), b.x),
            HalfPlane::new(Point2::new(0.0, -1.0), -a.y),
            HalfPlane::new(Point2::new(0.0, 1.0), b.y),
        ]
    }

    fn integrate(&self, poly: &Polygon, f: &Poly2) -> f64 {
        if poly.is_empty() {
            return 0.0;
        }
        let (lo, hi) = poly.bounding_box();
        let (i0, j0) = self.locate(lo);
        let (i1, j1) = self.locate(hi);
        let eps = 1e-12 * poly.diameter();
        let mut total = 0.0;
        for j in j0..=j1 {
            for i in i0..=i1 {
                let mut piece = poly.clone();
                for hp in self.cell_rect(i, j) {
                    piece = piece.clip_with_tolerance(&hp, eps);
                    if piece.is_empty() {
                        break;
                    }
                }
                if !piece.is_empty() {
                    total += piece.integrate(&f.mul(&self.cell_poly(i, j)));
                }
            }
        }
        total
    }

    fn line_integral(&self, seg: &Segment) -> f64 {
        let len = seg.length();
        if len == 0.0 {
            return 0.0;
        }
        let d = seg.direction();
        let sp = self.spacing();
        let mut ts = vec![0.0, 1.0];
        let mut cuts = |start: f64, delta: f64, step: f64, count: usize| {
            if delta == 0.0 {
                return;
            }
            for n in 0..count {
                let t = (n as f64 * step - start) / delta;
                if t > 0.0 && t < 1.0 {
                    ts.push(t);
                }
            }
        };
        cuts(seg.a.x - self.min.x, d.x, sp.x, self.nx);
        cuts(seg.a.y - self.min.y, d.y, sp.y, self.ny);
        ts.sort_by(f64::total_cmp);
        // Quadratic along each piece, so Simpson's rule is exact.
        let mut total = 0.0;
        for w in ts.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            if t1 <= t0 {
                continue;
            }
            let tm = 0.5 * (t0 + t1);
            let (i, j) = self.locate(seg.a.lerp(seg.b, tm));
            let p = self.cell_poly(i, j);
            let f0 = p.eval(seg.a.lerp(seg.b, t0));
            let fm = p.eval(seg.a.lerp(seg.b, tm));
            let f1 = p.eval(seg.a.lerp(seg.b, t1));
            total += (t1 - t0) * (f0 + 4.0 * fm + f1) / 6.0;
        }
        total * len
    }
}

/// The source density on the domain.
#[derive(Clone, Debug, PartialEq)]
pub enum Density {
    Uniform(f64),
    /// `a x + b y + c`
    Affine {
        a: f64,
        b: f64,
        c: f64,
    },
    Grid(GridDensity),
}

impl Default for Density {
    fn default() -> Self {
        Density::Uniform(1.0)
    }
}

impl Density {
    pub fn value(&self, p: Point2) -> f64 {
        match self {
            Density::Uniform(c) => *c,
            Density::Affine { a, b, c } => a * p.x + b * p.y + c,
            Density::Grid(g) => g.value(p),
        }
    }

    /// Checks strict positivity and finiteness on `omega`, and for grids that
    /// the grid covers `omega`.
    pub fn validate_on(&self, omega: &Polygon) -> Result<()> {
        match self {
            Density::Uniform(c) => {
                if !c.is_finite() {
                    return Err(Error::NonFinite("density"));
                }
                if *c <= 0.0 {
                    return Err(Error::NonPositiveDensity);
                }
            }
            Density::Affine { a, b, c } => {
                if !(a.is_finite() && b.is_finite() && c.is_finite()) {
                    return Err(Error::NonFinite("density"));
                }
                // Affine and positive at the vertices means positive on the hull.
                if omega.vertices().iter().any(|&v| self.value(v) <= 0.0) {
                    return Err(Error::NonPositiveDensity);
                }
            }
            Density::Grid(g) => {
                let (lo, hi) = omega.bounding_box();
                let slack = 1e-9 * omega.diameter();
                if lo.x < g.min.x - slack || lo.y < g.min.y - slack || hi.x > g.max.x + slack || hi.y > g.max.y + slack
                {
                    return Err(Error::InvalidDensity("grid does not cover the domain"));
                }
            }
        }
        Ok(())
    }

    /// Upper bound of the density on `omega`.
    pub fn max_on(&self, omega: &Polygon) -> f64 {
        match self {
            Density::Uniform(c) => *c,
            Density::Affine { .. } => omega
                .vertices()
                .iter()
                .map(|&v| self.value(v))
                .fold(f64::NEG_INFINITY, f64::max),
            Density::Grid(g) => g.values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// `integral over poly of f * sigma`.
    pub fn integrate(&self, poly: &Polygon, f: &Poly2) -> f64 {
        match self {
            Density::Uniform(c) => c * poly.integrate(f),
            Density::Affine { a, b, c } => poly.integrate(&f.mul(&Poly2::linear(*a, *b, *c))),
            Density::Grid(g) => g.integrate(poly, f),
        }
    }

    pub fn mass(&self, poly: &Polygon) -> f64 {
        self.integrate(poly, &Poly2::constant(1.0))
    }
}

/// Per-cell masses `w_i = integral of sigma over cell i`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureVector {
    pub values: Vec<f64>,
    pub total: f64,
}

impl MeasureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

pub fn total_mass(omega: &Polygon, sigma: &Density) -> f64 {
    sigma.mass(omega)
}

pub fn cell_measures(diagram: &PowerDiagram, sigma: &Density) -> MeasureVector {
    let values: Vec<f64> = diagram.cells.iter().map(|c| sigma.mass(c)).collect();
    let total = values.iter().sum();
    MeasureVector { values, total }
}

/// Line integral of the density along a segment.
pub fn edge_integral(seg: &Segment, sigma: &Density) -> f64 {
    match sigma {
        Density::Uniform(c) => c * seg.length(),
        Density::Affine { .. } => 0.5 * seg.length() * (sigma.value(seg.a) + sigma.value(seg.b)),
        Density::Grid(g) => g.line_integral(seg),
    }
}

/// `sum_i integral over cell i of (x . p_i + h_i) sigma`, i.e. the integral of
/// the max-affine potential.
pub fn linear_part_integral(diagram: &PowerDiagram, sites: &SiteSet, sigma: &Density) -> f64 {
    diagram
        .cells
        .iter()
        .zip(sites.points().iter().zip(sites.heights()))
        .map(|(c, (p, h))| sigma.integrate(c, &Poly2::linear(p.x, p.y, *h)))
        .sum()
}

/// Quadratic transport cost of sending each cell to its site.
pub fn quadratic_cost(diagram: &PowerDiagram, sites: &SiteSet, sigma: &Density) -> f64 {
    diagram
        .cells
        .iter()
        .zip(sites.points())
        .map(|(c, p)| sigma.integrate(c, &Poly2::squared_distance(*p)))
        .sum()
}
