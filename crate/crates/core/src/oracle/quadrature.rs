//! Dunavant's 7-point rule (exact through degree 5) on triangles, with
//! uniform refinement. Deliberately separate from the exact moment code.

use alloc::vec::Vec;

use crate::geometry::{HalfPlane, Point2, Polygon};
use crate::measure::{Density, GridDensity};

struct Rule {
    bary: [[f64; 3]; 7],
    weight: [f64; 7],
}

fn rule() -> Rule {
    let s = libm::sqrt(15.0);
    let (b1, b2) = ((6.0 + s) / 21.0, (6.0 - s) / 21.0);
    let (a1, a2) = (1.0 - 2.0 * b1, 1.0 - 2.0 * b2);
    let (w1, w2) = ((155.0 + s) / 1200.0, (155.0 - s) / 1200.0);
    let t = 1.0 / 3.0;
    Rule {
        bary: [
            [t, t, t],
            [a1, b1, b1],
            [b1, a1, b1],
            [b1, b1, a1],
            [a2, b2, b2],
            [b2, a2, b2],
            [b2, b2, a2],
        ],
        weight: [0.225, w1, w1, w1, w2, w2, w2],
    }
}

fn triangle<F: Fn(Point2) -> f64>(r: &Rule, a: Point2, b: Point2, c: Point2, f: &F) -> f64 {
    let area = 0.5 * (b - a).cross(c - a).abs();
    let mut s = 0.0;
    for (l, w) in r.bary.iter().zip(r.weight) {
        let p = Point2::new(
            l[0] * a.x + l[1] * b.x + l[2] * c.x,
            l[0] * a.y + l[1] * b.y + l[2] * c.y,
        );
        s += w * f(p);
    }
    area * s
}

fn refined<F: Fn(Point2) -> f64>(r: &Rule, a: Point2, b: Point2, c: Point2, levels: u32, f: &F) -> f64 {
    if levels == 0 {
        return triangle(r, a, b, c, f);
    }
    let (ab, bc, ca) = (a.lerp(b, 0.5), b.lerp(c, 0.5), c.lerp(a, 0.5));
    refined(r, a, ab, ca, levels - 1, f)
        + refined(r, ab, b, bc, levels - 1, f)
        + refined(r, ca, bc, c, levels - 1, f)
        + refined(r, ab, bc, ca, levels - 1, f)
}

/// Integral of `f` over a convex polygon; every fan triangle is split into
/// `4^levels` pieces.
pub fn integrate<F: Fn(Point2) -> f64>(poly: &Polygon, levels: u32, f: F) -> f64 {
    let v = poly.vertices();
    if v.len() < 3 {
        return 0.0;
    }
    let r = rule();
    (1..v.len() - 1)
        .map(|i| refined(&r, v[0], v[i], v[i + 1], levels, &f))
        .sum()
}

/// Pieces of `poly` inside single grid cells; the outermost rows and
/// columns extend to infinity.
fn grid_pieces(poly: &Polygon, g: &GridDensity) -> Vec<Polygon> {
    let (lo, hi) = g.bounds();
    let (nx, ny) = (g.nx(), g.ny());
    let dx = (hi.x - lo.x) / (nx - 1) as f64;
    let dy = (hi.y - lo.y) / (ny - 1) as f64;
    let (plo, phi) = poly.bounding_box();
    let span = |a: f64, b: f64, o: f64, d: f64, n: usize| {
        let first = libm::floor((a - o) / d).max(0.0) as usize;
        let last = libm::floor((b - o) / d).max(0.0) as usize;
        (first.min(n - 2), last.min(n - 2))
    };
    let (i0, i1) = span(plo.x, phi.x, lo.x, dx, nx);
    let (j0, j1) = span(plo.y, phi.y, lo.y, dy, ny);
    let band = |p: &Polygon, axis: Point2, k: usize, start: f64, d: f64, n: usize| {
        let mut out = p.clone();
        if k > 0 {
            out = out.clip(&HalfPlane::new(-axis, -(start + k as f64 * d)));
        }
        if k + 2 < n {
            out = out.clip(&HalfPlane::new(axis, start + (k + 1) as f64 * d));
        }
        out
    };
    let mut pieces = Vec::new();
    for i in i0..=i1 {
        let column = band(poly, Point2::new(1.0, 0.0), i, lo.x, dx, nx);
        if column.is_empty() {
            continue;
        }
        for j in j0..=j1 {
            let piece = band(&column, Point2::new(0.0, 1.0), j, lo.y, dy, ny);
            if !piece.is_empty() {
                pieces.push(piece);
            }
        }
    }
    pieces
}

/// `integral over poly of f * sigma`. Grid densities are split along grid
/// lines so the rule sees one bilinear piece at a time; this is exact when
/// `f` is a polynomial of degree at most three.
pub fn weighted<F: Fn(Point2) -> f64>(poly: &Polygon, sigma: &Density, f: F) -> f64 {
    let g = |x: Point2| f(x) * sigma.value(x);
    match sigma {
        Density::Grid(grid) => grid_pieces(poly, grid).iter().map(|p| integrate(p, 0, g)).sum(),
        _ => integrate(poly, 0, g),
    }
}

/// `integral over poly of sigma`.
pub fn mass(poly: &Polygon, sigma: &Density) -> f64 {
    weighted(poly, sigma, |_| 1.0)
}

/// `integral over poly of |x - p|^2 sigma(x)`.
pub fn cost(poly: &Polygon, p: Point2, sigma: &Density) -> f64 {
    weighted(poly, sigma, |x| (x - p).norm_sq())
}

/// Semi-discrete transport cost of a labeling of cells to sites.
pub fn labeled_cost(cells: &[Polygon], sites: &[Point2], sigma: &Density) -> f64 {
    cells.iter().zip(sites).map(|(c, &p)| cost(c, p, sigma)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_through_degree_five() {
        let tri = Polygon::new(alloc::vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0)
        ])
        .unwrap();
        // integral of x^a y^b over the unit triangle is a! b! / (a + b + 2)!
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        for a in 0..=5u32 {
            for b in 0..=(5 - a) {
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                let q = integrate(&tri, 0, |p| libm::pow(p.x, a as f64) * libm::pow(p.y, b as f64));
                assert_relative_eq!(q, exact, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn refinement_converges_on_smooth_integrand() {
        let sq = Polygon::unit_square();
        let exact = (1.0 - libm::cos(1.0)) * libm::sin(1.0);
        let coarse = (integrate(&sq, 0, |p| libm::sin(p.x) * libm::cos(p.y)) - exact).abs();
        let fine = (integrate(&sq, 3, |p| libm::sin(p.x) * libm::cos(p.y)) - exact).abs();
        // Sixth order: three halvings shrink the error by about 8^6.
        assert!(fine < 1e-4 * coarse, "{coarse:e} -> {fine:e}");
    }

    #[test]
    fn grid_split_integrates_bilinear_exactly() {
        // Node values of the affine function 3 + x + y make the bilinear
        // interpolant that same function.
        let (nx, ny) = (5, 4);
        let values = (0..nx * ny)
            .map(|n| {
                let (i, j) = ((n % nx) as f64 / 4.0, (n / nx) as f64 / 3.0);
                1.0 + 2.0 * i + 2.0 * j
            })
            .collect();
        let g = GridDensity::new(nx, ny, Point2::new(-1.0, -1.0), Point2::new(1.0, 1.0), values).unwrap();
        let sigma = Density::Grid(g);
        let tri = Polygon::new(alloc::vec![
            Point2::new(-0.9, -0.8),
            Point2::new(0.7, -0.3),
            Point2::new(0.1, 0.95)
        ])
        .unwrap();
        let affine = Density::Affine { a: 1.0, b: 1.0, c: 3.0 };
        assert_relative_eq!(mass(&tri, &sigma), mass(&tri, &affine), max_relative = 1e-14);
        let p = Point2::new(0.2, -0.4);
        assert_relative_eq!(cost(&tri, p, &sigma), cost(&tri, p, &affine), max_relative = 1e-14);
    }
}
