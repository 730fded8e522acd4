//! Seeded instance generators shared by the integration tests.
#![allow(dead_code)]

use alexot_core::dmae::DmaeProblem;
use alexot_core::energy::OtProblem;
use alexot_core::power_diagram::{build_diagram, feasible_heights};
use alexot_core::{Density, Point2, Polygon, SiteSet, TargetMeasure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_points(rng: &mut ChaCha8Rng, k: usize, lo: f64, hi: f64) -> Vec<Point2> {
    (0..k)
        .map(|_| Point2::new(rng.gen_range(lo..hi), rng.gen_range(lo..hi)))
        .collect()
}

/// Positive affine density on the unit square with a sizeable slope.
pub fn random_affine(rng: &mut ChaCha8Rng) -> Density {
    let a = rng.gen_range(-0.8..0.8);
    let b = rng.gen_range(-0.8..0.8);
    Density::Affine {
        a,
        b,
        c: 1.0 + a.abs() + b.abs(),
    }
}

/// Random targets in `[0.5, 1.5]` rescaled to the domain mass.
pub fn random_targets(rng: &mut ChaCha8Rng, k: usize, omega: &Polygon, sigma: &Density) -> TargetMeasure {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.5..1.5)).collect();
    TargetMeasure::new(raw).unwrap().normalized_to(sigma.mass(omega))
}

pub fn random_ot(seed: u64, k: usize, sigma_affine: bool, spread: f64) -> OtProblem {
    let mut r = rng(seed);
    let omega = Polygon::unit_square();
    let sigma = if sigma_affine {
        random_affine(&mut r)
    } else {
        Density::Uniform(1.0)
    };
    let pts = random_points(&mut r, k, -spread, 1.0 + spread);
    let targets = random_targets(&mut r, k, &omega, &sigma);
    OtProblem::new(pts, omega, sigma, targets).unwrap()
}

/// Smallest cell area at `h`.
pub fn min_area(problem: &OtProblem, h: &[f64]) -> f64 {
    problem.diagram(h).areas().into_iter().fold(f64::INFINITY, f64::min)
}

/// A feasible height vector away from the starting heights: the feasible
/// start plus noise, shrunk until every cell keeps a reasonable area.
pub fn random_feasible_heights(problem: &OtProblem, rng: &mut ChaCha8Rng, amplitude: f64) -> Vec<f64> {
    let base = feasible_heights(problem.points(), problem.omega()).unwrap();
    let floor = 0.05 / problem.len() as f64 * problem.omega().area();
    let mut amp = amplitude;
    loop {
        let h: Vec<f64> = base.iter().map(|b| b + amp * rng.gen_range(-1.0..1.0)).collect();
        if min_area(problem, &h) > floor.min(0.5 * min_area(problem, &base)) {
            return h;
        }
        amp *= 0.5;
    }
}

pub fn sites_with(points: &[Point2], h: &[f64]) -> SiteSet {
    SiteSet::new(points.to_vec(), h.to_vec()).unwrap()
}

pub fn all_cells_positive(points: &[Point2], h: &[f64], omega: &Polygon) -> bool {
    build_diagram(&sites_with(points, h), omega)
        .unwrap()
        .areas()
        .iter()
        .all(|&a| a > 0.0)
}

/// Boundary vertices on a perturbed circle, in convex position.
pub fn random_dmae(seed: u64, m: usize, k: usize) -> DmaeProblem {
    let mut r = rng(seed);
    let step = core::f64::consts::TAU / m as f64;
    let boundary: Vec<Point2> = (0..m)
        .map(|i| {
            let t = step * (i as f64 + r.gen_range(-0.3..0.3));
            Point2::new(t.cos(), t.sin())
        })
        .collect();
    let values: Vec<f64> = (0..m).map(|_| r.gen_range(-0.5..0.5)).collect();
    let omega = Polygon::new(boundary.clone()).unwrap();
    let mut interior = Vec::with_capacity(k);
    while interior.len() < k {
        let p = Point2::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        let clear = omega.inset_distance(p) > 0.05;
        let apart = interior.iter().all(|q: &Point2| q.dist(p) > 0.05);
        if clear && apart {
            interior.push(p);
        }
    }
    let targets: Vec<f64> = (0..k).map(|_| r.gen_range(0.05..1.0)).collect();
    DmaeProblem::new(boundary, values, interior, targets).unwrap()
}
