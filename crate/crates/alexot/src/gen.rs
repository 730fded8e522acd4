//! Seeded random problem files.

use std::f64::consts::TAU;

use alexot_core::{Point2, Polygon};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::format::{ProblemFile, ProblemKind, SigmaSpec};

/// Smallest distance between generated points, and from interior points to
/// the boundary.
const CLEARANCE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaChoice {
    Uniform,
    Affine,
}

/// `k` sites in the unit square with targets in `[0.5, 1.5]` rescaled to
/// the domain mass.
pub fn gen_ot(k: usize, sigma: SigmaChoice, seed: u64) -> ProblemFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = match sigma {
        SigmaChoice::Uniform => SigmaSpec::Uniform { value: 1.0 },
        SigmaChoice::Affine => {
            let a: f64 = rng.gen_range(-0.8..0.8);
            let b: f64 = rng.gen_range(-0.8..0.8);
            SigmaSpec::Affine {
                a,
                b,
                c: 1.0 + a.abs() + b.abs(),
            }
        }
    };
    let mass = match spec {
        SigmaSpec::Affine { a, b, c } => 0.5 * (a + b) + c,
        _ => 1.0,
    };
    let mut pts: Vec<Point2> = Vec::with_capacity(k);
    while pts.len() < k {
        let p = Point2::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        if pts.iter().all(|q| q.dist(p) > CLEARANCE / (k as f64).sqrt()) {
            pts.push(p);
        }
    }
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.5..1.5)).collect();
    let scale = mass / raw.iter().sum::<f64>();
    ProblemFile {
        kind: Some(ProblemKind::Ot),
        omega: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        sigma: spec,
        sites: pts.iter().zip(&raw).map(|(p, a)| [p.x, p.y, a * scale]).collect(),
        boundary: Vec::new(),
        interior: Vec::new(),
        solver: None,
    }
}

/// `m` boundary points on a perturbed unit circle with values in
/// `[-0.5, 0.5]`, and `k` interior points with targets in `[0.05, 1]`.
pub fn gen_dmae(m: usize, k: usize, seed: u64) -> ProblemFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = TAU / m as f64;
    let boundary: Vec<Point2> = (0..m)
        .map(|i| {
            let t = step * (i as f64 + rng.gen_range(-0.3..0.3));
            Point2::new(t.cos(), t.sin())
        })
        .collect();
    let values: Vec<f64> = (0..m).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let omega = Polygon::from_ccw_unchecked(boundary.clone());
    let mut interior: Vec<Point2> = Vec::with_capacity(k);
    while interior.len() < k {
        let p = Point2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if omega.inset_distance(p) > CLEARANCE && interior.iter().all(|q| q.dist(p) > CLEARANCE) {
            interior.push(p);
        }
    }
    let targets: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    ProblemFile {
        kind: Some(ProblemKind::Dmae),
        omega: Vec::new(),
        sigma: SigmaSpec::default(),
        sites: Vec::new(),
        boundary: boundary.iter().zip(&values).map(|(p, g)| [p.x, p.y, *g]).collect(),
        interior: interior.iter().zip(&targets).map(|(p, a)| [p.x, p.y, *a]).collect(),
        solver: None,
    }
}
