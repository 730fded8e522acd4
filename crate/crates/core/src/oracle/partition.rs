//! Competing labelings built by trading equal-mass strips across shared
//! cell sides. Masses per site are unchanged, so the power labeling must
//! cost no more than any of them.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::quadrature;
use crate::energy::OtProblem;
use crate::geometry::{HalfPlane, Point2, Polygon};
use crate::measure::Density;

/// Convergence required before the comparison is meaningful, relative to
/// the total mass.
pub const PARTITION_RESIDUAL_GUARD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PartitionOutcome {
    /// Every trial cost at least as much; `min_gain` is the smallest extra cost.
    Passed {
        trials: usize,
        min_gain: f64,
    },
    Failed {
        trial: usize,
        gain: f64,
    },
    /// Masses do not match the targets, so no comparison was made.
    Skipped,
}

impl PartitionOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, PartitionOutcome::Passed { .. })
    }
}

fn slab(cell: &Polygon, normal: Point2, level: f64, keep_above: bool) -> Polygon {
    if keep_above {
        cell.clip(&HalfPlane::new(-normal, -level))
    } else {
        cell.clip(&HalfPlane::new(normal, level))
    }
}

/// Extra cost of moving `strip_i` (inside cell `i`) to site `j` and
/// `strip_j` to site `i`.
fn swap_gain(strip_i: &Polygon, strip_j: &Polygon, pi: Point2, pj: Point2, sigma: &Density) -> f64 {
    let delta = |x: Point2| (x - pj).norm_sq() - (x - pi).norm_sq();
    quadrature::weighted(strip_i, sigma, delta) - quadrature::weighted(strip_j, sigma, delta)
}

/// Random strip swaps across shared sides of the power cells at `heights`.
pub fn random_partition_cost_check(
    problem: &OtProblem,
    heights: &[f64],
    n_trials: usize,
    seed: u64,
) -> PartitionOutcome {
    let w = problem.measures(heights);
    let residual = w
        .values
        .iter()
        .zip(problem.targets().values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if residual > PARTITION_RESIDUAL_GUARD * problem.mass() {
        return PartitionOutcome::Skipped;
    }
    let diagram = problem.diagram(heights);
    let k = problem.len();
    let inner: Vec<_> = diagram.edges.iter().filter(|e| e.j < k).copied().collect();
    if inner.is_empty() {
        return PartitionOutcome::Passed {
            trials: 0,
            min_gain: f64::INFINITY,
        };
    }
    let sigma = problem.sigma();
    let pts = problem.points();
    let diam = problem.omega().diameter();
    let tol = 1e-12 * problem.mass() * diam * diam;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_gain = f64::INFINITY;
    let mut done = 0;
    for trial in 0..n_trials {
        let e = inner[rng.gen_range(0..inner.len())];
        let (i, j) = (e.i, e.j);
        let d = pts[j] - pts[i];
        let nu = d * (1.0 / d.norm());
        // Cell i lies on nu . x <= c0, cell j on nu . x >= c0.
        let c0 = nu.dot(e.segment.midpoint());
        let (ci, cj) = (&diagram.cells[i], &diagram.cells[j]);
        let depth_i = c0 - ci.vertices().iter().map(|v| nu.dot(*v)).fold(f64::INFINITY, f64::min);
        let depth_j = cj
            .vertices()
            .iter()
            .map(|v| nu.dot(*v))
            .fold(f64::NEG_INFINITY, f64::max)
            - c0;
        let mass_j = quadrature::mass(cj, sigma);
        let mut a = rng.gen_range(0.05..0.6) * depth_i;
        let mut strip_i = slab(ci, nu, c0 - a, true);
        let mut m = quadrature::mass(&strip_i, sigma);
        while m > 0.9 * mass_j && a > 1e-6 * depth_i {
            a *= 0.5;
            strip_i = slab(ci, nu, c0 - a, true);
            m = quadrature::mass(&strip_i, sigma);
        }
        // Equal-mass strip in cell j by bisection on its width.
        let (mut lo, mut hi) = (0.0, depth_j);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if quadrature::mass(&slab(cj, nu, c0 + mid, false), sigma) < m {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * depth_j {
                break;
            }
        }
        let strip_j = slab(cj, nu, c0 + 0.5 * (lo + hi), false);
        let gain = swap_gain(&strip_i, &strip_j, pts[i], pts[j], sigma);
        if gain < -tol {
            return PartitionOutcome::Failed { trial, gain };
        }
        min_gain = min_gain.min(gain);
        done += 1;
    }
    PartitionOutcome::Passed { trials: done, min_gain }
}

/// Cost change when cells `i` and `j` trade their sites outright.
pub fn exchange_gain(cells: &[Polygon], sites: &[Point2], sigma: &Density, i: usize, j: usize) -> f64 {
    let before = quadrature::cost(&cells[i], sites[i], sigma) + quadrature::cost(&cells[j], sites[j], sigma);
    let after = quadrature::cost(&cells[i], sites[j], sigma) + quadrature::cost(&cells[j], sites[i], sigma);
    after - before
}
