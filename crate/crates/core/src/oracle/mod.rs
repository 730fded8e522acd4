//! Brute-force checks that share nothing with the solver beyond polygon
//! clipping: sampled membership, Monte-Carlo masses, finite differences, an
//! exact transport LP on a grid, and strip-swap competitors.

pub mod lp;
mod partition;
pub mod quadrature;

pub use lp::{squared_distance_costs, transport_simplex, transport_simplex_warm, TransportPlan};
pub use partition::{exchange_gain, random_partition_cost_check, PartitionOutcome, PARTITION_RESIDUAL_GUARD};

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{HalfPlane, Point2, Polygon};
use crate::linalg::SymMatrix;
use crate::measure::Density;
use crate::power_diagram::{PowerDiagram, SiteSet};

/// `integral over omega of sigma` from polygon moments (uniform, affine) or
/// per-grid-cell quadrature (grid).
pub fn reference_mass(omega: &Polygon, sigma: &Density) -> f64 {
    match sigma {
        Density::Uniform(c) => c * omega.area(),
        Density::Affine { a, b, c } => {
            let m = omega.moments(1);
            a * m.get(1, 0) + b * m.get(0, 1) + c * m.get(0, 0)
        }
        Density::Grid(_) => quadrature::mass(omega, sigma),
    }
}

/// Point masses at the centres of an `n x n` grid over the bounding box of
/// the domain, kept where the centre lies in the domain.
#[derive(Clone, Debug)]
pub struct GridDiscretization {
    pub n: usize,
    pub atoms: Vec<Point2>,
    pub masses: Vec<f64>,
    /// Column and row of each atom.
    pub index: Vec<(usize, usize)>,
}

impl GridDiscretization {
    /// Masses `sigma(centre) * cell area`, rescaled to the mass of `omega`.
    pub fn new(omega: &Polygon, sigma: &Density, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("grid resolution must be positive"));
        }
        let (lo, hi) = omega.bounding_box();
        let (dx, dy) = ((hi.x - lo.x) / n as f64, (hi.y - lo.y) / n as f64);
        let mut atoms = Vec::new();
        let mut masses = Vec::new();
        let mut index = Vec::new();
        for iy in 0..n {
            for ix in 0..n {
                let c = Point2::new(lo.x + (ix as f64 + 0.5) * dx, lo.y + (iy as f64 + 0.5) * dy);
                if omega.contains(c, 0.0) {
                    atoms.push(c);
                    masses.push(sigma.value(c) * dx * dy);
                    index.push((ix, iy));
                }
            }
        }
        if atoms.is_empty() {
            return Err(Error::InvalidConfig("grid too coarse for the domain"));
        }
        let total: f64 = masses.iter().sum();
        let scale = reference_mass(omega, sigma) / total;
        masses.iter_mut().for_each(|m| *m *= scale);
        Ok(GridDiscretization {
            n,
            atoms,
            masses,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Merges 2x2 blocks of atoms into their mass centroid.
    fn coarsened(&self) -> GridDiscretization {
        let m = self.n.div_ceil(2);
        let mut slot = vec![usize::MAX; m * m];
        let mut out = GridDiscretization {
            n: m,
            atoms: Vec::new(),
            masses: Vec::new(),
            index: Vec::new(),
        };
        let mut moment: Vec<Point2> = Vec::new();
        for ((&a, &w), &(ix, iy)) in self.atoms.iter().zip(&self.masses).zip(&self.index) {
            let key = (ix / 2, iy / 2);
            let cell = &mut slot[key.1 * m + key.0];
            if *cell == usize::MAX {
                *cell = out.masses.len();
                out.masses.push(0.0);
                out.index.push(key);
                moment.push(Point2::new(0.0, 0.0));
            }
            out.masses[*cell] += w;
            moment[*cell] = moment[*cell] + a * w;
        }
        out.atoms = moment.iter().zip(&out.masses).map(|(&q, &w)| q * (1.0 / w)).collect();
        out
    }
}

/// Above this many atoms the LP is started from potentials solved on a
/// coarser grid.
const WARM_START_ATOMS: usize = 2048;

/// A direction with few exact ties on grids.
const SWEEP: Point2 = Point2 {
    x: 1.0,
    y: 0.414_213_562_373_095_1,
};

/// Optimal plan from the grid atoms to `targets` placed at `sites`, with
/// squared Euclidean cost. Targets are rescaled to the grid total when they
/// agree within the LP balance tolerance.
pub fn lp_transport_plan(grid: &GridDiscretization, sites: &[Point2], targets: &[f64]) -> Result<TransportPlan> {
    assert_eq!(sites.len(), targets.len(), "one target per site");
    let supply_total = grid.total();
    let demand_total: f64 = targets.iter().sum();
    if (supply_total - demand_total).abs() > lp::LP_BALANCE_TOL * supply_total {
        return Err(Error::Infeasible {
            supply: supply_total,
            demand: demand_total,
        });
    }
    let scale = supply_total / demand_total;
    let demand: Vec<f64> = targets.iter().map(|t| t * scale).collect();
    plan_from_atoms(grid, sites, &demand)
}

fn plan_from_atoms(grid: &GridDiscretization, sites: &[Point2], demand: &[f64]) -> Result<TransportPlan> {
    let mut src: Vec<usize> = (0..grid.len()).collect();
    src.sort_by(|&a, &b| SWEEP.dot(grid.atoms[a]).total_cmp(&SWEEP.dot(grid.atoms[b])));
    let mut snk: Vec<usize> = (0..sites.len()).collect();
    snk.sort_by(|&a, &b| SWEEP.dot(sites[a]).total_cmp(&SWEEP.dot(sites[b])));
    let atoms: Vec<Point2> = src.iter().map(|&i| grid.atoms[i]).collect();
    let supply: Vec<f64> = src.iter().map(|&i| grid.masses[i]).collect();
    let ps: Vec<Point2> = snk.iter().map(|&j| sites[j]).collect();
    let sorted_demand: Vec<f64> = snk.iter().map(|&j| demand[j]).collect();
    let cost = squared_distance_costs(&atoms, &ps);
    let mut plan = if grid.len() > WARM_START_ATOMS && grid.n > 1 {
        let coarse = plan_from_atoms(&grid.coarsened(), sites, demand)?;
        let v: Vec<f64> = snk.iter().map(|&j| coarse.sink_potentials[j]).collect();
        transport_simplex_warm(&supply, &sorted_demand, &cost, &v)?
    } else {
        transport_simplex(&supply, &sorted_demand, &cost)?
    };
    for arc in plan.arcs.iter_mut() {
        *arc = (src[arc.0], snk[arc.1], arc.2);
    }
    let mut v = vec![0.0; sites.len()];
    for (pos, &j) in snk.iter().enumerate() {
        v[j] = plan.sink_potentials[pos];
    }
    plan.sink_potentials = v;
    Ok(plan)
}

pub fn lp_transport_cost(grid: &GridDiscretization, sites: &[Point2], targets: &[f64]) -> Result<f64> {
    Ok(lp_transport_plan(grid, sites, targets)?.cost)
}

/// Cost and site totals of sending each atom to the site maximising
/// `x . p_i + h_i`.
pub fn induced_plan(grid: &GridDiscretization, sites: &SiteSet) -> (f64, Vec<f64>) {
    let mut totals = vec![0.0; sites.len()];
    let mut cost = 0.0;
    for (&x, &m) in grid.atoms.iter().zip(&grid.masses) {
        let i = argmax_scan(sites, x);
        totals[i] += m;
        cost += m * (x - sites.points()[i]).norm_sq();
    }
    (cost, totals)
}

fn argmax_scan(sites: &SiteSet, x: Point2) -> usize {
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, (p, h)) in sites.points().iter().zip(sites.heights()).enumerate() {
        let v = x.dot(*p) + h;
        if v > best.0 {
            best = (v, i);
        }
    }
    best.1
}

/// Uniform points of `omega` by rejection from its bounding box.
pub fn sample_domain(omega: &Polygon, n: usize, seed: u64) -> Vec<Point2> {
    let (lo, hi) = omega.bounding_box();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = Point2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        if omega.contains(x, 0.0) {
            out.push(x);
        }
    }
    out
}

/// Sampled points whose argmax site does not own a cell containing them.
pub fn membership_mismatches(diagram: &PowerDiagram, sites: &SiteSet, omega: &Polygon, n: usize, seed: u64) -> usize {
    let tol = 1e-9 * omega.diameter();
    sample_domain(omega, n, seed)
        .into_iter()
        .filter(|&x| !diagram.cells[argmax_scan(sites, x)].contains(x, tol))
        .count()
}

/// Voronoi cells from perpendicular bisectors: cell `i` is `omega` cut by
/// `|x - p_i| <= |x - p_j|` for every `j`.
pub fn voronoi_by_bisectors(points: &[Point2], omega: &Polygon) -> Vec<Polygon> {
    points
        .iter()
        .map(|&pi| {
            points.iter().filter(|&&pj| pj != pi).fold(omega.clone(), |cell, &pj| {
                cell.clip(&HalfPlane::new(pj - pi, 0.5 * (pj.norm_sq() - pi.norm_sq())))
            })
        })
        .collect()
}

/// Monte-Carlo masses with one-sigma standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub accepted: usize,
    pub proposed: usize,
}

/// Cell masses by rejection sampling: uniform proposals in the bounding box,
/// accepted with probability `sigma(x) / sigma_max` inside `omega`, binned
/// by argmax. Scaled by the mass of `omega`, so a single site gets exactly
/// that mass.
pub fn mc_cell_measures(sites: &SiteSet, omega: &Polygon, sigma: &Density, n_samples: usize, seed: u64) -> McEstimate {
    assert!(n_samples >= 1000, "at least 1000 samples");
    let (lo, hi) = omega.bounding_box();
    let smax = sigma.max_on(omega);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; sites.len()];
    let (mut accepted, mut proposed) = (0usize, 0usize);
    while accepted < n_samples {
        proposed += 1;
        let x = Point2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        let u: f64 = rng.gen();
        if !omega.contains(x, 0.0) || u * smax >= sigma.value(x) {
            continue;
        }
        counts[argmax_scan(sites, x)] += 1;
        accepted += 1;
    }
    let mass = reference_mass(omega, sigma);
    let n = accepted as f64;
    let values = counts.iter().map(|&c| mass * c as f64 / n).collect();
    let std_errors = counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            mass * libm::sqrt(p * (1.0 - p) / n)
        })
        .collect();
    McEstimate {
        values,
        std_errors,
        accepted,
        proposed,
    }
}

/// Outcome of comparing an analytic derivative with central differences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdReport {
    pub max_abs_error: f64,
    pub max_rel_error: f64,
    /// Entries that entered the comparison.
    pub compared: usize,
}

/// Central differences of a scalar function.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], step: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            y[i] = x[i] + step;
            let fp = f(&y);
            y[i] = x[i] - step;
            let fm = f(&y);
            y[i] = x[i];
            (fp - fm) / (2.0 * step)
        })
        .collect()
}

/// Central differences of a vector function; `jac[i][j] = d f_i / d x_j`.
pub fn fd_jacobian<F: Fn(&[f64]) -> Vec<f64>>(f: F, x: &[f64], step: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut y = x.to_vec();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        y[j] = x[j] + step;
        let fp = f(&y);
        y[j] = x[j] - step;
        let fm = f(&y);
        y[j] = x[j];
        cols.push(
            fp.iter()
                .zip(&fm)
                .map(|(a, b)| (a - b) / (2.0 * step))
                .collect::<Vec<f64>>(),
        );
    }
    let m = cols.first().map_or(0, Vec::len);
    (0..m).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

/// Sup-norm error of `fd` against `exact`, relative to the larger sup norm.
pub fn compare_vectors(fd: &[f64], exact: &[f64]) -> FdReport {
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let abs = fd.iter().zip(exact).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let scale = sup(fd).max(sup(exact));
    FdReport {
        max_abs_error: abs,
        max_rel_error: if scale > 0.0 { abs / scale } else { 0.0 },
        compared: fd.len(),
    }
}

/// Entrywise relative error over entries where either side exceeds
/// `threshold` in magnitude.
pub fn compare_matrices(fd: &[Vec<f64>], exact: &SymMatrix, threshold: f64) -> FdReport {
    let mut rep = FdReport {
        max_abs_error: 0.0,
        max_rel_error: 0.0,
        compared: 0,
    };
    for (i, row) in fd.iter().enumerate() {
        for (j, &f) in row.iter().enumerate() {
            let e = exact.get(i, j);
            let big = f.abs().max(e.abs());
            if big <= threshold {
                continue;
            }
            let d = (f - e).abs();
            rep.max_abs_error = rep.max_abs_error.max(d);
            rep.max_rel_error = rep.max_rel_error.max(d / big);
            rep.compared += 1;
        }
    }
    rep
}

/// Central-difference check of a gradient: the relative sup-norm error.
pub fn fd_check<F: Fn(&[f64]) -> f64>(f: F, gradient: &[f64], x: &[f64], step: f64) -> FdReport {
    compare_vectors(&fd_gradient(f, x, step), gradient)
}
