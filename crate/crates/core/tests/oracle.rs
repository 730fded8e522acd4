mod common;

use alexot_core::energy::OtProblem;
use alexot_core::measure::{cell_measures, linear_part_integral, quadratic_cost};
use alexot_core::oracle::{
    exchange_gain, fd_gradient, induced_plan, lp_transport_cost, mc_cell_measures, random_partition_cost_check,
    sample_domain, GridDiscretization, PartitionOutcome,
};
use alexot_core::power_diagram::voronoi_heights;
use alexot_core::solver::solve_problem;
use alexot_core::{build_diagram, Density, GridDensity, Point2, Polygon, SiteSet, SolverConfig, TargetMeasure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pair() -> Vec<Point2> {
    vec![Point2::new(0.25, 0.5), Point2::new(0.75, 0.5)]
}

fn bisected() -> SiteSet {
    SiteSet::new(pair(), voronoi_heights(&pair())).unwrap()
}

fn bumpy_grid() -> Density {
    let (nx, ny) = (9, 7);
    let values = (0..nx * ny)
        .map(|n| {
            let (i, j) = ((n % nx) as f64, (n / nx) as f64);
            1.0 + 0.5 * (1.3 * i).sin() * (0.9 * j).cos()
        })
        .collect();
    Density::Grid(GridDensity::new(nx, ny, Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), values).unwrap())
}

/// Mean and standard error of `mass * f(x)` over points drawn from sigma.
fn mc_integral(omega: &Polygon, sigma: &Density, n: usize, seed: u64, f: impl Fn(Point2) -> f64) -> (f64, f64) {
    let (lo, hi) = omega.bounding_box();
    let smax = sigma.max_on(omega);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut s, mut s2, mut count) = (0.0, 0.0, 0usize);
    while count < n {
        let x = Point2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        if !omega.contains(x, 0.0) || rng.gen::<f64>() * smax >= sigma.value(x) {
            continue;
        }
        let v = f(x);
        s += v;
        s2 += v * v;
        count += 1;
    }
    let n = n as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0);
    let mass = sigma.mass(omega);
    (mass * mean, mass * (var / n).sqrt())
}

#[test]
fn monte_carlo_halves_the_bisected_square() {
    let est = mc_cell_measures(
        &bisected(),
        &Polygon::unit_square(),
        &Density::Uniform(1.0),
        1_000_000,
        1,
    );
    for (v, se) in est.values.iter().zip(&est.std_errors) {
        assert!((v - 0.5).abs() < 3.0 * se, "{v} +- {se}");
    }
}

#[test]
fn monte_carlo_single_site_gets_the_whole_mass() {
    let s = SiteSet::new(vec![Point2::new(0.4, 0.1)], vec![0.3]).unwrap();
    let sigma = Density::Affine {
        a: 0.5,
        b: 0.25,
        c: 1.0,
    };
    let est = mc_cell_measures(&s, &Polygon::unit_square(), &sigma, 5000, 3);
    assert_eq!(est.values, vec![1.375]);
    assert_eq!(est.std_errors, vec![0.0]);
}

#[test]
fn monte_carlo_covers_exact_measures_in_most_trials() {
    let omega = Polygon::unit_square();
    let mut r = common::rng(17);
    let pts = common::random_points(&mut r, 6, 0.0, 1.0);
    let h: Vec<f64> = voronoi_heights(&pts)
        .iter()
        .map(|v| v + r.gen_range(-0.05..0.05))
        .collect();
    let sites = SiteSet::new(pts, h).unwrap();
    let sigma = common::random_affine(&mut r);
    let exact = cell_measures(&build_diagram(&sites, &omega).unwrap(), &sigma);
    let trials = 40;
    let covered = (0..trials)
        .filter(|&t| {
            let est = mc_cell_measures(&sites, &omega, &sigma, 20_000, 1000 + t);
            est.values
                .iter()
                .zip(&est.std_errors)
                .zip(&exact.values)
                .all(|((v, se), w)| (v - w).abs() <= 3.0 * se)
        })
        .count();
    assert!(covered * 100 >= 95 * trials as usize, "{covered} of {trials}");
}

#[test]
fn grid_density_measures_match_monte_carlo() {
    let omega = Polygon::unit_square();
    let mut r = common::rng(23);
    let pts = common::random_points(&mut r, 6, 0.0, 1.0);
    let sites = SiteSet::new(pts.clone(), voronoi_heights(&pts)).unwrap();
    let sigma = bumpy_grid();
    let exact = cell_measures(&build_diagram(&sites, &omega).unwrap(), &sigma);
    let est = mc_cell_measures(&sites, &omega, &sigma, 1_000_000, 5);
    for ((v, se), w) in est.values.iter().zip(&est.std_errors).zip(&exact.values) {
        assert!((v - w).abs() < 3.0 * se, "{v} vs {w} (se {se})");
    }
}

#[test]
fn linear_part_matches_monte_carlo_of_the_envelope() {
    let omega = Polygon::unit_square();
    let mut r = common::rng(29);
    let pts = common::random_points(&mut r, 7, -0.2, 1.2);
    let h: Vec<f64> = (0..7).map(|_| r.gen_range(-0.2..0.2)).collect();
    let sites = SiteSet::new(pts, h).unwrap();
    let sigma = Density::Affine {
        a: -0.4,
        b: 0.7,
        c: 1.2,
    };
    let d = build_diagram(&sites, &omega).unwrap();
    let exact = linear_part_integral(&d, &sites, &sigma);
    let (mc, se) = mc_integral(&omega, &sigma, 400_000, 7, |x| sites.potential(x));
    assert!((mc - exact).abs() < 3.0 * se, "{mc} vs {exact} (se {se})");
}

#[test]
fn bisected_cost_matches_monte_carlo() {
    let omega = Polygon::unit_square();
    let sites = bisected();
    let sigma = Density::Uniform(1.0);
    let d = build_diagram(&sites, &omega).unwrap();
    let exact = quadratic_cost(&d, &sites, &sigma);
    // Each half: integral of (x - 1/4)^2 over [0, 1/2] plus 1/2 * 1/12.
    assert!((exact - 2.0 * (1.0 / 96.0 + 1.0 / 24.0)).abs() < 1e-15);
    let (mc, se) = mc_integral(&omega, &sigma, 400_000, 9, |x| {
        let p = if x.x < 0.5 { pair()[0] } else { pair()[1] };
        (x - p).norm_sq()
    });
    assert!((mc - exact).abs() < 3.0 * se, "{mc} vs {exact} (se {se})");
}

#[test]
fn grid_discretization_preserves_mass() {
    for sigma in [
        Density::Uniform(1.5),
        Density::Affine { a: 0.3, b: 0.2, c: 1.0 },
        bumpy_grid(),
    ] {
        let omega = Polygon::unit_square();
        let grid = GridDiscretization::new(&omega, &sigma, 40).unwrap();
        assert!(grid.masses.iter().all(|&m| m > 0.0));
        let mass = sigma.mass(&omega);
        assert!((grid.total() - mass).abs() <= 1e-12 * mass);
    }
}

#[test]
fn single_site_transport_is_forced() {
    let omega = Polygon::unit_square();
    let sigma = Density::Affine {
        a: 0.2,
        b: -0.1,
        c: 1.0,
    };
    let grid = GridDiscretization::new(&omega, &sigma, 24).unwrap();
    let p = Point2::new(0.3, 1.7);
    let forced: f64 = grid
        .atoms
        .iter()
        .zip(&grid.masses)
        .map(|(x, m)| m * (*x - p).norm_sq())
        .sum();
    let lp = lp_transport_cost(&grid, &[p], &[grid.total()]).unwrap();
    assert!((lp - forced).abs() <= 1e-13 * forced);
}

#[test]
fn symmetric_pair_lp_converges_to_the_bisector_cost() {
    let omega = Polygon::unit_square();
    let sigma = Density::Uniform(1.0);
    let semi = 2.0 * (1.0 / 96.0 + 1.0 / 24.0);
    let mut prev = f64::INFINITY;
    for n in [32, 64, 128] {
        let grid = GridDiscretization::new(&omega, &sigma, n).unwrap();
        let lp = lp_transport_cost(&grid, &pair(), &[0.5, 0.5]).unwrap();
        let gap = (lp - semi).abs();
        assert!(gap < prev, "gap {gap} at {n}");
        prev = gap;
        let (induced, totals) = induced_plan(&grid, &bisected());
        let best = lp_transport_cost(&grid, &pair(), &totals).unwrap();
        assert!(best <= induced * (1.0 + 1e-12));
    }
    assert!(prev / semi < 1e-3);
}

fn solved_instance() -> (OtProblem, Vec<f64>) {
    let problem = common::random_ot(31, 8, true, 0.0);
    let res = solve_problem(&problem, &SolverConfig::default()).unwrap();
    (problem, res.heights)
}

#[test]
fn partition_check_passes_on_a_solution() {
    let (problem, h) = solved_instance();
    let out = random_partition_cost_check(&problem, &h, 100, 4);
    assert!(matches!(out, PartitionOutcome::Passed { trials: 100, .. }), "{out:?}");
}

#[test]
fn partition_check_skips_unconverged_heights() {
    let (problem, mut h) = solved_instance();
    h[0] += 0.05;
    assert_eq!(
        random_partition_cost_check(&problem, &h, 100, 4),
        PartitionOutcome::Skipped
    );
}

#[test]
fn exchanging_bisected_cells_costs_a_quarter() {
    let omega = Polygon::unit_square();
    let d = build_diagram(&bisected(), &omega).unwrap();
    let gain = exchange_gain(&d.cells, &pair(), &Density::Uniform(1.0), 0, 1);
    // 2 * (integral over [0, 1/2] of (x - 3/4)^2 - (x - 1/4)^2) = 1/4.
    assert!((gain - 0.25).abs() < 1e-14, "{gain}");
}

#[test]
fn finite_difference_gradient_vanishes_at_a_solution() {
    let (problem, h) = solved_instance();
    let fd = fd_gradient(|x| problem.evaluate(x).value, &h, 1e-6);
    let norm = fd.iter().map(|g| g * g).sum::<f64>().sqrt();
    assert!(norm < 1e-8, "{norm:e}");
}

#[test]
fn oracles_are_seed_deterministic() {
    let (problem, h) = solved_instance();
    let sites = problem.sites(&h).unwrap();
    let a = mc_cell_measures(&sites, problem.omega(), problem.sigma(), 5000, 77);
    let b = mc_cell_measures(&sites, problem.omega(), problem.sigma(), 5000, 77);
    assert_eq!(a, b);
    assert_eq!(
        random_partition_cost_check(&problem, &h, 20, 5),
        random_partition_cost_check(&problem, &h, 20, 5)
    );
    assert_eq!(
        sample_domain(problem.omega(), 100, 3),
        sample_domain(problem.omega(), 100, 3)
    );
    let targets = TargetMeasure::new(vec![1.0; 8]).unwrap();
    assert_eq!(targets.len(), 8);
}
