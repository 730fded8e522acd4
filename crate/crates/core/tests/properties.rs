//! Property tests for the invariants of the diagram, measure, energy,
//! solver, dual and transport layers.

mod common;

use alexot_core::dmae::legendre_dual;
use alexot_core::energy::OtProblem;
use alexot_core::oracle::{membership_mismatches, squared_distance_costs, transport_simplex};
use alexot_core::power_diagram::{heights_from_weights, weights_from_heights};
use alexot_core::solver::{newton_step, solve_problem};
use alexot_core::{build_diagram, Density, Point2, Polygon, SiteSet, SolverConfig, TargetMeasure};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = Point2> {
    (-0.5f64..1.5, -0.5f64..1.5).prop_map(|(x, y)| Point2::new(x, y))
}

/// Sites at least `0.02` apart with heights in `[-0.3, 0.3]`.
fn sites(max: usize) -> impl Strategy<Value = SiteSet> {
    proptest::collection::vec((point(), -0.3f64..0.3), 1..max).prop_filter_map("close sites", |v| {
        let pts: Vec<Point2> = v.iter().map(|(p, _)| *p).collect();
        for (i, p) in pts.iter().enumerate() {
            if pts[..i].iter().any(|q| q.dist(*p) < 0.02) {
                return None;
            }
        }
        SiteSet::new(pts, v.iter().map(|(_, h)| *h).collect()).ok()
    })
}

fn density() -> impl Strategy<Value = Density> {
    prop_oneof![
        (0.5f64..2.0).prop_map(Density::Uniform),
        (-0.8f64..0.8, -0.8f64..0.8).prop_map(|(a, b)| Density::Affine {
            a,
            b,
            c: 1.0 + a.abs() + b.abs()
        }),
    ]
}

/// A transport problem with uniform targets and interior sites, plus a
/// height vector at which every cell has positive area.
fn feasible_problem(max: usize) -> impl Strategy<Value = (OtProblem, Vec<f64>)> {
    (sites(max), density()).prop_filter_map("empty cell", |(s, sigma)| {
        let omega = Polygon::unit_square();
        let pts: Vec<Point2> = s
            .points()
            .iter()
            .map(|p| Point2::new(0.1 + 0.4 * p.x, 0.1 + 0.4 * p.y))
            .collect();
        let k = pts.len();
        let targets = TargetMeasure::new(vec![1.0; k])
            .unwrap()
            .normalized_to(sigma.mass(&omega));
        let problem = OtProblem::new(pts, omega, sigma, targets).ok()?;
        let h: Vec<f64> = s.heights().iter().map(|h| 0.1 * h).collect();
        (common::min_area(&problem, &h) > 1e-6).then_some((problem, h))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cells_tile_the_domain(s in sites(25)) {
        let omega = Polygon::unit_square();
        let d = build_diagram(&s, &omega).unwrap();
        let total: f64 = d.areas().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-10);
        for cell in &d.cells {
            prop_assert!(cell.is_empty() || cell.is_convex(1e-12));
        }
    }

    #[test]
    fn sampled_points_lie_in_their_argmax_cell(s in sites(20), seed in 0u64..1000) {
        let omega = Polygon::unit_square();
        let d = build_diagram(&s, &omega).unwrap();
        prop_assert_eq!(membership_mismatches(&d, &s, &omega, 500, seed), 0);
    }

    #[test]
    fn shared_edges_are_perpendicular_to_site_differences(s in sites(20)) {
        let d = build_diagram(&s, &Polygon::unit_square()).unwrap();
        let k = s.len();
        for e in d.edges.iter().filter(|e| e.j < k) {
            let dir = e.segment.direction();
            let diff = s.points()[e.j] - s.points()[e.i];
            let sin = dir.dot(diff) / (dir.norm() * diff.norm());
            prop_assert!(sin.abs() <= 1e-9, "edge ({}, {}) off by {sin:e}", e.i, e.j);
        }
    }

    #[test]
    fn weights_and_heights_round_trip(
        v in proptest::collection::vec((point(), -2.0f64..2.0), 1..20)
    ) {
        let pts: Vec<Point2> = v.iter().map(|(p, _)| *p).collect();
        let w: Vec<f64> = v.iter().map(|(_, w)| *w).collect();
        let back = weights_from_heights(&pts, &heights_from_weights(&pts, &w));
        for (a, b) in back.iter().zip(&w) {
            prop_assert!((a - b).abs() <= 1e-15 * (1.0 + b.abs()) * 4.0);
        }
    }

    #[test]
    fn measures_conserve_mass(s in sites(25), sigma in density()) {
        let omega = Polygon::unit_square();
        let d = build_diagram(&s, &omega).unwrap();
        let w = alexot_core::measure::cell_measures(&d, &sigma);
        let mass = sigma.mass(&omega);
        prop_assert!((w.sum() - mass).abs() <= 1e-10 * mass);
        prop_assert!(w.values.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn raising_a_height_never_shrinks_its_cell(
        s in sites(15), sigma in density(), pick in 0usize..15, bump in 0.0f64..0.2
    ) {
        let omega = Polygon::unit_square();
        let i = pick % s.len();
        let w0 = alexot_core::measure::cell_measures(&build_diagram(&s, &omega).unwrap(), &sigma);
        let mut h = s.heights().to_vec();
        h[i] += bump;
        let raised = s.with_heights(h).unwrap();
        let w1 = alexot_core::measure::cell_measures(&build_diagram(&raised, &omega).unwrap(), &sigma);
        prop_assert!(w1.values[i] >= w0.values[i] - 1e-14);
    }

    #[test]
    fn hessian_is_a_symmetric_laplacian_and_psd((problem, h) in feasible_problem(15)) {
        let hess = problem.evaluate(&h).hessian;
        let k = hess.dim();
        let scale = hess.max_abs().max(f64::MIN_POSITIVE);
        for i in 0..k {
            for j in 0..k {
                prop_assert!((hess.get(i, j) - hess.get(j, i)).abs() <= 1e-12 * scale);
                if i != j {
                    prop_assert!(hess.get(i, j) <= 0.0);
                }
            }
        }
        for r in hess.row_sums() {
            prop_assert!(r.abs() <= 1e-10 * scale);
        }
        if problem.diagram(&h).is_connected(k) {
            let full = DMatrix::from_row_slice(k, k, &hess.to_dense());
            let lmin = full.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert!(lmin >= -1e-10 * scale);
        }
    }

    #[test]
    fn energy_is_convex_along_segments(
        (problem, h) in feasible_problem(12),
        dir in proptest::collection::vec(-0.05f64..0.05, 12)
    ) {
        let h2: Vec<f64> = h.iter().zip(&dir).map(|(a, b)| a + b).collect();
        prop_assume!(common::min_area(&problem, &h2) > 0.0);
        let mid: Vec<f64> = h.iter().zip(&h2).map(|(a, b)| 0.5 * (a + b)).collect();
        let e = |x: &[f64]| problem.evaluate(x).value;
        prop_assert!(e(&mid) <= 0.5 * (e(&h) + e(&h2)) + 1e-10);
    }

    #[test]
    fn gradient_is_measures_minus_targets((problem, h) in feasible_problem(15)) {
        let rep = problem.evaluate(&h);
        let w = problem.measures(&h);
        for ((g, wi), a) in rep.gradient.iter().zip(&w.values).zip(problem.targets().values()) {
            prop_assert_eq!(*g, wi - a);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solver_iterates_stay_feasible_and_residuals_drop(
        s in sites(20), sigma in density(), raw in proptest::collection::vec(0.5f64..1.5, 20)
    ) {
        let omega = Polygon::unit_square();
        let k = s.len();
        let targets = TargetMeasure::new(raw[..k].to_vec()).unwrap().normalized_to(sigma.mass(&omega));
        let problem = OtProblem::new(s.points().to_vec(), omega, sigma, targets).unwrap();
        let res = solve_problem(&problem, &SolverConfig::default()).unwrap();
        prop_assert!(res.converged);
        prop_assert!(res.residual() <= 1e-10 * problem.mass());
        prop_assert!(res.heights.iter().sum::<f64>().abs() <= 1e-12);
        for pair in res.log.windows(2) {
            prop_assert!(pair[1].residual_inf < pair[0].residual_inf);
        }
        prop_assert!(res.log.iter().all(|r| r.min_cell_measure > 0.0));
        // A constant shift is invisible.
        let shifted: Vec<f64> = res.heights.iter().map(|h| h + 0.37).collect();
        let (a, b) = (problem.measures(&res.heights), problem.measures(&shifted));
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn newton_step_matches_dense_pinned_solve((problem, h) in feasible_problem(15)) {
        let rep = problem.evaluate(&h);
        let k = problem.len();
        prop_assume!(k >= 2 && problem.diagram(&h).is_connected(k));
        let d = newton_step(&rep.gradient, &rep.hessian, true, 0.0);
        prop_assert!(!d.fallback);
        let dense = DMatrix::from_row_slice(k, k, &rep.hessian.to_dense());
        let a = dense.view((0, 0), (k - 1, k - 1)).into_owned();
        let b = DVector::from_iterator(k - 1, rep.gradient[..k - 1].iter().map(|g| -g));
        let x = a.lu().solve(&b).unwrap();
        let mut want: Vec<f64> = x.iter().copied().chain([0.0]).collect();
        let mean = want.iter().sum::<f64>() / k as f64;
        want.iter_mut().for_each(|v| *v -= mean);
        let scale = want.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
        for (u, v) in d.direction.iter().zip(&want) {
            prop_assert!((u - v).abs() <= 1e-10 * scale);
        }
        // The direction solves H d = -g.
        let hd = rep.hessian.mul_vec(&d.direction);
        let gn = rep.gradient.iter().map(|g| g * g).sum::<f64>().sqrt();
        let res = hd.iter().zip(&rep.gradient).map(|(a, g)| (a + g).powi(2)).sum::<f64>().sqrt();
        prop_assert!(res <= 1e-8 * gn);
    }

    #[test]
    fn dual_is_the_lower_envelope(
        v in proptest::collection::vec((point(), -0.5f64..0.5), 3..14), seed in 0u64..1000
    ) {
        let pts: Vec<Point2> = v.iter().map(|(p, _)| *p).collect();
        for (i, p) in pts.iter().enumerate() {
            prop_assume!(pts[..i].iter().all(|q| q.dist(*p) > 0.02));
        }
        let Ok(s) = SiteSet::new(pts.clone(), v.iter().map(|(_, h)| *h).collect()) else {
            return Ok(());
        };
        let Ok(w) = legendre_dual(&s) else { return Ok(()) };
        for (i, (&p, &z)) in pts.iter().zip(w.values()).enumerate() {
            // No lifted point lies below the envelope; vertices lie on it.
            prop_assert!(w.eval(p) <= z + 1e-10);
            if w.is_vertex(i) {
                prop_assert!((w.eval(p) - z).abs() <= 1e-10);
            }
        }
        let samples = alexot_core::oracle::sample_domain(w.domain(), 200, seed);
        for pair in samples.chunks(2) {
            let mid = pair[0].lerp(pair[1], 0.5);
            prop_assert!(w.eval(mid) <= 0.5 * (w.eval(pair[0]) + w.eval(pair[1])) + 1e-12);
        }
    }

    #[test]
    fn transport_plans_are_feasible_and_beat_the_north_west_corner(
        xs in proptest::collection::vec(point(), 2..40),
        ps in proptest::collection::vec(point(), 1..6),
        wa in proptest::collection::vec(0.1f64..1.0, 40),
        wb in proptest::collection::vec(0.1f64..1.0, 6),
    ) {
        let (s_n, t_n) = (xs.len(), ps.len());
        let a = wa[..s_n].to_vec();
        let sa: f64 = a.iter().sum();
        let sb: f64 = wb[..t_n].iter().sum();
        let b: Vec<f64> = wb[..t_n].iter().map(|x| x * sa / sb).collect();
        let c = squared_distance_costs(&xs, &ps);
        let plan = transport_simplex(&a, &b, &c).unwrap();
        let mut rows = vec![0.0; s_n];
        for &(s, _, f) in &plan.arcs {
            prop_assert!(f >= 0.0);
            rows[s] += f;
        }
        for (r, x) in rows.iter().zip(&a) {
            prop_assert!((r - x).abs() <= 1e-12 * sa);
        }
        for (r, x) in plan.sink_totals(t_n).iter().zip(&b) {
            prop_assert!((r - x).abs() <= 1e-10 * sa);
        }
        // Greedy north-west corner plan as a feasible comparator.
        let (mut i, mut j, mut ra, mut rb, mut nw) = (0, 0, a[0], b[0], 0.0);
        while i < s_n && j < t_n {
            let f = ra.min(rb);
            nw += f * c[i * t_n + j];
            ra -= f;
            rb -= f;
            if ra <= rb {
                i += 1;
                if i < s_n { ra = a[i]; }
            } else {
                j += 1;
                if j < t_n { rb = b[j]; }
            }
        }
        prop_assert!(plan.cost <= nw + 1e-12);
    }
}
