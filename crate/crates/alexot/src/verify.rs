//! Independent checks of a stored solution.

use alexot_core::measure::quadratic_cost;
use alexot_core::oracle::{
    compare_matrices, fd_check, fd_jacobian, induced_plan, lp_transport_cost, mc_cell_measures,
    random_partition_cost_check, GridDiscretization, PartitionOutcome, PARTITION_RESIDUAL_GUARD,
};
use alexot_core::solver::NewtonSystem;
use alexot_core::OtProblem;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::format::{Problem, SolutionFile};
use crate::solve::residual;

/// Stored and recomputed residuals must agree to this absolute tolerance.
pub const ROUNDTRIP_TOL: f64 = 1e-12;
pub const FD_GRADIENT_TOL: f64 = 1e-5;
pub const FD_HESSIAN_TOL: f64 = 1e-4;
/// Hessian entries at or below this magnitude are not compared.
pub const FD_HESSIAN_FLOOR: f64 = 1e-6;
pub const LP_GAP_TOL: f64 = 0.05;
/// Relative slack allowed when the LP is compared with a feasible plan.
pub const LP_PLAN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub fd: bool,
    pub mc: bool,
    pub lp: bool,
    pub partition: bool,
    pub seed: u64,
    pub fd_step: f64,
    pub mc_samples: usize,
    pub lp_grid: usize,
    pub partition_trials: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            fd: false,
            mc: false,
            lp: false,
            partition: false,
            seed: 0,
            fd_step: 1e-6,
            mc_samples: 200_000,
            lp_grid: 64,
            partition_trials: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Check {
    /// Passes when `value <= bound`.
    fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound,
            pass: value <= bound,
            detail: String::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<Check>,
    pub pass: bool,
}

struct View<'a> {
    heights: &'a [f64],
    stored_residual: f64,
    tol: f64,
}

pub fn verify(solution: &SolutionFile, opts: &VerifyOptions) -> Result<Report> {
    let (file, view) = match solution {
        SolutionFile::Ot(s) => (
            &s.problem,
            View {
                heights: &s.heights,
                stored_residual: s.residual,
                tol: s.problem.config().tol,
            },
        ),
        SolutionFile::Dmae(s) => (
            &s.problem,
            View {
                heights: &s.heights,
                stored_residual: s.residual,
                tol: s.problem.config().tol,
            },
        ),
    };
    let problem = file.to_problem(None)?;
    let system: &dyn NewtonSystem = match &problem {
        Problem::Ot(p) => p,
        Problem::Dmae(p) => p,
    };
    let h = view.heights;
    let mut checks = Vec::new();
    let r = residual(&problem, h)?;
    checks.push(Check::at_most("residual", r, view.tol * system.mass()));
    checks.push(Check::at_most(
        "roundtrip",
        (r - view.stored_residual).abs(),
        ROUNDTRIP_TOL,
    ));
    if opts.fd {
        checks.extend(fd_checks(system, h, opts.fd_step));
    }
    let wants_oracle = opts.mc || opts.lp || opts.partition;
    match &problem {
        Problem::Ot(p) => {
            if opts.mc {
                checks.push(mc_check(p, h, opts)?);
            }
            if opts.lp {
                checks.extend(lp_checks(p, h, opts.lp_grid)?);
            }
            if opts.partition {
                checks.push(partition_check(p, h, opts));
            }
        }
        Problem::Dmae(_) if wants_oracle => {
            return Err(CliError::Invalid(
                "--mc, --lp and --partition apply to transport solutions only".into(),
            ));
        }
        Problem::Dmae(_) => {}
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(Report { checks, pass })
}

/// Central differences of `E(h) + h . A`, whose gradient is the vector of
/// cell masses, and of the masses themselves against the Hessian.
fn fd_checks(system: &dyn NewtonSystem, h: &[f64], step: f64) -> Vec<Check> {
    let targets = system.targets();
    let lifted = |x: &[f64]| system.evaluate(x).energy + x.iter().zip(targets).map(|(a, b)| a * b).sum::<f64>();
    let at = system.evaluate(h);
    let grad = fd_check(lifted, &at.measures, h, step);
    let jac = fd_jacobian(|x| system.evaluate(x).measures, h, step);
    let hess = compare_matrices(&jac, &at.hessian, FD_HESSIAN_FLOOR);
    vec![
        Check::at_most("fd_gradient", grad.max_rel_error, FD_GRADIENT_TOL),
        Check::at_most("fd_hessian", hess.max_rel_error, FD_HESSIAN_TOL),
    ]
}

/// Largest z-score of the sampled masses against the computed ones. The
/// bound keeps the chance of a false alarm near `1e-3` across all cells.
fn mc_check(p: &OtProblem, h: &[f64], opts: &VerifyOptions) -> Result<Check> {
    let sites = p.sites(h)?;
    let exact = p.measures(h).values;
    let est = mc_cell_measures(&sites, p.omega(), p.sigma(), opts.mc_samples.max(1000), opts.seed);
    let z = est
        .values
        .iter()
        .zip(&est.std_errors)
        .zip(&exact)
        .map(|((v, se), w)| {
            let d = (v - w).abs();
            if d == 0.0 {
                0.0
            } else if *se > 0.0 {
                d / se
            } else {
                f64::MAX
            }
        })
        .fold(0.0, f64::max);
    let bound = (2.0 * (2000.0 * p.len() as f64).ln()).sqrt();
    Ok(Check::at_most("mc_measures", z, bound))
}

/// Relative gap between the grid LP and the semi-discrete cost, and the
/// LP against the plan the power cells induce on the grid.
fn lp_checks(p: &OtProblem, h: &[f64], n: usize) -> Result<Vec<Check>> {
    let sites = p.sites(h)?;
    let semi = quadratic_cost(&p.diagram(h), &sites, p.sigma());
    let grid = GridDiscretization::new(p.omega(), p.sigma(), n)?;
    let lp = lp_transport_cost(&grid, p.points(), p.targets().values())?;
    let (induced, totals) = induced_plan(&grid, &sites);
    let used: Vec<usize> = (0..totals.len()).filter(|&i| totals[i] > 0.0).collect();
    let pts: Vec<_> = used.iter().map(|&i| p.points()[i]).collect();
    let tot: Vec<f64> = used.iter().map(|&i| totals[i]).collect();
    let best = lp_transport_cost(&grid, &pts, &tot)?;
    let mut gap = Check::at_most("lp_gap", (lp - semi).abs() / semi, LP_GAP_TOL);
    gap.detail = format!("grid {n}x{n}: lp {lp:.12e}, semi-discrete {semi:.12e}");
    let mut bound = Check::at_most("lp_induced_plan", (best - induced) / induced, LP_PLAN_TOL);
    bound.detail = format!("lp {best:.12e}, induced {induced:.12e}");
    Ok(vec![gap, bound])
}

fn partition_check(p: &OtProblem, h: &[f64], opts: &VerifyOptions) -> Check {
    let trials = opts.partition_trials;
    match random_partition_cost_check(p, h, trials, opts.seed) {
        PartitionOutcome::Passed { min_gain, .. } => Check {
            name: "partition".into(),
            value: min_gain,
            bound: 0.0,
            pass: true,
            detail: format!("{trials} trials, smallest extra cost {min_gain:.6e}"),
        },
        PartitionOutcome::Failed { trial, gain } => Check {
            name: "partition".into(),
            value: gain,
            bound: 0.0,
            pass: false,
            detail: format!("trial {trial} lowered the cost"),
        },
        PartitionOutcome::Skipped => Check {
            name: "partition".into(),
            value: f64::MAX,
            bound: PARTITION_RESIDUAL_GUARD,
            pass: false,
            detail: "skipped: cell masses do not match the targets".into(),
        },
    }
}
