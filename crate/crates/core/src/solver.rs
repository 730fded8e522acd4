//! Damped Newton iteration for "cell masses equal targets".
//!
//! The same driver serves the transport problem (heights defined up to a
//! constant, so one coordinate is pinned and iterates are re-centred) and
//! the Dirichlet problem (no gauge, full system). A step is accepted only if
//! every cell keeps at least half of `min(min_i w_i(h), min_i A_i)` and the
//! sup-norm residual strictly decreases; otherwise the step is halved.

use alloc::vec;
use alloc::vec::Vec;

use crate::energy::{OtProblem, TargetMeasure};
use crate::error::{Error, Result};
use crate::geometry::{Point2, Polygon};
use crate::linalg::{solve_spd, SymMatrix};
use crate::measure::{Density, MeasureVector};
use crate::power_diagram::{feasible_heights, PowerDiagram};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Stop once `max_i |w_i - A_i| <= tol * mass`.
    pub tol: f64,
    pub max_iters: usize,
    pub min_step: f64,
    /// Diagonal shift used when the reduced Hessian is singular; zero means
    /// `1e-12 * trace / k`.
    pub regularization: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-10,
            max_iters: 100,
            min_step: 1e-12,
            regularization: 0.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig("tol must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1"));
        }
        if !(self.min_step > 0.0 && self.min_step <= 1.0) {
            return Err(Error::InvalidConfig("min_step must lie in (0, 1]"));
        }
        if !(self.regularization >= 0.0) {
            return Err(Error::InvalidConfig("regularization must be non-negative"));
        }
        Ok(())
    }
}

/// Cell masses, energy and Jacobian at one height vector.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub measures: Vec<f64>,
    pub energy: f64,
    pub hessian: SymMatrix,
    /// False when the geometry could not be resolved (trial steps only).
    pub admissible: bool,
}

impl Evaluation {
    pub fn min_measure(&self) -> f64 {
        self.measures.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn residual(&self, targets: &[f64]) -> f64 {
        self.measures
            .iter()
            .zip(targets)
            .map(|(w, a)| (w - a).abs())
            .fold(0.0, f64::max)
    }
}

/// A square system `w(h) = A` with symmetric Jacobian.
pub trait NewtonSystem {
    fn dim(&self) -> usize;
    fn targets(&self) -> &[f64];
    /// Reference mass for the stopping rule.
    fn mass(&self) -> f64;
    /// True when `h + c (1, ..., 1)` is indistinguishable from `h`.
    fn has_gauge(&self) -> bool;
    fn evaluate(&self, h: &[f64]) -> Evaluation;
}

impl NewtonSystem for OtProblem {
    fn dim(&self) -> usize {
        self.len()
    }

    fn targets(&self) -> &[f64] {
        OtProblem::targets(self).values()
    }

    fn mass(&self) -> f64 {
        OtProblem::mass(self)
    }

    fn has_gauge(&self) -> bool {
        true
    }

    fn evaluate(&self, h: &[f64]) -> Evaluation {
        let r = OtProblem::evaluate(self, h);
        Evaluation {
            measures: r.measures.values,
            energy: r.value,
            hessian: r.hessian,
            admissible: true,
        }
    }
}

/// One row of the convergence log.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub residual_inf: f64,
    /// Zero for the starting point.
    pub step_alpha: f64,
    pub min_cell_measure: f64,
    pub energy_value: f64,
    pub total_measure: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxItersExceeded,
    StepTooSmall,
}

#[derive(Clone, Debug)]
pub struct NewtonRun {
    pub heights: Vec<f64>,
    pub evaluation: Evaluation,
    pub iterations: usize,
    pub log: Vec<IterationRecord>,
    pub termination: Termination,
    /// Some step fell back to the gradient direction.
    pub used_fallback: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonDirection {
    pub direction: Vec<f64>,
    pub fallback: bool,
}

/// Solves `H d = -g`. With `gauge`, the last coordinate is pinned to zero,
/// the leading minor is solved, and `d` is re-centred to zero mean.
pub fn newton_step(gradient: &[f64], hessian: &SymMatrix, gauge: bool, regularization: f64) -> NewtonDirection {
    let k = gradient.len();
    if gradient.iter().all(|&g| g == 0.0) || (gauge && k == 1) {
        return NewtonDirection {
            direction: vec![0.0; k],
            fallback: false,
        };
    }
    let m = if gauge { k - 1 } else { k };
    let mut reduced = if gauge { hessian.leading(m) } else { hessian.clone() };
    let rhs: Vec<f64> = gradient[..m].iter().map(|g| -g).collect();
    let solved = solve_spd(&reduced, &rhs).or_else(|_| {
        let shift = if regularization > 0.0 {
            regularization
        } else {
            1e-12 * hessian.trace() / k as f64
        };
        log::warn!("singular reduced hessian, shifting diagonal by {shift:e}");
        for i in 0..m {
            reduced.add_diag(i, shift);
        }
        solve_spd(&reduced, &rhs)
    });
    let (mut d, fallback) = match solved {
        Ok(mut x) => {
            x.resize(k, 0.0);
            (x, false)
        }
        Err(_) => {
            log::warn!("falling back to the gradient direction");
            (gradient.iter().map(|g| -g).collect(), true)
        }
    };
    if gauge {
        let mean = d.iter().sum::<f64>() / k as f64;
        d.iter_mut().for_each(|v| *v -= mean);
    }
    NewtonDirection { direction: d, fallback }
}

#[derive(Clone, Debug)]
pub struct LineStep {
    pub alpha: f64,
    pub heights: Vec<f64>,
    pub evaluation: Evaluation,
    pub residual: f64,
}

/// Largest `alpha` in `{1, 1/2, 1/4, ...}`, not below `min_step`, keeping
/// every cell above the mass floor with a strictly smaller residual.
pub fn line_search<S: NewtonSystem + ?Sized>(
    sys: &S,
    h: &[f64],
    direction: &[f64],
    current: &Evaluation,
    min_step: f64,
) -> Result<LineStep> {
    let targets = sys.targets();
    let target_min = targets.iter().copied().fold(f64::INFINITY, f64::min);
    let floor = 0.5 * current.min_measure().min(target_min);
    let r0 = current.residual(targets);
    let mut alpha = 1.0;
    while alpha >= min_step {
        let trial: Vec<f64> = h.iter().zip(direction).map(|(hi, di)| hi + alpha * di).collect();
        let ev = sys.evaluate(&trial);
        if ev.admissible && ev.min_measure() >= floor {
            let r = ev.residual(targets);
            if r < r0 {
                return Ok(LineStep {
                    alpha,
                    heights: trial,
                    evaluation: ev,
                    residual: r,
                });
            }
        }
        alpha *= 0.5;
    }
    Err(Error::StepTooSmall { iterations: 0 })
}

fn center(h: &mut [f64]) {
    let mean = h.iter().sum::<f64>() / h.len() as f64;
    h.iter_mut().for_each(|v| *v -= mean);
}

/// Runs damped Newton from a feasible `h0` (all cells of positive mass).
pub fn damped_newton<S: NewtonSystem + ?Sized>(sys: &S, h0: Vec<f64>, config: &SolverConfig) -> Result<NewtonRun> {
    config.validate()?;
    if h0.len() != sys.dim() {
        return Err(Error::LengthMismatch {
            what: "initial heights",
            expected: sys.dim(),
            found: h0.len(),
        });
    }
    if h0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial heights"));
    }
    let gauge = sys.has_gauge();
    let mut h = h0;
    if gauge {
        center(&mut h);
    }
    let mut ev = sys.evaluate(&h);
    if !ev.admissible || !(ev.min_measure() > 0.0) {
        return Err(Error::FeasibilityFailed);
    }
    let targets = sys.targets();
    let goal = config.tol * sys.mass();
    let mut residual = ev.residual(targets);
    let record = |iter: usize, alpha: f64, ev: &Evaluation, r: f64| IterationRecord {
        iter,
        residual_inf: r,
        step_alpha: alpha,
        min_cell_measure: ev.min_measure(),
        energy_value: ev.energy,
        total_measure: ev.measures.iter().sum(),
    };
    let mut log = vec![record(0, 0.0, &ev, residual)];
    let mut used_fallback = false;
    let mut iterations = 0;
    let mut termination = Termination::MaxItersExceeded;
    while residual > goal {
        if iterations == config.max_iters {
            break;
        }
        let g: Vec<f64> = ev.measures.iter().zip(targets).map(|(w, a)| w - a).collect();
        let dir = newton_step(&g, &ev.hessian, gauge, config.regularization);
        used_fallback |= dir.fallback;
        let step = match line_search(sys, &h, &dir.direction, &ev, config.min_step) {
            Ok(s) => s,
            Err(_) => {
                termination = Termination::StepTooSmall;
                break;
            }
        };
        iterations += 1;
        h = step.heights;
        if gauge {
            center(&mut h);
        }
        ev = step.evaluation;
        residual = step.residual;
        log.push(record(iterations, step.alpha, &ev, residual));
        log::debug!("newton {iterations}: residual {residual:e}, alpha {}", step.alpha);
    }
    if residual <= goal {
        termination = Termination::Converged;
    }
    Ok(NewtonRun {
        heights: h,
        evaluation: ev,
        iterations,
        log,
        termination,
        used_fallback,
    })
}

/// Outcome of a transport solve. Non-convergence is reported through
/// `converged` / `termination`; [`SolveResult::into_converged`] turns it
/// into an error.
#[derive(Clone, Debug)]
pub struct SolveResult {
    /// Normalized so that they sum to zero.
    pub heights: Vec<f64>,
    pub diagram: PowerDiagram,
    pub measures: MeasureVector,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub log: Vec<IterationRecord>,
    pub converged: bool,
    pub termination: Termination,
    pub used_fallback: bool,
}

impl SolveResult {
    pub fn residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::INFINITY)
    }

    pub fn into_converged(self) -> Result<Self> {
        match self.termination {
            Termination::Converged => Ok(self),
            Termination::MaxItersExceeded => Err(Error::MaxItersExceeded(self.iterations)),
            Termination::StepTooSmall => Err(Error::StepTooSmall {
                iterations: self.iterations,
            }),
        }
    }
}

/// Finds heights whose power cells carry the prescribed masses.
pub fn solve_ot(
    points: Vec<Point2>,
    omega: Polygon,
    sigma: Density,
    targets: TargetMeasure,
    config: &SolverConfig,
) -> Result<SolveResult> {
    let problem = OtProblem::new(points, omega, sigma, targets)?;
    solve_problem(&problem, config)
}

pub fn solve_problem(problem: &OtProblem, config: &SolverConfig) -> Result<SolveResult> {
    let h0 = feasible_heights(problem.points(), problem.omega())?;
    solve_problem_from(problem, h0, config)
}

pub fn solve_problem_from(problem: &OtProblem, h0: Vec<f64>, config: &SolverConfig) -> Result<SolveResult> {
    let run = damped_newton(problem, h0, config)?;
    let diagram = problem.diagram(&run.heights);
    let values = run.evaluation.measures.clone();
    let total = values.iter().sum();
    Ok(SolveResult {
        measures: MeasureVector { values, total },
        diagram,
        iterations: run.iterations,
        residual_history: run.log.iter().map(|r| r.residual_inf).collect(),
        log: run.log,
        converged: run.termination == Termination::Converged,
        termination: run.termination,
        used_fallback: run.used_fallback,
        heights: run.heights,
    })
}
