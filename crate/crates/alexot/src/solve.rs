//! Solve orchestration and the convergence log.

use std::path::Path;

use alexot_core::dmae::solve_dmae;
use alexot_core::measure::quadratic_cost;
use alexot_core::solver::{solve_problem, IterationRecord, NewtonSystem};
use alexot_core::Termination;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::format::{DmaeSolutionFile, OtSolutionFile, Problem, ProblemFile, SigmaSpec, SolutionFile};

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub solution: SolutionFile,
    pub log: Vec<IterationRecord>,
    pub termination: Termination,
}

/// `max_i |w_i(h) - A_i|`, recomputed from scratch.
pub fn residual(problem: &Problem, heights: &[f64]) -> Result<f64> {
    let (measures, targets) = match problem {
        Problem::Ot(p) => (p.measures(heights).values, p.targets().values()),
        Problem::Dmae(p) => (NewtonSystem::evaluate(p, heights).measures, p.targets().values()),
    };
    if measures.len() != heights.len() || heights.len() != targets.len() {
        return Err(CliError::Invalid(format!(
            "{} heights for {} sites",
            heights.len(),
            targets.len()
        )));
    }
    Ok(measures
        .iter()
        .zip(targets)
        .map(|(w, a)| (w - a).abs())
        .fold(0.0, f64::max))
}

/// The problem file with any density file reference inlined, so that a
/// solution stays readable wherever it is moved.
pub fn self_contained(file: &ProblemFile, base: Option<&Path>) -> Result<ProblemFile> {
    let mut out = file.clone();
    if let SigmaSpec::GridFile { path } = &file.sigma {
        let full = base.map_or_else(|| Path::new(path).to_path_buf(), |b| b.join(path));
        out.sigma = SigmaSpec::Grid(crate::format::read_json(&full)?);
    }
    Ok(out)
}

pub fn solve_file(file: &ProblemFile, base: Option<&Path>) -> Result<SolveOutcome> {
    let config = file.config();
    config.validate()?;
    let embedded = self_contained(file, base)?;
    match file.to_problem(base)? {
        Problem::Ot(p) => {
            let res = solve_problem(&p, &config)?;
            let mean = res.heights.iter().sum::<f64>() / res.heights.len() as f64;
            let heights: Vec<f64> = res.heights.iter().map(|h| h - mean).collect();
            let measures = p.measures(&heights).values;
            let residual = measures
                .iter()
                .zip(p.targets().values())
                .map(|(w, a)| (w - a).abs())
                .fold(0.0, f64::max);
            let cost = quadratic_cost(&p.diagram(&heights), &p.sites(&heights)?, p.sigma());
            Ok(SolveOutcome {
                solution: SolutionFile::Ot(OtSolutionFile {
                    heights,
                    measures,
                    targets: p.targets().values().to_vec(),
                    residual,
                    iterations: res.iterations,
                    cost,
                    converged: res.converged,
                    problem: embedded,
                }),
                log: res.log,
                termination: res.termination,
            })
        }
        Problem::Dmae(p) => {
            let sol = solve_dmae(&p, &config)?;
            let mut slot = vec![usize::MAX; p.extended_points().len()];
            let mut dual_vertices = Vec::new();
            for (i, q, w) in sol.dual.vertices() {
                slot[i] = dual_vertices.len();
                dual_vertices.push([q.x, q.y, w]);
            }
            let cells = sol
                .dual
                .cells()
                .into_iter()
                .map(|c| c.into_iter().map(|i| slot[i]).collect())
                .collect();
            let residual = sol
                .areas
                .iter()
                .zip(p.targets().values())
                .map(|(w, a)| (w - a).abs())
                .fold(0.0, f64::max);
            Ok(SolveOutcome {
                solution: SolutionFile::Dmae(DmaeSolutionFile {
                    heights: sol.heights,
                    dual_vertices,
                    cells,
                    areas: sol.areas,
                    residual,
                    iterations: sol.iterations,
                    converged: sol.converged,
                    problem: embedded,
                }),
                log: sol.log,
                termination: sol.termination,
            })
        }
    }
}

#[derive(Serialize)]
struct LogRow {
    iter: usize,
    residual_inf: f64,
    step_alpha: f64,
    min_cell_measure: f64,
    energy_value: f64,
}

pub fn write_log(path: &Path, log: &[IterationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in log {
        w.serialize(LogRow {
            iter: r.iter,
            residual_inf: r.residual_inf,
            step_alpha: r.step_alpha,
            min_cell_measure: r.min_cell_measure,
            energy_value: r.energy_value,
        })?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
