use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use alexot::format::{read_json, write_json, ProblemFile, SolutionFile};
use alexot::gen::{gen_dmae, gen_ot, SigmaChoice};
use alexot::render::{render_svg, RenderOptions, Scene};
use alexot::solve::{solve_file, write_log};
use alexot::verify::{verify, VerifyOptions};
use alexot::{init_threads, thread_count, CliError, Result};
use alexot_core::Termination;
use clap::{Parser, Subcommand, ValueEnum};
use log::info;

const EXIT_INPUT: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_CHECK_FAILED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "alexot",
    version,
    about = "Semi-discrete optimal transport and discrete Monge-Ampere solver"
)]
struct Cli {
    /// Worker threads for cell construction; ALEXOT_THREADS takes precedence.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and write the solution JSON.
    Solve {
        input: PathBuf,
        /// Solution path; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Convergence log as CSV.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Draw a solution as SVG.
    Render {
        solution: PathBuf,
        /// SVG path; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Segments between sites of adjacent cells.
        #[arg(long)]
        dual: bool,
        /// Segments from cell centroids to their sites.
        #[arg(long)]
        arrows: bool,
    },
    /// Check a solution against independent oracles.
    Verify {
        solution: PathBuf,
        /// Report path; standard output when omitted.
        #[arg(short, long)]
        report: Option<PathBuf>,
        /// Finite-difference gradient and Hessian.
        #[arg(long)]
        fd: bool,
        /// Monte-Carlo cell masses.
        #[arg(long)]
        mc: bool,
        /// Grid transport LP.
        #[arg(long)]
        lp: bool,
        /// Random strip exchanges between adjacent cells.
        #[arg(long)]
        partition: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-6)]
        fd_step: f64,
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        /// LP grid resolution per side.
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Write a seeded random problem file.
    Gen {
        #[arg(long, value_enum, default_value_t = Kind::Ot)]
        kind: Kind,
        /// Transport sites, or interior points of a Dirichlet problem.
        #[arg(long, default_value_t = 10)]
        sites: usize,
        /// Boundary points of a Dirichlet problem.
        #[arg(long, default_value_t = 6)]
        boundary: usize,
        #[arg(long, value_enum, default_value_t = Sigma::Uniform)]
        sigma: Sigma,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Ot,
    Dmae,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sigma {
    Uniform,
    Affine,
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn emit_json<T: serde::Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    match path {
        Some(p) => write_json(p, value),
        None => {
            let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Invalid(e.to_string()))?;
            emit(None, &format!("{text}\n"))
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Solve {
            input,
            output,
            log,
            tol,
            max_iters,
        } => {
            let mut file: ProblemFile = read_json(&input)?;
            let mut overrides = file.solver.unwrap_or_default();
            overrides.tol = tol.or(overrides.tol);
            overrides.max_iters = max_iters.or(overrides.max_iters);
            file.solver = (overrides != Default::default()).then_some(overrides);
            let outcome = solve_file(&file, input.parent())?;
            emit_json(output.as_deref(), &outcome.solution)?;
            if let Some(p) = log {
                write_log(&p, &outcome.log)?;
            }
            info!(
                "termination: {:?} after {} iterations",
                outcome.termination,
                outcome.log.len().saturating_sub(1)
            );
            Ok(match outcome.termination {
                Termination::Converged => 0,
                Termination::MaxItersExceeded | Termination::StepTooSmall => {
                    eprintln!("alexot: solver stopped without converging ({:?})", outcome.termination);
                    EXIT_NOT_CONVERGED
                }
            })
        }
        Command::Render {
            solution,
            output,
            dual,
            arrows,
        } => {
            let sol: SolutionFile = read_json(&solution)?;
            let scene = Scene::from_solution(&sol)?;
            emit(output.as_deref(), &render_svg(&scene, RenderOptions { dual, arrows }))?;
            Ok(0)
        }
        Command::Verify {
            solution,
            report,
            fd,
            mc,
            lp,
            partition,
            seed,
            fd_step,
            samples,
            grid,
            trials,
        } => {
            let sol: SolutionFile = read_json(&solution)?;
            let opts = VerifyOptions {
                fd,
                mc,
                lp,
                partition,
                seed,
                fd_step,
                mc_samples: samples,
                lp_grid: grid,
                partition_trials: trials,
            };
            let rep = verify(&sol, &opts)?;
            for c in rep.checks.iter().filter(|c| !c.pass) {
                eprintln!("alexot: check {} failed: {:e} > {:e}", c.name, c.value, c.bound);
            }
            emit_json(report.as_deref(), &rep)?;
            Ok(if rep.pass { 0 } else { EXIT_CHECK_FAILED })
        }
        Command::Gen {
            kind,
            sites,
            boundary,
            sigma,
            seed,
            output,
        } => {
            let file = match kind {
                Kind::Ot => {
                    let sigma = match sigma {
                        Sigma::Uniform => SigmaChoice::Uniform,
                        Sigma::Affine => SigmaChoice::Affine,
                    };
                    gen_ot(sites, sigma, seed)
                }
                Kind::Dmae => gen_dmae(boundary, sites, seed),
            };
            emit_json(output.as_deref(), &file)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    if let Err(e) = thread_count(cli.threads).and_then(init_threads) {
        eprintln!("alexot: {e}");
        return ExitCode::from(EXIT_INPUT);
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("alexot: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
