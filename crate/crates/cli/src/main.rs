//! `vlcplace`: solve, sweep, heatmap and compare commands over a TOML
//! experiment config.
//!
//! Exit codes: 0 success, 2 bad input (unreadable or invalid config or
//! arguments), 3 infeasible instance, 4 solver stopped on an iteration limit.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use vlc_placement::config::{self, ExperimentConfig};
use vlc_placement::experiment::{self, SweepAxis, COMPARE_ALGORITHMS};
use vlc_placement::{Algorithm, PlacementError, PlacementSolution, SolveStatus};

const EXIT_INPUT: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_NOT_CONVERGED: u8 = 4;

#[derive(Parser)]
#[command(name = "vlcplace", version, about = "LED placement for indoor visible light communication")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and write the JSON report.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "lxyu")]
        algorithm: Algorithm,
    },
    /// Sweep one requirement and write a CSV row per (value, algorithm).
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        axis: SweepAxis,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        steps: usize,
        /// Repeat or comma-separate; defaults to lca, lxyo, lxyu.
        #[arg(long, value_delimiter = ',')]
        algorithm: Vec<Algorithm>,
    },
    /// Solve, then sample the illuminance over a resolution × resolution
    /// floor grid as CSV.
    Heatmap {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "lxyu")]
        algorithm: Algorithm,
        #[arg(long, default_value_t = 50)]
        resolution: usize,
    },
    /// Run lca, lxyo and lxyu and tabulate ΣP, CV and savings against LCA.
    Compare {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Accepted for harness compatibility; every solver is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Initial subgradient step size.
    #[arg(long)]
    gamma: Option<f64>,
    /// Outer alternating iterations.
    #[arg(long)]
    max_outer: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, PlacementError> {
        let mut cfg = config::load(&self.config)?;
        if let Some(g) = self.gamma {
            cfg.solver.dual.gamma = g;
        }
        if let Some(n) = self.max_outer {
            cfg.solver.max_outer = n;
        }
        cfg.solver.validate()?;
        Ok(cfg)
    }
}

fn open_out(out: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn error_code(e: &PlacementError) -> u8 {
    if e.is_infeasibility() {
        EXIT_INFEASIBLE
    } else {
        EXIT_INPUT
    }
}

fn solution_code(s: &PlacementSolution) -> u8 {
    if s.status == SolveStatus::IterationLimit {
        EXIT_NOT_CONVERGED
    } else if !s.feasible {
        EXIT_INFEASIBLE
    } else {
        0
    }
}

fn fail(e: &PlacementError) -> u8 {
    eprintln!("error: {e}");
    error_code(e)
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Solve { common, algorithm } => {
            let cfg = match common.load() {
                Ok(c) => c,
                Err(e) => return Ok(fail(&e)),
            };
            match experiment::solve(algorithm, &cfg.scenario, &cfg.solver) {
                Ok(s) => {
                    for w in &s.warnings {
                        eprintln!("warning: {w}");
                    }
                    let mut out = open_out(common.out.as_deref())?;
                    out.write_all(s.to_json().as_bytes())?;
                    out.flush()?;
                    Ok(solution_code(&s))
                }
                Err(e) => Ok(fail(&e)),
            }
        }
        Command::Sweep {
            common,
            axis,
            from,
            to,
            steps,
            algorithm,
        } => {
            let cfg = match common.load() {
                Ok(c) => c,
                Err(e) => return Ok(fail(&e)),
            };
            let values = match experiment::sweep_values(from, to, steps) {
                Ok(v) => v,
                Err(e) => return Ok(fail(&e)),
            };
            let algorithms = if algorithm.is_empty() {
                COMPARE_ALGORITHMS.to_vec()
            } else {
                algorithm
            };
            let rows = experiment::run_sweep(&cfg.scenario, &cfg.solver, axis, &values, &algorithms);
            let mut out = open_out(common.out.as_deref())?;
            experiment::write_sweep_csv(&mut out, &rows)?;
            out.flush()?;
            Ok(0)
        }
        Command::Heatmap {
            common,
            algorithm,
            resolution,
        } => {
            let cfg = match common.load() {
                Ok(c) => c,
                Err(e) => return Ok(fail(&e)),
            };
            if resolution < 2 {
                eprintln!("error: invalid argument `resolution`: must be >= 2, got {resolution}");
                return Ok(EXIT_INPUT);
            }
            let solution = match experiment::solve(algorithm, &cfg.scenario, &cfg.solver) {
                Ok(s) => s,
                Err(e) => return Ok(fail(&e)),
            };
            let map = match experiment::solution_heatmap(&cfg.scenario, &solution, resolution) {
                Ok(m) => m,
                Err(e) => return Ok(fail(&e)),
            };
            let mut out = open_out(common.out.as_deref())?;
            map.write_csv(&mut out)?;
            out.flush()?;
            Ok(solution_code(&solution))
        }
        Command::Compare { common } => {
            let cfg = match common.load() {
                Ok(c) => c,
                Err(e) => return Ok(fail(&e)),
            };
            let rows = experiment::compare(&cfg.scenario, &cfg.solver, &COMPARE_ALGORITHMS);
            let mut out = open_out(common.out.as_deref())?;
            experiment::write_compare_table(&mut out, &rows)?;
            out.flush()?;
            let codes = rows.iter().map(|r| match &r.outcome {
                Ok(s) if s.status == SolveStatus::IterationLimit => EXIT_NOT_CONVERGED,
                Ok(_) => 0,
                Err(e) => error_code(e),
            });
            let codes: Vec<u8> = codes.collect();
            Ok(if codes.contains(&EXIT_INFEASIBLE) {
                EXIT_INFEASIBLE
            } else {
                codes.into_iter().max().unwrap_or(0)
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
