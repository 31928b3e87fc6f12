//! Parameter sweeps, algorithm comparison and heatmap export.
//!
//! Sweep CSV columns, in order:
//!
//! | column             | content                                                  |
//! |--------------------|----------------------------------------------------------|
//! | `axis`             | `rate`, `illum` or `uniformity`                          |
//! | `value`            | swept requirement                                        |
//! | `algorithm`        | `lca`, `lxyo`, `lxyu` or `oracle`                        |
//! | `status`           | `converged`, `iteration_limit`, `infeasible` or `error`  |
//! | `sum_power`        | ΣP, empty unless a solution was produced                 |
//! | `cv_rmse`          | CV(RMSE) of the solution, `inf` for a dark field         |
//! | `feasible`         | `true` when every requirement holds within tolerance     |
//! | `outer_iterations` | outer alternating iterations (0 for non-iterative runs)  |
//! | `dual_iterations`  | subgradient steps summed over all subproblems            |
//!
//! Rows are ordered by sweep value, then by the order algorithms were given.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::baselines::{lca, lxyo, oracle_grid_search};
use crate::error::{PlacementError, Result};
use crate::format::sig9;
use crate::photometrics::{heatmap, HeatmapSample, IlluminanceField};
use crate::report::{Algorithm, PlacementSolution, SolveStatus};
use crate::scene::{Point, Scenario};
use crate::solver::{lxyu, SolverConfig};

pub const SWEEP_HEADER: &str = "axis,value,algorithm,status,sum_power,cv_rmse,feasible,outer_iterations,dual_iterations";

/// Runs one algorithm on a scenario.
pub fn solve(algorithm: Algorithm, scenario: &Scenario, config: &SolverConfig) -> Result<PlacementSolution> {
    match algorithm {
        Algorithm::Lca => lca(scenario),
        Algorithm::Lxyo => lxyo(scenario, config),
        Algorithm::Lxyu => lxyu(scenario, config),
        Algorithm::Oracle => oracle_grid_search(scenario, config.oracle_step),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    Rate,
    Illum,
    Uniformity,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Rate => "rate",
            SweepAxis::Illum => "illum",
            SweepAxis::Uniformity => "uniformity",
        }
    }

    /// Copy of `base` with the swept requirement set to `value` on every
    /// receiver (or as the threshold).
    pub fn apply(self, base: &Scenario, value: f64) -> Scenario {
        let mut s = base.clone();
        match self {
            SweepAxis::Rate => s.receivers.iter_mut().for_each(|r| r.rate_min = value),
            SweepAxis::Illum => s.receivers.iter_mut().for_each(|r| r.illum_min = value),
            SweepAxis::Uniformity => s.uniformity_max = value,
        }
        s
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = PlacementError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rate" => Ok(SweepAxis::Rate),
            "illum" => Ok(SweepAxis::Illum),
            "uniformity" => Ok(SweepAxis::Uniformity),
            _ => Err(PlacementError::config("axis", format!("expected rate, illum or uniformity, got `{s}`"))),
        }
    }
}

/// `steps` evenly spaced values from `from` to `to`, both included.
pub fn sweep_values(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    if !(from.is_finite() && to.is_finite() && from < to) {
        return Err(PlacementError::config("from", format!("need finite from < to, got {from} and {to}")));
    }
    if steps < 2 {
        return Err(PlacementError::config("steps", format!("must be >= 2, got {steps}")));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|k| if k + 1 == steps { to } else { from + (to - from) * k as f64 / last })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: f64,
    pub algorithm: Algorithm,
    pub outcome: std::result::Result<PlacementSolution, PlacementError>,
}

impl SweepRow {
    pub fn status(&self) -> &'static str {
        match &self.outcome {
            Ok(r) if r.status == SolveStatus::Converged => "converged",
            Ok(_) => "iteration_limit",
            Err(e) if e.is_infeasibility() => "infeasible",
            Err(_) => "error",
        }
    }

    pub fn sum_power(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|r| r.sum_power)
    }

    pub fn csv_line(&self) -> String {
        let (sum, cv, feasible, outer, dual) = match &self.outcome {
            Ok(r) => (
                sig9(r.sum_power),
                sig9(r.cv()),
                r.feasible,
                r.iterations.outer,
                r.iterations.dual_iterations,
            ),
            Err(_) => (String::new(), String::new(), false, 0, 0),
        };
        format!(
            "{},{},{},{},{sum},{cv},{feasible},{outer},{dual}",
            self.axis,
            sig9(self.value),
            self.algorithm,
            self.status()
        )
    }
}

/// Solves every (value, algorithm) pair. Points run in parallel; rows come
/// back in sweep order.
pub fn run_sweep(
    base: &Scenario,
    config: &SolverConfig,
    axis: SweepAxis,
    values: &[f64],
    algorithms: &[Algorithm],
) -> Vec<SweepRow> {
    let jobs: Vec<(f64, Algorithm)> = values
        .iter()
        .flat_map(|&v| algorithms.iter().map(move |&a| (v, a)))
        .collect();
    jobs.into_par_iter()
        .map(|(value, algorithm)| SweepRow {
            axis,
            value,
            algorithm,
            outcome: solve(algorithm, &axis.apply(base, value), config),
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(mut w: W, rows: &[SweepRow]) -> Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.csv_line())?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub algorithm: Algorithm,
    pub outcome: std::result::Result<PlacementSolution, PlacementError>,
    /// Percentage of LCA's ΣP saved; `None` when either run failed.
    pub savings_pct: Option<f64>,
}

pub const COMPARE_ALGORITHMS: [Algorithm; 3] = [Algorithm::Lca, Algorithm::Lxyo, Algorithm::Lxyu];

pub fn compare(scenario: &Scenario, config: &SolverConfig, algorithms: &[Algorithm]) -> Vec<CompareRow> {
    let outcomes: Vec<_> = algorithms
        .par_iter()
        .map(|&a| (a, solve(a, scenario, config)))
        .collect();
    let lca_power = match outcomes.iter().find(|(a, _)| *a == Algorithm::Lca) {
        Some((_, Ok(r))) => Some(r.sum_power),
        Some((_, Err(_))) => None,
        None => lca(scenario).ok().map(|r| r.sum_power),
    };
    outcomes
        .into_iter()
        .map(|(algorithm, outcome)| {
            let savings_pct = match (&outcome, lca_power) {
                (Ok(r), Some(base)) => Some(savings_pct(base, r.sum_power)),
                _ => None,
            };
            CompareRow {
                algorithm,
                outcome,
                savings_pct,
            }
        })
        .collect()
}

pub fn savings_pct(baseline: f64, power: f64) -> f64 {
    100.0 * (baseline - power) / baseline
}

/// Fixed-width text table of a comparison.
pub fn write_compare_table<W: Write>(mut w: W, rows: &[CompareRow]) -> Result<()> {
    writeln!(
        w,
        "{:<9} {:<16} {:>16} {:>16} {:>9} {:>16}",
        "algorithm", "status", "sum_power", "cv_rmse", "feasible", "savings_vs_lca_%"
    )?;
    for r in rows {
        let (status, sum, cv, feasible) = match &r.outcome {
            Ok(s) => (
                match s.status {
                    SolveStatus::Converged => "converged".to_string(),
                    SolveStatus::IterationLimit => "iteration_limit".to_string(),
                },
                sig9(s.sum_power),
                sig9(s.cv()),
                s.feasible.to_string(),
            ),
            Err(e) => (
                if e.is_infeasibility() { "infeasible" } else { "error" }.to_string(),
                "-".into(),
                "-".into(),
                "false".into(),
            ),
        };
        let savings = r.savings_pct.map_or("-".to_string(), sig9);
        writeln!(
            w,
            "{:<9} {:<16} {:>16} {:>16} {:>9} {:>16}",
            r.algorithm.name(),
            status,
            sum,
            cv,
            feasible,
            savings
        )?;
        if let Err(e) = &r.outcome {
            writeln!(w, "  {}: {e}", r.algorithm)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub samples: Vec<HeatmapSample>,
    /// CV(RMSE) over the sampled grid.
    pub grid_cv: f64,
    pub solution: PlacementSolution,
}

pub fn solution_heatmap(scenario: &Scenario, solution: &PlacementSolution, resolution: usize) -> Result<Heatmap> {
    if resolution < 2 {
        return Err(PlacementError::config("resolution", format!("must be >= 2, got {resolution}")));
    }
    let leds: Vec<Point> = solution.leds.iter().map(|l| Point::new(l.x_m, l.y_m)).collect();
    let samples = heatmap(&scenario.room, &leds, &solution.powers(), &scenario.physical, resolution);
    let field = IlluminanceField::from_values(samples.iter().map(|s| s.illuminance).collect());
    Ok(Heatmap {
        samples,
        grid_cv: field.cv_or_inf(),
        solution: solution.clone(),
    })
}

impl Heatmap {
    pub fn header_comments(&self) -> Vec<String> {
        vec![
            format!("algorithm={}", self.solution.algorithm),
            format!("sum_power={}", sig9(self.solution.sum_power)),
            format!("cv_rmse_receivers={}", sig9(self.solution.cv())),
            format!("cv_rmse_grid={}", sig9(self.grid_cv)),
        ]
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        crate::photometrics::write_heatmap_csv(w, &self.samples, &self.header_comments())
    }
}
