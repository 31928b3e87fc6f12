//! Solution report shared by every algorithm.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{PlacementError, Result};
use crate::format::round9;
use crate::photometrics::{capacity, illuminance_field, GainMatrix};
use crate::scene::{LedLayout, Scenario};
use crate::solver::Association;
use crate::uniformity::FeasibleRanges;

pub const REPORT_SCHEMA: &str = "vlc-placement.solution/v1";

/// Slack on rate and illuminance requirements when judging feasibility.
pub const CONSTRAINT_TOL: f64 = 1e-6;
/// Slack on the CV(RMSE) threshold when judging feasibility.
pub const CV_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Lca,
    Lxyo,
    Lxyu,
    Oracle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Lca, Algorithm::Lxyo, Algorithm::Lxyu, Algorithm::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Lca => "lca",
            Algorithm::Lxyo => "lxyo",
            Algorithm::Lxyu => "lxyu",
            Algorithm::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = PlacementError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s.to_ascii_lowercase())
            .ok_or_else(|| PlacementError::config("algorithm", format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedReport {
    /// 1-based LED index.
    pub index: usize,
    pub x_m: f64,
    pub y_m: f64,
    pub power: f64,
    /// 1-based indices of the receivers this LED serves.
    pub served: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceiverReport {
    pub index: usize,
    pub x_m: f64,
    pub y_m: f64,
    pub serving_led: usize,
    pub rate: f64,
    pub rate_min: f64,
    pub illuminance: f64,
    pub illum_min: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub outer: usize,
    pub axis_rounds: usize,
    pub sweeps: usize,
    pub dual_iterations: usize,
    pub dual_unconverged: usize,
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangesReport {
    pub spacing_x: Vec<(f64, f64)>,
    pub spacing_y: Vec<(f64, f64)>,
}

impl RangesReport {
    pub fn from_ranges(x: &FeasibleRanges, y: &FeasibleRanges) -> Self {
        Self {
            spacing_x: x.spacing.intervals().to_vec(),
            spacing_y: y.spacing.intervals().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementSolution {
    pub schema: String,
    pub algorithm: Algorithm,
    pub status: SolveStatus,
    pub spacing_x_m: f64,
    pub spacing_y_m: f64,
    pub leds: Vec<LedReport>,
    pub receivers: Vec<ReceiverReport>,
    pub sum_power: f64,
    /// `None` when the field is dark everywhere.
    pub cv_rmse: Option<f64>,
    /// `None` when uniformity is unconstrained.
    pub uniformity_max: Option<f64>,
    /// Every rate, illuminance and (when constrained) uniformity requirement
    /// holds within tolerance.
    pub feasible: bool,
    pub iterations: IterationStats,
    /// ΣP of the accepted iterate after each outer iteration.
    pub sum_power_trajectory: Vec<f64>,
    /// Admissible spacings along each axis for the reported powers: the
    /// uniformity threshold's ranges when it is finite, the full range otherwise.
    pub feasible_ranges: Option<RangesReport>,
    pub initial_multiplier: Option<f64>,
    pub warnings: Vec<String>,
}

impl PlacementSolution {
    /// Evaluates a layout against the scenario and assembles the report.
    /// Uniformity is judged against `uniformity_max`, not the scenario.
    pub fn evaluate(
        scenario: &Scenario,
        algorithm: Algorithm,
        layout: &LedLayout,
        assoc: &Association,
        uniformity_max: Option<f64>,
    ) -> Self {
        let params = &scenario.physical;
        let pts = scenario.receiver_positions();
        let gains = GainMatrix::build(&layout.positions, &pts, params);
        let field = illuminance_field(&layout.powers, &gains, params);
        let receivers: Vec<ReceiverReport> = scenario
            .receivers
            .iter()
            .enumerate()
            .map(|(j, r)| {
                let led = assoc.server(j);
                let rate = capacity(led, j, &layout.powers, &gains, params);
                let eta = field.per_receiver[j];
                ReceiverReport {
                    index: j + 1,
                    x_m: r.x_m,
                    y_m: r.y_m,
                    serving_led: led + 1,
                    rate,
                    rate_min: r.rate_min,
                    illuminance: eta,
                    illum_min: r.illum_min,
                    satisfied: rate >= r.rate_min - CONSTRAINT_TOL && eta >= r.illum_min - CONSTRAINT_TOL,
                }
            })
            .collect();
        let leds = layout
            .positions
            .iter()
            .zip(&layout.powers)
            .enumerate()
            .map(|(i, (p, &power))| LedReport {
                index: i + 1,
                x_m: p.x,
                y_m: p.y,
                power,
                served: assoc.served_by(i).iter().map(|j| j + 1).collect(),
            })
            .collect();
        let uniform_ok = match (uniformity_max, field.cv_rmse) {
            (None, _) => true,
            (Some(u), Some(cv)) => cv <= u + CV_TOL,
            (Some(_), None) => false,
        };
        let feasible = uniform_ok && receivers.iter().all(|r| r.satisfied);
        Self {
            schema: REPORT_SCHEMA.to_string(),
            algorithm,
            status: SolveStatus::Converged,
            spacing_x_m: layout.spacing_x_m,
            spacing_y_m: layout.spacing_y_m,
            leds,
            receivers,
            sum_power: layout.sum_power(),
            cv_rmse: field.cv_rmse,
            uniformity_max,
            feasible,
            iterations: IterationStats::default(),
            sum_power_trajectory: Vec::new(),
            feasible_ranges: None,
            initial_multiplier: None,
            warnings: Vec::new(),
        }
    }

    pub fn cv(&self) -> f64 {
        self.cv_rmse.unwrap_or(f64::INFINITY)
    }

    pub fn powers(&self) -> Vec<f64> {
        self.leds.iter().map(|l| l.power).collect()
    }

    /// JSON report with every float rounded to nine significant digits.
    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        round_numbers(&mut v);
        let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
        s.push('\n');
        s
    }
}

fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round9).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}
