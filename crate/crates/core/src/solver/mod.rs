//! Iterative placement solver: per-LED Lagrange-dual subproblems swept over
//! the grid (LXO along x, LYO along y) and the alternating LXYU driver that
//! interleaves them with the uniformity ranges.

pub mod association;
pub mod axis;
pub mod dual;
pub mod factors;
pub mod lxyu;
pub mod power;

use serde::{Deserialize, Serialize};

pub use association::{associate, Association};
pub use axis::{coverage_range, lxo, lyo, optimize_axis, AxisOutcome};
pub use dual::{
    clamp_coordinate, kkt_coordinate, kkt_power, solve_subproblem, subgradient_step, DualConfig, DualOutcome,
    DualState, StepSchedule, Subproblem,
};
pub use factors::{constraint_factors, ConstraintFactors};
pub use lxyu::lxyu;
pub use power::{minimum_powers, required_power_comm, required_power_illum, FixedPointPowers};

use crate::uniformity::{DEFAULT_BISECTION_TOL, DEFAULT_SCAN_POINTS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Outer LXYU iterations (S₁).
    pub max_outer: usize,
    /// LXO + uniformity-range rounds per outer iteration (S₂).
    pub max_x_rounds: usize,
    /// LYO + uniformity-range rounds per outer iteration (S₃).
    pub max_y_rounds: usize,
    /// Sweeps over all LEDs inside one LXO/LYO call.
    pub max_sweeps: usize,
    pub dual: DualConfig,
    /// Relative change of ΣP treated as converged.
    pub power_tol: f64,
    pub bisection_tol: f64,
    pub scan_points: usize,
    /// Grid step of the exhaustive spacing search, metres.
    pub oracle_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_outer: 50,
            max_x_rounds: 20,
            max_y_rounds: 20,
            max_sweeps: 30,
            dual: DualConfig::default(),
            power_tol: 1e-6,
            bisection_tol: DEFAULT_BISECTION_TOL,
            scan_points: DEFAULT_SCAN_POINTS,
            oracle_step: 0.05,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> crate::Result<()> {
        use crate::error::PlacementError;
        let counts = [
            ("max_outer", self.max_outer),
            ("max_x_rounds", self.max_x_rounds),
            ("max_y_rounds", self.max_y_rounds),
            ("max_sweeps", self.max_sweeps),
            ("max_dual_iters", self.dual.max_iterations),
        ];
        for (field, v) in counts {
            if v == 0 {
                return Err(PlacementError::config(field, "must be >= 1"));
            }
        }
        if self.scan_points < 2 {
            return Err(PlacementError::config("scan_points", "must be >= 2"));
        }
        let positive = [
            ("gamma", self.dual.gamma),
            ("power_tol", self.power_tol),
            ("bisection_tol", self.bisection_tol),
            ("oracle_step", self.oracle_step),
            ("dual_gap_tol", self.dual.gap_tol),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(PlacementError::config(field, format!("must be finite and > 0, got {v}")));
            }
        }
        if !(self.dual.initial_multiplier.is_finite() && self.dual.initial_multiplier > 0.0) {
            return Err(PlacementError::config("initial_multiplier", "must be > 0"));
        }
        Ok(())
    }
}
