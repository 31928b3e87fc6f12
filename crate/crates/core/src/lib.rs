//! Power-minimizing placement of ceiling LEDs for indoor visible light
//! communication.
//!
//! LEDs sit on a symmetric `M × N` grid described by two spacings. The
//! solver chooses spacings and per-LED optical powers that minimize total
//! power while every receiver gets its data rate and illuminance and the
//! illuminance field stays within a CV(RMSE) uniformity threshold.

pub mod baselines;
pub mod config;
pub mod error;
pub mod experiment;
pub mod format;
pub mod photometrics;
pub mod report;
pub mod scene;
pub mod solver;
pub mod uniformity;

pub use baselines::{lca, lxyo, oracle_grid_search};
pub use error::{PlacementError, Result};
pub use report::{Algorithm, PlacementSolution, SolveStatus};
pub use scene::{Axis, LedLayout, PhysicalParams, Point, Receiver, RoomConfig, Scenario};
pub use solver::{lxyu, SolverConfig};
