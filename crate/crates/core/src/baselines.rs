//! Reference schemes: centred LEDs (LCA), the alternating solver without
//! the uniformity constraint (LXYO), and an exhaustive search over the
//! symmetric grid spacings.

use rayon::prelude::*;

use crate::error::{PlacementError, Result};
use crate::report::{Algorithm, PlacementSolution};
use crate::scene::{Axis, LedLayout, Scenario};
pub use crate::solver::lxyu::lxyo;
use crate::solver::lxyu::{associate_layout, layout_cv, settle_powers};

/// LEDs at their sub-area centres with minimum feasible powers. Like LXYO
/// it ignores the uniformity threshold, so feasibility covers rate and
/// illuminance only.
pub fn lca(scenario: &Scenario) -> Result<PlacementSolution> {
    scenario.validate()?;
    let start = LedLayout::centered(&scenario.room, 1.0);
    let assoc = associate_layout(scenario, &start)?;
    let layout = settle_powers(scenario, &start, &assoc)?;
    Ok(PlacementSolution::evaluate(scenario, Algorithm::Lca, &layout, &assoc, None))
}

fn candidate_spacings(scenario: &Scenario, axis: Axis, step: f64) -> Vec<f64> {
    let max = scenario.room.max_spacing(axis);
    if max == 0.0 {
        return vec![0.0];
    }
    let n = (max / step * (1.0 + 1e-12)).floor() as usize;
    (0..=n).map(|k| (k as f64 * step).min(max)).collect()
}

struct Candidate {
    lx: f64,
    ly: f64,
    layout: LedLayout,
    assoc: crate::solver::Association,
}

fn evaluate_candidate(scenario: &Scenario, lx: f64, ly: f64) -> Option<Candidate> {
    let start = LedLayout::symmetric(&scenario.room, lx, ly, 1.0).ok()?;
    let assoc = associate_layout(scenario, &start).ok()?;
    let layout = settle_powers(scenario, &start, &assoc).ok()?;
    if layout_cv(scenario, &layout) > scenario.uniformity_max {
        return None;
    }
    Some(Candidate { lx, ly, layout, assoc })
}

/// Minimum-ΣP symmetric layout over the spacing grid {0, step, …}², ties
/// going to the lexicographically smallest (L_x, L_y).
pub fn oracle_grid_search(scenario: &Scenario, step: f64) -> Result<PlacementSolution> {
    scenario.validate()?;
    if !(step.is_finite() && step > 0.0) {
        return Err(PlacementError::config("oracle_step", format!("must be finite and > 0, got {step}")));
    }
    let xs = candidate_spacings(scenario, Axis::X, step);
    let ys = candidate_spacings(scenario, Axis::Y, step);
    let grid: Vec<(f64, f64)> = xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect();
    let candidates = grid.len();
    let best = grid
        .into_par_iter()
        .filter_map(|(lx, ly)| evaluate_candidate(scenario, lx, ly))
        .reduce_with(|a, b| {
            let key = |c: &Candidate| (c.layout.sum_power(), c.lx, c.ly);
            if key(&b).partial_cmp(&key(&a)) == Some(std::cmp::Ordering::Less) {
                b
            } else {
                a
            }
        })
        .ok_or_else(|| {
            PlacementError::NoFeasibleCandidate(format!(
                "none of the {candidates} spacing candidates meets every constraint with CV(RMSE) <= {}",
                scenario.uniformity_max
            ))
        })?;
    let max_u = scenario.uniformity_max.is_finite().then_some(scenario.uniformity_max);
    let mut report = PlacementSolution::evaluate(scenario, Algorithm::Oracle, &best.layout, &best.assoc, max_u);
    report.iterations.candidates = candidates;
    Ok(report)
}
