//! Alternating placement driver.
//!
//! Starting from the centred layout, each outer iteration re-associates the
//! receivers, runs LXO until the layout meets the uniformity threshold
//! (recomputing the admissible x-range from the current powers after every
//! pass), then does the same along y. Outer iterations stop once ΣP stops
//! changing. Only iterates that satisfy the threshold are accepted, so the
//! reported ΣP never increases from one accepted iterate to the next.

use super::association::{associate, Association};
use super::axis::{coverage_range, optimize_axis};
use super::power::minimum_powers;
use super::SolverConfig;
use crate::error::{PlacementError, Result};
use crate::photometrics::{illuminance_field, GainMatrix};
use crate::report::{Algorithm, IterationStats, PlacementSolution, RangesReport, SolveStatus};
use crate::scene::{Axis, LedLayout, Scenario};
use crate::uniformity::{feasible_spacing_range, FeasibleRanges, IntervalUnion, SpacingCv};

/// Full LXYU run with the scenario's uniformity threshold.
///
/// The unconstrained alternation runs first; when its result already meets
/// the threshold it is returned as is, since a relaxation's solution that
/// satisfies the dropped constraint solves the constrained problem too.
/// Otherwise the range-constrained alternation runs.
pub fn lxyu(scenario: &Scenario, config: &SolverConfig) -> Result<PlacementSolution> {
    config.validate()?;
    let threshold = scenario.uniformity_max;
    let relaxed = alternate(scenario, config, f64::INFINITY)?;
    let relaxed_cv = relaxed.best.as_ref().map_or(f64::INFINITY, |(l, _)| layout_cv(scenario, l));
    if !threshold.is_finite() || relaxed_cv <= threshold {
        return finish(scenario, config, Algorithm::Lxyu, threshold, relaxed);
    }
    let mut run = alternate(scenario, config, threshold)?;
    run.tightest_cv = run.tightest_cv.min(relaxed_cv);
    run.stats.outer += relaxed.stats.outer;
    run.stats.axis_rounds += relaxed.stats.axis_rounds;
    run.stats.sweeps += relaxed.stats.sweeps;
    run.stats.dual_iterations += relaxed.stats.dual_iterations;
    run.stats.dual_unconverged += relaxed.stats.dual_unconverged;
    finish(scenario, config, Algorithm::Lxyu, threshold, run)
}

/// The alternation with the uniformity threshold ignored.
pub fn lxyo(scenario: &Scenario, config: &SolverConfig) -> Result<PlacementSolution> {
    config.validate()?;
    let run = alternate(scenario, config, f64::INFINITY)?;
    finish(scenario, config, Algorithm::Lxyo, f64::INFINITY, run)
}

/// Minimum powers at the layout's positions for a fixed association.
pub fn settle_powers(scenario: &Scenario, layout: &LedLayout, assoc: &Association) -> Result<LedLayout> {
    let gains = GainMatrix::build(&layout.positions, &scenario.receiver_positions(), &scenario.physical);
    let start = vec![0.0; layout.powers.len()];
    let fp = minimum_powers(&gains, assoc, &scenario.receivers, &scenario.physical, &start)?;
    Ok(LedLayout {
        powers: fp.powers,
        ..layout.clone()
    })
}

/// Association of the layout's receivers by strongest received signal.
pub fn associate_layout(scenario: &Scenario, layout: &LedLayout) -> Result<Association> {
    let gains = GainMatrix::build(&layout.positions, &scenario.receiver_positions(), &scenario.physical);
    associate(&layout.powers, &gains, &scenario.receivers, &scenario.physical)
}

pub fn layout_cv(scenario: &Scenario, layout: &LedLayout) -> f64 {
    let gains = GainMatrix::build(&layout.positions, &scenario.receiver_positions(), &scenario.physical);
    illuminance_field(&layout.powers, &gains, &scenario.physical).cv_or_inf()
}

/// Admissible spacings along `axis` for the layout's current powers.
pub fn axis_ranges(
    scenario: &Scenario,
    layout: &LedLayout,
    axis: Axis,
    threshold: f64,
    config: &SolverConfig,
) -> FeasibleRanges {
    let pts = scenario.receiver_positions();
    let cv = SpacingCv::new(&scenario.room, &scenario.physical, &pts, &layout.powers);
    feasible_spacing_range(
        &cv,
        axis,
        layout.spacing(axis.other()),
        threshold,
        config.scan_points,
        config.bisection_tol,
    )
}

/// First-iteration range of LED 1's coordinate: its own sub-area.
fn initial_range(scenario: &Scenario, axis: Axis) -> IntervalUnion {
    let room = &scenario.room;
    let e = room.extent(axis);
    let n = room.count_along(axis);
    if n < 2 {
        IntervalUnion::single(e / 2.0, e / 2.0)
    } else {
        IntervalUnion::single(0.0, e / n as f64)
    }
}

fn full_range(scenario: &Scenario, axis: Axis) -> IntervalUnion {
    let e = scenario.room.extent(axis);
    if scenario.room.count_along(axis) < 2 {
        IntervalUnion::single(e / 2.0, e / 2.0)
    } else {
        IntervalUnion::single(0.0, e / 2.0)
    }
}

struct Phase<'a> {
    scenario: &'a Scenario,
    config: &'a SolverConfig,
    threshold: f64,
    stats: IterationStats,
    tightest_cv: f64,
}

impl Phase<'_> {
    /// Admissible coordinates of LED 1 along `axis` for the layout's current
    /// powers. When no spacing meets the threshold the set collapses to the
    /// most uniform spacing along the axis.
    fn refresh(&mut self, layout: &LedLayout, axis: Axis) -> (IntervalUnion, FeasibleRanges) {
        let fr = axis_ranges(self.scenario, layout, axis, self.threshold, self.config);
        self.tightest_cv = self.tightest_cv.min(fr.tightest_cv);
        let ranges = if !self.threshold.is_finite() {
            full_range(self.scenario, axis)
        } else if fr.spacing.is_empty() {
            let x = self.scenario.room.first_from_spacing(axis, fr.tightest_spacing);
            IntervalUnion::single(x, x)
        } else {
            fr.coordinate.clone()
        };
        (ranges, fr)
    }

    /// LXO/LYO rounds along `axis` until the layout meets the threshold.
    fn run(
        &mut self,
        axis: Axis,
        max_rounds: usize,
        layout: LedLayout,
        assoc: &Association,
        ranges: &mut IntervalUnion,
        last_ranges: &mut Option<FeasibleRanges>,
    ) -> Result<LedLayout> {
        let scenario = self.scenario;
        let enforce = self.threshold.is_finite();
        let mut layout = layout;
        let mut collapsed = false;
        for _ in 0..max_rounds {
            self.stats.axis_rounds += 1;
            let mut allowed = admissible(scenario, &layout, assoc, axis, ranges);
            if allowed.is_empty() {
                let here = layout.positions[0].coord(axis);
                allowed = IntervalUnion::single(here, here);
            }
            let out = optimize_axis(scenario, &layout, assoc, axis, &allowed, self.config)?;
            self.stats.sweeps += out.sweeps;
            self.stats.dual_iterations += out.dual_iterations;
            self.stats.dual_unconverged += out.dual_unconverged;
            layout = out.layout;

            let (next, fr) = self.refresh(&layout, axis);
            collapsed |= fr.spacing.is_empty();
            *ranges = next;
            *last_ranges = Some(fr);
            if !enforce || layout_cv(scenario, &layout) <= self.threshold {
                return Ok(layout);
            }
            if collapsed && allowed.intervals().len() == 1 && allowed.intervals()[0].0 == allowed.intervals()[0].1 {
                // Already at the most uniform spacing this axis offers.
                return Ok(layout);
            }
        }
        // Still above the threshold: move onto the admissible set and settle
        // the powers, re-deriving the set from the new powers each time.
        for _ in 0..max_rounds {
            let allowed = admissible(scenario, &layout, assoc, axis, ranges);
            let Some(first) = allowed.nearest(layout.positions[0].coord(axis)) else {
                break;
            };
            let spacing = scenario
                .room
                .spacing_from_first(axis, first)
                .clamp(0.0, scenario.room.max_spacing(axis));
            layout = settle_powers(scenario, &layout.with_spacing(&scenario.room, axis, spacing)?, assoc)?;
            let (next, fr) = self.refresh(&layout, axis);
            *ranges = next;
            *last_ranges = Some(fr);
            if layout_cv(scenario, &layout) <= self.threshold {
                break;
            }
        }
        Ok(layout)
    }
}

fn admissible(
    scenario: &Scenario,
    layout: &LedLayout,
    assoc: &Association,
    axis: Axis,
    ranges: &IntervalUnion,
) -> IntervalUnion {
    match coverage_range(scenario, &layout.positions, assoc, axis).intervals().first() {
        Some(&(lo, hi)) => ranges.intersect(lo, hi),
        None => IntervalUnion::empty(),
    }
}

pub(crate) struct Run {
    best: Option<(LedLayout, Association)>,
    stats: IterationStats,
    trajectory: Vec<f64>,
    ranges: Option<(FeasibleRanges, FeasibleRanges)>,
    converged: bool,
    tightest_cv: f64,
}

/// Alternating LXO/LYO passes, with uniformity ranges when `threshold` is
/// finite.
pub(crate) fn alternate(scenario: &Scenario, config: &SolverConfig, threshold: f64) -> Result<Run> {
    let enforce = threshold.is_finite();
    let start = LedLayout::centered(&scenario.room, 1.0);
    let mut assoc = associate_layout(scenario, &start)?;
    let mut layout = settle_powers(scenario, &start, &assoc)?;

    let mut phase = Phase {
        scenario,
        config,
        threshold,
        stats: IterationStats::default(),
        tightest_cv: f64::INFINITY,
    };
    let accept = |l: &LedLayout| !enforce || layout_cv(scenario, l) <= threshold;
    let mut best: Option<(LedLayout, Association)> = accept(&layout).then(|| (layout.clone(), assoc.clone()));
    let mut trajectory: Vec<f64> = best.iter().map(|(l, _)| l.sum_power()).collect();

    let (mut ranges_x, mut ranges_y) = if enforce {
        (initial_range(scenario, Axis::X), initial_range(scenario, Axis::Y))
    } else {
        (full_range(scenario, Axis::X), full_range(scenario, Axis::Y))
    };
    let mut last_x = None;
    let mut last_y = None;
    let mut previous = layout.sum_power();
    let mut previous_spacing = (layout.spacing_x_m, layout.spacing_y_m);
    let mut converged = false;

    while phase.stats.outer < config.max_outer {
        phase.stats.outer += 1;
        if phase.stats.outer > 1 {
            assoc = associate_layout(scenario, &layout)?;
            layout = settle_powers(scenario, &layout, &assoc)?;
            ranges_x = phase.refresh(&layout, Axis::X).0;
        }
        layout = phase.run(Axis::X, config.max_x_rounds, layout, &assoc, &mut ranges_x, &mut last_x)?;
        if phase.stats.outer > 1 {
            ranges_y = phase.refresh(&layout, Axis::Y).0;
        }
        layout = phase.run(Axis::Y, config.max_y_rounds, layout, &assoc, &mut ranges_y, &mut last_y)?;

        let sum = layout.sum_power();
        let ok = accept(&layout);
        if ok && best.as_ref().map_or(true, |(b, _)| sum < b.sum_power()) {
            best = Some((layout.clone(), assoc.clone()));
        }
        if let Some((b, _)) = &best {
            trajectory.push(b.sum_power());
        }
        let stalled = (sum - previous).abs() <= config.power_tol * sum;
        if stalled && ok {
            converged = true;
            break;
        }
        if stalled && !ok && (layout.spacing_x_m, layout.spacing_y_m) == previous_spacing {
            // Stuck above the threshold.
            break;
        }
        previous = sum;
        previous_spacing = (layout.spacing_x_m, layout.spacing_y_m);
    }

    let ranges = match (last_x, last_y) {
        (Some(x), Some(y)) => Some((x, y)),
        _ => None,
    };
    Ok(Run {
        best,
        stats: phase.stats,
        trajectory,
        ranges,
        converged,
        tightest_cv: phase.tightest_cv,
    })
}

fn finish(
    scenario: &Scenario,
    config: &SolverConfig,
    algorithm: Algorithm,
    threshold: f64,
    run: Run,
) -> Result<PlacementSolution> {
    let Some((layout, assoc)) = run.best else {
        return Err(PlacementError::UniformityInfeasible {
            threshold,
            tightest_cv: run.tightest_cv,
        });
    };
    let enforce = threshold.is_finite();
    let mut report = PlacementSolution::evaluate(scenario, algorithm, &layout, &assoc, enforce.then_some(threshold));
    report.iterations = run.stats;
    report.sum_power_trajectory = run.trajectory;
    report.initial_multiplier = Some(config.dual.initial_multiplier);
    if enforce {
        let x = axis_ranges(scenario, &layout, Axis::X, threshold, config);
        let y = axis_ranges(scenario, &layout, Axis::Y, threshold, config);
        report.feasible_ranges = Some(RangesReport::from_ranges(&x, &y));
    } else if let Some((x, y)) = &run.ranges {
        report.feasible_ranges = Some(RangesReport::from_ranges(x, y));
    }
    if !run.converged {
        report.status = SolveStatus::IterationLimit;
        report.warnings.push(format!(
            "sum power did not converge within {} outer iterations; best accepted iterate reported",
            config.max_outer
        ));
    }
    Ok(report)
}
