//! One-axis coordinate optimization (LXO for x, LYO for y).
//!
//! Only the first LED's coordinate along the axis is free; the symmetric
//! grid then fixes every other LED's coordinate through the spacing. Each
//! sweep visits LEDs 1…K in order, rebuilding the constraint factors from
//! the latest powers and positions of all other LEDs.

use super::association::Association;
use super::dual::{solve_subproblem, Domain, Subproblem};
use super::factors::constraint_factors;
use super::power::minimum_powers;
use super::SolverConfig;
use crate::error::Result;
use crate::photometrics::GainMatrix;
use crate::scene::{Axis, LedLayout, Point, Scenario};
use crate::uniformity::IntervalUnion;

#[derive(Debug, Clone, PartialEq)]
pub struct AxisOutcome {
    pub layout: LedLayout,
    pub sweeps: usize,
    pub dual_iterations: usize,
    /// Subproblems that stopped on the iteration limit before the duality
    /// gap closed.
    pub dual_unconverged: usize,
    pub converged: bool,
}

/// Runs LXO (`Axis::X`) or LYO (`Axis::Y`). `ranges` restricts the first
/// LED's coordinate and must be non-empty when the axis has two or more
/// LEDs.
pub fn optimize_axis(
    scenario: &Scenario,
    layout: &LedLayout,
    assoc: &Association,
    axis: Axis,
    ranges: &IntervalUnion,
    config: &SolverConfig,
) -> Result<AxisOutcome> {
    let room = &scenario.room;
    let params = &scenario.physical;
    let receivers = &scenario.receivers;
    let rx_pts = scenario.receiver_positions();
    let m = params.lambert_order();
    let h2 = params.height_m * params.height_m;
    let free_axis = room.count_along(axis) >= 2;

    let mut layout = layout.clone();
    let mut gains = GainMatrix::build(&layout.positions, &rx_pts, params);
    let mut dual_iterations = 0;
    let mut dual_unconverged = 0;
    let mut converged = false;
    let mut sweeps = 0;

    while sweeps < config.max_sweeps {
        sweeps += 1;
        let previous = layout.sum_power();
        for i in 0..room.led_count() {
            let served = assoc.served_by(i);
            let pos = layout.positions[i];
            let sub = Subproblem {
                weights: served
                    .iter()
                    .map(|&j| constraint_factors(i, j, &layout.positions, &gains, &layout.powers, receivers, params).combined)
                    .collect(),
                targets: served.iter().map(|&j| rx_pts[j].coord(axis)).collect(),
                offsets: served
                    .iter()
                    .map(|&j| {
                        let d = pos.coord(axis.other()) - rx_pts[j].coord(axis.other());
                        d * d + h2
                    })
                    .collect(),
                m,
            };
            let start = pos.coord(axis);
            let out = if i == 0 && free_axis {
                let out = solve_subproblem(&sub, Domain::Free(ranges), start, &config.dual);
                let spacing = room
                    .spacing_from_first(axis, out.coordinate)
                    .clamp(0.0, room.max_spacing(axis));
                layout = layout.with_spacing(room, axis, spacing)?;
                gains = GainMatrix::build(&layout.positions, &rx_pts, params);
                out
            } else {
                solve_subproblem(&sub, Domain::Fixed(start), start, &config.dual)
            };
            dual_iterations += out.iterations;
            if !out.converged {
                dual_unconverged += 1;
            }
            layout.powers[i] = out.power;
        }
        let sum = layout.sum_power();
        if (sum - previous).abs() <= config.power_tol * sum.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }

    // Lift to the exact per-LED minimum at the final positions.
    layout.powers = minimum_powers(&gains, assoc, receivers, params, &layout.powers)?.powers;
    Ok(AxisOutcome {
        layout,
        sweeps,
        dual_iterations,
        dual_unconverged,
        converged,
    })
}

pub fn lxo(
    scenario: &Scenario,
    layout: &LedLayout,
    assoc: &Association,
    ranges: &IntervalUnion,
    config: &SolverConfig,
) -> Result<AxisOutcome> {
    optimize_axis(scenario, layout, assoc, Axis::X, ranges, config)
}

pub fn lyo(
    scenario: &Scenario,
    layout: &LedLayout,
    assoc: &Association,
    ranges: &IntervalUnion,
    config: &SolverConfig,
) -> Result<AxisOutcome> {
    optimize_axis(scenario, layout, assoc, Axis::Y, ranges, config)
}

/// Values of the first LED's coordinate along `axis` that keep every served
/// receiver inside its LED's field of view. Other-axis coordinates are taken
/// from `positions`.
pub fn coverage_range(scenario: &Scenario, positions: &[Point], assoc: &Association, axis: Axis) -> IntervalUnion {
    let room = &scenario.room;
    let extent = room.extent(axis);
    let n = room.count_along(axis);
    if n < 2 {
        return IntervalUnion::single(extent / 2.0, extent / 2.0);
    }
    let radius = scenario.physical.fov_radius();
    let mut lo = 0.0f64;
    let mut hi = extent / 2.0;
    if radius.is_finite() {
        let r2 = radius * radius * (1.0 - 1e-9);
        for (i, pos) in positions.iter().enumerate() {
            let a = room.centered_offset(axis, i);
            let alpha = extent / 2.0 + a * extent / (n - 1) as f64;
            let beta = -2.0 * a / (n - 1) as f64;
            for &j in assoc.served_by(i) {
                let rx = scenario.receivers[j].position();
                let d_other = pos.coord(axis.other()) - rx.coord(axis.other());
                let rho2 = r2 - d_other * d_other;
                if rho2 < 0.0 {
                    return IntervalUnion::empty();
                }
                let rho = rho2.sqrt();
                let target = rx.coord(axis);
                if beta == 0.0 {
                    if (alpha - target).abs() > rho {
                        return IntervalUnion::empty();
                    }
                    continue;
                }
                let t0 = (target - alpha - rho) / beta;
                let t1 = (target - alpha + rho) / beta;
                lo = lo.max(t0.min(t1));
                hi = hi.min(t0.max(t1));
            }
        }
    }
    if lo <= hi {
        IntervalUnion::single(lo, hi)
    } else {
        IntervalUnion::empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photometrics::{capacity, illuminance, GainMatrix};
    use crate::scene::{PhysicalParams, Receiver, RoomConfig};
    use crate::solver::associate;

    fn single_led(rate: f64, illum: f64) -> Scenario {
        let room = RoomConfig::new(4.0, 4.0, 1, 1).unwrap();
        let receivers = vec![Receiver {
            x_m: 2.0,
            y_m: 2.0,
            rate_min: rate,
            illum_min: illum,
        }];
        let physical = PhysicalParams {
            interference_factor: 0.0,
            ..PhysicalParams::default()
        };
        Scenario::new(room, physical, receivers, f64::INFINITY).unwrap()
    }

    #[test]
    fn single_led_power_is_larger_branch_at_nadir() {
        for (rate, illum) in [(0.8, 0.4), (3.0, 0.4), (0.0, 0.1)] {
            let s = single_led(rate, illum);
            let layout = LedLayout::centered(&s.room, 1.0);
            let pts = s.receiver_positions();
            let g = GainMatrix::build(&layout.positions, &pts, &s.physical);
            let assoc = associate(&layout.powers, &g, &s.receivers, &s.physical).unwrap();
            let all = IntervalUnion::single(0.0, 2.0);
            let out = lxo(&s, &layout, &assoc, &all, &SolverConfig::default()).unwrap();
            let h = g.get(0, 0);
            let illum_p = illum / h;
            let comm_p = crate::solver::required_power_comm(0, 0, &g, &[0.0], &s.physical, rate).unwrap();
            assert!((out.layout.powers[0] - illum_p.max(comm_p)).abs() < 1e-9 * illum_p.max(comm_p));
            assert_eq!(out.layout.positions[0], Point::new(2.0, 2.0));
        }
    }

    #[test]
    fn single_column_keeps_center() {
        let s = Scenario::reference(1, 2, 0.8, 0.4, f64::INFINITY);
        let layout = LedLayout::centered(&s.room, 1.0);
        let pts = s.receiver_positions();
        let g = GainMatrix::build(&layout.positions, &pts, &s.physical);
        let assoc = associate(&layout.powers, &g, &s.receivers, &s.physical).unwrap();
        let out = lxo(&s, &layout, &assoc, &IntervalUnion::single(3.75, 3.75), &SolverConfig::default()).unwrap();
        for p in &out.layout.positions {
            assert_eq!(p.x, 3.75);
        }
    }

    #[test]
    fn lxo_output_is_feasible_and_symmetric() {
        let s = Scenario::reference(2, 2, 0.8, 0.4, f64::INFINITY);
        let layout = LedLayout::centered(&s.room, 1.0);
        let pts = s.receiver_positions();
        let g = GainMatrix::build(&layout.positions, &pts, &s.physical);
        let assoc = associate(&layout.powers, &g, &s.receivers, &s.physical).unwrap();
        let out = lxo(&s, &layout, &assoc, &IntervalUnion::single(0.0, 3.75), &SolverConfig::default()).unwrap();
        let l = &out.layout;
        let left = l.positions[0].x;
        let right = l.positions[2].x;
        assert!((left - (7.5 - right)).abs() < 1e-12);
        let g = GainMatrix::build(&l.positions, &pts, &s.physical);
        let eta = illuminance(&l.powers, &g, &s.physical);
        for j in 0..pts.len() {
            assert!(eta[j] >= 0.4 - 1e-6);
            assert!(capacity(assoc.server(j), j, &l.powers, &g, &s.physical) >= 0.8 - 1e-6);
        }
    }

    #[test]
    fn coverage_contains_current_layout() {
        let s = Scenario::reference(3, 2, 0.8, 0.4, 0.2);
        let layout = LedLayout::centered(&s.room, 1.0);
        let pts = s.receiver_positions();
        let g = GainMatrix::build(&layout.positions, &pts, &s.physical);
        let assoc = associate(&layout.powers, &g, &s.receivers, &s.physical).unwrap();
        for axis in [Axis::X, Axis::Y] {
            let r = coverage_range(&s, &layout.positions, &assoc, axis);
            assert!(r.contains(layout.positions[0].coord(axis)), "{axis:?} {r:?}");
        }
    }
}
