//! Reference values computed outside this crate (mpmath at 30 digits, hand
//! arithmetic) and end-to-end consistency checks on the reference room.

use vlc_placement::photometrics::{capacity, channel_gain, link_distance, GainMatrix};
use vlc_placement::scene::{lambert_order, symmetric_layout, uniform_receiver_grid};
use vlc_placement::solver::{associate, required_power_comm};
use vlc_placement::uniformity::{spacing_to_coordinate_ranges, IntervalUnion};
use vlc_placement::*;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

#[test]
fn lambert_order_values() {
    // −ln 2 / ln cos 30°
    assert!(close(lambert_order(30.0).unwrap(), 4.818_841_679_306_418, 1e-14));
    assert!(close(lambert_order(60.0).unwrap(), 1.0, 1e-14));
}

#[test]
fn symmetric_columns_from_spacing() {
    let room = RoomConfig::new(7.5, 5.0, 2, 1).unwrap();
    let pts = symmetric_layout(&room, 3.0, 0.0).unwrap();
    assert_eq!(pts.iter().map(|p| p.x).collect::<Vec<_>>(), vec![2.25, 5.25]);
}

#[test]
fn reference_lattice() {
    let s = Scenario::reference(2, 2, 0.8, 0.4, 0.16);
    assert_eq!(s.receivers.len(), 160);
    let mut xs: Vec<f64> = s.receivers.iter().map(|r| r.x_m).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let min_gap = xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    assert!(close(min_gap, 0.46875, 1e-12));
}

#[test]
fn distance_example() {
    let d = link_distance(Point::new(1.0, 1.0), Point::new(4.0, 5.0), 3.0);
    assert!(close(d, 5.830_951_894_845_300_5, 1e-15));
}

#[test]
fn nadir_gain_example() {
    // m = 1 (60° semi-angle), g = 1.5² / sin² 60° = 3, H = 2.
    let p = PhysicalParams {
        height_m: 2.0,
        ..PhysicalParams::default()
    };
    let h = channel_gain(Point::new(1.0, 1.0), Point::new(1.0, 1.0), &p);
    assert!(close(h, 2.387_324_146_378_430_3e-5, 1e-12));
}

#[test]
fn comm_power_inverts_capacity() {
    let p = PhysicalParams {
        noise_std: 1.0,
        interference_factor: 0.0,
        ..PhysicalParams::default()
    };
    let leds = [Point::new(0.0, 0.0)];
    let rx = [Point::new(0.0, 0.0)];
    let g = GainMatrix::build(&leds, &rx, &p);
    let power = required_power_comm(0, 0, &g, &[0.0], &p, 0.5).unwrap();
    // √(2π/e) divided by the link gain
    assert!(close(power * g.get(0, 0), 1.520_346_901_066_280_8, 1e-14));
    assert!((capacity(0, 0, &[power], &g, &p) - 0.5).abs() < 1e-12);
}

#[test]
fn point_spacing_maps_to_point_coordinate() {
    let room = RoomConfig::new(7.5, 5.0, 2, 2).unwrap();
    let r = spacing_to_coordinate_ranges(&IntervalUnion::single(3.0, 3.0), &room, Axis::X);
    assert_eq!(r.intervals(), &[(2.25, 2.25)]);
}

#[test]
fn centred_quadrant_receivers_pick_their_led() {
    let room = RoomConfig::new(7.5, 5.0, 2, 2).unwrap();
    let params = PhysicalParams::default();
    let layout = LedLayout::centered(&room, 1.0);
    let rx = uniform_receiver_grid(&room, 2, 2, 0.0, 0.0);
    let pts: Vec<Point> = rx.iter().map(|r| r.position()).collect();
    let g = GainMatrix::build(&layout.positions, &pts, &params);
    let assoc = associate(&layout.powers, &g, &rx, &params).unwrap();
    for (j, p) in pts.iter().enumerate() {
        let led = layout.positions[assoc.server(j)];
        assert_eq!((led.x, led.y), (p.x, p.y));
    }
}

#[test]
fn single_led_optimum_is_larger_branch_overhead() {
    let room = RoomConfig::new(4.0, 4.0, 1, 1).unwrap();
    let params = PhysicalParams {
        interference_factor: 0.0,
        ..PhysicalParams::default()
    };
    for (rate, illum) in [(0.8, 0.4), (4.0, 0.05)] {
        let rx = vec![Receiver {
            x_m: 2.0,
            y_m: 2.0,
            rate_min: rate,
            illum_min: illum,
        }];
        let s = Scenario::new(room.clone(), params.clone(), rx, f64::INFINITY).unwrap();
        let r = lxyu(&s, &SolverConfig::default()).unwrap();
        let h = channel_gain(Point::new(2.0, 2.0), Point::new(2.0, 2.0), &params);
        let illum_p = illum / h;
        let comm_p = params.noise_std * (2.0 * std::f64::consts::PI / std::f64::consts::E * (4f64.powf(rate) - 1.0)).sqrt() / h;
        assert!(close(r.sum_power, illum_p.max(comm_p), 1e-12));
        assert_eq!((r.leds[0].x_m, r.leds[0].y_m), (2.0, 2.0));
    }
}

#[test]
fn six_led_uniformity_run() {
    let s = Scenario::reference(3, 2, 0.8, 0.4, 0.1);
    let r = lxyu(&s, &SolverConfig::default()).unwrap();
    assert!(r.feasible);
    assert!(r.cv() <= 0.1 + 1e-3);
    let ranges = r.feasible_ranges.as_ref().unwrap();
    let inside = |set: &[(f64, f64)], v: f64| set.iter().any(|&(lo, hi)| lo <= v && v <= hi);
    assert!(inside(&ranges.spacing_x, r.spacing_x_m), "{:?} {}", ranges.spacing_x, r.spacing_x_m);
    assert!(inside(&ranges.spacing_y, r.spacing_y_m), "{:?} {}", ranges.spacing_y, r.spacing_y_m);
}

#[test]
fn accepted_trajectory_never_increases() {
    for (cols, rate, u) in [(2, 0.8, 0.16), (2, 1.3, 0.16), (3, 0.8, 0.1), (2, 0.8, 0.102)] {
        let s = Scenario::reference(cols, 2, rate, 0.4, u);
        let r = lxyu(&s, &SolverConfig::default()).unwrap();
        for w in r.sum_power_trajectory.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9), "{:?}", r.sum_power_trajectory);
        }
    }
}

#[test]
fn lca_flat_while_illumination_binds() {
    let base = lca(&Scenario::reference(2, 2, 0.5, 0.4, 0.16)).unwrap().sum_power;
    for rate in [0.6, 0.8, 1.0, 1.2, 1.5] {
        let p = lca(&Scenario::reference(2, 2, rate, 0.4, 0.16)).unwrap().sum_power;
        assert_eq!(p, base);
    }
}

#[test]
fn oracle_is_close_to_lxyu_on_four_leds() {
    let s = Scenario::reference(2, 2, 0.8, 0.4, 0.16);
    let o = oracle_grid_search(&s, 0.05).unwrap();
    let l = lxyu(&s, &SolverConfig::default()).unwrap();
    assert!(o.feasible && l.feasible);
    assert!((l.sum_power - o.sum_power).abs() <= 0.05 * o.sum_power);
}
