//! Turns the CV(RMSE) ≤ U_th requirement into linear ranges on the grid
//! spacing and on the first LED's coordinate.
//!
//! With fixed powers and one spacing held fixed, CV(RMSE) is a function of
//! the other spacing alone. It is generally not monotone, so the feasible
//! set is found by scanning the admissible spacings, bracketing every
//! crossing of the threshold and refining each bracket by bisection.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::photometrics::{lambertian_factor, mean_rmse};
use crate::scene::{Axis, PhysicalParams, Point, RoomConfig};

/// Default number of scan samples over the admissible spacing range.
pub const DEFAULT_SCAN_POINTS: usize = 256;
/// Default bisection width, metres.
pub const DEFAULT_BISECTION_TOL: f64 = 1e-4;

/// Sorted, disjoint union of closed intervals.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(lo: f64, hi: f64) -> Self {
        Self::from_intervals(vec![(lo, hi)])
    }

    /// Builds a union from arbitrary intervals, merging overlaps.
    pub fn from_intervals(mut raw: Vec<(f64, f64)>) -> Self {
        raw.retain(|(a, b)| a <= b);
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut intervals: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match intervals.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => intervals.push((a, b)),
            }
        }
        Self { intervals }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= x && x <= b)
    }

    /// All interval endpoints in ascending order, without duplicates.
    pub fn endpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::with_capacity(self.intervals.len() * 2);
        for &(a, b) in &self.intervals {
            for v in [a, b] {
                if out.last() != Some(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    pub fn intersect(&self, lo: f64, hi: f64) -> Self {
        Self::from_intervals(self.intervals.iter().map(|&(a, b)| (a.max(lo), b.min(hi))).collect())
    }

    /// Image under `x ↦ scale·x + offset`.
    pub fn map_affine(&self, scale: f64, offset: f64) -> Self {
        Self::from_intervals(
            self.intervals
                .iter()
                .map(|&(a, b)| {
                    let (u, v) = (scale * a + offset, scale * b + offset);
                    (u.min(v), u.max(v))
                })
                .collect(),
        )
    }

    /// Point of the union closest to `x`; ties go to the smaller value.
    pub fn nearest(&self, x: f64) -> Option<f64> {
        if self.contains(x) {
            return Some(x);
        }
        self.endpoints()
            .into_iter()
            .min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs()).then(a.total_cmp(b)))
    }
}

/// Feasible ranges for one axis: the spacing union, the induced union for
/// the first LED's coordinate, and the smallest CV seen while searching.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibleRanges {
    pub axis: Axis,
    pub spacing: IntervalUnion,
    pub coordinate: IntervalUnion,
    pub tightest_cv: f64,
    /// Spacing at which `tightest_cv` was seen (smallest on ties).
    pub tightest_spacing: f64,
}

impl FeasibleRanges {
    /// The endpoint set used when a coordinate must be clamped.
    pub fn coordinate_endpoints(&self) -> Vec<f64> {
        self.coordinate.endpoints()
    }
}

/// Grid coefficients that express LED-receiver offsets as affine functions
/// of the spacings: `x_i − x_j = A_i·L_x + B_j`, `y_i − y_j = C_i·L_y + D_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacingCoefficients {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

impl SpacingCoefficients {
    pub fn new(room: &RoomConfig, receivers: &[Point]) -> Self {
        let k = room.led_count();
        Self {
            a: (0..k).map(|i| room.centered_offset(Axis::X, i)).collect(),
            c: (0..k).map(|i| room.centered_offset(Axis::Y, i)).collect(),
            b: receivers.iter().map(|r| room.x_len_m / 2.0 - r.x).collect(),
            d: receivers.iter().map(|r| room.y_len_m / 2.0 - r.y).collect(),
        }
    }
}

/// CV(RMSE) of the illuminance field as a function of `(L_x, L_y)` for fixed
/// powers.
#[derive(Debug, Clone)]
pub struct SpacingCv<'a> {
    room: &'a RoomConfig,
    params: &'a PhysicalParams,
    powers: &'a [f64],
    coef: SpacingCoefficients,
    m: f64,
    scale: f64,
}

impl<'a> SpacingCv<'a> {
    pub fn new(room: &'a RoomConfig, params: &'a PhysicalParams, receivers: &[Point], powers: &'a [f64]) -> Self {
        let m = params.lambert_order();
        let g = crate::photometrics::concentrator_gain(0.0, params.refractive_index, params.fov_semi_angle_deg);
        Self {
            room,
            params,
            powers,
            coef: SpacingCoefficients::new(room, receivers),
            m,
            scale: params.illum_target * lambertian_factor(params, m, g),
        }
    }

    pub fn coefficients(&self) -> &SpacingCoefficients {
        &self.coef
    }

    /// CV(RMSE) at `(lx, ly)`; infinite when the field is dark everywhere.
    pub fn eval(&self, lx: f64, ly: f64) -> Result<f64> {
        crate::scene::symmetric_layout(self.room, lx, ly)?;
        Ok(self.eval_unchecked(lx, ly))
    }

    fn eval_unchecked(&self, lx: f64, ly: f64) -> f64 {
        let h = self.params.height_m;
        let fov = self.params.fov_semi_angle_deg;
        let exp = (self.m + 3.0) / 2.0;
        let eta: Vec<f64> = self
            .coef
            .b
            .iter()
            .zip(&self.coef.d)
            .map(|(&bj, &dj)| {
                let mut sum = 0.0;
                for (i, &p) in self.powers.iter().enumerate() {
                    let dx = self.coef.a[i] * lx + bj;
                    let dy = self.coef.c[i] * ly + dj;
                    if dx.hypot(dy).atan2(h).to_degrees() > fov {
                        continue;
                    }
                    sum += p / (dx * dx + dy * dy + h * h).powf(exp);
                }
                self.scale * sum
            })
            .collect();
        let (mean, rmse) = mean_rmse(&eta);
        if mean > 0.0 {
            rmse / mean
        } else {
            f64::INFINITY
        }
    }

    fn eval_axis(&self, axis: Axis, spacing: f64, other: f64) -> f64 {
        match axis {
            Axis::X => self.eval_unchecked(spacing, other),
            Axis::Y => self.eval_unchecked(other, spacing),
        }
    }
}

/// CV(RMSE) of the symmetric layout with spacings `(lx, ly)` and the given
/// powers, evaluated through the spacing coefficients.
pub fn cv_of_spacing(
    lx: f64,
    ly: f64,
    powers: &[f64],
    receivers: &[Point],
    room: &RoomConfig,
    params: &PhysicalParams,
) -> Result<f64> {
    SpacingCv::new(room, params, receivers, powers).eval(lx, ly)
}

/// Scan-and-bisect search for the spacings along `axis` with
/// CV(RMSE) ≤ `threshold`, the other spacing held at `other_spacing`.
pub fn feasible_spacing_range(
    cv: &SpacingCv<'_>,
    axis: Axis,
    other_spacing: f64,
    threshold: f64,
    scan_points: usize,
    tol: f64,
) -> FeasibleRanges {
    let room = cv.room;
    let limit = room.max_spacing(axis);
    let f = |s: f64| cv.eval_axis(axis, s, other_spacing);
    let finish = |spacing: IntervalUnion, (tightest_cv, tightest_spacing): (f64, f64)| FeasibleRanges {
        axis,
        coordinate: spacing_to_coordinate_ranges(&spacing, room, axis),
        spacing,
        tightest_cv,
        tightest_spacing,
    };
    let better = |best: (f64, f64), cand: (f64, f64)| {
        if cand.0 < best.0 || (cand.0 == best.0 && cand.1 < best.1) {
            cand
        } else {
            best
        }
    };

    if room.count_along(axis) <= 1 {
        let v = f(0.0);
        let spacing = if v <= threshold {
            IntervalUnion::single(0.0, 0.0)
        } else {
            IntervalUnion::empty()
        };
        return finish(spacing, (v, 0.0));
    }

    let n = scan_points.max(2);
    let samples: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let s = limit * k as f64 / (n - 1) as f64;
            (s, f(s))
        })
        .collect();
    let mut tightest = samples
        .iter()
        .fold((f64::INFINITY, 0.0), |b, &(s, v)| better(b, (v, s)));
    if threshold.is_infinite() {
        return finish(IntervalUnion::single(0.0, limit), tightest);
    }
    let feasible = |v: f64| v <= threshold;

    // Bisects a bracket whose ends straddle the threshold and returns the
    // end that lies on the feasible side.
    let mut refine = |mut lo: f64, mut hi: f64, lo_feasible: bool| -> f64 {
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            let v = f(mid);
            tightest = better(tightest, (v, mid));
            if feasible(v) == lo_feasible {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if lo_feasible {
            lo
        } else {
            hi
        }
    };

    let mut intervals = Vec::new();
    let mut open: Option<f64> = feasible(samples[0].1).then_some(0.0);
    for w in samples.windows(2) {
        let ((s0, v0), (s1, v1)) = (w[0], w[1]);
        match (feasible(v0), feasible(v1)) {
            (false, true) => open = Some(refine(s0, s1, false)),
            (true, false) => {
                let end = refine(s0, s1, true);
                let start = open.take().expect("feasible run has a start");
                intervals.push((start, end));
            }
            _ => {}
        }
    }
    if let Some(start) = open {
        intervals.push((start, limit));
    }
    finish(IntervalUnion::from_intervals(intervals), tightest)
}

/// Maps spacing intervals along `axis` to intervals of the first LED's
/// coordinate via `x₁ = (x_l − (M−1)·L_x)/2`.
pub fn spacing_to_coordinate_ranges(spacing: &IntervalUnion, room: &RoomConfig, axis: Axis) -> IntervalUnion {
    let n = room.count_along(axis) as f64;
    spacing.map_affine(-(n - 1.0) / 2.0, room.extent(axis) / 2.0)
}

/// Inverse of [`spacing_to_coordinate_ranges`] for grids with at least two
/// LEDs along `axis`.
pub fn coordinate_to_spacing_ranges(coordinate: &IntervalUnion, room: &RoomConfig, axis: Axis) -> IntervalUnion {
    let n = room.count_along(axis) as f64;
    debug_assert!(n >= 2.0);
    coordinate.map_affine(-2.0 / (n - 1.0), room.extent(axis) / (n - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photometrics::{illuminance_field, GainMatrix};
    use crate::scene::{symmetric_layout, uniform_receiver_grid};

    fn setup(cols: usize, rows: usize) -> (RoomConfig, PhysicalParams, Vec<Point>) {
        let room = RoomConfig::new(7.5, 5.0, cols, rows).unwrap();
        let rx = uniform_receiver_grid(&room, 8, 6, 0.0, 0.0)
            .iter()
            .map(|r| r.position())
            .collect();
        (room, PhysicalParams::default(), rx)
    }

    #[test]
    fn union_basics() {
        let u = IntervalUnion::from_intervals(vec![(5.0, 8.0), (1.0, 3.0), (2.0, 2.5)]);
        assert_eq!(u.intervals(), &[(1.0, 3.0), (5.0, 8.0)]);
        assert_eq!(u.endpoints(), vec![1.0, 3.0, 5.0, 8.0]);
        assert!(u.contains(2.0) && !u.contains(4.0));
        assert_eq!(u.nearest(4.0), Some(3.0));
        assert_eq!(u.nearest(9.0), Some(8.0));
        assert_eq!(u.intersect(2.0, 6.0).intervals(), &[(2.0, 3.0), (5.0, 6.0)]);
    }

    #[test]
    fn single_led_cv_ignores_spacing() {
        let (room, params, rx) = setup(1, 1);
        let a = cv_of_spacing(0.0, 0.0, &[1.0], &rx, &room, &params).unwrap();
        let b = cv_of_spacing(5.0, 3.0, &[1.0], &rx, &room, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_receiver_cv_is_zero() {
        let (room, params, _) = setup(2, 2);
        let rx = [Point::new(1.0, 4.0)];
        let cv = cv_of_spacing(2.0, 1.0, &[1.0, 2.0, 3.0, 4.0], &rx, &room, &params).unwrap();
        assert!(cv.abs() < 1e-15);
    }

    #[test]
    fn coefficient_form_matches_positions() {
        let (room, params, rx) = setup(3, 2);
        let powers = [1.0, 2.0, 0.5, 1.5, 3.0, 0.7];
        for (lx, ly) in [(2.5, 2.5), (0.3, 4.9), (3.75, 0.0)] {
            let coef = cv_of_spacing(lx, ly, &powers, &rx, &room, &params).unwrap();
            let leds = symmetric_layout(&room, lx, ly).unwrap();
            let g = GainMatrix::build(&leds, &rx, &params);
            let direct = illuminance_field(&powers, &g, &params).cv_rmse.unwrap();
            assert!((coef - direct).abs() <= 1e-9 * direct.abs());
        }
    }

    #[test]
    fn geometry_error_on_oversized_spacing() {
        let (room, params, rx) = setup(3, 2);
        assert!(cv_of_spacing(4.0, 1.0, &[1.0; 6], &rx, &room, &params).is_err());
    }

    #[test]
    fn unconstrained_threshold_gives_full_range() {
        let (room, params, rx) = setup(2, 2);
        let powers = [1.0; 4];
        let cv = SpacingCv::new(&room, &params, &rx, &powers);
        let r = feasible_spacing_range(&cv, Axis::X, 2.5, f64::INFINITY, 64, 1e-4);
        assert_eq!(r.spacing.intervals(), &[(0.0, 7.5)]);
        assert_eq!(r.coordinate.intervals(), &[(0.0, 3.75)]);
    }

    #[test]
    fn zero_threshold_is_empty() {
        let (room, params, rx) = setup(2, 2);
        let powers = [1.0; 4];
        let cv = SpacingCv::new(&room, &params, &rx, &powers);
        let r = feasible_spacing_range(&cv, Axis::Y, 3.75, 0.0, 64, 1e-4);
        assert!(r.spacing.is_empty());
        assert!(r.tightest_cv > 0.0);
    }

    #[test]
    fn ranges_respect_threshold() {
        let (room, params, rx) = setup(2, 2);
        let powers = [1.0, 1.2, 0.9, 1.1];
        let cv = SpacingCv::new(&room, &params, &rx, &powers);
        let best = feasible_spacing_range(&cv, Axis::X, 2.5, f64::INFINITY, 256, 1e-4).tightest_cv;
        let threshold = best + 0.05;
        let r = feasible_spacing_range(&cv, Axis::X, 2.5, threshold, 256, 1e-4);
        assert!(!r.spacing.is_empty());
        for &(a, b) in r.spacing.intervals() {
            for t in 0..=20 {
                let s = a + (b - a) * t as f64 / 20.0;
                assert!(cv.eval(s, 2.5).unwrap() <= threshold + 1e-3);
            }
        }
        // outside the union, one bisection width away, the constraint fails
        for w in r.spacing.intervals().windows(2) {
            let mid = 0.5 * (w[0].1 + w[1].0);
            assert!(cv.eval(mid, 2.5).unwrap() > threshold - 1e-3);
        }
    }

    #[test]
    fn coordinate_mapping_examples() {
        let room = RoomConfig::new(7.5, 5.0, 2, 2).unwrap();
        let c = spacing_to_coordinate_ranges(&IntervalUnion::single(3.0, 3.0), &room, Axis::X);
        assert_eq!(c.intervals(), &[(2.25, 2.25)]);
        let full = spacing_to_coordinate_ranges(&IntervalUnion::single(0.0, 7.5), &room, Axis::X);
        assert_eq!(full.intervals(), &[(0.0, 3.75)]);
        let two = IntervalUnion::from_intervals(vec![(0.5, 1.0), (2.0, 3.0)]);
        let mapped = spacing_to_coordinate_ranges(&two, &room, Axis::X);
        assert_eq!(mapped.intervals().len(), 2);
        assert_eq!(mapped.intervals(), &[(2.25, 2.75), (3.25, 3.5)]);
    }
}
