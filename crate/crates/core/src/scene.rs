//! Room geometry, LED grid indexing, receivers and the physical constants of
//! the optical link.
//!
//! LED indices are 1-based at every public interface: LED `i` sits in grid
//! column `(i - 1) / N` and row `(i - 1) % N`, where `N` is the number of rows
//! (LEDs along y). Coordinates are metres on the horizontal plane, with the
//! origin in a room corner.

use serde::{Deserialize, Serialize};

use crate::error::{PlacementError, Result};

/// Slack used when checking that a grid fits inside the room.
const GEOMETRY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn coord(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
        }
    }
}

/// Horizontal axis of the room.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
        }
    }
}

/// Optical and electrical constants of the LOS link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Photodiode detector area in m².
    pub detector_area_m2: f64,
    /// LED semi-angle at half power, degrees.
    pub semi_angle_deg: f64,
    /// Receiver field-of-view semi-angle, degrees.
    pub fov_semi_angle_deg: f64,
    /// Refractive index of the optical concentrator.
    pub refractive_index: f64,
    /// Standard deviation of the additive Gaussian noise, in the same
    /// normalized units as illuminance.
    pub noise_std: f64,
    /// Power-to-illuminance conversion factor.
    pub illum_target: f64,
    /// Vertical gap between the LED plane and the receiver plane, metres.
    pub height_m: f64,
    /// Scale on the co-channel interference term of the capacity formula.
    /// `1.0` counts every other LED as full-strength interference, `0.0`
    /// gives noise-limited links.
    pub interference_factor: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            detector_area_m2: 1e-4,
            semi_angle_deg: 60.0,
            fov_semi_angle_deg: 60.0,
            refractive_index: 1.5,
            noise_std: noise_std_for_snr(20.0, 0.4),
            illum_target: 1.0,
            height_m: 2.15,
            interference_factor: 1.0,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("detector_area_m2", self.detector_area_m2),
            ("refractive_index", self.refractive_index),
            ("noise_std", self.noise_std),
            ("illum_target", self.illum_target),
            ("height_m", self.height_m),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(PlacementError::config(field, format!("must be finite and > 0, got {v}")));
            }
        }
        if !(self.semi_angle_deg > 0.0 && self.semi_angle_deg < 90.0) {
            return Err(PlacementError::config(
                "semi_angle_deg",
                format!("must lie in (0, 90), got {}", self.semi_angle_deg),
            ));
        }
        if !(self.fov_semi_angle_deg > 0.0 && self.fov_semi_angle_deg <= 90.0) {
            return Err(PlacementError::config(
                "fov_semi_angle_deg",
                format!("must lie in (0, 90], got {}", self.fov_semi_angle_deg),
            ));
        }
        if !(self.interference_factor.is_finite() && self.interference_factor >= 0.0) {
            return Err(PlacementError::config(
                "interference_factor",
                format!("must be finite and >= 0, got {}", self.interference_factor),
            ));
        }
        Ok(())
    }

    pub fn lambert_order(&self) -> f64 {
        lambert_order(self.semi_angle_deg).expect("validated semi-angle")
    }

    /// Largest horizontal LED-receiver offset that stays inside the FOV.
    pub fn fov_radius(&self) -> f64 {
        if self.fov_semi_angle_deg >= 90.0 {
            f64::INFINITY
        } else {
            self.height_m * self.fov_semi_angle_deg.to_radians().tan()
        }
    }
}

/// Noise standard deviation giving `snr_db` of electrical SNR to a receiver
/// that collects exactly `reference_illum` from a single LED.
///
/// Signal amplitude is `ξ·P·h`, so at the reference illuminance the SNR is
/// `(reference_illum / σ)²`.
pub fn noise_std_for_snr(snr_db: f64, reference_illum: f64) -> f64 {
    reference_illum / 10f64.powf(snr_db / 20.0)
}

/// Lambertian emission order `m = -ln 2 / ln(cos Φ½)`.
pub fn lambert_order(semi_angle_deg: f64) -> Result<f64> {
    if !(semi_angle_deg > 0.0 && semi_angle_deg < 90.0) {
        return Err(PlacementError::Domain(format!(
            "semi-angle must lie in (0, 90) degrees, got {semi_angle_deg}"
        )));
    }
    let c = semi_angle_deg.to_radians().cos();
    Ok(-std::f64::consts::LN_2 / c.ln())
}

/// Room extents and the LED grid shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomConfig {
    pub x_len_m: f64,
    pub y_len_m: f64,
    /// LEDs along x (M).
    pub grid_cols: usize,
    /// LEDs along y (N).
    pub grid_rows: usize,
}

impl RoomConfig {
    pub fn new(x_len_m: f64, y_len_m: f64, grid_cols: usize, grid_rows: usize) -> Result<Self> {
        let room = Self {
            x_len_m,
            y_len_m,
            grid_cols,
            grid_rows,
        };
        room.validate()?;
        Ok(room)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_len_m.is_finite() && self.x_len_m > 0.0) {
            return Err(PlacementError::config("x_len_m", "must be > 0"));
        }
        if !(self.y_len_m.is_finite() && self.y_len_m > 0.0) {
            return Err(PlacementError::config("y_len_m", "must be > 0"));
        }
        if self.grid_cols == 0 {
            return Err(PlacementError::config("grid_cols", "must be >= 1"));
        }
        if self.grid_rows == 0 {
            return Err(PlacementError::config("grid_rows", "must be >= 1"));
        }
        Ok(())
    }

    pub fn led_count(&self) -> usize {
        self.grid_cols * self.grid_rows
    }

    pub fn extent(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x_len_m,
            Axis::Y => self.y_len_m,
        }
    }

    /// Number of LEDs along `axis` (M for x, N for y).
    pub fn count_along(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.grid_cols,
            Axis::Y => self.grid_rows,
        }
    }

    /// Largest spacing along `axis` that keeps the grid inside the room.
    /// Zero when there is a single LED along the axis.
    pub fn max_spacing(&self, axis: Axis) -> f64 {
        let n = self.count_along(axis);
        if n <= 1 {
            0.0
        } else {
            self.extent(axis) / (n - 1) as f64
        }
    }

    /// Spacing that places each LED at the centre of its sub-area.
    pub fn centered_spacing(&self, axis: Axis) -> f64 {
        self.extent(axis) / self.count_along(axis) as f64
    }

    /// Grid (column, row) of the 1-based LED index `i`.
    pub fn grid_index(&self, i: usize) -> Result<(usize, usize)> {
        led_grid_index(i, self.grid_rows, self.led_count())
    }

    /// Position of the grid line `k` (0-based) along `axis` for the given
    /// spacing: `k·L + (extent − (n−1)·L)/2`.
    pub fn line_coordinate(&self, axis: Axis, k: usize, spacing: f64) -> f64 {
        let n = self.count_along(axis);
        let margin = (self.extent(axis) - (n as f64 - 1.0) * spacing) / 2.0;
        k as f64 * spacing + margin
    }

    /// Signed grid offset of LED `i` (0-based) from the room centre, in
    /// units of the spacing: `col − (M−1)/2` along x, `row − (N−1)/2` along y.
    pub fn centered_offset(&self, axis: Axis, led: usize) -> f64 {
        let n = self.count_along(axis) as f64;
        let k = match axis {
            Axis::X => led / self.grid_rows,
            Axis::Y => led % self.grid_rows,
        };
        k as f64 - (n - 1.0) / 2.0
    }

    /// Spacing implied by the first LED's coordinate along `axis`.
    pub fn spacing_from_first(&self, axis: Axis, first: f64) -> f64 {
        let n = self.count_along(axis);
        if n <= 1 {
            0.0
        } else {
            (self.extent(axis) - 2.0 * first) / (n - 1) as f64
        }
    }

    /// First LED's coordinate along `axis` for the given spacing.
    pub fn first_from_spacing(&self, axis: Axis, spacing: f64) -> f64 {
        self.line_coordinate(axis, 0, spacing)
    }

    fn check_spacing(&self, axis: Axis, spacing: f64) -> Result<()> {
        let n = self.count_along(axis);
        let span = (n as f64 - 1.0) * spacing;
        if !spacing.is_finite() || spacing < 0.0 || span > self.extent(axis) * (1.0 + GEOMETRY_EPS) + GEOMETRY_EPS {
            return Err(PlacementError::Geometry(format!(
                "spacing L_{} = {spacing} with {n} LEDs does not fit in {} m",
                axis.name(),
                self.extent(axis)
            )));
        }
        Ok(())
    }
}

/// Grid (column, row) of the 1-based LED index `i` on a grid with `rows` rows
/// and `count` LEDs in total.
pub fn led_grid_index(i: usize, rows: usize, count: usize) -> Result<(usize, usize)> {
    if i == 0 || i > count || rows == 0 {
        return Err(PlacementError::IndexOutOfRange { index: i, count });
    }
    Ok(((i - 1) / rows, (i - 1) % rows))
}

/// Positions of all LEDs for a symmetric grid with spacings `(lx, ly)`,
/// ordered by LED index.
pub fn symmetric_layout(room: &RoomConfig, lx: f64, ly: f64) -> Result<Vec<Point>> {
    room.check_spacing(Axis::X, lx)?;
    room.check_spacing(Axis::Y, ly)?;
    let positions = (0..room.led_count())
        .map(|led| {
            let col = led / room.grid_rows;
            let row = led % room.grid_rows;
            Point::new(
                room.line_coordinate(Axis::X, col, lx),
                room.line_coordinate(Axis::Y, row, ly),
            )
        })
        .collect();
    Ok(positions)
}

/// A test point on the receiver plane with its service requirements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Receiver {
    pub x_m: f64,
    pub y_m: f64,
    /// Minimum data rate, bits/transmission.
    pub rate_min: f64,
    /// Minimum total illuminance, normalized units.
    pub illum_min: f64,
}

impl Receiver {
    pub fn position(&self) -> Point {
        Point::new(self.x_m, self.y_m)
    }
}

/// Receivers at the cell centres of a `count_x × count_y` partition of the
/// floor, ordered x-major.
pub fn uniform_receiver_grid(
    room: &RoomConfig,
    count_x: usize,
    count_y: usize,
    rate_min: f64,
    illum_min: f64,
) -> Vec<Receiver> {
    let dx = room.x_len_m / count_x as f64;
    let dy = room.y_len_m / count_y as f64;
    let mut out = Vec::with_capacity(count_x * count_y);
    for ix in 0..count_x {
        for iy in 0..count_y {
            out.push(Receiver {
                x_m: (ix as f64 + 0.5) * dx,
                y_m: (iy as f64 + 0.5) * dy,
                rate_min,
                illum_min,
            });
        }
    }
    out
}

/// Symmetric-grid placement: spacings, LED coordinates and optical powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedLayout {
    pub spacing_x_m: f64,
    pub spacing_y_m: f64,
    pub positions: Vec<Point>,
    pub powers: Vec<f64>,
}

impl LedLayout {
    /// Symmetric layout with every LED at `power`.
    pub fn symmetric(room: &RoomConfig, lx: f64, ly: f64, power: f64) -> Result<Self> {
        let positions = symmetric_layout(room, lx, ly)?;
        let powers = vec![power; positions.len()];
        Ok(Self {
            spacing_x_m: lx,
            spacing_y_m: ly,
            positions,
            powers,
        })
    }

    /// Each LED at the centre of its sub-area.
    pub fn centered(room: &RoomConfig, power: f64) -> Self {
        Self::symmetric(
            room,
            room.centered_spacing(Axis::X),
            room.centered_spacing(Axis::Y),
            power,
        )
        .expect("centered spacing always fits")
    }

    pub fn spacing(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.spacing_x_m,
            Axis::Y => self.spacing_y_m,
        }
    }

    /// Moves the grid along `axis` to a new spacing, keeping powers.
    pub fn with_spacing(&self, room: &RoomConfig, axis: Axis, spacing: f64) -> Result<Self> {
        let (lx, ly) = match axis {
            Axis::X => (spacing, self.spacing_y_m),
            Axis::Y => (self.spacing_x_m, spacing),
        };
        let positions = symmetric_layout(room, lx, ly)?;
        Ok(Self {
            spacing_x_m: lx,
            spacing_y_m: ly,
            positions,
            powers: self.powers.clone(),
        })
    }

    pub fn sum_power(&self) -> f64 {
        self.powers.iter().sum()
    }
}

/// LED-to-receiver gap of [`Scenario::reference`].
pub const REFERENCE_HEIGHT_M: f64 = 3.0;

/// Everything that defines one placement problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub room: RoomConfig,
    pub physical: PhysicalParams,
    pub receivers: Vec<Receiver>,
    /// CV(RMSE) threshold; `f64::INFINITY` leaves uniformity unconstrained.
    pub uniformity_max: f64,
}

impl Scenario {
    pub fn new(
        room: RoomConfig,
        physical: PhysicalParams,
        receivers: Vec<Receiver>,
        uniformity_max: f64,
    ) -> Result<Self> {
        let s = Self {
            room,
            physical,
            receivers,
            uniformity_max,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.room.validate()?;
        self.physical.validate()?;
        if self.receivers.is_empty() {
            return Err(PlacementError::config("receivers", "at least one receiver is required"));
        }
        for (j, r) in self.receivers.iter().enumerate() {
            let inside = (0.0..=self.room.x_len_m).contains(&r.x_m) && (0.0..=self.room.y_len_m).contains(&r.y_m);
            if !inside {
                return Err(PlacementError::config(
                    "receivers",
                    format!("receiver {} at ({}, {}) lies outside the room", j + 1, r.x_m, r.y_m),
                ));
            }
            if !(r.rate_min >= 0.0 && r.rate_min.is_finite()) {
                return Err(PlacementError::config("rate_min", "must be finite and >= 0"));
            }
            if !(r.illum_min >= 0.0 && r.illum_min.is_finite()) {
                return Err(PlacementError::config("illum_min", "must be finite and >= 0"));
            }
        }
        if self.uniformity_max.is_nan() || self.uniformity_max < 0.0 {
            return Err(PlacementError::config("uniformity_max", "must be >= 0 (inf for unconstrained)"));
        }
        Ok(())
    }

    /// Sets the same rate and illuminance requirement on every receiver.
    pub fn set_homogeneous_constraints(&mut self, rate_min: f64, illum_min: f64) {
        for r in &mut self.receivers {
            r.rate_min = rate_min;
            r.illum_min = illum_min;
        }
    }

    pub fn with_constraints(mut self, rate_min: f64, illum_min: f64, uniformity_max: f64) -> Self {
        self.set_homogeneous_constraints(rate_min, illum_min);
        self.uniformity_max = uniformity_max;
        self
    }

    pub fn led_count(&self) -> usize {
        self.room.led_count()
    }

    pub fn receiver_positions(&self) -> Vec<Point> {
        self.receivers.iter().map(Receiver::position).collect()
    }

    /// The evaluation room: 7.5 m × 5 m × 3 m with receivers on the floor
    /// (160 on a 16×10 lattice), a `cols × rows` LED grid on the ceiling and
    /// noise-limited links.
    pub fn reference(cols: usize, rows: usize, rate_min: f64, illum_min: f64, uniformity_max: f64) -> Self {
        let room = RoomConfig::new(7.5, 5.0, cols, rows).expect("valid grid");
        let receivers = uniform_receiver_grid(&room, 16, 10, rate_min, illum_min);
        let physical = PhysicalParams {
            height_m: REFERENCE_HEIGHT_M,
            interference_factor: 0.0,
            ..PhysicalParams::default()
        };
        Scenario::new(room, physical, receivers, uniformity_max).expect("valid reference scenario")
    }
}
