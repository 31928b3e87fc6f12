//! Line-of-sight channel gains, link capacity and illuminance statistics.
//!
//! LEDs face straight down and receivers straight up, so the irradiance and
//! incidence angles coincide and `cos φ = cos ψ = H/d`. The Lambertian gain
//! then reduces to `(m+1)·A·g·H^(m+1) / (2π·d^(m+3))`.

use std::f64::consts::{E, PI};
use std::io::Write;

use crate::error::Result;
use crate::format::sig9;
use crate::scene::{PhysicalParams, Point, RoomConfig};

/// Optical concentrator gain `n²/sin²Ψc` inside the FOV, zero outside.
/// The FOV boundary is inclusive.
pub fn concentrator_gain(incidence_deg: f64, refractive_index: f64, fov_deg: f64) -> f64 {
    if (0.0..=fov_deg).contains(&incidence_deg) {
        let s = fov_deg.to_radians().sin();
        refractive_index * refractive_index / (s * s)
    } else {
        0.0
    }
}

pub fn link_distance(led: Point, rx: Point, height: f64) -> f64 {
    squared_link_distance(led, rx, height).sqrt()
}

#[inline]
pub(crate) fn squared_link_distance(led: Point, rx: Point, height: f64) -> f64 {
    let dx = led.x - rx.x;
    let dy = led.y - rx.y;
    dx * dx + dy * dy + height * height
}

/// Incidence angle in degrees for a down-facing LED above an up-facing
/// receiver.
pub fn incidence_deg(led: Point, rx: Point, height: f64) -> f64 {
    let r = (led.x - rx.x).hypot(led.y - rx.y);
    r.atan2(height).to_degrees()
}

/// Channel gain of the LOS link between an LED and a receiver.
pub fn channel_gain(led: Point, rx: Point, params: &PhysicalParams) -> f64 {
    let h = params.height_m;
    let g = concentrator_gain(incidence_deg(led, rx, h), params.refractive_index, params.fov_semi_angle_deg);
    if g == 0.0 {
        return 0.0;
    }
    let m = params.lambert_order();
    let d2 = squared_link_distance(led, rx, h);
    lambertian_factor(params, m, g) / d2.powf((m + 3.0) / 2.0)
}

/// `(m+1)·A·g·H^(m+1) / 2π`, the distance-independent part of the gain.
#[inline]
pub(crate) fn lambertian_factor(params: &PhysicalParams, m: f64, g: f64) -> f64 {
    (m + 1.0) * params.detector_area_m2 * g * params.height_m.powf(m + 1.0) / (2.0 * PI)
}

/// Dense K×U matrix of channel gains, row-major by LED.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMatrix {
    leds: usize,
    receivers: usize,
    data: Vec<f64>,
}

impl GainMatrix {
    pub fn build(leds: &[Point], receivers: &[Point], params: &PhysicalParams) -> Self {
        let data = leds
            .iter()
            .flat_map(|&l| receivers.iter().map(move |&r| channel_gain(l, r, params)))
            .collect();
        Self {
            leds: leds.len(),
            receivers: receivers.len(),
            data,
        }
    }

    #[inline]
    pub fn get(&self, led: usize, receiver: usize) -> f64 {
        self.data[led * self.receivers + receiver]
    }

    pub fn led_count(&self) -> usize {
        self.leds
    }

    pub fn receiver_count(&self) -> usize {
        self.receivers
    }

    pub fn row(&self, led: usize) -> &[f64] {
        &self.data[led * self.receivers..(led + 1) * self.receivers]
    }
}

/// Achievable rate in bits/transmission of the link from LED `led` to
/// `receiver`, treating every other LED as interference.
pub fn capacity(led: usize, receiver: usize, powers: &[f64], gains: &GainMatrix, params: &PhysicalParams) -> f64 {
    let xi = params.illum_target;
    let signal = xi * powers[led] * gains.get(led, receiver);
    let interference: f64 = (0..gains.led_count())
        .filter(|&n| n != led)
        .map(|n| {
            let a = xi * powers[n] * gains.get(n, receiver);
            a * a
        })
        .sum();
    let noise = params.noise_std * params.noise_std + params.interference_factor * interference;
    0.5 * (1.0 + E / (2.0 * PI) * signal * signal / noise).log2()
}

/// Per-receiver total illuminance `η_j = Σ_i ξ·P_i·h_ij`.
pub fn illuminance(powers: &[f64], gains: &GainMatrix, params: &PhysicalParams) -> Vec<f64> {
    (0..gains.receiver_count())
        .map(|j| {
            (0..gains.led_count())
                .map(|i| params.illum_target * powers[i] * gains.get(i, j))
                .sum()
        })
        .collect()
}

/// Illuminance over the receiver set with its uniformity statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct IlluminanceField {
    pub per_receiver: Vec<f64>,
    pub mean: f64,
    pub rmse: f64,
    /// `rmse / mean`; `None` when the mean illuminance is zero.
    pub cv_rmse: Option<f64>,
}

impl IlluminanceField {
    pub fn from_values(per_receiver: Vec<f64>) -> Self {
        let (mean, rmse) = mean_rmse(&per_receiver);
        let cv_rmse = (mean > 0.0).then(|| rmse / mean);
        Self {
            per_receiver,
            mean,
            rmse,
            cv_rmse,
        }
    }

    /// CV(RMSE), with an undefined field reported as infinitely non-uniform.
    pub fn cv_or_inf(&self) -> f64 {
        self.cv_rmse.unwrap_or(f64::INFINITY)
    }
}

pub fn illuminance_field(powers: &[f64], gains: &GainMatrix, params: &PhysicalParams) -> IlluminanceField {
    IlluminanceField::from_values(illuminance(powers, gains, params))
}

pub(crate) fn mean_rmse(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// One sample of a floor illuminance map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatmapSample {
    pub x: f64,
    pub y: f64,
    pub illuminance: f64,
}

/// Samples illuminance at the cell centres of a `resolution × resolution`
/// partition of the floor, row-major in y then x.
pub fn heatmap(
    room: &RoomConfig,
    leds: &[Point],
    powers: &[f64],
    params: &PhysicalParams,
    resolution: usize,
) -> Vec<HeatmapSample> {
    let dx = room.x_len_m / resolution as f64;
    let dy = room.y_len_m / resolution as f64;
    let mut out = Vec::with_capacity(resolution * resolution);
    for iy in 0..resolution {
        for ix in 0..resolution {
            let p = Point::new((ix as f64 + 0.5) * dx, (iy as f64 + 0.5) * dy);
            let eta = leds
                .iter()
                .zip(powers)
                .map(|(&l, &pw)| params.illum_target * pw * channel_gain(l, p, params))
                .sum();
            out.push(HeatmapSample {
                x: p.x,
                y: p.y,
                illuminance: eta,
            });
        }
    }
    out
}

/// Writes a heatmap as CSV with a `x,y,illuminance` header. `comments` are
/// emitted first as `# ` lines.
pub fn write_heatmap_csv<W: Write>(mut w: W, samples: &[HeatmapSample], comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "x,y,illuminance")?;
    for s in samples {
        writeln!(w, "{},{},{}", sig9(s.x), sig9(s.y), sig9(s.illuminance))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params_m1() -> PhysicalParams {
        PhysicalParams {
            detector_area_m2: 1e-4,
            semi_angle_deg: 60.0,
            fov_semi_angle_deg: 60.0,
            refractive_index: 1.5,
            noise_std: 1.0,
            illum_target: 1.0,
            height_m: 2.0,
            interference_factor: 1.0,
        }
    }

    #[test]
    fn concentrator_gain_branches() {
        assert!((concentrator_gain(0.0, 1.5, 60.0) - 3.0).abs() < 1e-12);
        assert_eq!(concentrator_gain(70.0, 1.5, 60.0), 0.0);
        assert!((concentrator_gain(60.0, 1.5, 60.0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn distances() {
        let d = link_distance(Point::new(1.0, 1.0), Point::new(4.0, 5.0), 3.0);
        assert!((d - 34f64.sqrt()).abs() < 1e-12);
        assert_eq!(link_distance(Point::new(2.0, 2.0), Point::new(2.0, 2.0), 3.0), 3.0);
        let a = Point::new(0.3, 1.7);
        let b = Point::new(2.2, 0.1);
        assert_eq!(link_distance(a, b, 1.3), link_distance(b, a, 1.3));
    }

    #[test]
    fn nadir_gain() {
        let g = channel_gain(Point::new(1.0, 1.0), Point::new(1.0, 1.0), &params_m1());
        // 2·1e-4·3 / (2π·4)
        assert!((g - 2.387_324_146_378_430_3e-5).abs() < 1e-17);
    }

    #[test]
    fn gain_outside_fov_is_zero() {
        let p = params_m1();
        // tan 60° · 2 m ≈ 3.46 m horizontal reach
        assert_eq!(channel_gain(Point::new(0.0, 0.0), Point::new(3.5, 0.0), &p), 0.0);
        assert!(channel_gain(Point::new(0.0, 0.0), Point::new(3.4, 0.0), &p) > 0.0);
    }

    #[test]
    fn mirror_receivers_equal_gain() {
        let p = params_m1();
        let led = Point::new(2.0, 2.0);
        let a = channel_gain(led, Point::new(1.0, 2.5), &p);
        let b = channel_gain(led, Point::new(3.0, 1.5), &p);
        assert!((a - b).abs() < 1e-20);
    }

    #[test]
    fn capacity_examples() {
        let p = params_m1();
        let leds = [Point::new(1.0, 1.0), Point::new(2.5, 1.0)];
        let rx = [Point::new(1.0, 1.0)];
        let gains = GainMatrix::build(&leds, &rx, &p);
        assert_eq!(capacity(0, 0, &[0.0, 5.0], &gains, &p), 0.0);

        // (ξPh/σ)² = 3·2π/e gives exactly one bit.
        let amp = (3.0 * 2.0 * PI / E).sqrt();
        let power = amp / gains.get(0, 0);
        let c = capacity(0, 0, &[power, 0.0], &gains, &p);
        assert!((c - 1.0).abs() < 1e-12);

        let c2 = capacity(0, 0, &[power, power], &gains, &p);
        assert!(c2 < c);
    }

    #[test]
    fn field_statistics() {
        let f = IlluminanceField::from_values(vec![1.0, 3.0]);
        assert_eq!(f.mean, 2.0);
        assert_eq!(f.rmse, 1.0);
        assert_eq!(f.cv_rmse, Some(0.5));

        let flat = IlluminanceField::from_values(vec![0.7; 5]);
        assert!(flat.cv_rmse.unwrap().abs() < 1e-15);

        let dark = IlluminanceField::from_values(vec![0.0; 3]);
        assert_eq!(dark.cv_rmse, None);
        assert!(dark.cv_or_inf().is_infinite());
    }

    #[test]
    fn cv_scale_invariant() {
        let p = params_m1();
        let leds = [Point::new(1.0, 1.0), Point::new(3.0, 2.0)];
        let rx: Vec<_> = (0..5).map(|k| Point::new(k as f64, 1.5)).collect();
        let gains = GainMatrix::build(&leds, &rx, &p);
        let a = illuminance_field(&[1.0, 2.0], &gains, &p).cv_rmse.unwrap();
        let b = illuminance_field(&[7.3, 14.6], &gains, &p).cv_rmse.unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn heatmap_resolution_two() {
        let room = RoomConfig::new(4.0, 2.0, 1, 1).unwrap();
        let s = heatmap(&room, &[Point::new(2.0, 1.0)], &[1.0], &params_m1(), 2);
        assert_eq!(s.len(), 4);
        assert_eq!((s[0].x, s[0].y), (1.0, 0.5));
        assert_eq!((s[3].x, s[3].y), (3.0, 1.5));
        let mut buf = Vec::new();
        write_heatmap_csv(&mut buf, &s, &["cv_rmse=0".into()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert_eq!(text.lines().nth(1), Some("x,y,illuminance"));
    }
}
