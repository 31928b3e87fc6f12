//! Per-link constraint factors that rewrite both requirements as lower
//! bounds on `P_i` proportional to `d_ij^(m+3)`.

use std::f64::consts::{E, PI};

use super::power::{illuminance_from_others, noise_amplitude};
use crate::photometrics::{concentrator_gain, incidence_deg, GainMatrix};
use crate::scene::{PhysicalParams, Point, Receiver};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintFactors {
    /// Illumination factor `V = 2π / (ξ(m+1)·A·g·H^(m+1))`.
    pub v: f64,
    /// Communication factor `W`, `V` scaled by `√(2π/e)` and the
    /// interference-plus-noise amplitude.
    pub w: f64,
    /// `√(2^(2·c_th) − 1)`.
    pub c: f64,
    /// Illuminance still missing after every other LED's contribution.
    pub residual_illum: f64,
    /// Combined factor `max{I·V, C·W}^(2/(m+3))`, with a non-positive
    /// residual illuminance contributing nothing.
    pub combined: f64,
}

impl ConstraintFactors {
    /// Power required at squared distance `d2`:
    /// `max{I·V, C·W}·d^(m+3) = (combined·d²)^((m+3)/2)`.
    pub fn required_power(&self, d2: f64, m: f64) -> f64 {
        (self.combined * d2).powf((m + 3.0) / 2.0)
    }
}

/// Constraint factors of the link from `led` to `receiver` for the current
/// powers and positions of every other LED.
pub fn constraint_factors(
    led: usize,
    receiver: usize,
    positions: &[Point],
    gains: &GainMatrix,
    powers: &[f64],
    receivers: &[Receiver],
    params: &PhysicalParams,
) -> ConstraintFactors {
    let m = params.lambert_order();
    let rx = &receivers[receiver];
    let psi = incidence_deg(positions[led], rx.position(), params.height_m);
    let g = concentrator_gain(psi, params.refractive_index, params.fov_semi_angle_deg);
    let base = params.illum_target * (m + 1.0) * params.detector_area_m2 * g * params.height_m.powf(m + 1.0);
    let v = 2.0 * PI / base;
    let w = (2.0 * PI).powf(1.5) * E.powf(-0.5) * noise_amplitude(led, receiver, gains, powers, params) / base;
    let c = (2f64.powf(2.0 * rx.rate_min) - 1.0).sqrt();
    let residual_illum = rx.illum_min - illuminance_from_others(led, receiver, gains, powers, params);
    ConstraintFactors {
        v,
        w,
        c,
        residual_illum,
        combined: combine(residual_illum, v, c, w, m),
    }
}

/// `max{I·V, C·W}^(2/(m+3))`, treating `I ≤ 0` as an inactive branch.
pub fn combine(residual_illum: f64, v: f64, c: f64, w: f64, m: f64) -> f64 {
    let illum = if residual_illum > 0.0 { residual_illum * v } else { 0.0 };
    let comm = if c > 0.0 { c * w } else { 0.0 };
    illum.max(comm).powf(2.0 / (m + 3.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photometrics::squared_link_distance;
    use crate::solver::power::{required_power_comm, required_power_illum};

    #[test]
    fn inactive_branches_give_zero() {
        assert_eq!(combine(-0.3, 10.0, 0.0, 5.0, 1.0), 0.0);
        assert_eq!(combine(0.0, 10.0, 0.0, 5.0, 1.0), 0.0);
    }

    #[test]
    fn equal_branches() {
        // I·V = C·W = 8, m = 1 → 8^(1/2)
        let a = combine(2.0, 4.0, 1.0, 8.0, 1.0);
        assert!((a - 8f64.sqrt()).abs() < 1e-15);
        assert!((combine(2.0, 4.0, 0.5, 16.0, 1.0) - a).abs() < 1e-15);
    }

    #[test]
    fn exponent_follows_lambert_order() {
        // m = 1 → square root, m = 5 → fourth root
        assert!((combine(1.0, 16.0, 0.0, 0.0, 1.0) - 4.0).abs() < 1e-15);
        assert!((combine(1.0, 16.0, 0.0, 0.0, 5.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn factors_reproduce_direct_power_requirements() {
        let params = PhysicalParams::default();
        let leds = [Point::new(1.5, 1.2), Point::new(4.0, 2.5)];
        let receivers = vec![Receiver {
            x_m: 2.1,
            y_m: 0.9,
            rate_min: 1.2,
            illum_min: 0.4,
        }];
        let g = GainMatrix::build(&leds, &[receivers[0].position()], &params);
        let powers = [0.0, 5000.0];
        let f = constraint_factors(0, 0, &leds, &g, &powers, &receivers, &params);
        let m = params.lambert_order();
        let d2 = squared_link_distance(leds[0], receivers[0].position(), params.height_m);
        let d_m3 = d2.powf((m + 3.0) / 2.0);
        let illum = required_power_illum(0, 0, &g, &powers, &params, 0.4).unwrap();
        let comm = required_power_comm(0, 0, &g, &powers, &params, 1.2).unwrap();
        assert!((f.residual_illum * f.v * d_m3 - illum).abs() < 1e-9 * illum);
        assert!((f.c * f.w * d_m3 - comm).abs() < 1e-9 * comm);
        assert!((f.required_power(d2, m) - illum.max(comm)).abs() < 1e-9 * illum.max(comm));
    }
}
