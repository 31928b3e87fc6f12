//! Minimum LED powers at fixed positions.
//!
//! Each LED must cover the largest requirement among its served receivers,
//! either the data-rate requirement or the illuminance left over after every
//! other LED's contribution. Both depend on the other LEDs' powers, so the
//! powers are found by Gauss–Seidel fixed-point passes.

use std::f64::consts::{E, PI};

use super::association::Association;
use crate::error::{PlacementError, Result};
use crate::photometrics::GainMatrix;
use crate::scene::{PhysicalParams, Receiver};

const MAX_PASSES: usize = 1000;
const PASS_TOL: f64 = 1e-12;
const POWER_CEILING: f64 = 1e30;

/// Interference-plus-noise amplitude `√(σ² + κ·Σ_{n≠i} (ξ·P_n·h_nj)²)` seen by
/// receiver `j` when served by `led`.
pub fn noise_amplitude(led: usize, receiver: usize, gains: &GainMatrix, powers: &[f64], params: &PhysicalParams) -> f64 {
    let xi = params.illum_target;
    let interference: f64 = (0..gains.led_count())
        .filter(|&n| n != led)
        .map(|n| {
            let a = xi * powers[n] * gains.get(n, receiver);
            a * a
        })
        .sum();
    (params.noise_std * params.noise_std + params.interference_factor * interference).sqrt()
}

/// Illuminance receiver `j` collects from every LED except `led`.
pub fn illuminance_from_others(led: usize, receiver: usize, gains: &GainMatrix, powers: &[f64], params: &PhysicalParams) -> f64 {
    (0..gains.led_count())
        .filter(|&n| n != led)
        .map(|n| params.illum_target * powers[n] * gains.get(n, receiver))
        .sum()
}

/// Power LED `led` needs for receiver `receiver` to reach `rate_min`
/// bits/transmission, the other LEDs held at `powers`.
pub fn required_power_comm(
    led: usize,
    receiver: usize,
    gains: &GainMatrix,
    powers: &[f64],
    params: &PhysicalParams,
    rate_min: f64,
) -> Result<f64> {
    let h = gains.get(led, receiver);
    if h <= 0.0 {
        return Err(PlacementError::UnservableLink {
            led: led + 1,
            receiver: receiver + 1,
        });
    }
    let snr_factor = (2.0 * PI / E * (2f64.powf(2.0 * rate_min) - 1.0)).sqrt();
    Ok(noise_amplitude(led, receiver, gains, powers, params) * snr_factor / (params.illum_target * h))
}

/// Power LED `led` needs so that receiver `receiver` reaches `illum_min` in
/// total, given the other LEDs' contributions.
pub fn required_power_illum(
    led: usize,
    receiver: usize,
    gains: &GainMatrix,
    powers: &[f64],
    params: &PhysicalParams,
    illum_min: f64,
) -> Result<f64> {
    let h = gains.get(led, receiver);
    if h <= 0.0 {
        return Err(PlacementError::UnservableLink {
            led: led + 1,
            receiver: receiver + 1,
        });
    }
    let residual = illum_min - illuminance_from_others(led, receiver, gains, powers, params);
    Ok(residual.max(0.0) / (params.illum_target * h))
}

/// Smallest power of `led` meeting both requirements of every receiver it
/// serves.
pub fn led_minimum_power(
    led: usize,
    gains: &GainMatrix,
    assoc: &Association,
    receivers: &[Receiver],
    powers: &[f64],
    params: &PhysicalParams,
) -> Result<f64> {
    let mut need = 0.0f64;
    for &j in assoc.served_by(led) {
        let r = &receivers[j];
        need = need
            .max(required_power_comm(led, j, gains, powers, params, r.rate_min)?)
            .max(required_power_illum(led, j, gains, powers, params, r.illum_min)?);
    }
    Ok(need)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointPowers {
    pub powers: Vec<f64>,
    pub passes: usize,
}

/// Gauss–Seidel fixed point of the per-LED minimum powers, starting from
/// `start`.
pub fn minimum_powers(
    gains: &GainMatrix,
    assoc: &Association,
    receivers: &[Receiver],
    params: &PhysicalParams,
    start: &[f64],
) -> Result<FixedPointPowers> {
    let mut powers = start.to_vec();
    for pass in 1..=MAX_PASSES {
        let mut max_change = 0.0f64;
        for i in 0..gains.led_count() {
            let p = led_minimum_power(i, gains, assoc, receivers, &powers, params)?;
            max_change = max_change.max((p - powers[i]).abs());
            powers[i] = p;
        }
        let peak = powers.iter().cloned().fold(0.0, f64::max);
        if !peak.is_finite() || peak > POWER_CEILING {
            return Err(PlacementError::PowerDivergence(format!(
                "powers exceed {POWER_CEILING:e} after {pass} passes; interference makes the rate requirement unattainable"
            )));
        }
        if max_change <= PASS_TOL * peak.max(1.0) {
            return Ok(FixedPointPowers { powers, passes: pass });
        }
    }
    Err(PlacementError::PowerDivergence(format!("no convergence within {MAX_PASSES} passes")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photometrics::capacity;
    use crate::scene::Point;

    fn unit_params() -> PhysicalParams {
        PhysicalParams {
            noise_std: 1.0,
            illum_target: 1.0,
            ..PhysicalParams::default()
        }
    }

    #[test]
    fn zero_rate_needs_no_power() {
        let p = unit_params();
        let g = GainMatrix::build(&[Point::new(1.0, 1.0)], &[Point::new(1.0, 1.0)], &p);
        assert_eq!(required_power_comm(0, 0, &g, &[0.0], &p, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn half_bit_unit_gain() {
        // σ = ξ = h = 1, no interference, c = 0.5 → √(2π/e)
        let p = unit_params();
        let g = GainMatrix::build(&[Point::new(1.0, 1.0)], &[Point::new(1.0, 1.0)], &p);
        let h = g.get(0, 0);
        let pw = required_power_comm(0, 0, &g, &[0.0], &p, 0.5).unwrap() * h;
        assert!((pw - 1.520_346_901_066_280_8).abs() < 1e-12);
    }

    #[test]
    fn comm_power_inverts_capacity() {
        let p = PhysicalParams::default();
        let leds = [Point::new(1.0, 1.0), Point::new(2.5, 1.5)];
        let rx = [Point::new(1.3, 0.8)];
        let g = GainMatrix::build(&leds, &rx, &p);
        let mut powers = vec![0.0, 3000.0];
        for rate in [0.2, 0.8, 1.5, 3.0] {
            powers[0] = required_power_comm(0, 0, &g, &powers, &p, rate).unwrap();
            assert!((capacity(0, 0, &powers, &g, &p) - rate).abs() < 1e-10);
        }
    }

    #[test]
    fn unservable_link() {
        let p = PhysicalParams {
            fov_semi_angle_deg: 5.0,
            ..PhysicalParams::default()
        };
        let g = GainMatrix::build(&[Point::new(0.0, 0.0)], &[Point::new(4.0, 0.0)], &p);
        assert!(matches!(
            required_power_comm(0, 0, &g, &[0.0], &p, 1.0),
            Err(PlacementError::UnservableLink { led: 1, receiver: 1 })
        ));
    }

    #[test]
    fn single_led_illumination_power() {
        let p = PhysicalParams::default();
        let rx = vec![Receiver {
            x_m: 1.0,
            y_m: 1.0,
            rate_min: 0.0,
            illum_min: 0.4,
        }];
        let g = GainMatrix::build(&[Point::new(1.0, 1.0)], &[rx[0].position()], &p);
        let assoc = Association::from_serving(vec![0], 1);
        let fp = minimum_powers(&g, &assoc, &rx, &p, &[0.0]).unwrap();
        assert!((fp.powers[0] * g.get(0, 0) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn full_interference_edge_receivers_diverge() {
        let p = PhysicalParams::default();
        let leds = [Point::new(1.0, 1.0), Point::new(3.0, 1.0)];
        let rx: Vec<Receiver> = [1.95, 2.05]
            .iter()
            .map(|&x| Receiver {
                x_m: x,
                y_m: 1.0,
                rate_min: 1.0,
                illum_min: 0.0,
            })
            .collect();
        let pts: Vec<_> = rx.iter().map(|r| r.position()).collect();
        let g = GainMatrix::build(&leds, &pts, &p);
        let assoc = Association::from_serving(vec![0, 1], 2);
        assert!(matches!(
            minimum_powers(&g, &assoc, &rx, &p, &[0.0, 0.0]),
            Err(PlacementError::PowerDivergence(_))
        ));
    }
}
