use crate::error::{PlacementError, Result};
use crate::photometrics::GainMatrix;
use crate::scene::{PhysicalParams, Receiver};

/// Which LED serves each receiver, and the inverse map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Association {
    serving: Vec<usize>,
    served: Vec<Vec<usize>>,
}

impl Association {
    /// Builds an association from a receiver → LED map (0-based LEDs).
    pub fn from_serving(serving: Vec<usize>, leds: usize) -> Self {
        let mut served = vec![Vec::new(); leds];
        for (j, &i) in serving.iter().enumerate() {
            served[i].push(j);
        }
        Self { serving, served }
    }

    /// Serving LED of `receiver` (0-based).
    pub fn server(&self, receiver: usize) -> usize {
        self.serving[receiver]
    }

    /// Receivers served by `led` (0-based), ascending.
    pub fn served_by(&self, led: usize) -> &[usize] {
        &self.served[led]
    }

    pub fn serving(&self) -> &[usize] {
        &self.serving
    }

    pub fn led_count(&self) -> usize {
        self.served.len()
    }

    /// True when every receiver appears in exactly one served set.
    pub fn is_partition(&self) -> bool {
        let mut seen = vec![0usize; self.serving.len()];
        for set in &self.served {
            for &j in set {
                seen[j] += 1;
            }
        }
        seen.iter().all(|&c| c == 1)
            && self.served.iter().enumerate().all(|(i, set)| set.iter().all(|&j| self.serving[j] == i))
    }
}

/// Assigns every receiver to the LED with the strongest received signal
/// `ξ·P_i·h_ij`, lowest index on ties. Receivers that see no signal at all
/// (every LED dark towards them) fall back to the strongest channel gain.
pub fn associate(
    powers: &[f64],
    gains: &GainMatrix,
    receivers: &[Receiver],
    params: &PhysicalParams,
) -> Result<Association> {
    let k = gains.led_count();
    let mut serving = Vec::with_capacity(gains.receiver_count());
    for j in 0..gains.receiver_count() {
        let best_gain = argmax((0..k).map(|i| gains.get(i, j)));
        if gains.get(best_gain, j) <= 0.0 {
            let r = &receivers[j];
            return Err(PlacementError::UncoveredReceiver {
                receiver: j + 1,
                x: r.x_m,
                y: r.y_m,
            });
        }
        let best_signal = argmax((0..k).map(|i| params.illum_target * powers[i] * gains.get(i, j)));
        let signal = params.illum_target * powers[best_signal] * gains.get(best_signal, j);
        serving.push(if signal > 0.0 { best_signal } else { best_gain });
    }
    Ok(Association::from_serving(serving, k))
}

/// Index of the first maximum.
fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{uniform_receiver_grid, LedLayout, Point, RoomConfig};

    #[test]
    fn dominant_gain_wins() {
        let params = PhysicalParams::default();
        let leds = [Point::new(0.5, 0.5), Point::new(3.0, 0.5), Point::new(6.0, 4.0)];
        let rx = vec![Receiver {
            x_m: 6.0,
            y_m: 4.0,
            rate_min: 0.0,
            illum_min: 0.0,
        }];
        let g = GainMatrix::build(&leds, &[rx[0].position()], &params);
        let a = associate(&[1.0; 3], &g, &rx, &params).unwrap();
        assert_eq!(a.server(0), 2);
    }

    #[test]
    fn tie_goes_to_lowest_index() {
        let params = PhysicalParams::default();
        let leds = [Point::new(1.0, 1.0), Point::new(3.0, 1.0)];
        let rx = vec![Receiver {
            x_m: 2.0,
            y_m: 1.0,
            rate_min: 0.0,
            illum_min: 0.0,
        }];
        let g = GainMatrix::build(&leds, &[rx[0].position()], &params);
        assert_eq!(associate(&[1.0, 1.0], &g, &rx, &params).unwrap().server(0), 0);
    }

    #[test]
    fn quadrant_receivers_map_to_quadrant_leds() {
        let params = PhysicalParams::default();
        let room = RoomConfig::new(7.5, 5.0, 2, 2).unwrap();
        let layout = LedLayout::centered(&room, 1.0);
        let rx = uniform_receiver_grid(&room, 2, 2, 0.0, 0.0);
        let pts: Vec<_> = rx.iter().map(|r| r.position()).collect();
        let g = GainMatrix::build(&layout.positions, &pts, &params);
        let a = associate(&layout.powers, &g, &rx, &params).unwrap();
        assert_eq!(a.serving(), &[0, 1, 2, 3]);
        assert!(a.is_partition());
    }

    #[test]
    fn uncovered_receiver_is_named() {
        let params = PhysicalParams {
            fov_semi_angle_deg: 10.0,
            ..PhysicalParams::default()
        };
        let leds = [Point::new(0.0, 0.0)];
        let rx = vec![Receiver {
            x_m: 5.0,
            y_m: 5.0,
            rate_min: 0.0,
            illum_min: 0.0,
        }];
        let g = GainMatrix::build(&leds, &[rx[0].position()], &params);
        let err = associate(&[1.0], &g, &rx, &params).unwrap_err();
        assert!(matches!(err, PlacementError::UncoveredReceiver { receiver: 1, .. }));
    }
}
