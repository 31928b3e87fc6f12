//! Lagrange-dual solution of the single-LED placement subproblem
//!
//! ```text
//! min P   s.t.  P^(2/(m+3)) ≥ M_j·((x − x_j)² + o_j)   for every served j,
//!               x ∈ R
//! ```
//!
//! where `x` is the LED's free coordinate, `o_j` collects the fixed
//! other-axis offset plus `H²`, and `R` is a union of closed intervals. For
//! fixed multipliers the Lagrangian is minimized in closed form; the
//! multipliers follow a projected subgradient ascent.

use serde::{Deserialize, Serialize};

use crate::uniformity::IntervalUnion;

/// `P = ((2/(m+3))·Σλ)^((m+3)/(m+1))`, the power that zeroes `∂L/∂P`.
pub fn kkt_power(lambda_sum: f64, m: f64) -> f64 {
    (2.0 / (m + 3.0) * lambda_sum.max(0.0)).powf((m + 3.0) / (m + 1.0))
}

/// Weighted centroid `Σ λ_j M_j x_j / Σ λ_j M_j` that zeroes `∂L/∂x`.
/// `None` when every weight vanishes.
pub fn kkt_coordinate(lambdas: &[f64], weights: &[f64], coords: &[f64]) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&l, &w), &x) in lambdas.iter().zip(weights).zip(coords) {
        num += l * w * x;
        den += l * w;
    }
    (den > 0.0).then(|| num / den)
}

/// Keeps `x_hat` when it lies in `ranges`, otherwise returns the interval
/// endpoint with the smallest `objective`, ties to the smaller endpoint.
/// `None` when `ranges` is empty.
pub fn clamp_coordinate(x_hat: f64, ranges: &IntervalUnion, objective: impl Fn(f64) -> f64) -> Option<f64> {
    if ranges.contains(x_hat) {
        return Some(x_hat);
    }
    let mut best: Option<(f64, f64)> = None;
    for e in ranges.endpoints() {
        let v = objective(e);
        if best.map_or(true, |(_, bv)| v < bv) {
            best = Some((e, v));
        }
    }
    best.map(|(e, _)| e)
}

/// Projected subgradient update `λ ← max(0, λ + γ·r)`.
pub fn subgradient_step(lambdas: &[f64], residuals: &[f64], gamma: f64) -> Vec<f64> {
    lambdas
        .iter()
        .zip(residuals)
        .map(|(&l, &r)| (l + gamma * r).max(0.0))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum StepSchedule {
    /// `γ_l = γ₀ / √l`
    #[default]
    Diminishing,
    Constant,
}

/// Multipliers and step bookkeeping of one subproblem's dual ascent.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub multipliers: Vec<f64>,
    pub gamma: f64,
    pub schedule: StepSchedule,
    pub iteration: usize,
    pub max_iterations: usize,
}

impl DualState {
    pub fn new(count: usize, initial: f64, gamma: f64, schedule: StepSchedule, max_iterations: usize) -> Self {
        Self {
            multipliers: vec![initial; count],
            gamma,
            schedule,
            iteration: 0,
            max_iterations,
        }
    }

    /// Step size for the upcoming iteration.
    pub fn step_size(&self) -> f64 {
        match self.schedule {
            StepSchedule::Constant => self.gamma,
            StepSchedule::Diminishing => self.gamma / ((self.iteration + 1) as f64).sqrt(),
        }
    }

    pub fn step(&mut self, residuals: &[f64]) {
        let gamma = self.step_size();
        self.multipliers = subgradient_step(&self.multipliers, residuals, gamma);
        self.iteration += 1;
    }

    pub fn exhausted(&self) -> bool {
        self.iteration >= self.max_iterations
    }

    pub fn lambda_sum(&self) -> f64 {
        self.multipliers.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subproblem {
    pub weights: Vec<f64>,
    pub targets: Vec<f64>,
    pub offsets: Vec<f64>,
    pub m: f64,
}

impl Subproblem {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    fn sq_dist(&self, j: usize, x: f64) -> f64 {
        let dx = x - self.targets[j];
        dx * dx + self.offsets[j]
    }

    fn exponent(&self) -> f64 {
        2.0 / (self.m + 3.0)
    }

    /// `max_j M_j·d_j²(x)`, the smallest admissible `P^(2/(m+3))` at `x`.
    pub fn requirement(&self, x: f64) -> f64 {
        (0..self.len()).map(|j| self.weights[j] * self.sq_dist(j, x)).fold(0.0, f64::max)
    }

    /// Smallest feasible power with the LED at `x`.
    pub fn primal_power(&self, x: f64) -> f64 {
        self.requirement(x).powf(1.0 / self.exponent())
    }

    /// `L(P, x, λ) = P + Σ λ_j (M_j d_j²(x) − P^(2/(m+3)))`.
    pub fn lagrangian(&self, power: f64, x: f64, lambdas: &[f64]) -> f64 {
        let pe = power.powf(self.exponent());
        power
            + (0..self.len())
                .map(|j| lambdas[j] * (self.weights[j] * self.sq_dist(j, x) - pe))
                .sum::<f64>()
    }

    /// Constraint residuals `M_j d_j²(x) − P^(2/(m+3))`.
    pub fn residuals(&self, power: f64, x: f64) -> Vec<f64> {
        let pe = power.powf(self.exponent());
        (0..self.len()).map(|j| self.weights[j] * self.sq_dist(j, x) - pe).collect()
    }

    /// Same subproblem with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            weights: self.weights.iter().map(|w| w * factor).collect(),
            ..self.clone()
        }
    }

    /// Minimizer of the Lagrangian over `x` for fixed multipliers.
    fn lagrangian_argmin_x(&self, lambdas: &[f64], domain: &Domain<'_>, previous: f64) -> f64 {
        match domain {
            Domain::Fixed(x) => *x,
            Domain::Free(ranges) => {
                let x_hat = kkt_coordinate(lambdas, &self.weights, &self.targets).unwrap_or(previous);
                let quad = |x: f64| {
                    (0..self.len())
                        .map(|j| lambdas[j] * self.weights[j] * self.sq_dist(j, x))
                        .sum::<f64>()
                };
                clamp_coordinate(x_hat, ranges, quad).unwrap_or(previous)
            }
        }
    }
}

/// Where the LED's coordinate may go.
#[derive(Debug, Clone, Copy)]
pub enum Domain<'a> {
    Fixed(f64),
    Free(&'a IntervalUnion),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualConfig {
    pub max_iterations: usize,
    pub gamma: f64,
    pub schedule: StepSchedule,
    /// Stop once the relative duality gap falls below this.
    pub gap_tol: f64,
    pub initial_multiplier: f64,
}

impl Default for DualConfig {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            gamma: 1.0,
            schedule: StepSchedule::Diminishing,
            gap_tol: 1e-3,
            initial_multiplier: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualOutcome {
    pub power: f64,
    pub coordinate: f64,
    /// Multipliers of the normalized subproblem certifying the solution.
    pub multipliers: Vec<f64>,
    /// Weight scale: the normalized subproblem is `sub.scaled(1/normalization)`.
    pub normalization: f64,
    /// Ascent iterations; zero when the coordinate was pinned.
    pub iterations: usize,
    /// Whether the ascent closed the gap before the iteration limit.
    pub converged: bool,
    /// Relative duality gap of the ascent at exit.
    pub gap: f64,
}

/// Exact minimizer of `requirement` over `ranges`, ties to the smaller
/// coordinate. `None` when `ranges` is empty.
///
/// The requirement is a maximum of parabolas, so its unconstrained minimum
/// sits at a vertex or at a crossing of two parabolas; on each interval the
/// convex function is minimized by clamping that point.
pub fn minimax_coordinate(sub: &Subproblem, ranges: &IntervalUnion) -> Option<f64> {
    let n = sub.len();
    let mut candidates: Vec<f64> = sub.targets.clone();
    for j in 0..n {
        for k in j + 1..n {
            // a_j (x − t_j)² + a_j o_j = a_k (x − t_k)² + a_k o_k
            let (aj, ak) = (sub.weights[j], sub.weights[k]);
            let (tj, tk) = (sub.targets[j], sub.targets[k]);
            let qa = aj - ak;
            let qb = -2.0 * (aj * tj - ak * tk);
            let qc = aj * (tj * tj + sub.offsets[j]) - ak * (tk * tk + sub.offsets[k]);
            if qa.abs() <= 1e-14 * aj.max(ak) {
                if qb != 0.0 {
                    candidates.push(-qc / qb);
                }
                continue;
            }
            let disc = qb * qb - 4.0 * qa * qc;
            if disc >= 0.0 {
                let r = disc.sqrt();
                candidates.push((-qb - r) / (2.0 * qa));
                candidates.push((-qb + r) / (2.0 * qa));
            }
        }
    }
    let free = candidates
        .into_iter()
        .filter(|x| x.is_finite())
        .map(|x| (sub.requirement(x), x))
        .fold(None, |best: Option<(f64, f64)>, c| match best {
            Some(b) if (b.0, b.1) <= c => Some(b),
            _ => Some(c),
        })
        .map(|(_, x)| x)?;
    ranges
        .intervals()
        .iter()
        .map(|&(lo, hi)| {
            let x = free.clamp(lo, hi);
            (sub.requirement(x), x)
        })
        .fold(None, |best: Option<(f64, f64)>, c| match best {
            Some(b) if (b.0, b.1) <= c => Some(b),
            _ => Some(c),
        })
        .map(|(_, x)| x)
}

/// Multipliers certifying `(power, x)` for the normalized subproblem: the
/// total `(m+3)/2·P^((m+1)/(m+3))` zeroes `∂L/∂P`, split between the two
/// binding receivers whose slopes cancel (or put on one receiver whose
/// vertex is at `x`). At a clamped coordinate all mass goes to the most
/// demanding receiver.
pub fn certificate(sub: &Subproblem, power: f64, x: f64) -> Vec<f64> {
    let n = sub.len();
    let mut lambdas = vec![0.0; n];
    if n == 0 || !(power > 0.0) {
        return lambdas;
    }
    let total = (sub.m + 3.0) / 2.0 * power.powf((sub.m + 1.0) / (sub.m + 3.0));
    let req = sub.requirement(x);
    let value = |j: usize| sub.weights[j] * sub.sq_dist(j, x);
    let slope = |j: usize| 2.0 * sub.weights[j] * (x - sub.targets[j]);
    let active: Vec<usize> = (0..n).filter(|&j| value(j) >= req * (1.0 - 1e-9)).collect();
    let top = active
        .iter()
        .copied()
        .fold(0, |b, j| if value(j) > value(b) { j } else { b });
    let scale = req.max(f64::MIN_POSITIVE);
    let flat = active.iter().copied().find(|&j| slope(j).abs() <= 1e-9 * scale);
    let down = active.iter().copied().filter(|&j| slope(j) < 0.0).min_by(|&a, &b| slope(a).total_cmp(&slope(b)));
    let up = active.iter().copied().filter(|&j| slope(j) > 0.0).max_by(|&a, &b| slope(a).total_cmp(&slope(b)));
    match (flat, down, up) {
        (Some(j), _, _) => lambdas[j] = total,
        (None, Some(j), Some(k)) => {
            let theta = slope(k) / (slope(k) - slope(j));
            lambdas[j] = total * theta;
            lambdas[k] = total * (1.0 - theta);
        }
        _ => lambdas[top] = total,
    }
    lambdas
}

/// Dual ascent on `sub` starting from coordinate `start`.
///
/// Weights are normalized so the requirement at `start` is 1, which keeps
/// the step size meaningful regardless of the physical power scale. The
/// ascent stops on the relative duality gap or the iteration limit; the
/// returned point is then the exact minimizer over the domain, with
/// multipliers certifying it.
pub fn solve_subproblem(sub: &Subproblem, domain: Domain<'_>, start: f64, config: &DualConfig) -> DualOutcome {
    let scale = sub.requirement(start);
    if sub.is_empty() || !(scale > 0.0) {
        return DualOutcome {
            power: 0.0,
            coordinate: start,
            multipliers: vec![0.0; sub.len()],
            normalization: 1.0,
            iterations: 0,
            converged: true,
            gap: 0.0,
        };
    }
    let norm = sub.scaled(1.0 / scale);
    let (x, iterations, gap) = match domain {
        Domain::Fixed(x) => (x, 0, 0.0),
        Domain::Free(r) => match r.intervals() {
            [(lo, hi)] if lo == hi => (*lo, 0, 0.0),
            _ => {
                let (iterations, gap) = ascend(&norm, r, start, config);
                (minimax_coordinate(&norm, r).unwrap_or(start), iterations, gap)
            }
        },
    };
    let power = norm.primal_power(x);
    DualOutcome {
        power: sub.primal_power(x),
        coordinate: x,
        multipliers: certificate(&norm, power, x),
        normalization: scale,
        iterations,
        converged: gap <= config.gap_tol,
        gap,
    }
}

/// Projected subgradient ascent on the normalized subproblem. Returns the
/// iteration count and the relative duality gap at exit.
fn ascend(norm: &Subproblem, ranges: &IntervalUnion, start: f64, config: &DualConfig) -> (usize, f64) {
    let domain = Domain::Free(ranges);
    let mut x = ranges.nearest(start).unwrap_or(start);
    let mut best_primal = norm.primal_power(x);
    let mut best_dual = f64::NEG_INFINITY;
    let mut state = DualState::new(
        norm.len(),
        config.initial_multiplier,
        config.gamma,
        config.schedule,
        config.max_iterations,
    );
    let mut gap = f64::INFINITY;
    while !state.exhausted() {
        let power = kkt_power(state.lambda_sum(), norm.m);
        x = norm.lagrangian_argmin_x(&state.multipliers, &domain, x);
        best_dual = best_dual.max(norm.lagrangian(power, x, &state.multipliers));
        if ranges.contains(x) {
            best_primal = best_primal.min(norm.primal_power(x));
        }
        gap = (best_primal - best_dual) / best_primal;
        if gap <= config.gap_tol {
            break;
        }
        let residuals = norm.residuals(power, x);
        state.step(&residuals);
    }
    (state.iteration, gap.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kkt_power_examples() {
        assert!((kkt_power(2.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((kkt_power(4.0, 1.0) - 4.0).abs() < 1e-15);
        assert_eq!(kkt_power(0.0, 1.0), 0.0);
    }

    #[test]
    fn kkt_coordinate_examples() {
        assert_eq!(kkt_coordinate(&[2.0], &[0.5], &[1.7]), Some(1.7));
        assert_eq!(kkt_coordinate(&[1.0, 1.0], &[1.0, 1.0], &[0.0, 4.0]), Some(2.0));
        assert_eq!(kkt_coordinate(&[1.0, 3.0], &[1.0, 1.0], &[0.0, 4.0]), Some(3.0));
        assert_eq!(kkt_coordinate(&[0.0, 0.0], &[1.0, 1.0], &[0.0, 4.0]), None);
    }

    #[test]
    fn clamp_examples() {
        let r = IntervalUnion::from_intervals(vec![(1.0, 3.0), (5.0, 8.0)]);
        let quad = |c: f64| move |x: f64| (x - c) * (x - c);
        assert_eq!(clamp_coordinate(2.0, &r, quad(2.0)), Some(2.0));
        assert_eq!(clamp_coordinate(4.0, &r, quad(4.0)), Some(3.0));
        assert_eq!(clamp_coordinate(9.0, &r, quad(9.0)), Some(8.0));
        assert_eq!(clamp_coordinate(4.0, &IntervalUnion::empty(), quad(4.0)), None);
    }

    #[test]
    fn subgradient_examples() {
        assert_eq!(subgradient_step(&[0.7], &[0.0], 0.01), vec![0.7]);
        assert_eq!(subgradient_step(&[0.7], &[-100.0], 0.01), vec![0.0]);
        let l = subgradient_step(&[0.7], &[3.0], 0.01);
        assert!((l[0] - 0.73).abs() < 1e-15);
    }

    #[test]
    fn diminishing_schedule() {
        let mut s = DualState::new(1, 1.0, 0.01, StepSchedule::Diminishing, 10);
        assert!((s.step_size() - 0.01).abs() < 1e-15);
        s.step(&[0.0]);
        s.step(&[0.0]);
        s.step(&[0.0]);
        assert!((s.step_size() - 0.005).abs() < 1e-15);
        let c = DualState::new(1, 1.0, 0.01, StepSchedule::Constant, 10);
        assert_eq!(c.step_size(), 0.01);
    }

    #[test]
    fn single_receiver_subproblem_moves_overhead() {
        let sub = Subproblem {
            weights: vec![2.0],
            targets: vec![1.3],
            offsets: vec![4.0],
            m: 1.0,
        };
        let all = IntervalUnion::single(0.0, 5.0);
        let out = solve_subproblem(&sub, Domain::Free(&all), 3.0, &DualConfig::default());
        assert!((out.coordinate - 1.3).abs() < 1e-9);
        // P^(1/2) = M·H² → P = 64
        assert!((out.power - 64.0).abs() < 1e-6);
    }

    #[test]
    fn two_receivers_settle_at_minimax_center() {
        let sub = Subproblem {
            weights: vec![1.0, 1.0],
            targets: vec![0.0, 4.0],
            offsets: vec![1.0, 1.0],
            m: 1.0,
        };
        let all = IntervalUnion::single(0.0, 4.0);
        let out = solve_subproblem(&sub, Domain::Free(&all), 0.5, &DualConfig::default());
        assert!((out.coordinate - 2.0).abs() < 1e-12, "{out:?}");
        assert!((out.power - sub.primal_power(2.0)).abs() < 1e-12 * out.power);
        assert!((out.multipliers[0] - out.multipliers[1]).abs() < 1e-12);
    }

    #[test]
    fn fixed_domain_returns_requirement() {
        let sub = Subproblem {
            weights: vec![1.0, 3.0],
            targets: vec![0.0, 2.0],
            offsets: vec![1.0, 1.0],
            m: 1.0,
        };
        let out = solve_subproblem(&sub, Domain::Fixed(0.5), 0.5, &DualConfig::default());
        assert_eq!(out.coordinate, 0.5);
        assert!((out.power - sub.primal_power(0.5)).abs() < 1e-12);
    }
}
