//! One-sided derivative tests for fixed points of piecewise-smooth maps.

use serde::Serialize;

use crate::dynamics::{exact_one_sided, UpdateMap};

/// Slopes within this distance of magnitude 1 are not decisive.
const UNIT_BAND: f64 = 1e-12;
const FD_STEP: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    /// Both one-sided slopes exceed 1 in magnitude.
    Repelling,
    /// Both one-sided slopes are below 1 in magnitude.
    Attracting,
    /// Mixed or borderline slopes. Never upgraded by simulation.
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMethod {
    Analytic,
    FiniteDifference,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub x: f64,
    pub left_derivative: f64,
    pub right_derivative: f64,
    pub classification: Stability,
    pub method: DerivativeMethod,
}

pub fn classify(left: f64, right: f64) -> Stability {
    let (l, r) = (left.abs(), right.abs());
    if l > 1.0 + UNIT_BAND && r > 1.0 + UNIT_BAND {
        Stability::Repelling
    } else if l < 1.0 - UNIT_BAND && r < 1.0 - UNIT_BAND {
        Stability::Attracting
    } else {
        Stability::Inconclusive
    }
}

/// One-sided derivatives at `x`, from the exact pieces when available and from
/// Richardson-extrapolated one-sided differences otherwise.
pub fn one_sided_derivatives(map: &UpdateMap, x: f64) -> StabilityReport {
    let ((l, r), method) = match map.exact() {
        Some(e) => (exact_one_sided(e, x), DerivativeMethod::Analytic),
        None => (
            finite_difference_derivatives(map, x),
            DerivativeMethod::FiniteDifference,
        ),
    };
    StabilityReport {
        x,
        left_derivative: l,
        right_derivative: r,
        classification: classify(l, r),
        method,
    }
}

/// `(left, right)` one-sided difference quotients with one Richardson step.
/// At an endpoint of `[0, 1]` the missing side copies the available one.
pub fn finite_difference_derivatives(map: &UpdateMap, x: f64) -> (f64, f64) {
    let f = |y: f64| map.eval(y);
    let fx = f(x);
    let side = |sign: f64| {
        let d = |h: f64| (f(x + sign * h) - fx) / (sign * h);
        2.0 * d(FD_STEP / 2.0) - d(FD_STEP)
    };
    let right = (x + FD_STEP <= 1.0).then(|| side(1.0));
    let left = (x - FD_STEP >= 0.0).then(|| side(-1.0));
    match (left, right) {
        (Some(l), Some(r)) => (l, r),
        (Some(l), None) => (l, l),
        (None, Some(r)) => (r, r),
        (None, None) => (f64::NAN, f64::NAN),
    }
}

/// Heuristic local basin test, reported next to (never instead of) the
/// derivative classification.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BasinProbe {
    pub heuristic: bool,
    pub samples: usize,
    pub radius: f64,
    pub steps: usize,
    /// Share of starting points ending within `1e-6` of the fixed point.
    pub converged_fraction: f64,
}

pub fn basin_probe(map: &UpdateMap, x: f64, radius: f64, steps: usize) -> BasinProbe {
    let samples = 64;
    let mut hits = 0;
    for i in 0..samples {
        let t = (i as f64 + 0.5) / samples as f64;
        let y0 = (x - radius + 2.0 * radius * t).clamp(0.0, 1.0);
        let y = map.eval_iterate(y0, steps);
        if (y - x).abs() < 1e-6 {
            hits += 1;
        }
    }
    BasinProbe {
        heuristic: true,
        samples,
        radius,
        steps,
        converged_fraction: hits as f64 / samples as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::build_update_map;
    use crate::game::AntiCoordinationGame;
    use crate::protocols::maximal_perturbed_protocol;

    #[test]
    fn perturbed_quarter_is_inconclusive() {
        let g = AntiCoordinationGame::with_equilibrium(0.25, 1.0).unwrap();
        let map = build_update_map(&maximal_perturbed_protocol(&g), 1.0).unwrap();
        let r = one_sided_derivatives(&map, 0.25);
        assert!((r.left_derivative + 11.0).abs() < 1e-10);
        assert!((r.right_derivative + 1.0 / 3.0).abs() < 1e-10);
        assert_eq!(r.classification, Stability::Inconclusive);
    }

    #[test]
    fn classification_rules() {
        assert_eq!(classify(-3.0, 2.0), Stability::Repelling);
        assert_eq!(classify(0.5, -0.2), Stability::Attracting);
        assert_eq!(classify(-3.0, 0.5), Stability::Inconclusive);
        assert_eq!(classify(-3.0, -1.0), Stability::Inconclusive);
    }
}
