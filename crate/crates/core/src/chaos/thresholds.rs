//! Step sizes above which the maximal perturbed and truncated maps are
//! certifiably chaotic with a repelling interior equilibrium, and the exact
//! onset step for symmetric games.

use serde::Serialize;

use super::ChaosError;
use crate::protocols::{ProtocolKind, RevisionProtocol};
use crate::roots::{bisect, grid_max};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdFamily {
    Perturbed,
    Truncated,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub family: ThresholdFamily,
    pub p: f64,
    /// Individual bounds. For the perturbed family: the first three guarantee
    /// chaos and a repelling equilibrium, the last two bound the slopes at `p`.
    /// For the truncated family the same layout with five entries.
    pub components: Vec<f64>,
    /// Step size beyond which both chaos and a repelling equilibrium hold.
    pub threshold: f64,
    /// Whether the threshold lies in `(0, 1]`.
    pub valid: bool,
}

fn check_p(p: f64) -> Result<(), ChaosError> {
    if p > 0.0 && p < 0.5 {
        Ok(())
    } else {
        Err(ChaosError::EquilibriumOutOfRange(p))
    }
}

/// Components `[1/(p+1), 1/(2-p), delta_3, p/(2(1-p)), (1-p)/(2p)]` for the
/// maximal perturbed map; the threshold is the largest of the first three.
pub fn delta_threshold_perturbed(p: f64) -> Result<ThresholdReport, ChaosError> {
    check_p(p)?;
    let d1 = 1.0 / (p + 1.0);
    let d2 = 1.0 / (2.0 - p);
    let d3 = (p + 3.0 + ((-p.powi(3) - 4.0 * p * p - 13.0 * p + 34.0) / (2.0 - p)).sqrt()) / 8.0;
    let d4 = p / (2.0 * (1.0 - p));
    let d5 = (1.0 - p) / (2.0 * p);
    let threshold = d1.max(d2).max(d3);
    Ok(ThresholdReport {
        family: ThresholdFamily::Perturbed,
        p,
        components: vec![d1, d2, d3, d4, d5],
        threshold,
        valid: threshold > 0.0 && threshold <= 1.0,
    })
}

/// Components `[(p+1)/(p+2), p(p+1)/(2-p), delta_3, p/(2(1-p)),
/// p(2-2p-p^2)/(2(1-p))]` for the maximal truncated map; the threshold is the
/// larger of the first and third.
pub fn delta_threshold_truncated(p: f64) -> Result<ThresholdReport, ChaosError> {
    check_p(p)?;
    let d1 = (p + 1.0) / (p + 2.0);
    let d2 = p * (p + 1.0) / (2.0 - p);
    let inner = p * (p.powi(4) + 10.0 * p.powi(3) + 20.0 * p * p - 8.0 * p - 16.0) / (p - 2.0);
    let d3 = (p * p + 2.0 * p + inner.sqrt()) / 4.0;
    let d4 = p / (2.0 * (1.0 - p));
    let d5 = p * (2.0 - 2.0 * p - p * p) / (2.0 * (1.0 - p));
    let threshold = d1.max(d3);
    Ok(ThresholdReport {
        family: ThresholdFamily::Truncated,
        p,
        components: vec![d1, d2, d3, d4, d5],
        threshold,
        valid: threshold > 0.0 && threshold <= 1.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymmetricThreshold {
    /// Smallest step size at which the left maximum reaches 1.
    pub delta: f64,
    /// Location of that maximum in `[0, 1/2]`.
    pub z_l: f64,
    /// Map value at `z_l`, equal to 1 up to root-finding accuracy.
    pub value: f64,
}

/// Upper end of the step-size search.
pub const SYMMETRIC_SEARCH_LIMIT: f64 = 1e6;

/// For an imitative protocol on a game with `p = 1/2` and switch rates
/// satisfying `r_ab(x) + r_ab(1-x) = r_ba(x) + r_ba(1-x)`, find the step size at
/// which `max_{[0,1/2]} f` first equals 1. Beyond it the map is chaotic.
///
/// The search brackets the step size by doubling from 1 up to
/// [`SYMMETRIC_SEARCH_LIMIT`] and bisects the maximum minus one.
pub fn delta_star_symmetric(protocol: &RevisionProtocol) -> Result<SymmetricThreshold, ChaosError> {
    if protocol.kind() != ProtocolKind::Imitative {
        return Err(ChaosError::NotImitative);
    }
    let (r_ab, r_ba) = protocol.switch_rates().ok_or(ChaosError::NotImitative)?;
    let p = protocol.p();
    if (p - 0.5).abs() > 1e-12 {
        return Err(ChaosError::NotSymmetric(p));
    }
    let n = 1000;
    for i in 0..=n {
        let x = i as f64 / n as f64;
        let lhs = r_ab.eval(x) + r_ab.eval(1.0 - x);
        let rhs = r_ba.eval(x) + r_ba.eval(1.0 - x);
        if (lhs - rhs).abs() > 1e-9 * lhs.abs().max(rhs.abs()).max(1.0) {
            return Err(ChaosError::SymmetryViolation(x));
        }
    }
    let f = |delta: f64, x: f64| x * (1.0 + delta * (1.0 - x) * (r_ba.eval(x) - r_ab.eval(x)));
    let peak = |delta: f64| grid_max(|x| f(delta, x), 0.0, 0.5, 2000);
    let excess = |delta: f64| peak(delta).1 - 1.0;

    let mut hi = 1.0;
    while excess(hi) < 0.0 {
        hi *= 2.0;
        if hi > SYMMETRIC_SEARCH_LIMIT {
            return Err(ChaosError::NoBracket(SYMMETRIC_SEARCH_LIMIT));
        }
    }
    let lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
    let delta = bisect(excess, lo, hi, 1e-14);
    let (z_l, value) = peak(delta);
    Ok(SymmetricThreshold { delta, z_l, value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturbed_threshold_at_two_fifths() {
        let r = delta_threshold_perturbed(0.4).unwrap();
        assert!((r.threshold - 0.948808).abs() < 1e-6);
        assert!((r.components[0] - 1.0 / 1.4).abs() < 1e-15);
    }

    #[test]
    fn truncated_threshold_at_quarter() {
        let r = delta_threshold_truncated(0.25).unwrap();
        assert!((r.components[0] - 5.0 / 9.0).abs() < 1e-12);
        assert!((r.components[4] - 0.239583).abs() < 1e-6);
        assert!((r.threshold - 5.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn thresholds_reject_p_outside_range() {
        assert!(delta_threshold_perturbed(0.5).is_err());
        assert!(delta_threshold_truncated(0.0).is_err());
    }
}
