//! Li-Yorke chaos certificates, periodic orbits, fixed-point stability and
//! step-size thresholds.
//!
//! A certificate rests on a pair of probe points `z_l < z_r` satisfying either
//!
//! * `f(z_r) < z_l`, `f(z_l) > z_r` and `f^2(z_l) > z_r`, or
//! * `f(z_r) > z_l`, `f(z_l) < z_l` and `f^2(z_l) > z_r`.
//!
//! Either way some `x` in `(z_l, z_r)` has `f(x) = z_l`, and then
//! `f(x) < x < f^3(x)`, which forces a period-3 orbit.

mod periodic;
mod stability;
mod thresholds;

pub use periodic::{
    find_period3, find_periodic_orbits, fixed_points, periodic_orbits_exact,
    periodic_orbits_numeric, PeriodicOrbit, PeriodicOrbitSearch, SearchMode, EXACT_PERIOD_LIMIT,
};
pub use stability::{
    basin_probe, classify, finite_difference_derivatives, one_sided_derivatives, BasinProbe,
    DerivativeMethod, Stability, StabilityReport,
};
pub use thresholds::{
    delta_star_symmetric, delta_threshold_perturbed, delta_threshold_truncated, SymmetricThreshold,
    ThresholdFamily, ThresholdReport, SYMMETRIC_SEARCH_LIMIT,
};

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{conjugate_map, DynamicsError, RangeReport, UpdateMap};
use crate::game::AntiCoordinationGame;
use crate::protocols::ProtocolFamily;
use crate::roots::bisect;

/// Strictness margin applied to every certificate inequality.
pub const DEFAULT_MARGIN: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChaosError {
    #[error("probe points must satisfy 0 <= z_l < z_r <= 1, got {0}, {1}")]
    InvalidProbes(f64, f64),
    #[error("chaos conditions fail at z_l = {}, z_r = {}", .0.z_l, .0.z_r)]
    ConditionsFail(Box<ConditionReport>),
    #[error("no sign change of f(x) - z_l on ({z_l}, {z_r})")]
    NoWitness { z_l: f64, z_r: f64 },
    #[error("witness {x} misses the strict margin: f(x) = {f_x}, f^3(x) = {f3_x}")]
    WitnessMargin { x: f64, f_x: f64, f3_x: f64 },
    #[error("map does not send [0, 1] into itself (excursion {})", .0.excursion)]
    NotIntervalMap(Box<RangeReport>),
    #[error("no default probe points for this map; supply them explicitly")]
    NoProbes,
    #[error("threshold formula needs p in (0, 1/2), got {0}")]
    EquilibriumOutOfRange(f64),
    #[error("symmetric threshold needs an imitative protocol with switch rates")]
    NotImitative,
    #[error("symmetric threshold needs p = 1/2, got {0}")]
    NotSymmetric(f64),
    #[error("switch rates are not symmetric about 1/2 at x = {0}")]
    SymmetryViolation(f64),
    #[error("no step size in (0, {0}] brings the left maximum to 1")]
    NoBracket(f64),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionBranch {
    /// `f(z_r) < z_l` and `f(z_l) > z_r`
    RightDropsBelowLeft,
    /// `f(z_r) > z_l` and `f(z_l) < z_l`
    LeftDropsBelowItself,
}

/// One inequality `lhs < rhs` (or `lhs > rhs`) with its signed slack.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Inequality {
    pub statement: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// Positive when the inequality holds; compared against the margin.
    pub slack: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub z_l: f64,
    pub z_r: f64,
    pub f_z_l: f64,
    pub f_z_r: f64,
    pub f2_z_l: f64,
    pub margin: f64,
    pub inequalities: Vec<Inequality>,
    pub branch: Option<ConditionBranch>,
}

fn ineq(statement: &'static str, lhs: f64, rhs: f64, greater: bool, margin: f64) -> Inequality {
    let slack = if greater { lhs - rhs } else { rhs - lhs };
    Inequality {
        statement,
        lhs,
        rhs,
        slack,
        holds: slack > margin,
    }
}

/// Evaluate both condition branches at the probe points.
pub fn evaluate_conditions(
    map: &UpdateMap,
    z_l: f64,
    z_r: f64,
    margin: f64,
) -> Result<ConditionReport, ChaosError> {
    if !(0.0 <= z_l && z_l < z_r && z_r <= 1.0) {
        return Err(ChaosError::InvalidProbes(z_l, z_r));
    }
    let f_z_l = map.eval(z_l);
    let f_z_r = map.eval(z_r);
    let f2_z_l = map.eval(f_z_l);
    let inequalities = vec![
        ineq("f(z_r) < z_l", f_z_r, z_l, false, margin),
        ineq("f(z_l) > z_r", f_z_l, z_r, true, margin),
        ineq("f(z_r) > z_l", f_z_r, z_l, true, margin),
        ineq("f(z_l) < z_l", f_z_l, z_l, false, margin),
        ineq("f^2(z_l) > z_r", f2_z_l, z_r, true, margin),
    ];
    let h = |i: usize| inequalities[i].holds;
    let branch = if !h(4) {
        None
    } else if h(0) && h(1) {
        Some(ConditionBranch::RightDropsBelowLeft)
    } else if h(2) && h(3) {
        Some(ConditionBranch::LeftDropsBelowItself)
    } else {
        None
    };
    Ok(ConditionReport {
        z_l,
        z_r,
        f_z_l,
        f_z_r,
        f2_z_l,
        margin,
        inequalities,
        branch,
    })
}

/// Which branch of the conditions holds, or a report of every inequality's slack.
pub fn check_chaos_conditions(
    map: &UpdateMap,
    z_l: f64,
    z_r: f64,
    margin: f64,
) -> Result<ConditionBranch, ChaosError> {
    let report = evaluate_conditions(map, z_l, z_r, margin)?;
    report
        .branch
        .ok_or_else(|| ChaosError::ConditionsFail(Box::new(report)))
}

/// A point with `f(x) < x < f^3(x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub x: f64,
    pub f_x: f64,
    pub f3_x: f64,
}

impl Witness {
    pub fn holds(&self, margin: f64) -> bool {
        self.f_x < self.x - margin && self.x + margin < self.f3_x
    }
}

/// Solve `f(x) = z_l` on `(z_l, z_r)` by bisection.
pub fn find_witness(map: &UpdateMap, z_l: f64, z_r: f64) -> Result<Witness, ChaosError> {
    if !(0.0 <= z_l && z_l < z_r && z_r <= 1.0) {
        return Err(ChaosError::InvalidProbes(z_l, z_r));
    }
    let g = |x: f64| map.eval(x) - z_l;
    let (gl, gr) = (g(z_l), g(z_r));
    if !(gl * gr < 0.0) {
        return Err(ChaosError::NoWitness { z_l, z_r });
    }
    let x = bisect(g, z_l, z_r, 1e-15);
    let f_x = map.eval(x);
    Ok(Witness {
        x,
        f_x,
        f3_x: map.eval(map.eval(f_x)),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// Inequalities hold for the map itself.
    Direct,
    /// Inequalities hold for `1 - f(1 - x)`, which is topologically conjugate.
    Conjugate,
}

/// Description of the certified map, for provenance in exported certificates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MapSummary {
    pub kind: crate::dynamics::MapKind,
    pub delta: Option<f64>,
    pub equilibrium: Option<f64>,
    pub game: Option<AntiCoordinationGame>,
    pub protocol: Option<ProtocolFamily>,
    pub piecewise_linear: Option<crate::dynamics::PlMap>,
}

impl MapSummary {
    pub fn of(map: &UpdateMap) -> Self {
        Self {
            kind: map.kind(),
            delta: map.delta(),
            equilibrium: map.equilibrium(),
            game: map.protocol().map(|p| *p.game()),
            protocol: map.protocol().map(|p| p.family().clone()),
            piecewise_linear: if map.protocol().is_none() {
                map.as_pl().cloned()
            } else {
                None
            },
        }
    }
}

/// Self-contained evidence that a map is Li-Yorke chaotic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChaosCertificate {
    pub tool_version: String,
    pub map: MapSummary,
    pub frame: Frame,
    pub conditions: ConditionReport,
    pub branch: ConditionBranch,
    pub witness: Witness,
    /// An explicit period-3 orbit of the certified map, in orbit order.
    pub period3: Option<Vec<f64>>,
}

impl ChaosCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    /// Re-evaluate every recorded inequality on `map`.
    pub fn verify(&self, map: &UpdateMap) -> bool {
        let target = match self.frame {
            Frame::Direct => map.clone(),
            Frame::Conjugate => conjugate_map(map),
        };
        let c = &self.conditions;
        let ok = matches!(
            evaluate_conditions(&target, c.z_l, c.z_r, c.margin),
            Ok(r) if r.branch == Some(self.branch)
        );
        let f = |x| target.eval(x);
        let w = self.witness;
        let witness_ok = Witness {
            x: w.x,
            f_x: f(w.x),
            f3_x: f(f(f(w.x))),
        }
        .holds(c.margin);
        let period_ok = self.period3.as_ref().map_or(true, |orbit| {
            orbit.len() == 3 && (0..3).all(|i| (f(orbit[i]) - orbit[(i + 1) % 3]).abs() < 1e-9)
        });
        ok && witness_ok && period_ok
    }
}

/// Certify chaos at the given probe points, in the map's own frame.
pub fn certify(
    map: &UpdateMap,
    z_l: f64,
    z_r: f64,
    margin: f64,
) -> Result<ChaosCertificate, ChaosError> {
    certify_in_frame(map, map, Frame::Direct, z_l, z_r, margin)
}

fn certify_in_frame(
    original: &UpdateMap,
    target: &UpdateMap,
    frame: Frame,
    z_l: f64,
    z_r: f64,
    margin: f64,
) -> Result<ChaosCertificate, ChaosError> {
    if !target.range().passed {
        return Err(ChaosError::NotIntervalMap(Box::new(target.range().clone())));
    }
    let conditions = evaluate_conditions(target, z_l, z_r, margin)?;
    let Some(branch) = conditions.branch else {
        return Err(ChaosError::ConditionsFail(Box::new(conditions)));
    };
    let witness = find_witness(target, z_l, z_r)?;
    if !witness.holds(margin) {
        return Err(ChaosError::WitnessMargin {
            x: witness.x,
            f_x: witness.f_x,
            f3_x: witness.f3_x,
        });
    }
    let period3 = find_period3(target).map(|o| o.points);
    Ok(ChaosCertificate {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        map: MapSummary::of(original),
        frame,
        conditions,
        branch,
        witness,
        period3,
    })
}

/// Certify with explicit probes, or the map's default probes. If the map itself
/// fails, the conjugate map `1 - f(1 - x)` is tried at the mirrored probes,
/// which covers reflected protocols. The error from the direct attempt is
/// returned when both fail.
pub fn certify_map(
    map: &UpdateMap,
    probes: Option<(f64, f64)>,
    margin: f64,
) -> Result<ChaosCertificate, ChaosError> {
    let (z_l, z_r) = probes
        .or_else(|| map.default_probes())
        .ok_or(ChaosError::NoProbes)?;
    match certify_in_frame(map, map, Frame::Direct, z_l, z_r, margin) {
        Ok(c) => Ok(c),
        Err(direct) => {
            let conj = conjugate_map(map);
            certify_in_frame(map, &conj, Frame::Conjugate, 1.0 - z_r, 1.0 - z_l, margin)
                .map_err(|_| direct)
        }
    }
}

/// Closest approach and late-time separation of two orbits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScrambledStat {
    /// Smallest `|f^n(x) - f^n(y)|` over `0 <= n <= horizon`.
    pub min_gap: f64,
    /// Largest `|f^n(x) - f^n(y)|` over the second half of the horizon.
    pub max_tail_gap: f64,
}

/// Empirical scrambled-pair statistic for the pair `(x, y)`.
pub fn scrambled_pair_stat(
    map: &UpdateMap,
    x: f64,
    y: f64,
    horizon: usize,
) -> Result<ScrambledStat, ChaosError> {
    let a = crate::dynamics::iterate(map, x, horizon)?;
    let b = crate::dynamics::iterate(map, y, horizon)?;
    let gaps: Vec<f64> = a
        .states
        .iter()
        .zip(&b.states)
        .map(|(u, v)| (u - v).abs())
        .collect();
    Ok(ScrambledStat {
        min_gap: gaps.iter().copied().fold(f64::INFINITY, f64::min),
        max_tail_gap: gaps[horizon / 2..].iter().copied().fold(0.0, f64::max),
    })
}
