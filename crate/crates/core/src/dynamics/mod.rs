//! One-step population update maps, orbits and range checks.
//!
//! A map built from a protocol is evaluated in closed form,
//! `f(x) = x + delta * ((1 - x) rho_ba(x) - x rho_ab(x))`, and carries an exact
//! piecewise-polynomial copy whenever every piece reduces to a polynomial. When
//! all pieces are linear the map also carries a [`PlMap`], which enables exact
//! periodic-orbit enumeration.

mod pl;

pub use pl::PlMap;

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::poly::{piece_index, piece_index_left, PiecewisePoly, Poly};
use crate::protocols::{ProtocolError, ProtocolKind, RevisionProtocol};
use crate::roots::golden_max;

/// Excursions outside `[0, 1]` at or below this size are treated as round-off.
pub const RANGE_TOLERANCE: f64 = 1e-12;
/// Grid used by the range check performed when a map is built.
pub const DEFAULT_RANGE_GRID: usize = 4097;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("step size must be positive and finite, got {0}")]
    InvalidDelta(f64),
    #[error("step size {delta} exceeds the family cap {cap}")]
    DeltaAboveCap { delta: f64, cap: f64 },
    #[error("map leaves [0, 1]: f({at}) = {value}")]
    RangeViolation { at: f64, value: f64 },
    #[error("orbit left [0, 1] at step {step}: x = {value}")]
    Excursion { step: usize, value: f64 },
    #[error("initial state {0} is outside [0, 1]")]
    InitialState(f64),
    #[error("invalid piecewise-linear map: {0}")]
    InvalidPiecewiseLinear(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Imitative,
    Innovative,
    Generic,
}

impl From<ProtocolKind> for MapKind {
    fn from(k: ProtocolKind) -> Self {
        match k {
            ProtocolKind::Imitative => MapKind::Imitative,
            ProtocolKind::Innovative => MapKind::Innovative,
        }
    }
}

#[derive(Clone, Debug)]
enum Repr {
    ClosedForm {
        protocol: Arc<RevisionProtocol>,
        delta: f64,
    },
    PiecewiseLinear(PlMap),
    Conjugate(Arc<UpdateMap>),
}

/// Result of checking that a map sends `[0, 1]` into itself.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RangeReport {
    pub grid: usize,
    pub min_value: f64,
    pub min_at: f64,
    pub max_value: f64,
    pub max_at: f64,
    /// Distance by which the map leaves `[0, 1]`, zero if it does not.
    pub excursion: f64,
    pub passed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub x: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

#[derive(Clone, Debug)]
pub struct UpdateMap {
    repr: Repr,
    kind: MapKind,
    exact: Option<PiecewisePoly>,
    pl: Option<PlMap>,
    equilibrium: Option<f64>,
    family_probes: Option<(f64, f64)>,
    range: RangeReport,
}

/// Map of the protocol at step size `delta`. A map that leaves `[0, 1]` is still
/// returned, flagged through [`UpdateMap::range`], and refuses to iterate.
pub fn build_update_map(
    protocol: &RevisionProtocol,
    delta: f64,
) -> Result<UpdateMap, DynamicsError> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(DynamicsError::InvalidDelta(delta));
    }
    if let Some(cap) = protocol.delta_cap() {
        if delta > cap {
            return Err(DynamicsError::DeltaAboveCap { delta, cap });
        }
    }
    let exact = exact_pieces(protocol, delta);
    let pl = exact.as_ref().and_then(PlMap::from_piecewise_poly);
    let mut map = UpdateMap {
        repr: Repr::ClosedForm {
            protocol: Arc::new(protocol.clone()),
            delta,
        },
        kind: protocol.kind().into(),
        exact,
        pl,
        equilibrium: Some(protocol.p()),
        family_probes: protocol.probe_points(),
        range: placeholder_range(),
    };
    map.range = range_check(&map, DEFAULT_RANGE_GRID);
    Ok(map)
}

fn placeholder_range() -> RangeReport {
    RangeReport {
        grid: 0,
        min_value: 0.0,
        min_at: 0.0,
        max_value: 1.0,
        max_at: 0.0,
        excursion: 0.0,
        passed: true,
    }
}

/// Reduce `x + delta ((1 - x) rho_ba - x rho_ab)` to one polynomial per piece.
fn exact_pieces(protocol: &RevisionProtocol, delta: f64) -> Option<PiecewisePoly> {
    let breaks = protocol.breakpoints();
    let ab = protocol.rho_ab_rate();
    let ba = protocol.rho_ba_rate();
    let mut pieces = Vec::with_capacity(breaks.len() - 1);
    // Every piece is built in its own local variable t = x - w[0].
    let local = |rate: &crate::protocols::PiecewiseRate, w0: f64, mid: f64| {
        let j = piece_index(rate.breaks(), mid);
        let h = w0 - rate.breaks()[j];
        let r = &rate.pieces()[j];
        (r.numer.shift(h), r.denom.shift(h))
    };
    for w in breaks.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let x = Poly::linear(w[0], 1.0);
        let one_minus_x = Poly::linear(1.0 - w[0], -1.0);
        let (ab_n, ab_d) = local(ab, w[0], mid);
        let (ba_n, ba_d) = local(ba, w[0], mid);
        let inflow = one_minus_x.mul(&ba_n).div_exact(&ba_d)?;
        let outflow = x.mul(&ab_n).div_exact(&ab_d)?;
        pieces.push(x.add(&inflow.sub(&outflow).scale(delta)));
    }
    Some(PiecewisePoly { breaks, pieces }.merged(1e-13))
}

impl UpdateMap {
    /// Wrap a piecewise-linear map.
    pub fn piecewise_linear(pl: PlMap, kind: MapKind) -> UpdateMap {
        let mut map = UpdateMap {
            exact: Some(pl.to_piecewise_poly()),
            repr: Repr::PiecewiseLinear(pl.clone()),
            pl: Some(pl),
            kind,
            equilibrium: None,
            family_probes: None,
            range: placeholder_range(),
        };
        map.range = range_check(&map, DEFAULT_RANGE_GRID);
        map
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::ClosedForm { protocol, delta } => {
                x + delta * ((1.0 - x) * protocol.rho_ba(x) - x * protocol.rho_ab(x))
            }
            Repr::PiecewiseLinear(pl) => pl.eval(x),
            Repr::Conjugate(inner) => 1.0 - inner.eval(1.0 - x),
        }
    }

    /// Evaluate through the exact piecewise representation, when present.
    pub fn eval_exact(&self, x: f64) -> Option<f64> {
        self.exact.as_ref().map(|e| e.eval(x))
    }

    pub fn exact(&self) -> Option<&PiecewisePoly> {
        self.exact.as_ref()
    }

    pub fn as_pl(&self) -> Option<&PlMap> {
        self.pl.as_ref()
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn delta(&self) -> Option<f64> {
        match &self.repr {
            Repr::ClosedForm { delta, .. } => Some(*delta),
            Repr::PiecewiseLinear(_) => None,
            Repr::Conjugate(inner) => inner.delta(),
        }
    }

    pub fn protocol(&self) -> Option<&RevisionProtocol> {
        match &self.repr {
            Repr::ClosedForm { protocol, .. } => Some(protocol),
            _ => None,
        }
    }

    /// Interior equilibrium share, for maps built from a protocol.
    pub fn equilibrium(&self) -> Option<f64> {
        self.equilibrium
    }

    pub fn range(&self) -> &RangeReport {
        &self.range
    }

    pub fn is_interval_map(&self) -> bool {
        self.range.passed
    }

    /// Probe points for the chaos conditions: the family's analytic turning
    /// points when known, otherwise the outermost critical points.
    pub fn default_probes(&self) -> Option<(f64, f64)> {
        self.family_probes.or_else(|| {
            let cps = critical_points(self);
            match (cps.first(), cps.last()) {
                (Some(a), Some(b)) if a.x < b.x => Some((a.x, b.x)),
                _ => None,
            }
        })
    }

    /// Breakpoints of the exact representation, endpoints included.
    pub fn breakpoints(&self) -> Vec<f64> {
        match (&self.exact, &self.repr) {
            (Some(e), _) => e.breaks.clone(),
            (None, Repr::ClosedForm { protocol, .. }) => protocol.breakpoints(),
            (None, Repr::Conjugate(inner)) => {
                inner.breakpoints().iter().rev().map(|b| 1.0 - b).collect()
            }
            (None, Repr::PiecewiseLinear(pl)) => pl.breakpoints().to_vec(),
        }
    }

    /// `n`-fold composition evaluated at `x`, without range checks.
    pub fn eval_iterate(&self, x: f64, n: usize) -> f64 {
        (0..n).fold(x, |y, _| self.eval(y))
    }

    /// One step with the excursion check used by [`iterate`]. Round-off
    /// excursions up to [`RANGE_TOLERANCE`] are snapped back onto `[0, 1]`.
    pub fn step(&self, x: f64, step: usize) -> Result<f64, DynamicsError> {
        let y = self.eval(x);
        if !(y >= -RANGE_TOLERANCE && y <= 1.0 + RANGE_TOLERANCE) {
            return Err(DynamicsError::Excursion { step, value: y });
        }
        Ok(y.clamp(0.0, 1.0))
    }
}

/// `x -> 1 - f(1 - x)`, keeping the exact representations exact.
pub fn conjugate_map(map: &UpdateMap) -> UpdateMap {
    if let Repr::Conjugate(inner) = &map.repr {
        return (**inner).clone();
    }
    let exact = map.exact.as_ref().map(|e| e.conjugate());
    let pl = map.pl.as_ref().map(|p| p.conjugate());
    let repr = match &map.repr {
        Repr::PiecewiseLinear(p) => Repr::PiecewiseLinear(p.conjugate()),
        _ => Repr::Conjugate(Arc::new(map.clone())),
    };
    let mut out = UpdateMap {
        repr,
        kind: map.kind,
        exact,
        pl,
        equilibrium: map.equilibrium.map(|p| 1.0 - p),
        family_probes: map.family_probes.map(|(l, r)| (1.0 - r, 1.0 - l)),
        range: placeholder_range(),
    };
    out.range = range_check(&out, DEFAULT_RANGE_GRID);
    out
}

/// Check `f([0, 1]) ⊆ [0, 1]` on a uniform grid of `grid` points together with
/// every breakpoint (both one-sided values) and every critical point.
pub fn range_check(map: &UpdateMap, grid: usize) -> RangeReport {
    let grid = grid.max(2);
    let mut report = RangeReport {
        grid,
        min_value: f64::INFINITY,
        min_at: 0.0,
        max_value: f64::NEG_INFINITY,
        max_at: 0.0,
        excursion: 0.0,
        passed: true,
    };
    let mut record = |x: f64, v: f64| {
        if !v.is_finite() {
            report.excursion = f64::INFINITY;
            report.min_at = x;
            return;
        }
        if v < report.min_value {
            report.min_value = v;
            report.min_at = x;
        }
        if v > report.max_value {
            report.max_value = v;
            report.max_at = x;
        }
    };
    for i in 0..grid {
        let x = i as f64 / (grid - 1) as f64;
        record(x, map.eval(x));
    }
    if let Some(exact) = &map.exact {
        for (i, b) in exact.breaks.iter().enumerate() {
            if i > 0 {
                record(*b, exact.eval_piece(i - 1, *b));
            }
            if i < exact.pieces.len() {
                record(*b, exact.eval_piece(i, *b));
            }
        }
    }
    for cp in critical_points(map) {
        record(cp.x, cp.value);
    }
    if report.excursion.is_finite() {
        report.excursion = (-report.min_value).max(report.max_value - 1.0).max(0.0);
    }
    report.passed = report.excursion <= RANGE_TOLERANCE;
    report
}

/// Local extrema in the interior of `[0, 1]`, ascending in `x`.
///
/// Uses the exact piecewise representation when available: roots of each
/// piece's derivative plus breakpoints where the one-sided slopes change sign.
/// Otherwise falls back to a sampled search refined by golden section.
pub fn critical_points(map: &UpdateMap) -> Vec<CriticalPoint> {
    let mut out = match &map.exact {
        Some(e) => exact_critical_points(e),
        None => sampled_critical_points(map, 20_001),
    };
    for cp in &mut out {
        cp.value = map.eval(cp.x);
    }
    out.sort_by(|a, b| a.x.total_cmp(&b.x));
    out.dedup_by(|a, b| (a.x - b.x).abs() < 1e-12);
    out
}

fn exact_critical_points(e: &PiecewisePoly) -> Vec<CriticalPoint> {
    let mut out = Vec::new();
    let derivs: Vec<Poly> = e.pieces.iter().map(|p| p.derivative()).collect();
    for (i, d) in derivs.iter().enumerate() {
        let (lo, hi) = (e.breaks[i], e.breaks[i + 1]);
        let curvature = d.derivative();
        for t in d.roots_in(0.0, hi - lo) {
            let r = lo + t;
            if t <= 0.0 || r <= lo || r >= hi {
                continue;
            }
            let c = curvature.eval(t);
            let kind = if c < 0.0 {
                ExtremumKind::Max
            } else if c > 0.0 {
                ExtremumKind::Min
            } else {
                continue;
            };
            out.push(CriticalPoint {
                x: r,
                value: 0.0,
                kind,
            });
        }
    }
    for i in 1..e.pieces.len() {
        let b = e.breaks[i];
        let (l, r) = (derivs[i - 1].eval(b - e.breaks[i - 1]), derivs[i].eval(0.0));
        let kind = if l > 0.0 && r < 0.0 {
            ExtremumKind::Max
        } else if l < 0.0 && r > 0.0 {
            ExtremumKind::Min
        } else {
            continue;
        };
        out.push(CriticalPoint {
            x: b,
            value: 0.0,
            kind,
        });
    }
    out
}

fn sampled_critical_points(map: &UpdateMap, n: usize) -> Vec<CriticalPoint> {
    let h = 1.0 / (n - 1) as f64;
    let v: Vec<f64> = (0..n).map(|i| map.eval(i as f64 * h)).collect();
    let mut out = Vec::new();
    for i in 1..n - 1 {
        let (a, b) = ((i - 1) as f64 * h, (i + 1) as f64 * h);
        if v[i] > v[i - 1] && v[i] >= v[i + 1] {
            let x = golden_max(|x| map.eval(x), a, b, 1e-13);
            out.push(CriticalPoint {
                x,
                value: 0.0,
                kind: ExtremumKind::Max,
            });
        } else if v[i] < v[i - 1] && v[i] <= v[i + 1] {
            let x = golden_max(|x| -map.eval(x), a, b, 1e-13);
            out.push(CriticalPoint {
                x,
                value: 0.0,
                kind: ExtremumKind::Min,
            });
        }
    }
    out
}

/// One-sided derivatives of the exact representation at `x`, if present.
/// Points within 1e-12 of a breakpoint are treated as that breakpoint.
pub(crate) fn exact_one_sided(e: &PiecewisePoly, x: f64) -> (f64, f64) {
    let x = e
        .breaks
        .iter()
        .copied()
        .find(|b| (b - x).abs() <= 1e-12)
        .unwrap_or(x);
    let l = piece_index_left(&e.breaks, x);
    let r = piece_index(&e.breaks, x);
    (e.slope_piece(l, x), e.slope_piece(r, x))
}

/// Trajectory `x_0, x_1, ..., x_n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Orbit {
    pub states: Vec<f64>,
}

impl Orbit {
    pub fn x0(&self) -> f64 {
        self.states[0]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.states.last().unwrap()
    }

    /// `iteration,x` rows with shortest round-trip float formatting.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iteration,x\n");
        for (i, x) in self.states.iter().enumerate() {
            s.push_str(&format!("{i},{x}\n"));
        }
        s
    }
}

/// Iterate `n` steps from `x0`. Refuses maps that failed their range check and
/// aborts on any excursion outside `[0, 1]` beyond round-off.
pub fn iterate(map: &UpdateMap, x0: f64, n: usize) -> Result<Orbit, DynamicsError> {
    if !map.range.passed {
        return Err(DynamicsError::RangeViolation {
            at: if map.range.min_value < 0.0 {
                map.range.min_at
            } else {
                map.range.max_at
            },
            value: if map.range.min_value < 0.0 {
                map.range.min_value
            } else {
                map.range.max_value
            },
        });
    }
    if !(0.0..=1.0).contains(&x0) {
        return Err(DynamicsError::InitialState(x0));
    }
    let mut states = Vec::with_capacity(n + 1);
    states.push(x0);
    let mut x = x0;
    for k in 1..=n {
        x = map.step(x, k)?;
        states.push(x);
    }
    Ok(Orbit { states })
}
