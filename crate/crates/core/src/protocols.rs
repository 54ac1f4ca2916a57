//! Revision protocols: switching rates between the two strategies of an
//! anti-coordination game.
//!
//! Rates are piecewise rational functions of the A-share `x` with explicit
//! breakpoints. `rho_ab(x)` is the per-capita rate at which A-players switch to B,
//! `rho_ba(x)` the rate from B to A. Imitative protocols also carry the conditional
//! switch rates `r_ab`, `r_ba` with `rho_ab = (1 - x) r_ab` and `rho_ba = x r_ba`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::AntiCoordinationGame;
use crate::poly::{piece_index, Poly};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("construction requires p < 1/2, got p = {0}; build it on the reflected game and reflect the protocol")]
    NeedsSmallEquilibrium(f64),
    #[error("parameter {name} = {value} outside its admissible range {range}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        range: String,
    },
    #[error("truncation point must differ from the equilibrium p = {0}")]
    TruncationAtEquilibrium(f64),
    #[error("breakpoints must increase from 0 to 1")]
    BadBreakpoints,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Imitative,
    Innovative,
}

/// `numer(t) / denom(t)` on one piece, in the local variable `t = x - start`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePiece {
    pub numer: Poly,
    pub denom: Poly,
}

impl RatePiece {
    pub fn poly(p: Poly) -> Self {
        Self {
            numer: p,
            denom: Poly::constant(1.0),
        }
    }

    pub fn rational(numer: Poly, denom: Poly) -> Self {
        Self { numer, denom }
    }

    /// Value at local coordinate `t`.
    pub fn eval(&self, t: f64) -> f64 {
        self.numer.eval(t) / self.denom.eval(t)
    }

    fn shift(&self, h: f64) -> Self {
        Self::rational(self.numer.shift(h), self.denom.shift(h))
    }
}

/// Piecewise rational function on `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseRate {
    breaks: Vec<f64>,
    pieces: Vec<RatePiece>,
}

impl PiecewiseRate {
    /// Pieces written in the global variable `x`, given by their left
    /// endpoints. The first start must be 0, starts must not decrease, and
    /// zero-width pieces are dropped.
    pub fn from_starts(pieces: Vec<(f64, RatePiece)>) -> Result<Self, ProtocolError> {
        let local = pieces.into_iter().map(|(s, r)| (s, r.shift(s))).collect();
        Self::from_local_starts(local)
    }

    /// Like [`from_starts`](Self::from_starts), with each piece already written
    /// in `t = x - start`.
    pub fn from_local_starts(pieces: Vec<(f64, RatePiece)>) -> Result<Self, ProtocolError> {
        if pieces.is_empty() || pieces[0].0 != 0.0 {
            return Err(ProtocolError::BadBreakpoints);
        }
        let mut breaks = Vec::new();
        let mut kept = Vec::new();
        for (i, (start, piece)) in pieces.iter().enumerate() {
            let end = pieces.get(i + 1).map(|p| p.0).unwrap_or(1.0);
            if !(start.is_finite() && end.is_finite()) || end < *start || *start < 0.0 || end > 1.0
            {
                return Err(ProtocolError::BadBreakpoints);
            }
            if end > *start || (i + 1 == pieces.len() && kept.is_empty()) {
                breaks.push(*start);
                kept.push(piece.clone());
            }
        }
        breaks.push(1.0);
        Ok(Self {
            breaks,
            pieces: kept,
        })
    }

    pub fn single(piece: RatePiece) -> Self {
        Self {
            breaks: vec![0.0, 1.0],
            pieces: vec![piece],
        }
    }

    pub fn zero() -> Self {
        Self::single(RatePiece::poly(Poly::zero()))
    }

    /// `max(0, slope (x - root))`.
    fn positive_part_linear(root: f64, slope: f64) -> Self {
        let zero = RatePiece::poly(Poly::zero());
        let pieces = if slope > 0.0 {
            vec![
                (0.0, zero),
                (root, RatePiece::poly(Poly::linear(0.0, slope))),
            ]
        } else {
            let lin = RatePiece::poly(Poly::linear(-slope * root, slope));
            vec![(0.0, lin), (root, zero)]
        };
        Self::from_local_starts(pieces).expect("root lies in [0, 1]")
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[RatePiece] {
        &self.pieces
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = piece_index(&self.breaks, x);
        self.pieces[i].eval(x - self.breaks[i])
    }

    /// Multiply every piece by a polynomial in the global variable `x`.
    pub fn times(&self, p: &Poly) -> Self {
        Self {
            breaks: self.breaks.clone(),
            pieces: self
                .pieces
                .iter()
                .zip(&self.breaks)
                .map(|(r, b)| RatePiece::rational(r.numer.mul(&p.shift(*b)), r.denom.clone()))
                .collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.times(&Poly::constant(s))
    }

    /// `x -> rate(1 - x)`.
    pub fn reflect(&self) -> Self {
        Self {
            breaks: self.breaks.iter().rev().map(|b| 1.0 - b).collect(),
            pieces: (0..self.pieces.len())
                .rev()
                .map(|i| {
                    let w = self.breaks[i + 1] - self.breaks[i];
                    let r = &self.pieces[i];
                    RatePiece::rational(r.numer.reflect_about(w), r.denom.reflect_about(w))
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProtocolFamily {
    Ppi,
    PairwiseComparison,
    PerturbedPpi { eta: f64, xi: f64 },
    TruncatedPpi { eta: f64, xi: f64, gamma: f64 },
    InnovativeConstructed { beta2: f64, beta3: f64 },
    ImitativeConstructed,
    Custom,
    Reflected { of: Box<ProtocolFamily> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RevisionProtocol {
    kind: ProtocolKind,
    game: AntiCoordinationGame,
    family: ProtocolFamily,
    rho_ab: PiecewiseRate,
    rho_ba: PiecewiseRate,
    /// `(r_ab, r_ba)` for imitative protocols.
    switch_rates: Option<(PiecewiseRate, PiecewiseRate)>,
}

impl RevisionProtocol {
    /// Imitative protocol from conditional switch rates.
    pub fn imitative(
        game: AntiCoordinationGame,
        r_ab: PiecewiseRate,
        r_ba: PiecewiseRate,
        family: ProtocolFamily,
    ) -> Self {
        Self {
            kind: ProtocolKind::Imitative,
            game,
            family,
            rho_ab: r_ab.times(&Poly::one_minus_x()),
            rho_ba: r_ba.times(&Poly::x()),
            switch_rates: Some((r_ab, r_ba)),
        }
    }

    pub fn innovative(
        game: AntiCoordinationGame,
        rho_ab: PiecewiseRate,
        rho_ba: PiecewiseRate,
        family: ProtocolFamily,
    ) -> Self {
        Self {
            kind: ProtocolKind::Innovative,
            game,
            family,
            rho_ab,
            rho_ba,
            switch_rates: None,
        }
    }

    pub fn kind(&self) -> ProtocolKind {
        self.kind
    }

    pub fn game(&self) -> &AntiCoordinationGame {
        &self.game
    }

    pub fn family(&self) -> &ProtocolFamily {
        &self.family
    }

    pub fn p(&self) -> f64 {
        self.game.p()
    }

    pub fn rho_ab_rate(&self) -> &PiecewiseRate {
        &self.rho_ab
    }

    pub fn rho_ba_rate(&self) -> &PiecewiseRate {
        &self.rho_ba
    }

    pub fn switch_rates(&self) -> Option<(&PiecewiseRate, &PiecewiseRate)> {
        self.switch_rates.as_ref().map(|(a, b)| (a, b))
    }

    pub fn rho_ab(&self, x: f64) -> f64 {
        self.rho_ab.eval(x)
    }

    pub fn rho_ba(&self, x: f64) -> f64 {
        self.rho_ba.eval(x)
    }

    /// All breakpoints of both rates, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self
            .rho_ab
            .breaks()
            .iter()
            .chain(self.rho_ba.breaks())
            .copied()
            .collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// Largest admissible step size for the family, if it has one.
    pub fn delta_cap(&self) -> Option<f64> {
        fn capped(f: &ProtocolFamily) -> bool {
            match f {
                ProtocolFamily::PerturbedPpi { .. } | ProtocolFamily::TruncatedPpi { .. } => true,
                ProtocolFamily::Reflected { of } => capped(of),
                _ => false,
            }
        }
        capped(&self.family).then_some(1.0)
    }

    /// Analytic probe points `(z_l, z_r)` for the chaos conditions, when the
    /// family has them: the two turning points of its bimodal map.
    pub fn probe_points(&self) -> Option<(f64, f64)> {
        family_probes(&self.family, self.p())
    }
}

fn family_probes(family: &ProtocolFamily, p: f64) -> Option<(f64, f64)> {
    match family {
        ProtocolFamily::Ppi | ProtocolFamily::PerturbedPpi { .. } => {
            Some((p / 2.0, (p + 1.0) / 2.0))
        }
        ProtocolFamily::TruncatedPpi { gamma, .. } => {
            if *gamma == 0.0 || *gamma == 1.0 {
                Some((p / 2.0, (p + 1.0) / 2.0))
            } else if *gamma > p {
                Some((p / 2.0, *gamma))
            } else {
                Some((*gamma, (p + 1.0) / 2.0))
            }
        }
        ProtocolFamily::InnovativeConstructed { .. } => Some((p / (1.0 - p), 2.0 * p)),
        ProtocolFamily::ImitativeConstructed => Some((p / 2.0, p + p * p / 2.0)),
        ProtocolFamily::Reflected { of } => {
            family_probes(of, 1.0 - p).map(|(l, r)| (1.0 - r, 1.0 - l))
        }
        ProtocolFamily::PairwiseComparison | ProtocolFamily::Custom => None,
    }
}

/// Pairwise proportional imitation: `rho_ij = x_j [u_j - u_i]_+`.
pub fn ppi_protocol(game: &AntiCoordinationGame) -> RevisionProtocol {
    perturbed_rates(game, 1.0, 1.0, ProtocolFamily::Ppi)
}

/// Pairwise comparison: `rho_ij = [u_j - u_i]_+`.
pub fn pc_protocol(game: &AntiCoordinationGame) -> RevisionProtocol {
    let p = game.p();
    let k = game.slope_scale();
    RevisionProtocol::innovative(
        *game,
        PiecewiseRate::positive_part_linear(p, k),
        PiecewiseRate::positive_part_linear(p, -k),
        ProtocolFamily::PairwiseComparison,
    )
}

fn check_positive(name: &'static str, v: f64) -> Result<(), ProtocolError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ProtocolError::ParameterOutOfRange {
            name,
            value: v,
            range: "(0, inf)".into(),
        })
    }
}

fn perturbed_rates(
    game: &AntiCoordinationGame,
    eta: f64,
    xi: f64,
    family: ProtocolFamily,
) -> RevisionProtocol {
    let p = game.p();
    let k = game.slope_scale();
    RevisionProtocol::imitative(
        *game,
        PiecewiseRate::positive_part_linear(p, eta * k),
        PiecewiseRate::positive_part_linear(p, -xi * k),
        family,
    )
}

/// PPI with the switch rate towards B scaled by `eta` and towards A by `xi`.
pub fn perturbed_ppi_protocol(
    game: &AntiCoordinationGame,
    eta: f64,
    xi: f64,
) -> Result<RevisionProtocol, ProtocolError> {
    check_positive("eta", eta)?;
    check_positive("xi", xi)?;
    Ok(perturbed_rates(
        game,
        eta,
        xi,
        ProtocolFamily::PerturbedPpi { eta, xi },
    ))
}

/// Largest `(eta, xi)` keeping the perturbed map inside `[0, 1]` for every step size up to 1.
pub fn maximal_perturbed_parameters(game: &AntiCoordinationGame) -> (f64, f64) {
    let p = game.p();
    let bd = game.b_minus_d();
    (4.0 * p / ((1.0 - p).powi(2) * bd), 4.0 / (p * bd))
}

pub fn maximal_perturbed_protocol(game: &AntiCoordinationGame) -> RevisionProtocol {
    let (eta, xi) = maximal_perturbed_parameters(game);
    perturbed_ppi_protocol(game, eta, xi).expect("maximal parameters are positive")
}

/// Perturbed PPI whose switch rate on the far side of the equilibrium is frozen
/// at its value at `gamma`. `gamma` of 0 or 1 means no truncation.
pub fn truncated_ppi_protocol(
    game: &AntiCoordinationGame,
    eta: f64,
    xi: f64,
    gamma: f64,
) -> Result<RevisionProtocol, ProtocolError> {
    check_positive("eta", eta)?;
    check_positive("xi", xi)?;
    if !(0.0..=1.0).contains(&gamma) {
        return Err(ProtocolError::ParameterOutOfRange {
            name: "gamma",
            value: gamma,
            range: "[0, 1]".into(),
        });
    }
    let p = game.p();
    if gamma == p {
        return Err(ProtocolError::TruncationAtEquilibrium(p));
    }
    let family = ProtocolFamily::TruncatedPpi { eta, xi, gamma };
    if gamma == 0.0 || gamma == 1.0 {
        return Ok(perturbed_rates(game, eta, xi, family));
    }
    let k = game.slope_scale();
    let zero = || RatePiece::poly(Poly::zero());
    let (r_ab, r_ba) = if gamma > p {
        let r_ab = PiecewiseRate::from_local_starts(vec![
            (0.0, zero()),
            (p, RatePiece::poly(Poly::linear(0.0, eta * k))),
            (
                gamma,
                RatePiece::poly(Poly::constant(eta * k * (gamma - p))),
            ),
        ])?;
        (r_ab, PiecewiseRate::positive_part_linear(p, -xi * k))
    } else {
        let r_ba = PiecewiseRate::from_local_starts(vec![
            (0.0, RatePiece::poly(Poly::constant(xi * k * (p - gamma)))),
            (
                gamma,
                RatePiece::poly(Poly::linear(xi * k * (p - gamma), -xi * k)),
            ),
            (p, zero()),
        ])?;
        (PiecewiseRate::positive_part_linear(p, eta * k), r_ba)
    };
    Ok(RevisionProtocol::imitative(*game, r_ab, r_ba, family))
}

/// Truncation point and rate multipliers of the maximal truncated family:
/// `gamma = p + p^2/2` for `p < 1/2`, its mirror image for `p > 1/2`, and no
/// truncation for `p = 1/2`.
pub fn maximal_truncated_parameters(game: &AntiCoordinationGame) -> (f64, f64, f64) {
    let p = game.p();
    let bd = game.b_minus_d();
    if p < 0.5 {
        (
            4.0 / (p * (2.0 - 2.0 * p - p * p) * bd),
            4.0 / (p * bd),
            p + p * p / 2.0,
        )
    } else if p > 0.5 {
        let q = 1.0 - p;
        (
            4.0 * p / (q * q * bd),
            4.0 * p / (q * q * (-1.0 + 4.0 * p - p * p) * bd),
            p - q * q / 2.0,
        )
    } else {
        let (eta, xi) = maximal_perturbed_parameters(game);
        (eta, xi, 1.0)
    }
}

pub fn maximal_truncated_protocol(game: &AntiCoordinationGame) -> RevisionProtocol {
    let (eta, xi, gamma) = maximal_truncated_parameters(game);
    truncated_ppi_protocol(game, eta, xi, gamma).expect("maximal parameters are admissible")
}

/// Innovative protocol whose map at step size 1 is the piecewise-linear
/// bimodal map with turning points `p/(1-p)` and `2p`.
pub fn innovative_chaotic_protocol(
    game: &AntiCoordinationGame,
    beta2: f64,
    beta3: f64,
) -> Result<RevisionProtocol, ProtocolError> {
    let p = game.p();
    if p >= 0.5 {
        return Err(ProtocolError::NeedsSmallEquilibrium(p));
    }
    let b2_lo = 1.0 / (1.0 - 2.0 * p);
    let b2_hi = 2.0 * (1.0 - p) / (1.0 - 2.0 * p);
    if !(beta2 > b2_lo && beta2 < b2_hi) {
        return Err(ProtocolError::ParameterOutOfRange {
            name: "beta2",
            value: beta2,
            range: format!("({b2_lo}, {b2_hi})"),
        });
    }
    let b3_lo = -p / ((1.0 - 2.0 * p) * (1.0 - p));
    if !(beta3 >= b3_lo && beta3 < 0.0) {
        return Err(ProtocolError::ParameterOutOfRange {
            name: "beta3",
            value: beta3,
            range: format!("[{b3_lo}, 0)"),
        });
    }
    let cl = p / (1.0 - p);
    let cr = 2.0 * p;
    let x = Poly::x;
    let rho_ab = PiecewiseRate::from_starts(vec![
        (0.0, RatePiece::poly(Poly::zero())),
        (p, RatePiece::rational(Poly::linear(-1.0, 1.0 / p), x())),
        (
            cl,
            RatePiece::rational(Poly::linear(beta2 * cl, 1.0 - beta2), x()),
        ),
        (
            cr,
            RatePiece::rational(
                Poly::linear(cr * beta3 - beta2 * (cr - cl), 1.0 - beta3),
                x(),
            ),
        ),
    ])?;
    let rho_ba = PiecewiseRate::from_starts(vec![
        (
            0.0,
            RatePiece::rational(Poly::linear(1.0, -1.0 / p), Poly::one_minus_x()),
        ),
        (p, RatePiece::poly(Poly::zero())),
    ])?;
    Ok(RevisionProtocol::innovative(
        *game,
        rho_ab,
        rho_ba,
        ProtocolFamily::InnovativeConstructed { beta2, beta3 },
    ))
}

/// Imitative protocol whose map at step size 1 is piecewise linear with
/// `f(p/2) = 1` and `f(p + p^2/2) = p^2`.
pub fn imitative_chaotic_protocol(
    game: &AntiCoordinationGame,
) -> Result<RevisionProtocol, ProtocolError> {
    let p = game.p();
    if p >= 0.5 {
        return Err(ProtocolError::NeedsSmallEquilibrium(p));
    }
    let cl = p / 2.0;
    let gamma = p + p * p / 2.0;
    let x_one_minus_x = Poly::new(vec![0.0, 1.0, -1.0]);
    let r_ba = PiecewiseRate::from_starts(vec![
        (
            0.0,
            RatePiece::rational(Poly::constant((2.0 - p) / p), Poly::one_minus_x()),
        ),
        (
            cl,
            RatePiece::rational(
                Poly::linear(-p, 1.0).scale((p - 2.0) / p),
                x_one_minus_x.clone(),
            ),
        ),
        (p, RatePiece::poly(Poly::zero())),
    ])?;
    let r_ab = PiecewiseRate::from_starts(vec![
        (0.0, RatePiece::poly(Poly::zero())),
        (
            p,
            RatePiece::rational(Poly::linear(-p, 1.0).scale((2.0 - p) / p), x_one_minus_x),
        ),
        (
            gamma,
            RatePiece::rational(
                Poly::constant(p * (p - 2.0) / (p * p + 2.0 * p - 2.0)),
                Poly::x(),
            ),
        ),
    ])?;
    Ok(RevisionProtocol::imitative(
        *game,
        r_ab,
        r_ba,
        ProtocolFamily::ImitativeConstructed,
    ))
}

/// The same protocol written for the game with strategies relabeled.
/// Its map is conjugate to the original under `x -> 1 - x`. Reflecting twice
/// returns the original.
pub fn reflect_protocol(protocol: &RevisionProtocol) -> RevisionProtocol {
    let family = match &protocol.family {
        ProtocolFamily::Reflected { of } => (**of).clone(),
        f => ProtocolFamily::Reflected {
            of: Box::new(f.clone()),
        },
    };
    RevisionProtocol {
        kind: protocol.kind,
        game: protocol.game.reflected(),
        family,
        rho_ab: protocol.rho_ba.reflect(),
        rho_ba: protocol.rho_ab.reflect(),
        switch_rates: protocol
            .switch_rates
            .as_ref()
            .map(|(ab, ba)| (ba.reflect(), ab.reflect())),
    }
}

const SET_SLACK: f64 = 1e-12;

fn within(v: f64, bound: f64) -> bool {
    v > 0.0 && v <= bound * (1.0 + SET_SLACK)
}

fn step_ok(delta: f64) -> bool {
    delta > 0.0 && delta <= 1.0
}

/// Parameters for which the perturbed map stays in `[0, 1]`.
pub fn in_delta_p(p: f64, b_minus_d: f64, eta: f64, xi: f64, delta: f64) -> bool {
    within(eta, 4.0 * p / ((1.0 - p).powi(2) * b_minus_d))
        && within(xi, 4.0 / (p * b_minus_d))
        && step_ok(delta)
}

/// Parameters for which the truncated map with `gamma = p + p^2/2` stays in `[0, 1]`.
pub fn in_delta_star_p(p: f64, b_minus_d: f64, eta: f64, xi: f64, delta: f64) -> bool {
    within(eta, 4.0 / (p * (2.0 - 2.0 * p - p * p) * b_minus_d))
        && within(xi, 4.0 / (p * b_minus_d))
        && step_ok(delta)
}

/// Mirror image of [`in_delta_star_p`] for `p > 1/2`.
pub fn in_gamma_star_p(p: f64, b_minus_d: f64, eta: f64, xi: f64, delta: f64) -> bool {
    let q = 1.0 - p;
    within(eta, 4.0 * p / (q * q * b_minus_d))
        && within(xi, 4.0 * p / (q * q * (-1.0 + 4.0 * p - p * p) * b_minus_d))
        && step_ok(delta)
}

/// Outcome of checking a protocol against the switching-direction rules on a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub grid: usize,
    /// Grid points where a rate disagrees with the payoff ordering.
    pub sign_violations: Vec<f64>,
    /// Grid points with a negative or non-finite rate.
    pub invalid_values: Vec<f64>,
    /// Grid points where both directions switch at once.
    pub both_positive: Vec<f64>,
    /// Largest finite-difference slope of either rate between neighbouring grid points.
    pub lipschitz_estimate: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.sign_violations.is_empty()
            && self.invalid_values.is_empty()
            && self.both_positive.is_empty()
    }
}

/// Check the protocol on `grid` evenly spaced points of `[0, 1]`.
///
/// Innovative rates must be positive exactly where the target strategy earns
/// more. Imitative rates must satisfy `u_B >= u_A  <=>  r_ab >= r_ba`. Points
/// where the payoff gap is within rounding of zero are skipped.
pub fn validate_protocol(protocol: &RevisionProtocol, grid: usize) -> ValidationReport {
    let grid = grid.max(2);
    let game = protocol.game();
    let band = 1e-9 * game.slope_scale().abs();
    let zero_tol = 1e-12;
    let mut report = ValidationReport {
        grid,
        sign_violations: Vec::new(),
        invalid_values: Vec::new(),
        both_positive: Vec::new(),
        lipschitz_estimate: 0.0,
    };
    let mut prev: Option<(f64, f64, f64)> = None;
    for i in 0..grid {
        let x = i as f64 / (grid - 1) as f64;
        let ab = protocol.rho_ab(x);
        let ba = protocol.rho_ba(x);
        if !ab.is_finite() || !ba.is_finite() || ab < -zero_tol || ba < -zero_tol {
            report.invalid_values.push(x);
            prev = None;
            continue;
        }
        if ab > zero_tol && ba > zero_tol {
            report.both_positive.push(x);
        }
        if let Some((px, pab, pba)) = prev {
            let h = x - px;
            let slope = ((ab - pab) / h).abs().max(((ba - pba) / h).abs());
            report.lipschitz_estimate = report.lipschitz_estimate.max(slope);
        }
        prev = Some((x, ab, ba));

        let gap = game.payoff_b(x) - game.payoff_a(x);
        if gap.abs() <= band {
            continue;
        }
        let ok = match protocol.kind() {
            ProtocolKind::Innovative => {
                let to_b = gap > 0.0;
                (ab > zero_tol) == to_b && (ba > zero_tol) == !to_b
            }
            ProtocolKind::Imitative => match protocol.switch_rates() {
                Some((r_ab, r_ba)) => {
                    let (r_ab, r_ba) = (r_ab.eval(x), r_ba.eval(x));
                    if !r_ab.is_finite() || !r_ba.is_finite() {
                        report.invalid_values.push(x);
                        continue;
                    }
                    (gap >= 0.0) == (r_ab - r_ba >= -zero_tol)
                        && (gap < 0.0) == (r_ba - r_ab > zero_tol)
                }
                None => true,
            },
        };
        if !ok {
            report.sign_violations.push(x);
        }
    }
    report
}

/// Declarative protocol description used by configuration files.
///
/// Omitted `eta`, `xi` or `gamma` take the family's maximal values. With
/// `"reflect": true` the protocol is built on the relabeled game and then
/// reflected back, which lets the `p < 1/2` constructions serve games with
/// `p > 1/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolDescriptor {
    #[serde(flatten)]
    pub spec: ProtocolSpec,
    #[serde(default)]
    pub reflect: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProtocolSpec {
    Ppi,
    #[serde(alias = "pairwise_comparison")]
    Pc,
    PerturbedPpi {
        eta: Option<f64>,
        xi: Option<f64>,
    },
    TruncatedPpi {
        eta: Option<f64>,
        xi: Option<f64>,
        gamma: Option<f64>,
    },
    InnovativeConstructed {
        beta2: f64,
        beta3: f64,
    },
    ImitativeConstructed,
}

impl ProtocolDescriptor {
    pub fn build(&self, game: &AntiCoordinationGame) -> Result<RevisionProtocol, ProtocolError> {
        if self.reflect {
            let inner = self.spec.build(&game.reflected())?;
            Ok(reflect_protocol(&inner))
        } else {
            self.spec.build(game)
        }
    }
}

impl ProtocolSpec {
    pub fn build(&self, game: &AntiCoordinationGame) -> Result<RevisionProtocol, ProtocolError> {
        match *self {
            ProtocolSpec::Ppi => Ok(ppi_protocol(game)),
            ProtocolSpec::Pc => Ok(pc_protocol(game)),
            ProtocolSpec::PerturbedPpi { eta, xi } => {
                let (me, mx) = maximal_perturbed_parameters(game);
                perturbed_ppi_protocol(game, eta.unwrap_or(me), xi.unwrap_or(mx))
            }
            ProtocolSpec::TruncatedPpi { eta, xi, gamma } => {
                let (me, mx, mg) = maximal_truncated_parameters(game);
                truncated_ppi_protocol(
                    game,
                    eta.unwrap_or(me),
                    xi.unwrap_or(mx),
                    gamma.unwrap_or(mg),
                )
            }
            ProtocolSpec::InnovativeConstructed { beta2, beta3 } => {
                innovative_chaotic_protocol(game, beta2, beta3)
            }
            ProtocolSpec::ImitativeConstructed => imitative_chaotic_protocol(game),
        }
    }
}
