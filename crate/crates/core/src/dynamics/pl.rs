//! Continuous piecewise-linear interval maps.

use serde::{Deserialize, Serialize};

use super::DynamicsError;
use crate::poly::{piece_index, PiecewisePoly, Poly};

const CONTINUITY_TOL: f64 = 1e-12;

/// `f(x) = slopes[i] * x + intercepts[i]` on `[breakpoints[i], breakpoints[i+1])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPl")]
pub struct PlMap {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
    intercepts: Vec<f64>,
}

#[derive(Deserialize)]
struct RawPl {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
    intercepts: Vec<f64>,
}

impl TryFrom<RawPl> for PlMap {
    type Error = DynamicsError;
    fn try_from(r: RawPl) -> Result<Self, DynamicsError> {
        PlMap::new(r.breakpoints, r.slopes, r.intercepts)
    }
}

fn invalid(msg: impl Into<String>) -> DynamicsError {
    DynamicsError::InvalidPiecewiseLinear(msg.into())
}

impl PlMap {
    pub fn new(
        breakpoints: Vec<f64>,
        slopes: Vec<f64>,
        intercepts: Vec<f64>,
    ) -> Result<Self, DynamicsError> {
        let k = slopes.len();
        if k == 0 || intercepts.len() != k || breakpoints.len() != k + 1 {
            return Err(invalid("need k slopes, k intercepts and k + 1 breakpoints"));
        }
        if breakpoints[0] != 0.0 || breakpoints[k] != 1.0 {
            return Err(invalid("breakpoints must start at 0 and end at 1"));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("breakpoints must be strictly increasing"));
        }
        if slopes.iter().chain(&intercepts).any(|v| !v.is_finite()) {
            return Err(invalid("slopes and intercepts must be finite"));
        }
        for i in 1..k {
            let x = breakpoints[i];
            let left = slopes[i - 1] * x + intercepts[i - 1];
            let right = slopes[i] * x + intercepts[i];
            if (left - right).abs() > CONTINUITY_TOL * left.abs().max(1.0) {
                return Err(invalid(format!(
                    "discontinuous at x = {x}: {left} vs {right}"
                )));
            }
        }
        Ok(Self {
            breakpoints,
            slopes,
            intercepts,
        })
    }

    /// Map through the points `(x_i, y_i)`, with `x` running from 0 to 1.
    pub fn from_nodes(nodes: &[(f64, f64)]) -> Result<Self, DynamicsError> {
        if nodes.len() < 2 {
            return Err(invalid("need at least two nodes"));
        }
        let mut slopes = Vec::new();
        let mut intercepts = Vec::new();
        for w in nodes.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if !(x1 > x0) {
                return Err(invalid("node abscissae must be strictly increasing"));
            }
            let s = (y1 - y0) / (x1 - x0);
            slopes.push(s);
            intercepts.push(y0 - s * x0);
        }
        let breakpoints = nodes.iter().map(|n| n.0).collect();
        Self::new(breakpoints, slopes, intercepts)
    }

    pub fn identity() -> Self {
        Self::new(vec![0.0, 1.0], vec![1.0], vec![0.0]).unwrap()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn intercepts(&self) -> &[f64] {
        &self.intercepts
    }

    pub fn num_segments(&self) -> usize {
        self.slopes.len()
    }

    pub fn segment_of(&self, x: f64) -> usize {
        piece_index(&self.breakpoints, x)
    }

    /// Closed interval of segment `i`.
    pub fn segment(&self, i: usize) -> (f64, f64) {
        (self.breakpoints[i], self.breakpoints[i + 1])
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment_of(x);
        self.slopes[i] * x + self.intercepts[i]
    }

    pub fn to_piecewise_poly(&self) -> PiecewisePoly {
        PiecewisePoly {
            breaks: self.breakpoints.clone(),
            pieces: (0..self.num_segments())
                .map(|i| {
                    let s = self.slopes[i];
                    Poly::linear(s * self.breakpoints[i] + self.intercepts[i], s)
                })
                .collect(),
        }
    }

    /// Linear pieces of an exact piecewise-polynomial map, if every piece is linear.
    pub fn from_piecewise_poly(pp: &PiecewisePoly) -> Option<Self> {
        if pp.max_degree(1e-11) > 1 {
            return None;
        }
        let coeff = |p: &Poly, k: usize| p.coeffs().get(k).copied().unwrap_or(0.0);
        let slopes: Vec<f64> = pp.pieces.iter().map(|p| coeff(p, 1)).collect();
        let intercepts = pp
            .pieces
            .iter()
            .zip(&pp.breaks)
            .map(|(p, b)| coeff(p, 0) - coeff(p, 1) * b)
            .collect();
        Self::new(pp.breaks.clone(), slopes, intercepts).ok()
    }

    /// `1 - f(1 - x)`: same slopes in reverse order.
    pub fn conjugate(&self) -> Self {
        Self {
            breakpoints: self.breakpoints.iter().rev().map(|b| 1.0 - b).collect(),
            slopes: self.slopes.iter().rev().copied().collect(),
            intercepts: self
                .slopes
                .iter()
                .zip(&self.intercepts)
                .rev()
                .map(|(s, c)| 1.0 - s - c)
                .collect(),
        }
    }

    /// Decreasing-increasing-decreasing bimodal family with turning points
    /// `c_l < c_r`: `b1 (x - c_l)`, `b2 (x - c_l)`, `b3 (x - c_r) + b2 (c_r - c_l)`.
    pub fn bimodal_innovative(
        c_l: f64,
        c_r: f64,
        b1: f64,
        b2: f64,
        b3: f64,
    ) -> Result<Self, DynamicsError> {
        check_turning_points(c_l, c_r)?;
        check_range("beta1", b1, -1.0 / c_l, true, -c_r / c_l, false)?;
        check_range(
            "beta2",
            b2,
            c_l / (c_r - c_l),
            false,
            1.0 / (c_r - c_l),
            true,
        )?;
        check_range("beta3", b3, -c_l / (1.0 - c_r), true, 0.0, false)?;
        Self::new(
            vec![0.0, c_l, c_r, 1.0],
            vec![b1, b2, b3],
            vec![-b1 * c_l, -b2 * c_l, b2 * (c_r - c_l) - b3 * c_r],
        )
    }

    /// Increasing-decreasing-increasing bimodal family with `f(0) = 0`,
    /// `f(c_l) = 1`, `f(1) = 1` and middle slope `-b2`.
    pub fn bimodal_imitative(c_l: f64, c_r: f64, b2: f64) -> Result<Self, DynamicsError> {
        check_turning_points(c_l, c_r)?;
        check_range(
            "beta2",
            b2,
            (1.0 - c_l) / (c_r - c_l),
            false,
            1.0 / (c_r - c_l),
            true,
        )?;
        let low = 1.0 - b2 * (c_r - c_l);
        Self::from_nodes(&[(0.0, 0.0), (c_l, 1.0), (c_r, low), (1.0, 1.0)])
    }

    /// Interior breakpoints where the slope changes sign, with `true` for maxima.
    pub fn turning_points(&self) -> Vec<(f64, bool)> {
        let mut out = Vec::new();
        for i in 1..self.num_segments() {
            let (l, r) = (self.slopes[i - 1], self.slopes[i]);
            if l > 0.0 && r < 0.0 {
                out.push((self.breakpoints[i], true));
            } else if l < 0.0 && r > 0.0 {
                out.push((self.breakpoints[i], false));
            }
        }
        out
    }
}

fn check_turning_points(c_l: f64, c_r: f64) -> Result<(), DynamicsError> {
    if 0.0 < c_l && c_l < c_r && c_r < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!(
            "turning points must satisfy 0 < c_l < c_r < 1, got {c_l}, {c_r}"
        )))
    }
}

fn check_range(
    name: &str,
    v: f64,
    lo: f64,
    lo_closed: bool,
    hi: f64,
    hi_closed: bool,
) -> Result<(), DynamicsError> {
    let above = if lo_closed { v >= lo } else { v > lo };
    let below = if hi_closed { v <= hi } else { v < hi };
    if above && below {
        Ok(())
    } else {
        Err(invalid(format!(
            "{name} = {v} outside {}{lo}, {hi}{}",
            if lo_closed { "[" } else { "(" },
            if hi_closed { "]" } else { ")" }
        )))
    }
}
