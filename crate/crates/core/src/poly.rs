//! Dense real polynomials and piecewise functions on [0, 1].
//!
//! Pieces use the left-closed / right-open convention `[b_i, b_{i+1})`, except the
//! last piece which also contains 1.

use serde::{Deserialize, Serialize};

/// Polynomial with ascending coefficients: `c[0] + c[1] x + c[2] x^2 + ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly(Vec<f64>);

const DIVISION_TOLERANCE: f64 = 1e-10;

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Poly(coeffs);
        p.trim_exact();
        p
    }

    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    /// `c0 + c1 x`
    pub fn linear(c0: f64, c1: f64) -> Self {
        Poly::new(vec![c0, c1])
    }

    pub fn x() -> Self {
        Poly::linear(0.0, 1.0)
    }

    pub fn one_minus_x() -> Self {
        Poly::linear(1.0, -1.0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    fn trim_exact(&mut self) {
        while matches!(self.0.last(), Some(c) if *c == 0.0) {
            self.0.pop();
        }
    }

    /// Degree after dropping coefficients below `tol` relative to the largest one.
    /// The zero polynomial has degree 0.
    pub fn effective_degree(&self, tol: f64) -> usize {
        let scale = self.0.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        if scale == 0.0 {
            return 0;
        }
        self.0
            .iter()
            .rposition(|c| c.abs() > tol * scale.max(1.0))
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| *c == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly::new(
            (0..n)
                .map(|k| self.0.get(k).unwrap_or(&0.0) + other.0.get(k).unwrap_or(&0.0))
                .collect(),
        )
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.0.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.0.is_empty() || other.0.is_empty() {
            return Poly::zero();
        }
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// `p(t + h)` as a polynomial in `t` (Taylor shift).
    pub fn shift(&self, h: f64) -> Poly {
        let mut c = self.0.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                c[j] += h * c[j + 1];
            }
        }
        Poly::new(c)
    }

    /// `p(w - t)` as a polynomial in `t`.
    pub fn reflect_about(&self, w: f64) -> Poly {
        let mut c = self.shift(w).0;
        for (k, v) in c.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
        Poly::new(c)
    }

    /// `p(1 - x)`
    pub fn reflect(&self) -> Poly {
        self.reflect_about(1.0)
    }

    /// Quotient of `self / divisor` when the division is exact up to rounding.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        let d = divisor.effective_degree(1e-14);
        let lead = divisor.0.get(d).copied().unwrap_or(0.0);
        if lead == 0.0 {
            return None;
        }
        let mut rem = self.0.clone();
        if rem.len() <= d {
            return if self.norm() <= DIVISION_TOLERANCE {
                Some(Poly::zero())
            } else {
                None
            };
        }
        let mut quot = vec![0.0; rem.len() - d];
        for k in (0..quot.len()).rev() {
            let q = rem[k + d] / lead;
            quot[k] = q;
            for j in 0..=d {
                rem[k + j] -= q * divisor.0[j];
            }
        }
        let rem_norm = rem.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        if rem_norm <= DIVISION_TOLERANCE * self.norm().max(1.0) {
            Some(Poly::new(quot))
        } else {
            None
        }
    }

    pub(crate) fn norm(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn approx_eq(&self, other: &Poly, tol: f64) -> bool {
        let n = self.0.len().max(other.0.len());
        (0..n)
            .all(|k| (self.0.get(k).unwrap_or(&0.0) - other.0.get(k).unwrap_or(&0.0)).abs() <= tol)
    }

    /// Real roots inside the closed interval `[lo, hi]`, ascending.
    pub fn roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let deg = self.effective_degree(1e-13);
        let c = &self.0;
        let mut roots = match deg {
            0 => Vec::new(),
            1 => vec![-c[0] / c[1]],
            2 => quadratic_roots(c[2], c[1], c[0]),
            _ => sampled_roots(self, lo, hi),
        };
        roots.retain(|r| r.is_finite() && *r >= lo && *r <= hi);
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        roots
    }
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let s = disc.sqrt();
    // Numerically stable pair.
    let q = -0.5 * (b + b.signum() * s);
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

fn sampled_roots(p: &Poly, lo: f64, hi: f64) -> Vec<f64> {
    let n = 4000;
    let mut out = Vec::new();
    let mut x0 = lo;
    let mut f0 = p.eval(x0);
    for i in 1..=n {
        let x1 = lo + (hi - lo) * i as f64 / n as f64;
        let f1 = p.eval(x1);
        if f0 == 0.0 {
            out.push(x0);
        } else if f0 * f1 < 0.0 {
            out.push(crate::roots::bisect(|x| p.eval(x), x0, x1, 1e-15));
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 {
        out.push(hi);
    }
    out
}

/// Index of the piece containing `x` under the left-closed convention.
pub(crate) fn piece_index(breaks: &[f64], x: f64) -> usize {
    let k = breaks.len() - 1;
    let i = breaks.partition_point(|b| *b <= x);
    i.saturating_sub(1).min(k - 1)
}

/// Index of the piece whose closure contains `x` from the left (`b_i < x <= b_{i+1}`).
pub(crate) fn piece_index_left(breaks: &[f64], x: f64) -> usize {
    let k = breaks.len() - 1;
    let i = breaks.partition_point(|b| *b < x);
    i.saturating_sub(1).min(k - 1)
}

/// Polynomial pieces on `[0, 1]`. Piece `i` is stored as a polynomial in the
/// local variable `t = x - b_i`, so its coefficients stay on the scale of the
/// function on that piece.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePoly {
    /// `0 = b_0 < b_1 < ... < b_k = 1`
    pub breaks: Vec<f64>,
    pub pieces: Vec<Poly>,
}

impl PiecewisePoly {
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_piece(piece_index(&self.breaks, x), x)
    }

    /// Piece `i` evaluated at `x`, also outside its own interval.
    pub fn eval_piece(&self, i: usize, x: f64) -> f64 {
        self.pieces[i].eval(x - self.breaks[i])
    }

    /// Derivative of piece `i` at `x`.
    pub fn slope_piece(&self, i: usize, x: f64) -> f64 {
        self.pieces[i].derivative().eval(x - self.breaks[i])
    }

    pub fn num_pieces(&self) -> usize {
        self.pieces.len()
    }

    pub fn max_degree(&self, tol: f64) -> usize {
        self.pieces
            .iter()
            .map(|p| p.effective_degree(tol))
            .max()
            .unwrap_or(0)
    }

    /// Merge adjacent pieces carrying the same polynomial.
    pub fn merged(&self, tol: f64) -> PiecewisePoly {
        let mut breaks = vec![self.breaks[0]];
        let mut pieces: Vec<Poly> = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            let same = match pieces.last() {
                Some(last) => {
                    let moved = p.shift(breaks[breaks.len() - 1] - self.breaks[i]);
                    last.approx_eq(&moved, tol * last.norm().max(1.0))
                }
                None => false,
            };
            if !same {
                if !pieces.is_empty() {
                    breaks.push(self.breaks[i]);
                }
                pieces.push(p.clone());
            }
        }
        breaks.push(*self.breaks.last().unwrap());
        PiecewisePoly { breaks, pieces }
    }

    /// `1 - g(1 - x)`, the conjugate under `x -> 1 - x`.
    pub fn conjugate(&self) -> PiecewisePoly {
        let breaks = self.breaks.iter().rev().map(|b| 1.0 - b).collect();
        let pieces = (0..self.pieces.len())
            .rev()
            .map(|i| {
                let w = self.breaks[i + 1] - self.breaks[i];
                Poly::constant(1.0).sub(&self.pieces[i].reflect_about(w))
            })
            .collect();
        PiecewisePoly { breaks, pieces }
    }
}
