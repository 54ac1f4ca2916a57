//! Two-strategy anti-coordination games and population shares.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("not an anti-coordination game: {0} fails")]
    NotAntiCoordination(&'static str),
    #[error("payoff {0} is not finite")]
    NonFinite(&'static str),
    #[error("population share {0} is outside [0, 1]")]
    ShareOutOfRange(f64),
    #[error("invalid game description: {0}")]
    Parse(String),
}

/// Symmetric 2x2 game with payoffs `A vs A = a`, `A vs B = b`, `B vs A = c`, `B vs B = d`.
/// Anti-coordination means `a < c` and `d < b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AntiCoordinationGame {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Deserialize)]
struct RawGame {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl<'de> Deserialize<'de> for AntiCoordinationGame {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let raw = RawGame::deserialize(de)?;
        AntiCoordinationGame::new(raw.a, raw.b, raw.c, raw.d).map_err(serde::de::Error::custom)
    }
}

impl AntiCoordinationGame {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, GameError> {
        for (name, v) in [("a", a), ("b", b), ("c", c), ("d", d)] {
            if !v.is_finite() {
                return Err(GameError::NonFinite(name));
            }
        }
        if !(a < c) {
            return Err(GameError::NotAntiCoordination("a < c"));
        }
        if !(d < b) {
            return Err(GameError::NotAntiCoordination("d < b"));
        }
        Ok(Self { a, b, c, d })
    }

    /// Game with interior equilibrium `p` and `b - d = scale`, using `a = d = 0`.
    pub fn with_equilibrium(p: f64, scale: f64) -> Result<Self, GameError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(GameError::ShareOutOfRange(p));
        }
        Self::new(0.0, scale, scale * (1.0 - p) / p, 0.0)
    }

    pub fn from_json(text: &str) -> Result<Self, GameError> {
        serde_json::from_str(text).map_err(|e| GameError::Parse(e.to_string()))
    }

    /// Payoff to an A-player when a share `x` of the population plays A.
    pub fn payoff_a(&self, x: f64) -> f64 {
        (self.a - self.b) * x + self.b
    }

    pub fn payoff_b(&self, x: f64) -> f64 {
        (self.c - self.d) * x + self.d
    }

    pub fn mean_payoff(&self, x: f64) -> f64 {
        x * self.payoff_a(x) + (1.0 - x) * self.payoff_b(x)
    }

    /// The unique interior equilibrium share of A-players.
    pub fn equilibrium(&self) -> Equilibrium {
        Equilibrium {
            p: (self.b - self.d) / (self.c - self.a + self.b - self.d),
        }
    }

    pub fn p(&self) -> f64 {
        self.equilibrium().p
    }

    /// `(b - d) / p`, which also equals `c - a + b - d`; invariant under relabeling.
    pub fn slope_scale(&self) -> f64 {
        self.c - self.a + self.b - self.d
    }

    pub fn b_minus_d(&self) -> f64 {
        self.b - self.d
    }

    /// The same game with strategies relabeled: payoffs `(d, c, b, a)`.
    pub fn reflected(&self) -> Self {
        Self {
            a: self.d,
            b: self.c,
            c: self.b,
            d: self.a,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub p: f64,
}

/// Share of A-players, validated to lie in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PopulationShare(f64);

impl PopulationShare {
    pub fn new(x: f64) -> Result<Self, GameError> {
        if (0.0..=1.0).contains(&x) {
            Ok(Self(x))
        } else {
            Err(GameError::ShareOutOfRange(x))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for PopulationShare {
    type Error = GameError;
    fn try_from(x: f64) -> Result<Self, GameError> {
        Self::new(x)
    }
}

impl From<PopulationShare> for f64 {
    fn from(s: PopulationShare) -> f64 {
        s.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibrium_of_standard_example() {
        let g = AntiCoordinationGame::new(0.0, 1.0, 1.5, 0.0).unwrap();
        assert!((g.p() - 0.4).abs() < 1e-15);
        assert!((g.payoff_a(0.4) - g.payoff_b(0.4)).abs() < 1e-15);
    }

    #[test]
    fn symmetric_game_is_balanced() {
        let g = AntiCoordinationGame::new(0.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(g.p(), 0.5);
        assert_eq!(g.mean_payoff(0.5), 0.5);
    }

    #[test]
    fn loader_names_failed_inequality() {
        let e = AntiCoordinationGame::from_json(r#"{"a":2,"b":1,"c":1,"d":0}"#).unwrap_err();
        assert!(e.to_string().contains("a < c"), "{e}");
        let e = AntiCoordinationGame::from_json(r#"{"a":0,"b":0,"c":1,"d":0}"#).unwrap_err();
        assert!(e.to_string().contains("d < b"), "{e}");
    }

    #[test]
    fn reflection_swaps_equilibrium() {
        let g = AntiCoordinationGame::new(0.0, 1.0, 3.0, 0.0).unwrap();
        let r = g.reflected();
        assert!((r.p() - (1.0 - g.p())).abs() < 1e-15);
        assert!((r.b_minus_d() / r.p() - g.b_minus_d() / g.p()).abs() < 1e-12);
    }

    #[test]
    fn shares_reject_out_of_range() {
        assert!(PopulationShare::new(1.2).is_err());
        assert!(serde_json::from_str::<PopulationShare>("-0.1").is_err());
        assert_eq!(PopulationShare::new(0.3).unwrap().value(), 0.3);
    }

    #[test]
    fn with_equilibrium_builds_requested_p() {
        let g = AntiCoordinationGame::with_equilibrium(0.25, 2.0).unwrap();
        assert!((g.p() - 0.25).abs() < 1e-15);
        assert_eq!(g.b_minus_d(), 2.0);
    }
}
