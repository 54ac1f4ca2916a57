//! JSON run configuration shared by the command-line tools.
//!
//! ```json
//! {
//!   "game": {"a": 0, "b": 1, "c": 1.5, "d": 0},
//!   "protocol": {"kind": "perturbed_ppi"},
//!   "delta": 1.0
//! }
//! ```
//!
//! A game may instead be given by its equilibrium, `{"p": 0.4, "scale": 1}`,
//! where `scale` is `b - d`. A piecewise-linear map may replace game and
//! protocol: `{"pl_map": {"nodes": [[0,0],[0.2,0.99],[0.6,0.01],[1,1]]}}` or
//! `{"pl_map": {"breakpoints": [...], "slopes": [...], "intercepts": [...]}}`.

use serde::Deserialize;
use thiserror::Error;

use crate::dynamics::{build_update_map, DynamicsError, MapKind, PlMap, UpdateMap};
use crate::game::{AntiCoordinationGame, GameError};
use crate::protocols::{ProtocolDescriptor, ProtocolError, RevisionProtocol};
use crate::scan::BifurcationScanConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot parse configuration: {0}")]
    Json(String),
    #[error("configuration is missing `{0}`")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub p: Option<f64>,
    pub scale: Option<f64>,
}

impl GameSpec {
    pub fn build(&self) -> Result<AntiCoordinationGame, ConfigError> {
        match (self.a, self.b, self.c, self.d, self.p) {
            (Some(a), Some(b), Some(c), Some(d), None) => {
                Ok(AntiCoordinationGame::new(a, b, c, d)?)
            }
            (None, None, None, None, Some(p)) => Ok(AntiCoordinationGame::with_equilibrium(
                p,
                self.scale.unwrap_or(1.0),
            )?),
            _ => Err(ConfigError::Invalid(
                "game needs either all of a, b, c, d or an equilibrium p".into(),
            )),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlSpec {
    pub nodes: Option<Vec<[f64; 2]>>,
    pub breakpoints: Option<Vec<f64>>,
    pub slopes: Option<Vec<f64>>,
    pub intercepts: Option<Vec<f64>>,
    pub kind: Option<MapKindSpec>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKindSpec {
    Imitative,
    Innovative,
    Generic,
}

impl PlSpec {
    pub fn build(&self) -> Result<UpdateMap, ConfigError> {
        let pl = match (
            &self.nodes,
            &self.breakpoints,
            &self.slopes,
            &self.intercepts,
        ) {
            (Some(nodes), None, None, None) => {
                let pts: Vec<(f64, f64)> = nodes.iter().map(|n| (n[0], n[1])).collect();
                PlMap::from_nodes(&pts)?
            }
            (None, Some(b), Some(s), Some(c)) => PlMap::new(b.clone(), s.clone(), c.clone())?,
            _ => {
                return Err(ConfigError::Invalid(
                    "pl_map needs either nodes or breakpoints, slopes and intercepts".into(),
                ))
            }
        };
        let kind = match self.kind {
            Some(MapKindSpec::Imitative) => MapKind::Imitative,
            Some(MapKindSpec::Innovative) => MapKind::Innovative,
            _ => MapKind::Generic,
        };
        Ok(UpdateMap::piecewise_linear(pl, kind))
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub game: Option<GameSpec>,
    pub protocol: Option<ProtocolDescriptor>,
    pub delta: Option<f64>,
    pub pl_map: Option<PlSpec>,
    pub x0: Option<f64>,
    pub steps: Option<usize>,
    pub probes: Option<[f64; 2]>,
    pub scan: Option<BifurcationScanConfig>,
    pub n_max: Option<usize>,
    pub p_grid: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))
    }

    pub fn protocol(&self) -> Result<RevisionProtocol, ConfigError> {
        let game = self
            .game
            .as_ref()
            .ok_or(ConfigError::Missing("game"))?
            .build()?;
        let desc = self
            .protocol
            .as_ref()
            .ok_or(ConfigError::Missing("protocol"))?;
        Ok(desc.build(&game)?)
    }

    /// The configured map at the configured step size.
    pub fn build_map(&self) -> Result<UpdateMap, ConfigError> {
        if let Some(pl) = &self.pl_map {
            if self.protocol.is_some() {
                return Err(ConfigError::Invalid(
                    "give either pl_map or game and protocol, not both".into(),
                ));
            }
            return pl.build();
        }
        let delta = self.delta.ok_or(ConfigError::Missing("delta"))?;
        self.build_map_at(delta)
    }

    /// The configured protocol's map at step size `delta`.
    pub fn build_map_at(&self, delta: f64) -> Result<UpdateMap, ConfigError> {
        Ok(build_update_map(&self.protocol()?, delta)?)
    }

    pub fn probes(&self) -> Option<(f64, f64)> {
        self.probes.map(|[l, r]| (l, r))
    }
}
