//! Discrete-time population dynamics of revision protocols in two-strategy
//! anti-coordination games, with tools to certify Li-Yorke chaos.
//!
//! * [`game`]: payoffs and the interior equilibrium.
//! * [`protocols`]: switching rates (PPI, pairwise comparison, perturbed and
//!   truncated PPI, and explicit chaotic constructions) plus validation.
//! * [`dynamics`]: the update map, its exact piecewise form, orbits and range checks.
//! * [`chaos`]: certificates, periodic orbits, stability and step-size thresholds.
//! * [`scan`]: bifurcation scans, cobwebs, threshold tables and reports.
//!
//! ```
//! use popchaos_core::prelude::*;
//!
//! let game = AntiCoordinationGame::with_equilibrium(0.4, 1.0).unwrap();
//! let map = build_update_map(&maximal_perturbed_protocol(&game), 1.0).unwrap();
//! let cert = certify(&map, 0.2, 0.7, DEFAULT_MARGIN).unwrap();
//! assert!(cert.verify(&map));
//! ```

pub mod chaos;
pub mod config;
pub mod dynamics;
pub mod game;
pub mod poly;
pub mod protocols;
pub mod roots;
pub mod scan;

pub mod prelude {
    pub use crate::chaos::{
        certify, certify_map, check_chaos_conditions, delta_star_symmetric,
        delta_threshold_perturbed, delta_threshold_truncated, find_period3, find_periodic_orbits,
        find_witness, fixed_points, one_sided_derivatives, scrambled_pair_stat, ChaosCertificate,
        ChaosError, ConditionBranch, Stability, DEFAULT_MARGIN,
    };
    pub use crate::dynamics::{
        build_update_map, conjugate_map, critical_points, iterate, range_check, MapKind, Orbit,
        PlMap, UpdateMap,
    };
    pub use crate::game::{AntiCoordinationGame, Equilibrium, PopulationShare};
    pub use crate::protocols::{
        imitative_chaotic_protocol, innovative_chaotic_protocol, maximal_perturbed_protocol,
        maximal_truncated_protocol, pc_protocol, perturbed_ppi_protocol, ppi_protocol,
        reflect_protocol, truncated_ppi_protocol, validate_protocol, ProtocolKind,
        RevisionProtocol,
    };
    pub use crate::scan::{bifurcation_scan, cobweb_export, BifurcationScanConfig, ScanResult};
}
