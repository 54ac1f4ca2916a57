//! Parameter sweeps and exports: bifurcation scans, cobwebs, threshold tables
//! and certification reports.
//!
//! Every CSV export prints floats in shortest round-trip form, and parallel
//! scans collect rows in grid order, so identical inputs give byte-identical
//! output.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaos::{
    basin_probe, certify_map, delta_threshold_perturbed, delta_threshold_truncated,
    evaluate_conditions, one_sided_derivatives, BasinProbe, ChaosCertificate, ChaosError,
    ConditionReport, PeriodicOrbitSearch, StabilityReport, ThresholdReport,
};
use crate::dynamics::{critical_points, DynamicsError, RangeReport, UpdateMap};

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("invalid scan configuration: {0}")]
pub struct ScanConfigError(pub String);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BifurcationScanConfig {
    pub delta_min: f64,
    pub delta_max: f64,
    /// Number of evenly spaced step sizes, both ends included.
    pub delta_steps: usize,
    /// Iterations discarded before recording.
    pub transient: usize,
    /// Iterations recorded per seed.
    pub keep: usize,
    /// Initial states. Defaults to the outermost critical points of each map,
    /// or the family's probe points when the map has fewer than two.
    pub seeds: Option<Vec<f64>>,
    /// Plotting order of the seeds as a permutation of their indices. Only
    /// tags the output; every seed is always iterated.
    pub seed_order: Option<Vec<usize>>,
}

impl Default for BifurcationScanConfig {
    fn default() -> Self {
        Self {
            delta_min: 0.002,
            delta_max: 1.0,
            delta_steps: 500,
            transient: 20_000,
            keep: 100,
            seeds: None,
            seed_order: None,
        }
    }
}

impl BifurcationScanConfig {
    pub fn validate(&self) -> Result<(), ScanConfigError> {
        let err = |m: String| Err(ScanConfigError(m));
        if !(self.delta_min.is_finite() && self.delta_max.is_finite()) || self.delta_min <= 0.0 {
            return err(format!("delta_min = {} must be positive", self.delta_min));
        }
        if self.delta_steps > 1 && self.delta_min >= self.delta_max {
            return err(format!(
                "delta_min = {} must be below delta_max = {}",
                self.delta_min, self.delta_max
            ));
        }
        if self.delta_steps == 0 || self.transient == 0 || self.keep == 0 {
            return err("delta_steps, transient and keep must be at least 1".into());
        }
        if let Some(seeds) = &self.seeds {
            if seeds.is_empty() || seeds.iter().any(|s| !(0.0..=1.0).contains(s)) {
                return err(format!(
                    "seeds {seeds:?} must be non-empty and lie in [0, 1]"
                ));
            }
        }
        if let Some(order) = &self.seed_order {
            let mut sorted = order.clone();
            sorted.sort_unstable();
            if sorted.iter().enumerate().any(|(i, &k)| i != k) {
                return err(format!("seed_order {order:?} is not a permutation"));
            }
            if let Some(seeds) = &self.seeds {
                if seeds.len() != order.len() {
                    return err("seed_order and seeds differ in length".into());
                }
            }
        }
        Ok(())
    }

    /// Plot rank of a seed index under `seed_order`.
    pub fn plot_rank(&self, seed_index: usize) -> usize {
        match &self.seed_order {
            Some(order) => order
                .iter()
                .position(|&k| k == seed_index)
                .unwrap_or(seed_index),
            None => seed_index,
        }
    }

    pub fn deltas(&self) -> Vec<f64> {
        let n = self.delta_steps.max(1);
        if n == 1 {
            return vec![self.delta_min];
        }
        let span = self.delta_max - self.delta_min;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    self.delta_max
                } else {
                    self.delta_min + span * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub delta: f64,
    pub seed_index: usize,
    pub seed: f64,
    /// Position of this seed in the requested plotting order.
    pub plot_rank: usize,
    pub iteration: usize,
    pub x: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkippedDelta {
    pub delta: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    pub skipped: Vec<SkippedDelta>,
}

impl ScanResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("delta,seed_index,seed,plot_rank,iteration,x\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.delta, r.seed_index, r.seed, r.plot_rank, r.iteration, r.x
            ));
        }
        s
    }

    /// Recorded states for one step size and seed, in iteration order.
    pub fn tail(&self, delta: f64, seed_index: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.delta == delta && r.seed_index == seed_index)
            .map(|r| r.x)
            .collect()
    }
}

/// Default scan seeds for one map.
pub fn scan_seeds(map: &UpdateMap) -> Vec<f64> {
    let cps = critical_points(map);
    if cps.len() >= 2 {
        return vec![cps[0].x, cps[cps.len() - 1].x];
    }
    match map.default_probes() {
        Some((l, r)) => vec![l, r],
        None => vec![0.5],
    }
}

/// Sweep the step size, iterating each seed through the transient and
/// recording the next `keep` states. Step sizes whose map fails its range
/// check, or whose orbit leaves `[0, 1]`, are skipped and logged.
pub fn bifurcation_scan<F>(
    config: &BifurcationScanConfig,
    build: F,
) -> Result<ScanResult, ScanConfigError>
where
    F: Fn(f64) -> Result<UpdateMap, DynamicsError> + Sync,
{
    config.validate()?;
    let per_delta: Vec<Result<Vec<ScanRow>, SkippedDelta>> = config
        .deltas()
        .into_par_iter()
        .map(|delta| scan_one(config, delta, &build))
        .collect();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for r in per_delta {
        match r {
            Ok(v) => rows.extend(v),
            Err(s) => {
                log::warn!("skipping delta = {}: {}", s.delta, s.reason);
                skipped.push(s);
            }
        }
    }
    Ok(ScanResult { rows, skipped })
}

fn scan_one<F>(
    config: &BifurcationScanConfig,
    delta: f64,
    build: &F,
) -> Result<Vec<ScanRow>, SkippedDelta>
where
    F: Fn(f64) -> Result<UpdateMap, DynamicsError>,
{
    let skip = |reason: String| SkippedDelta { delta, reason };
    let map = build(delta).map_err(|e| skip(e.to_string()))?;
    if !map.range().passed {
        return Err(skip(format!(
            "map leaves [0, 1] (excursion {})",
            map.range().excursion
        )));
    }
    let seeds = config.seeds.clone().unwrap_or_else(|| scan_seeds(&map));
    let mut rows = Vec::with_capacity(seeds.len() * config.keep);
    for (seed_index, &seed) in seeds.iter().enumerate() {
        let mut x = seed;
        for k in 1..=config.transient {
            x = map.step(x, k).map_err(|e| skip(e.to_string()))?;
        }
        for j in 1..=config.keep {
            let iteration = config.transient + j;
            x = map.step(x, iteration).map_err(|e| skip(e.to_string()))?;
            rows.push(ScanRow {
                delta,
                seed_index,
                seed,
                plot_rank: config.plot_rank(seed_index),
                iteration,
                x,
            });
        }
    }
    Ok(rows)
}

/// Staircase and dense graph of a map.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cobweb {
    /// `(x, f(x))` on an even grid.
    pub graph: Vec<(f64, f64)>,
    /// Vertices `(x0, x0), (x0, x1), (x1, x1), (x1, x2), ...`.
    pub path: Vec<(f64, f64)>,
}

impl Cobweb {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("series,index,x,y\n");
        for (i, (x, y)) in self.graph.iter().enumerate() {
            s.push_str(&format!("graph,{i},{x},{y}\n"));
        }
        for (i, (x, y)) in self.path.iter().enumerate() {
            s.push_str(&format!("cobweb,{i},{x},{y}\n"));
        }
        s
    }
}

pub fn cobweb_export(
    map: &UpdateMap,
    x0: f64,
    steps: usize,
    graph_samples: usize,
) -> Result<Cobweb, DynamicsError> {
    let orbit = crate::dynamics::iterate(map, x0, steps)?;
    let m = graph_samples.max(2);
    let graph = (0..m)
        .map(|i| {
            let x = i as f64 / (m - 1) as f64;
            (x, map.eval(x))
        })
        .collect();
    let mut path = vec![(x0, x0)];
    for w in orbit.states.windows(2) {
        path.push((w[0], w[1]));
        path.push((w[1], w[1]));
    }
    Ok(Cobweb { graph, path })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub p: f64,
    /// Equilibrium the formulas were evaluated at: `p`, or `1 - p` when reflected.
    pub p_effective: f64,
    pub reflected: bool,
    pub perturbed: ThresholdReport,
    pub truncated: ThresholdReport,
}

/// Threshold table over a grid of equilibria. Shares above 1/2 are evaluated
/// through the relabeled game. The values 0, 1/2 and 1 have no threshold.
pub fn threshold_table(ps: &[f64]) -> Result<Vec<ThresholdRow>, ChaosError> {
    ps.iter()
        .map(|&p| {
            let reflected = p > 0.5;
            let q = if reflected { 1.0 - p } else { p };
            Ok(ThresholdRow {
                p,
                p_effective: q,
                reflected,
                perturbed: delta_threshold_perturbed(q)
                    .map_err(|_| ChaosError::EquilibriumOutOfRange(p))?,
                truncated: delta_threshold_truncated(q)
                    .map_err(|_| ChaosError::EquilibriumOutOfRange(p))?,
            })
        })
        .collect()
}

pub fn threshold_table_csv(rows: &[ThresholdRow]) -> String {
    let mut s = String::from(
        "p,p_effective,reflected,delta1,delta2,delta3,delta4,delta5,delta_p,valid,\
         delta_star1,delta_star2,delta_star3,delta_star4,delta_star5,delta_star_p,valid_star\n",
    );
    for r in rows {
        let mut fields = vec![
            r.p.to_string(),
            r.p_effective.to_string(),
            r.reflected.to_string(),
        ];
        for rep in [&r.perturbed, &r.truncated] {
            fields.extend(rep.components.iter().map(|c| c.to_string()));
            fields.push(rep.threshold.to_string());
            fields.push(rep.valid.to_string());
        }
        s.push_str(&fields.join(","));
        s.push('\n');
    }
    s
}

pub fn periods_csv(search: &PeriodicOrbitSearch) -> String {
    let mut s = String::from("period,orbit,index,x\n");
    let mut counter = std::collections::BTreeMap::new();
    for o in &search.orbits {
        let k = counter.entry(o.period).or_insert(0usize);
        for (i, x) in o.points.iter().enumerate() {
            s.push_str(&format!("{},{},{},{}\n", o.period, k, i, x));
        }
        *k += 1;
    }
    s
}

/// Everything the `certify` command reports about one map.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertifyReport {
    pub range: RangeReport,
    pub probes: Option<(f64, f64)>,
    pub certificate: Option<ChaosCertificate>,
    /// Inequality values at the probes when no certificate was found.
    pub conditions: Option<ConditionReport>,
    pub failure: Option<String>,
    /// Derivative test at the interior equilibrium.
    pub equilibrium_stability: Option<StabilityReport>,
    /// Simulation-based local basin estimate. Heuristic only.
    pub heuristic_basin_probe: Option<BasinProbe>,
}

pub fn certify_report(map: &UpdateMap, probes: Option<(f64, f64)>, margin: f64) -> CertifyReport {
    let probes = probes.or_else(|| map.default_probes());
    let (certificate, failure) = match certify_map(map, probes, margin) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let conditions = match (&certificate, probes) {
        (None, Some((l, r))) => evaluate_conditions(map, l, r, margin).ok(),
        _ => None,
    };
    let equilibrium_stability = map.equilibrium().map(|p| one_sided_derivatives(map, p));
    let heuristic_basin_probe = match map.equilibrium() {
        Some(p) if map.range().passed => Some(basin_probe(map, p, 1e-3, 10_000)),
        _ => None,
    };
    CertifyReport {
        range: map.range().clone(),
        probes,
        certificate,
        conditions,
        failure,
        equilibrium_stability,
        heuristic_basin_probe,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{MapKind, PlMap};

    #[test]
    fn default_delta_grid() {
        let d = BifurcationScanConfig::default().deltas();
        assert_eq!(d.len(), 500);
        assert_eq!(d[0], 0.002);
        assert_eq!(d[499], 1.0);
    }

    #[test]
    fn config_validation() {
        let ok = BifurcationScanConfig::default();
        assert!(ok.validate().is_ok());
        let bad = BifurcationScanConfig {
            delta_min: 1.0,
            delta_max: 0.5,
            ..ok.clone()
        };
        assert!(bad.validate().is_err());
        let bad = BifurcationScanConfig {
            keep: 0,
            ..ok.clone()
        };
        assert!(bad.validate().is_err());
        let bad = BifurcationScanConfig {
            seeds: Some(vec![1.5]),
            ..ok.clone()
        };
        assert!(bad.validate().is_err());
        let bad = BifurcationScanConfig {
            seed_order: Some(vec![0, 0]),
            ..ok.clone()
        };
        assert!(bad.validate().is_err());
        let swapped = BifurcationScanConfig {
            seed_order: Some(vec![1, 0]),
            ..ok
        };
        assert!(swapped.validate().is_ok());
        assert_eq!(swapped.plot_rank(0), 1);
    }

    #[test]
    fn identity_cobweb_is_one_point() {
        let map = UpdateMap::piecewise_linear(PlMap::identity(), MapKind::Generic);
        let c = cobweb_export(&map, 0.3, 5, 11).unwrap();
        assert!(c.path.iter().all(|v| *v == (0.3, 0.3)));
        assert_eq!(c.path.len(), 11);
    }

    #[test]
    fn threshold_table_reflects_large_p() {
        let rows = threshold_table(&[0.6]).unwrap();
        assert!(rows[0].reflected);
        assert!((rows[0].p_effective - 0.4).abs() < 1e-15);
        assert!(threshold_table(&[0.5]).is_err());
        assert!(threshold_table(&[1.0]).is_err());
    }
}
