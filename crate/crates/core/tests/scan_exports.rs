use popchaos_core::config::RunConfig;
use popchaos_core::dynamics::*;
use popchaos_core::game::AntiCoordinationGame;
use popchaos_core::protocols::*;
use popchaos_core::scan::*;
use proptest::prelude::*;

fn game(p: f64) -> AntiCoordinationGame {
    AntiCoordinationGame::with_equilibrium(p, 1.0).unwrap()
}

fn small_scan(delta_steps: usize, keep: usize) -> BifurcationScanConfig {
    BifurcationScanConfig {
        delta_min: 0.1,
        delta_max: 1.0,
        delta_steps,
        transient: 500,
        keep,
        ..Default::default()
    }
}

#[test]
fn identical_configs_give_identical_csv() {
    let proto = maximal_perturbed_protocol(&game(0.3));
    let cfg = small_scan(40, 20);
    let a = bifurcation_scan(&cfg, |d| build_update_map(&proto, d))
        .unwrap()
        .to_csv();
    let b = bifurcation_scan(&cfg, |d| build_update_map(&proto, d))
        .unwrap()
        .to_csv();
    assert_eq!(a, b);
    assert!(a.starts_with("delta,seed_index,seed,plot_rank,iteration,x\n"));
}

#[test]
fn rows_are_ordered_by_delta_seed_iteration() {
    let proto = maximal_perturbed_protocol(&game(0.4));
    let scan = bifurcation_scan(&small_scan(25, 7), |d| build_update_map(&proto, d)).unwrap();
    let keys: Vec<(f64, usize, usize)> = scan
        .rows
        .iter()
        .map(|r| (r.delta, r.seed_index, r.iteration))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(keys, sorted);
}

#[test]
fn inadmissible_step_sizes_are_skipped() {
    let proto = perturbed_ppi_protocol(&game(0.4), 6.0, 10.0).unwrap();
    let cfg = small_scan(10, 5);
    let scan = bifurcation_scan(&cfg, |d| build_update_map(&proto, d)).unwrap();
    assert!(!scan.skipped.is_empty());
    let done = cfg.delta_steps - scan.skipped.len();
    assert_eq!(scan.rows.len(), done * 2 * cfg.keep);
}

#[test]
fn relabeled_scan_mirrors_states() {
    let seeds = vec![0.13, 0.71];
    let mirrored: Vec<f64> = seeds.iter().map(|s| 1.0 - s).collect();
    let base = BifurcationScanConfig {
        delta_min: 0.05,
        delta_max: 0.6,
        delta_steps: 12,
        transient: 200,
        keep: 30,
        seeds: Some(seeds),
        seed_order: None,
    };
    let low = maximal_perturbed_protocol(&game(0.3));
    let high = maximal_perturbed_protocol(&game(0.7));
    let a = bifurcation_scan(&base, |d| build_update_map(&low, d)).unwrap();
    let b = bifurcation_scan(
        &BifurcationScanConfig {
            seeds: Some(mirrored),
            ..base.clone()
        },
        |d| build_update_map(&high, d),
    )
    .unwrap();
    assert_eq!(a.rows.len(), b.rows.len());
    for (r, s) in a.rows.iter().zip(&b.rows) {
        assert_eq!(r.iteration, s.iteration);
        assert!(
            (r.x - (1.0 - s.x)).abs() <= 1e-9,
            "delta {}: {} vs {}",
            r.delta,
            r.x,
            s.x
        );
    }

    let low = maximal_truncated_protocol(&game(0.25));
    let high = maximal_truncated_protocol(&game(0.75));
    // Stay where p attracts: transients elsewhere can be chaotic and round-off
    // then separates the two runs.
    let base = BifurcationScanConfig {
        delta_max: 0.16,
        ..base
    };
    let cfg = BifurcationScanConfig {
        seeds: Some(vec![0.2]),
        ..base.clone()
    };
    let a = bifurcation_scan(&cfg, |d| build_update_map(&low, d)).unwrap();
    let b = bifurcation_scan(
        &BifurcationScanConfig {
            seeds: Some(vec![0.8]),
            ..base
        },
        |d| build_update_map(&high, d),
    )
    .unwrap();
    for (r, s) in a.rows.iter().zip(&b.rows) {
        assert!(
            (r.x - (1.0 - s.x)).abs() <= 1e-9,
            "delta {}: {} vs {}",
            r.delta,
            r.x,
            s.x
        );
    }
}

#[test]
fn seed_order_tags_rows() {
    let proto = maximal_perturbed_protocol(&game(0.4));
    let cfg = BifurcationScanConfig {
        seed_order: Some(vec![1, 0]),
        ..small_scan(3, 4)
    };
    let scan = bifurcation_scan(&cfg, |d| build_update_map(&proto, d)).unwrap();
    for r in &scan.rows {
        assert_eq!(r.plot_rank, 1 - r.seed_index);
    }
    let bad = BifurcationScanConfig {
        delta_min: 0.5,
        delta_max: 0.5,
        ..small_scan(3, 4)
    };
    assert!(bifurcation_scan(&bad, |d| build_update_map(&proto, d)).is_err());
}

#[test]
fn default_seeds_are_outer_critical_points() {
    let map = build_update_map(&maximal_perturbed_protocol(&game(0.4)), 0.9).unwrap();
    let cps = critical_points(&map);
    let seeds = scan_seeds(&map);
    assert_eq!(seeds, vec![cps[0].x, cps[cps.len() - 1].x]);
    let calm = build_update_map(&maximal_perturbed_protocol(&game(0.4)), 0.1).unwrap();
    assert_eq!(scan_seeds(&calm), vec![0.2, 0.7]);
}

fn pl(nodes: &[(f64, f64)]) -> UpdateMap {
    UpdateMap::piecewise_linear(PlMap::from_nodes(nodes).unwrap(), MapKind::Generic)
}

#[test]
fn cobweb_of_chaotic_piecewise_linear_map_does_not_cycle() {
    let map = pl(&[(0.0, 0.0), (0.2, 0.99), (0.6, 0.01), (1.0, 1.0)]);
    let c = cobweb_export(&map, 0.3, 50, 201).unwrap();
    assert_eq!(c.path.len(), 101);
    assert_eq!(c.graph.len(), 201);
    let states: Vec<f64> = c.path.iter().step_by(2).map(|v| v.0).collect();
    for i in 0..states.len() {
        for j in i + 1..states.len().min(i + 9) {
            assert!(
                (states[i] - states[j]).abs() > 1e-9,
                "cycle of length {}",
                j - i
            );
        }
    }
    let csv = c.to_csv();
    assert!(csv.starts_with("series,index,x,y\ngraph,0,0,0\n"));
    assert!(csv.contains("\ncobweb,0,0.3,0.3\n"));
}

#[test]
fn cobweb_of_contracting_piecewise_linear_map_settles() {
    let map = pl(&[(0.0, 0.0), (0.2, 0.55), (0.6, 0.35), (1.0, 1.0)]);
    let c = cobweb_export(&map, 0.3, 50, 11).unwrap();
    let last = c.path.last().unwrap().0;
    // Fixed point of the middle segment 0.55 - 0.5 (x - 0.2).
    assert!((last - 0.65 / 1.5).abs() < 1e-12);
}

#[test]
fn threshold_table_export() {
    let rows = threshold_table(&[0.25, 0.4, 0.6]).unwrap();
    let csv = threshold_table_csv(&rows);
    assert_eq!(csv.lines().count(), 4);
    assert_eq!(rows[1].perturbed.threshold, rows[2].perturbed.threshold);
    assert!(rows[2].reflected);
}

#[test]
fn run_config_drives_a_scan() {
    let cfg = RunConfig::from_json(
        r#"{
            "game": {"p": 0.4},
            "protocol": {"kind": "perturbed_ppi"},
            "scan": {"delta_min": 0.5, "delta_max": 1.0, "delta_steps": 3, "transient": 100, "keep": 5}
        }"#,
    )
    .unwrap();
    let scan_cfg = cfg.scan.clone().unwrap();
    let scan = bifurcation_scan(&scan_cfg, |d| {
        cfg.build_map_at(d).map_err(|e| match e {
            popchaos_core::config::ConfigError::Dynamics(d) => d,
            other => panic!("{other}"),
        })
    })
    .unwrap();
    assert_eq!(scan.rows.len(), 3 * 2 * 5);
}

#[test]
fn certify_report_for_failing_map_keeps_conditions() {
    let map = build_update_map(&maximal_perturbed_protocol(&game(0.4)), 0.3).unwrap();
    let rep = certify_report(&map, None, 1e-9);
    assert!(rep.certificate.is_none());
    assert!(rep.conditions.is_some());
    assert!(rep.failure.is_some());
    assert!(rep.heuristic_basin_probe.is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn row_count_matches_grid(steps in 1usize..12, keep in 1usize..9, n_seeds in 1usize..4) {
        let proto = maximal_perturbed_protocol(&game(0.35));
        let seeds: Vec<f64> = (0..n_seeds).map(|i| 0.1 + 0.3 * i as f64).collect();
        let cfg = BifurcationScanConfig {
            delta_min: 0.2,
            delta_max: 0.9,
            delta_steps: steps,
            transient: 50,
            keep,
            seeds: Some(seeds),
            seed_order: None,
        };
        let scan = bifurcation_scan(&cfg, |d| build_update_map(&proto, d)).unwrap();
        prop_assert!(scan.skipped.is_empty());
        prop_assert_eq!(scan.rows.len(), steps * n_seeds * keep);
        prop_assert_eq!(scan.to_csv().lines().count(), 1 + steps * n_seeds * keep);
    }
}
