use popchaos_core::game::AntiCoordinationGame;
use popchaos_core::protocols::*;
use proptest::prelude::*;

fn game(p: f64) -> AntiCoordinationGame {
    AntiCoordinationGame::with_equilibrium(p, 1.0).unwrap()
}

fn grid(n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |i| i as f64 / n as f64)
}

fn built_ins(p: f64) -> Vec<RevisionProtocol> {
    let g = game(p);
    let mut v = vec![
        ppi_protocol(&g),
        pc_protocol(&g),
        maximal_perturbed_protocol(&g),
        maximal_truncated_protocol(&g),
    ];
    if p < 0.5 {
        v.push(innovative_chaotic_protocol(&g, 1.0 / (1.0 - 2.0 * p) + 0.1, -0.01).unwrap());
        v.push(imitative_chaotic_protocol(&g).unwrap());
    }
    let reflected: Vec<_> = v.iter().map(reflect_protocol).collect();
    v.extend(reflected);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn at_most_one_direction_switches(p in 0.05..0.95f64, x in 0.0..=1.0f64) {
        for proto in built_ins(p) {
            let (ab, ba) = (proto.rho_ab(x), proto.rho_ba(x));
            prop_assert!(!(ab > 1e-12 && ba > 1e-12), "{:?} at {}: {} {}", proto.family(), x, ab, ba);
        }
    }

    #[test]
    fn built_ins_pass_validation(p in 0.05..0.95f64) {
        for proto in built_ins(p) {
            let rep = validate_protocol(&proto, 2001);
            prop_assert!(rep.is_valid(), "{:?}: {:?}", proto.family(), rep);
            prop_assert!(rep.lipschitz_estimate.is_finite());
        }
    }

    #[test]
    fn reflecting_twice_restores_rates(p in 0.05..0.95f64) {
        for proto in built_ins(p) {
            let twice = reflect_protocol(&reflect_protocol(&proto));
            for x in grid(1000) {
                prop_assert!((twice.rho_ab(x) - proto.rho_ab(x)).abs() < 1e-12);
                prop_assert!((twice.rho_ba(x) - proto.rho_ba(x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reflection_swaps_directions(p in 0.05..0.95f64, x in 0.0..=1.0f64) {
        for proto in built_ins(p) {
            let r = reflect_protocol(&proto);
            prop_assert!((r.rho_ab(x) - proto.rho_ba(1.0 - x)).abs() < 1e-12);
            prop_assert!((r.rho_ba(x) - proto.rho_ab(1.0 - x)).abs() < 1e-12);
        }
    }

    #[test]
    fn innovative_construction_switches_toward_better_strategy(
        p in 0.02..0.48f64,
        t2 in 0.01..0.99f64,
        t3 in 0.0..0.99f64,
    ) {
        let q = 1.0 - 2.0 * p;
        let b2 = 1.0 / q + t2 * (1.0 - p) / q * (2.0 - 1.0 / (1.0 - p));
        let b2 = b2.min(2.0 * (1.0 - p) / q - 1e-9);
        let b3 = -t3 * p / (q * (1.0 - p)) - 1e-9 * (1.0 - t3);
        let proto = innovative_chaotic_protocol(&game(p), b2, b3).unwrap();
        for x in grid(2000) {
            if (x - p).abs() < 1e-12 {
                continue;
            }
            prop_assert_eq!(proto.rho_ba(x) > 0.0, x < p);
            prop_assert_eq!(proto.rho_ab(x) > 0.0, x > p);
        }
    }
}

#[test]
fn unit_perturbation_is_plain_ppi() {
    for p in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let g = AntiCoordinationGame::with_equilibrium(p, 2.5).unwrap();
        let a = perturbed_ppi_protocol(&g, 1.0, 1.0).unwrap();
        let b = ppi_protocol(&g);
        for x in grid(10_000) {
            assert!((a.rho_ab(x) - b.rho_ab(x)).abs() < 1e-12);
            assert!((a.rho_ba(x) - b.rho_ba(x)).abs() < 1e-12);
        }
    }
}

#[test]
fn trivial_truncation_is_untruncated() {
    let g = game(0.3);
    let (eta, xi) = (2.0, 5.0);
    let plain = perturbed_ppi_protocol(&g, eta, xi).unwrap();
    for gamma in [0.0, 1.0] {
        let t = truncated_ppi_protocol(&g, eta, xi, gamma).unwrap();
        for x in grid(10_000) {
            assert!((t.rho_ab(x) - plain.rho_ab(x)).abs() < 1e-12);
            assert!((t.rho_ba(x) - plain.rho_ba(x)).abs() < 1e-12);
        }
    }
}

#[test]
fn imitative_construction_is_monotone_in_payoffs() {
    for p in [0.1, 0.25, 0.4, 0.49] {
        let proto = imitative_chaotic_protocol(&game(p)).unwrap();
        let (r_ab, r_ba) = proto.switch_rates().unwrap();
        for x in grid(5000) {
            if (x - p).abs() < 1e-12 {
                continue;
            }
            assert_eq!(r_ba.eval(x) >= r_ab.eval(x), x <= p, "p = {p}, x = {x}");
        }
    }
}

#[test]
fn symmetric_ppi_is_its_own_reflection() {
    let g = AntiCoordinationGame::new(0.0, 1.0, 1.0, 0.0).unwrap();
    let proto = ppi_protocol(&g);
    let r = reflect_protocol(&proto);
    for x in grid(1000) {
        assert!((r.rho_ab(x) - proto.rho_ab(x)).abs() < 1e-15);
        assert!((r.rho_ba(x) - proto.rho_ba(x)).abs() < 1e-15);
    }
    assert!((proto.rho_ba(0.25) - 0.125).abs() < 1e-15);
}

#[test]
fn parameter_set_membership() {
    assert!(in_delta_p(0.4, 1.0, 40.0 / 9.0, 10.0, 1.0));
    assert!(!in_delta_p(0.4, 1.0, 5.0, 10.0, 1.0));
    assert!(!in_delta_p(0.4, 1.0, 1.0, 1.0, 1.5));
    assert!(in_delta_star_p(0.25, 1.0, 11.1304, 16.0, 1.0));
    assert!(!in_delta_star_p(0.25, 1.0, 11.2, 16.0, 1.0));
    let (eta, xi, _) = maximal_truncated_parameters(&game(0.75));
    assert!(in_gamma_star_p(0.75, 1.0, eta, xi, 1.0));
    assert!(!in_gamma_star_p(0.75, 1.0, eta * 1.01, xi, 1.0));
}

#[test]
fn protocol_descriptor_round_trip() {
    let d: ProtocolDescriptor =
        serde_json::from_str(r#"{"kind":"truncated_ppi","reflect":true}"#).unwrap();
    let proto = d.build(&game(0.75)).unwrap();
    let direct = maximal_truncated_protocol(&game(0.75));
    for x in grid(1000) {
        assert!((proto.rho_ab(x) - direct.rho_ab(x)).abs() < 1e-12);
        assert!((proto.rho_ba(x) - direct.rho_ba(x)).abs() < 1e-12);
    }
    let bad: Result<ProtocolDescriptor, _> = serde_json::from_str(r#"{"kind":"best_response"}"#);
    assert!(bad.is_err());
}
