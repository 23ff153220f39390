use blemodel::{
    continuous_channel_probabilities, expected_discovery_latency, expected_discovery_latency_auto,
    expected_discovery_latency_bounded, expected_discovery_latency_continuous, select_method, AdvScanParams,
    AlgoConfig, DiscoveryMethod, Error, MethodChoice,
};

fn numeric(t_a0: f64, t_s: f64, d_s: f64) -> f64 {
    let p = AdvScanParams::new(t_a0, t_s, d_s);
    expected_discovery_latency(&p, &AlgoConfig::for_scan_interval(t_s))
        .unwrap()
        .d_adv_mean
}

#[test]
fn latency_decreases_with_scan_window() {
    for t_a0 in [0.5, 1.3, 2.0] {
        let mut last = f64::INFINITY;
        for d_s in [0.32, 0.64, 0.96, 1.28, 1.92, 2.56] {
            let d = numeric(t_a0, 3.12, d_s);
            assert!(d < last, "t_a0={t_a0} d_s={d_s}: {d} >= {last}");
            last = d;
        }
    }
}

#[test]
fn refining_offset_grid_is_stable() {
    for (t_a0, t_s, d_s) in [(1.3, 3.12, 1.28), (0.9, 3.12, 0.64), (2.76, 2.56, 1.28)] {
        let p = AdvScanParams::new(t_a0, t_s, d_s);
        let coarse = AlgoConfig::for_scan_interval(t_s);
        let fine = AlgoConfig {
            delta: coarse.delta / 4.0,
            ..coarse
        };
        let a = expected_discovery_latency(&p, &coarse).unwrap().d_adv_mean;
        let b = expected_discovery_latency(&p, &fine).unwrap().d_adv_mean;
        assert!((a - b).abs() / b < 0.03, "{a} vs {b}");
    }
}

#[test]
fn numeric_agrees_with_bounded_form() {
    for (t_a0, t_s, d_s) in [(0.5, 2.56, 1.28), (0.2, 3.12, 0.64), (1.0, 3.12, 1.28)] {
        let p = AdvScanParams::new(t_a0, t_s, d_s);
        let a = numeric(t_a0, t_s, d_s);
        let b = expected_discovery_latency_bounded(&p).unwrap().d_adv_mean;
        assert!((a - b).abs() / b < 0.03, "{t_a0}/{t_s}/{d_s}: {a} vs {b}");
    }
}

#[test]
fn continuous_form_matches_channel_decomposition() {
    for t_a0 in [0.02, 0.1, 0.5, 2.0] {
        let p = AdvScanParams::new(t_a0, 1.28, 1.28);
        let ([p37, p38, p39], loss) = continuous_channel_probabilities(&p);
        assert!((p37 + p38 + p39 + loss - 1.0).abs() < 1e-12);
        let t = t_a0 + p.rho_max / 2.0;
        let late = [p.d_a, 2.0 * p.d_a + p.d_ch, 3.0 * p.d_a + 2.0 * p.d_ch];
        let oracle = p37 * late[0] + p38 * late[1] + p39 * late[2] + loss * (t + p.d_a);
        let got = expected_discovery_latency_continuous(&p).unwrap().d_adv_mean;
        assert!(
            (got - oracle).abs() < 1e-12 * oracle.max(1.0),
            "{got} vs {oracle}"
        );
    }
}

#[test]
fn method_selection_and_preconditions() {
    let cfg = AlgoConfig::for_scan_interval(3.12);
    let cases = [
        ((0.1, 3.12, 3.12), DiscoveryMethod::ContinuousClosedForm),
        ((0.1, 3.12, 1.28), DiscoveryMethod::BoundedClosedForm),
        ((2.0, 3.12, 1.28), DiscoveryMethod::Algorithm1),
    ];
    for ((t_a0, t_s, d_s), method) in cases {
        let p = AdvScanParams::new(t_a0, t_s, d_s);
        assert_eq!(select_method(&p), method);
        let est = expected_discovery_latency_auto(&p, &cfg, MethodChoice::Auto).unwrap();
        assert_eq!(est.method, method);
    }
    let p = AdvScanParams::new(2.0, 3.12, 1.28);
    assert!(matches!(
        expected_discovery_latency_auto(&p, &cfg, MethodChoice::Bounded),
        Err(Error::Precondition(_))
    ));
    assert!(matches!(
        expected_discovery_latency_auto(&p, &cfg, MethodChoice::Continuous),
        Err(Error::Precondition(_))
    ));
    let bad = AdvScanParams::new(0.01, 3.12, 1.28);
    assert!(matches!(
        expected_discovery_latency(&bad, &cfg),
        Err(Error::OutOfRange { name: "t_a0", .. })
    ));
}

#[test]
fn resonant_interval_aborts() {
    // Mean interval equal to the scan interval never drifts into a window.
    let p = AdvScanParams::new(2.555, 2.56, 1.28);
    let est = expected_discovery_latency(&p, &AlgoConfig::for_scan_interval(2.56)).unwrap();
    assert!(est.aborted);
    assert!(est.d_adv_mean > 100.0);
}
