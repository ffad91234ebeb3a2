use logsp_wasm::demo::*;

#[test]
fn profiles_rise_toward_the_limit() {
    let v = potential_profile("well1", 10.0, 50).unwrap();
    assert!((v[0] - 0.5).abs() < 1e-15);
    assert!(v.windows(2).all(|w| w[1] > w[0]));
    assert!(v[49] < 1.0);
    assert!(potential_profile("constant", 3.0, 4).unwrap().iter().all(|&x| x == 1.0));
    assert!(potential_profile("well3", 3.0, 4).is_err());
    assert!(potential_profile("well2", 0.0, 4).is_err());
}

#[test]
fn fiber_scans_have_one_maximizer() {
    for (family, p) in [("nehari", 4.0), ("pohozaev", 3.0)] {
        let req = ScanRequest {
            family,
            potential: "well1",
            p,
            b: 1.0,
            amplitude: 2.0,
            t_max: 20.0,
        };
        let curve = fiber_scan(&req).unwrap();
        assert_eq!(curve.t.len(), SCAN_POINTS);
        assert_eq!(curve.sign_changes, 1, "{family}");
    }
    let bad = ScanRequest {
        family: "other",
        potential: "well1",
        p: 4.0,
        b: 1.0,
        amplitude: 1.0,
        t_max: 10.0,
    };
    assert!(fiber_scan(&bad).is_err());
}

#[test]
fn small_ground_state() {
    let gs = ground_state("well1", 4.0, 1.0, 64, 12.0).unwrap();
    assert!(gs.converged);
    assert_eq!(gs.values.len(), 64 * 64);
    assert_eq!(gs.method, "nehari");
    assert!(gs.level > 0.0);
    assert!(ground_state("well1", 4.0, 1.0, 256, 12.0).is_err());
}
