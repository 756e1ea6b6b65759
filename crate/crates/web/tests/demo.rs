use surrogate_mix_web::{hidim_curve, mean_curve, scaling_curve, Curve};

fn assert_consistent(c: &Curve) {
    assert_eq!(c.alpha.len(), c.risk.len());
    assert_eq!(c.alpha.first(), Some(&0.0));
    assert_eq!(c.alpha.last(), Some(&1.0));
    assert!(c.risk.iter().all(|r| r.is_finite() && *r >= 0.0));
    // The reported optimum is at least as good as every grid point.
    let grid_min = c.risk.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(c.risk_star <= grid_min + 1e-12);
}

#[test]
fn mean_curve_matches_hand_values() {
    // R(a) = d((1-a)^2/n + a^2/m) + a^2 gap with d=50, n=100, m=400, gap=0.25.
    let c = mean_curve(50, 100, 400, 0.25, 11).unwrap();
    assert_consistent(&c);
    for (a, r) in c.alpha.iter().zip(&c.risk) {
        let hand = 50.0 * ((1.0 - a) * (1.0 - a) / 100.0 + a * a / 400.0) + a * a * 0.25;
        assert!((r - hand).abs() < 1e-12, "alpha {a}: {r} vs {hand}");
    }
    assert!((c.alpha_star - 4.0 / 7.0).abs() < 1e-12);
    assert!((c.risk_star - 1.5 / 7.0).abs() < 1e-12);
    // Naive pooling uses alpha = m/(n+m) = 0.8.
    assert!((c.baseline.unwrap() - 0.26).abs() < 1e-12);
}

#[test]
fn hidim_curve_orthogonal_surrogate_helps() {
    let spec = r#"{"delta": 2, "delta_s": 2, "r": 1, "r_s": 1, "gamma": 1.5707963267948966,
                   "sigma": 1, "sigma_s": 1, "lambda": 0.1}"#;
    let c = hidim_curve(spec, 21).unwrap();
    assert_consistent(&c);
    assert!(c.alpha_star > 0.0 && c.alpha_star < 1.0);
    assert!(c.risk_star < c.baseline.unwrap());
}

#[test]
fn scaling_curve_endpoints_follow_the_laws() {
    let input = r#"{"original": [0.1, 2.0, 0.5], "surrogate": [0.15, 2.0, 0.5], "n": 1000, "m": 100000, "points": 5}"#;
    let c = scaling_curve(input).unwrap();
    assert_consistent(&c);
    assert_eq!(c.baseline, Some(0.1));
    assert!((c.risk[0] - (0.1 + 2.0 / 1000f64.sqrt())).abs() < 1e-12);
    assert!((c.risk[4] - (0.15 + 2.0 / 100000f64.sqrt())).abs() < 1e-12);
}

#[test]
fn bad_inputs_are_reported() {
    assert!(mean_curve(50, 100, 400, 0.25, 1).is_err());
    assert!(mean_curve(50, 100, 400, -1.0, 11).is_err());
    assert!(hidim_curve("{}", 11).is_err());
    assert!(hidim_curve(r#"{"delta": 0.2, "delta_s": 0.3, "r": 1, "r_s": 1, "gamma": 0, "sigma": 1, "sigma_s": 1, "lambda": 0.1}"#, 11).is_err());
    assert!(scaling_curve(r#"{"original": [0.1, 2.0, 0.0], "surrogate": [0.1, 1.0, 0.5], "n": 10, "m": 10, "points": 3}"#).is_err());
}
