use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use surrogate_mix::estimators::{sequence_estimate, weighted_mean};
use surrogate_mix::model::{
    CoefficientMap, LabeledDataset, LowDimCurvature, MixtureConfig, NonparamSpec,
    SequenceModelSpec, Source,
};
use surrogate_mix::oracles::*;
use surrogate_mix::sim::{mean_and_se, SimRng};

#[test]
fn mean_risk_reference_matches_monte_carlo() {
    let (d, n, m, gap, alpha) = (50, 100, 400, 0.25, 0.3);
    let expect = mean_risk(d, n, m, alpha, gap).unwrap();
    assert!((expect - 0.27875).abs() < 1e-14);

    // Each dataset enters only through its column mean, so one row holding a
    // draw of the sample mean is an exact stand-in for n rows.
    let mut rng = SimRng::new(2024, 0);
    let shift = gap.sqrt();
    let reps = 100_000;
    let mut losses = Vec::with_capacity(reps);
    for _ in 0..reps {
        let o = DMatrix::from_fn(1, d, |_, _| rng.normal() / (n as f64).sqrt());
        let s = DMatrix::from_fn(1, d, |_, j| {
            (if j == 0 { shift } else { 0.0 }) + rng.normal() / (m as f64).sqrt()
        });
        let o = LabeledDataset::unlabeled(o, Source::Original).unwrap();
        let s = LabeledDataset::unlabeled(s, Source::Surrogate).unwrap();
        losses.push(weighted_mean(&o, &s, alpha).unwrap().norm_squared());
    }
    let (mean, se) = mean_and_se(&losses);
    assert!((mean - expect).abs() <= 3.0 * se, "{mean} vs {expect} (se {se})");
}

#[test]
fn mean_optimum_matches_fine_grid() {
    let (d, n, m, gap) = (50, 100, 400, 0.25);
    let (a, r) = mean_optimal_alpha(d, n, m, gap).unwrap();
    assert!((a - 0.5 / 0.875).abs() < 1e-12);
    assert!((r - 0.375 / 0.875 * 0.5).abs() < 1e-12);
    let (ga, gr) = (0..=10_000)
        .map(|i| {
            let a = i as f64 * 1e-4;
            (a, mean_risk(d, n, m, a, gap).unwrap())
        })
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap();
    assert!((ga - a).abs() <= 1e-4);
    assert!(gr >= r - 1e-12 && gr - r < 1e-6);
    assert!((naive_pooled_risk(d, n, m, gap).unwrap() - 0.26).abs() < 1e-14);
}

#[test]
fn optimal_mean_risk_never_exceeds_original_only() {
    for d in [1, 3, 50] {
        for n in [1, 10, 1000] {
            for m in [1, 7, 5000] {
                for gap in [0.0, 0.1, 10.0, 1e6] {
                    let (_, r) = mean_optimal_alpha(d, n, m, gap).unwrap();
                    assert!(r < mean_risk(d, n, m, 0.0, gap).unwrap());
                }
            }
        }
    }
}

fn random_sequence_spec(rng: &mut SimRng, dim: usize) -> SequenceModelSpec {
    let theta: Vec<f64> = (1..=dim).map(|k| rng.normal() / k as f64).collect();
    let theta_s: Vec<f64> = theta.iter().map(|t| t + 0.1 * rng.normal()).collect();
    let omega: Vec<f64> = (1..=dim).map(|k| (k * k) as f64).collect();
    SequenceModelSpec::new(theta, theta_s, omega, 1.0, 1.5, 50, 200, 2.0, 1.0).unwrap()
}

#[test]
fn sequence_risk_matches_monte_carlo() {
    let mut rng = SimRng::new(99, 0);
    let spec = random_sequence_spec(&mut rng, 20);
    let cfg = MixtureConfig::new(0.4, 0.01).unwrap();
    let oracle = sequence_risk(&spec, cfg);
    assert!((oracle.risk - (oracle.bias + oracle.noise_scale * oracle.variance_count)).abs() < 1e-15);

    let (so, ss) = (spec.sigma / (spec.n as f64).sqrt(), spec.sigma_s / (spec.m as f64).sqrt());
    let losses: Vec<f64> = (0..10_000)
        .map(|_| {
            let y: Vec<f64> = spec.theta_star.iter().map(|t| t + so * rng.normal()).collect();
            let ys: Vec<f64> = spec.theta_star_s.iter().map(|t| t + ss * rng.normal()).collect();
            let est = sequence_estimate(&spec, &y, &ys, cfg).unwrap();
            est.iter().zip(&spec.theta_star).map(|(a, b)| (a - b).powi(2)).sum()
        })
        .collect();
    let (mean, se) = mean_and_se(&losses);
    assert!((mean - oracle.risk).abs() <= 3.0 * se, "{mean} vs {} (se {se})", oracle.risk);
}

fn coeffs(entries: &[(i64, f64, f64)]) -> CoefficientMap {
    let mut map = BTreeMap::new();
    for &(q, re, im) in entries {
        map.insert(vec![q], (re, im));
        map.insert(vec![-q], (re, -im));
    }
    map
}

fn three_term_spec(lambda: f64) -> NonparamSpec {
    NonparamSpec::new(
        1,
        1.0,
        coeffs(&[(0, 1.0, 0.0), (1, 0.5, 0.2)]),
        coeffs(&[(0, 0.8, 0.0), (1, 0.3, 0.1)]),
        1,
        1.0,
        2.0,
        100,
        50,
        lambda,
    )
    .unwrap()
}

#[test]
fn nonparam_three_terms_by_hand() {
    let spec = three_term_spec(0.01);
    let alpha: f64 = 0.3;
    let c1 = 1.0 + 4.0 * PI * PI;
    let k = 0.49 / 100.0 + 0.09 * 4.0 / 50.0;
    // q = 0: c = 1, real coefficients 1.0 and 0.8.
    let b0 = (alpha * (0.8 - 1.0) - 0.01 * 1.0).powi(2) / 1.01f64.powi(2);
    // q = +-1: complex coefficients, same modulus on both sides.
    let s = 1.0 + 0.01 * c1;
    let re = alpha * (0.3 - 0.5) - 0.01 * c1 * 0.5;
    let im = alpha * (0.1 - 0.2) - 0.01 * c1 * 0.2;
    let b1 = 2.0 * (re * re + im * im) / (s * s);
    let v = 1.0 / 1.01f64.powi(2) + 2.0 / (s * s);
    let expect = b0 + b1 + k * v;
    assert!((nonparam_risk(&spec, alpha).unwrap() - expect).abs() < 1e-14);
}

#[test]
fn nonparam_bias_sign_follows_the_estimator() {
    // Simulate the Fourier-domain estimator ((1-a) y + a y_s) / (1 + lambda c).
    let spec = three_term_spec(0.02);
    let alpha = 0.6;
    let mut rng = SimRng::new(5, 0);
    let so = spec.sigma / (spec.n as f64).sqrt();
    let ss = spec.sigma_s / (spec.m as f64).sqrt();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let losses: Vec<f64> = (0..200_000)
        .map(|_| {
            let mut loss = 0.0;
            for (q, &(tr, ti)) in &spec.target_coeffs {
                let (sr, si) = spec.surrogate_coeffs[q];
                let shrink = 1.0 + spec.lambda * penalty_weight(q, spec.penalty_order);
                let yr = tr + so * h * rng.normal();
                let yi = ti + so * h * rng.normal();
                let zr = sr + ss * h * rng.normal();
                let zi = si + ss * h * rng.normal();
                let er = ((1.0 - alpha) * yr + alpha * zr) / shrink - tr;
                let ei = ((1.0 - alpha) * yi + alpha * zi) / shrink - ti;
                loss += er * er + ei * ei;
            }
            loss
        })
        .collect();
    let (mean, se) = mean_and_se(&losses);
    let detail = nonparam_risk_detail(&spec, alpha).unwrap();
    assert!((mean - detail.risk).abs() <= 3.0 * se, "{mean} vs {} (se {se})", detail.risk);

    // The plus-sign reading of the bias is far outside the noise.
    let mut plus = 0.0;
    for (q, &(tr, ti)) in &spec.target_coeffs {
        let (sr, si) = spec.surrogate_coeffs[q];
        let lc = spec.lambda * penalty_weight(q, spec.penalty_order);
        let re = alpha * (sr - tr) + lc * tr;
        let im = alpha * (si - ti) + lc * ti;
        plus += (re * re + im * im) / (1.0 + lc).powi(2);
    }
    let plus_risk = plus + detail.noise_scale * detail.variance_sum;
    assert!((mean - plus_risk).abs() > 20.0 * se);
}

#[test]
fn lowdim_matches_explicit_inverse() {
    let h = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
    let k = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.7]);
    let ks = DMatrix::from_row_slice(2, 2, &[0.6, -0.1, -0.1, 1.3]);
    let g = DVector::from_vec(vec![0.3, -0.4]);
    let curv = LowDimCurvature::new(h.clone(), k.clone(), ks.clone(), g.clone()).unwrap();

    let det = 2.0 * 1.0 - 0.25;
    let inv = DMatrix::from_row_slice(2, 2, &[1.0 / det, -0.5 / det, -0.5 / det, 2.0 / det]);
    let ghg = (g.transpose() * &inv * &g)[(0, 0)];
    let trk = (&inv * &k).trace();
    let trks = (&inv * &ks).trace();
    let (n, m, alpha) = (120, 300, 0.35);
    let expect = alpha * alpha * ghg
        + (1.0 - alpha).powi(2) / n as f64 * trk
        + alpha * alpha / m as f64 * trks;
    assert!((lowdim_risk(&curv, n, m, alpha).unwrap() - expect).abs() < 1e-14);

    let (a, r) = lowdim_optimal_alpha(&curv, n, m).unwrap();
    let (ga, gr) = (0..=10_000)
        .map(|i| {
            let a = i as f64 * 1e-4;
            (a, lowdim_risk(&curv, n, m, a).unwrap())
        })
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap();
    assert!((ga - a).abs() <= 1e-4);
    assert!((gr - r).abs() < 1e-8);
}

#[test]
fn risk_curve_reports_argmin() {
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let curve = risk_curve(&grid, |a| mean_risk(50, 100, 400, a, 0.25)).unwrap();
    assert_eq!(curve.len(), 21);
    assert!(curve.points().iter().all(|p| p.std_error == 0.0));
    assert!((curve.argmin().unwrap().alpha - 0.55).abs() < 1e-12);
}
