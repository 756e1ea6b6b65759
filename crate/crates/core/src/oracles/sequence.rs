//! Exact risk of the penalized Gaussian sequence-model estimator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MixtureConfig, SequenceModelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequenceRisk {
    pub risk: f64,
    pub bias: f64,
    /// `sum_k (1 + lambda omega_k)^-2`, the effective dimension.
    pub variance_count: f64,
    pub noise_scale: f64,
}

/// `risk = bias + noise_scale * variance_count`.
pub fn sequence_risk(spec: &SequenceModelSpec, config: MixtureConfig) -> SequenceRisk {
    let (a, l) = (config.alpha(), config.lambda());
    let mut bias = 0.0;
    let mut variance_count = 0.0;
    for ((&t, &ts), &w) in spec.theta_star.iter().zip(&spec.theta_star_s).zip(&spec.omega) {
        let shrink = 1.0 / (1.0 + l * w);
        let shrink2 = shrink * shrink;
        let b = (a + l * w) * t - a * ts;
        bias += shrink2 * b * b;
        variance_count += shrink2;
    }
    let noise_scale = spec.noise_scale(a);
    SequenceRisk {
        risk: bias + noise_scale * variance_count,
        bias,
        variance_count,
        noise_scale,
    }
}

/// Rate exponent `2 min(mu, rho) / (1 + 2 min(mu, rho))`.
pub fn sequence_beta(spec: &SequenceModelSpec) -> f64 {
    let k = spec.mu.min(spec.rho_decay);
    2.0 * k / (1.0 + 2.0 * k)
}

/// Penalty `1 / omega_{k1}` with `k1 = clamp(round(s^(beta-1)), 1, dim)`.
pub fn sequence_lambda_star(spec: &SequenceModelSpec, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid("alpha", format!("{alpha} outside [0, 1]")));
    }
    let k1 = sequence_cutoff(spec, alpha);
    let w = spec.omega[k1 - 1];
    if w == 0.0 {
        return Err(Error::ZeroEigenvalue { index: k1 });
    }
    Ok(1.0 / w)
}

/// The 1-based cutoff index `k1` used by [`sequence_lambda_star`].
pub fn sequence_cutoff(spec: &SequenceModelSpec, alpha: f64) -> usize {
    let s = spec.noise_scale(alpha);
    let target = s.powf(sequence_beta(spec) - 1.0).round();
    if target.is_nan() || target >= spec.dim() as f64 {
        spec.dim()
    } else if target < 1.0 {
        1
    } else {
        target as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic_spec(dim: usize, n: usize, m: usize) -> SequenceModelSpec {
        let omega = (1..=dim).map(|k| (k * k) as f64).collect();
        let theta: Vec<f64> = (1..=dim).map(|k| (k as f64).powf(-1.5)).collect();
        SequenceModelSpec::new(theta.clone(), theta, omega, 1.0, 1.0, n, m, 2.0, 1.0).unwrap()
    }

    #[test]
    fn lambda_star_reference() {
        let spec = quadratic_spec(50, 100, 100);
        assert!((sequence_beta(&spec) - 2.0 / 3.0).abs() < 1e-15);
        assert!((spec.noise_scale(0.5) - 0.005).abs() < 1e-15);
        assert_eq!(sequence_cutoff(&spec, 0.5), 6);
        assert!((sequence_lambda_star(&spec, 0.5).unwrap() - 1.0 / 36.0).abs() < 1e-15);
    }

    #[test]
    fn lambda_star_boundary_and_zero_eigenvalue() {
        let spec = SequenceModelSpec::new(vec![1.0; 3], vec![1.0; 3], vec![2.0, 3.0, 4.0], 1.0, 1.0, 1, 1, 2.0, 1.0).unwrap();
        // alpha = 0, n = 1: s = 1, so k1 = 1.
        assert_eq!(sequence_lambda_star(&spec, 0.0).unwrap(), 0.5);
        let zero = SequenceModelSpec::new(vec![1.0; 3], vec![1.0; 3], vec![0.0, 3.0, 4.0], 1.0, 1.0, 1, 1, 2.0, 1.0).unwrap();
        assert_eq!(sequence_lambda_star(&zero, 0.0), Err(Error::ZeroEigenvalue { index: 1 }));
    }

    #[test]
    fn lambda_star_weakly_decreases_in_n() {
        let mut prev = f64::INFINITY;
        for n in [10, 20, 40, 80, 160, 320, 640, 1280, 2560] {
            let l = sequence_lambda_star(&quadratic_spec(200, n, 50), 0.3).unwrap();
            assert!(l <= prev);
            prev = l;
        }
    }

    #[test]
    fn no_penalty_collapse() {
        let mut spec = quadratic_spec(10, 30, 70);
        spec.theta_star_s = spec.theta_star.iter().map(|t| t + 0.1).collect();
        let cfg = MixtureConfig::new(0.4, 0.0).unwrap();
        let r = sequence_risk(&spec, cfg);
        assert!((r.bias - 0.16 * spec.gap()).abs() < 1e-15);
        assert_eq!(r.variance_count, 10.0);
        let r0 = sequence_risk(&spec, MixtureConfig::new(0.0, 0.0).unwrap());
        assert!((r0.risk - 10.0 / 30.0).abs() < 1e-15);
    }
}
