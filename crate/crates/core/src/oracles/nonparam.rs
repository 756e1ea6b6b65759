//! White-noise nonparametric regression, evaluated in the Fourier domain on a
//! truncated integer lattice.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::NonparamSpec;

pub const DEFAULT_TRUNCATION: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonparamRisk {
    pub risk: f64,
    pub bias: f64,
    /// `sum_q (1 + lambda c_q)^-2` over the truncated lattice.
    pub variance_sum: f64,
    pub noise_scale: f64,
    /// Upper bound on the variance mass outside the truncation box;
    /// infinite when `lambda = 0`.
    pub tail_bound: f64,
}

/// Penalty weight `1 + ||2 pi k||^(2p)` of lattice point `k`.
pub fn penalty_weight(k: &[i64], p: f64) -> f64 {
    let norm2: f64 = k.iter().map(|&c| (2.0 * PI * c as f64).powi(2)).sum();
    1.0 + norm2.powf(p)
}

/// Truncated risk with all parts exposed.
///
/// The bias term at lattice point `k` is
/// `|alpha (theta_s - theta)(k) - lambda c_k theta(k)|^2 / (1 + lambda c_k)^2`,
/// the expected squared error of the shrunken weighted observation.
pub fn nonparam_risk_detail(spec: &NonparamSpec, alpha: f64) -> Result<NonparamRisk> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid("alpha", format!("{alpha} outside [0, 1]")));
    }
    let (d, p, lambda) = (spec.dim, spec.penalty_order, spec.lambda);
    if 4.0 * p <= d as f64 {
        return Err(Error::PenaltyTooWeak {
            penalty_order: p,
            dim: d,
        });
    }

    let mut bias = 0.0;
    for (k, &(tr, ti)) in &spec.target_coeffs {
        let (sr, si) = spec.surrogate_coeffs[k];
        let c = penalty_weight(k, p);
        let re = alpha * (sr - tr) - lambda * c * tr;
        let im = alpha * (si - ti) - lambda * c * ti;
        bias += (re * re + im * im) / (1.0 + lambda * c).powi(2);
    }

    let t = spec.truncation as i64;
    let mut k = vec![-t; d];
    let mut variance_sum = 0.0;
    loop {
        let c = penalty_weight(&k, p);
        variance_sum += (1.0 + lambda * c).powi(-2);
        // Odometer over [-t, t]^d.
        let mut i = 0;
        while i < d {
            if k[i] < t {
                k[i] += 1;
                break;
            }
            k[i] = -t;
            i += 1;
        }
        if i == d {
            break;
        }
    }

    let noise_scale = (1.0 - alpha).powi(2) * spec.sigma * spec.sigma / spec.n as f64
        + alpha * alpha * spec.sigma_s * spec.sigma_s / spec.m as f64;
    let tail_bound = noise_scale * variance_tail_bound(d, p, lambda, spec.truncation);
    Ok(NonparamRisk {
        risk: bias + noise_scale * variance_sum,
        bias,
        variance_sum,
        noise_scale,
        tail_bound,
    })
}

/// Truncated risk.
pub fn nonparam_risk(spec: &NonparamSpec, alpha: f64) -> Result<f64> {
    nonparam_risk_detail(spec, alpha).map(|r| r.risk)
}

/// Bound on `sum_{|k|_inf > T} (1 + lambda c_k)^-2`.
///
/// Uses `(1 + lambda c)^-2 <= lambda^-2 |2 pi k|^(-4p)`, `|k|_2 >= |k|_inf`,
/// at most `2d 3^(d-1) j^(d-1)` points on the shell `|k|_inf = j`, and an
/// integral bound on the remaining power sum.
fn variance_tail_bound(d: usize, p: f64, lambda: f64, truncation: usize) -> f64 {
    if lambda == 0.0 {
        return f64::INFINITY;
    }
    let df = d as f64;
    let shell = 2.0 * df * 3f64.powi(d as i32 - 1);
    shell * (2.0 * PI).powf(-4.0 * p) * (truncation as f64).powf(df - 4.0 * p)
        / (lambda * lambda * (4.0 * p - df))
}
