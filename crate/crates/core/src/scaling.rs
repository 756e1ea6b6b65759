//! Power-law fits per data source and the mixture scaling law built from them.
//!
//! For a model with Bayes risk `R*`, surrogate gap `G`, original excess
//! `E_or(n) = B_or n^-b_or` and surrogate excess `E_su(m) = B_su m^-b_su`,
//! the predicted risk of the weighted estimator is
//!
//! ```text
//! R* + a^2 G + [a^2 E_su(m)^(1/b) + (1-a)^2 E_or(n)^(1/b)]^b,   b = b_or.
//! ```

use crate::error::{Error, Result};
use crate::model::{PowerLawFit, ScalingLawModel};
use crate::optim::golden_section;

pub const BETA_MIN: f64 = 0.01;
pub const BETA_MAX: f64 = 4.0;
const BETA_GRID: usize = 200;
const ALPHA_GRID: usize = 101;
const MAX_SURROGATE: u64 = 1_000_000_000_000;

/// Non-negative least squares for `y ~ a + b x`; returns `(a, b, sse)`.
fn nnls_affine(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let sse = |a: f64, b: f64| -> f64 {
        x.iter()
            .zip(y)
            .map(|(xi, yi)| (yi - a - b * xi).powi(2))
            .sum()
    };
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    if sxx > 0.0 {
        let b = sxy / sxx;
        let a = my - b * mx;
        if a >= 0.0 && b >= 0.0 {
            return (a, b, sse(a, b));
        }
    }
    // Optimum lies on a face of the orthant.
    let a_only = my.max(0.0);
    let sx2: f64 = x.iter().map(|xi| xi * xi).sum();
    let b_only = if sx2 > 0.0 {
        (x.iter().zip(y).map(|(xi, yi)| xi * yi).sum::<f64>() / sx2).max(0.0)
    } else {
        0.0
    };
    let (ea, eb) = (sse(a_only, 0.0), sse(0.0, b_only));
    if ea <= eb {
        (a_only, 0.0, ea)
    } else {
        (0.0, b_only, eb)
    }
}

/// Least-squares fit of `loss(n) = A + B n^-beta` with `A, B >= 0` and
/// `beta` in `[0.01, 4]`.
///
/// A geometric grid of 200 exponents is scanned with the closed-form
/// `(A, B)` at each, then the best exponent is refined by golden-section
/// search between its grid neighbours.
pub fn fit_power_law(points: &[(usize, f64)]) -> Result<PowerLawFit> {
    if let Some(&(n, loss)) = points.iter().find(|(n, l)| *n == 0 || !l.is_finite()) {
        return Err(Error::invalid(
            "points",
            format!("need n >= 1 and finite loss, got ({n}, {loss})"),
        ));
    }
    let mut distinct: Vec<usize> = points.iter().map(|p| p.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(Error::TooFewPoints {
            distinct: distinct.len(),
        });
    }

    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let count = ys.len() as f64;
    let (lo, hi) = ys
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    if hi - lo <= 1e-12 {
        let mean = ys.iter().sum::<f64>() / count;
        let rmse = (ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / count).sqrt();
        return Ok(PowerLawFit::new(mean.max(0.0), 0.0, 1.0, rmse)?.flagged_degenerate());
    }

    let logs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let solve = |beta: f64| -> (f64, f64, f64) {
        let xs: Vec<f64> = logs.iter().map(|l| (-beta * l).exp()).collect();
        nnls_affine(&xs, &ys)
    };
    let ratio = (BETA_MAX / BETA_MIN).powf(1.0 / (BETA_GRID - 1) as f64);
    let grid: Vec<f64> = (0..BETA_GRID)
        .map(|i| {
            if i == BETA_GRID - 1 {
                BETA_MAX
            } else {
                BETA_MIN * ratio.powi(i as i32)
            }
        })
        .collect();
    let sses: Vec<f64> = grid.iter().map(|&b| solve(b).2).collect();
    let best = (0..BETA_GRID)
        .min_by(|&i, &j| sses[i].total_cmp(&sses[j]))
        .unwrap_or(0);
    let left = grid[best.saturating_sub(1)];
    let right = grid[(best + 1).min(BETA_GRID - 1)];
    let (mut beta, mut sse) = golden_section(|b| solve(b).2, left, right, 1e-12 * right);
    if sses[best] < sse {
        beta = grid[best];
        sse = sses[best];
    }
    let (a, b, _) = solve(beta);
    PowerLawFit::new(a, b, beta, (sse / count).sqrt())
}

/// Fits both sources and combines them with `R* = A_or`,
/// `gap = max(A_su - A_or, 0)` and `beta = beta_or`.
pub fn build_model(
    original_points: &[(usize, f64)],
    surrogate_points: &[(usize, f64)],
) -> Result<ScalingLawModel> {
    let original = fit_power_law(original_points)?;
    let surrogate = fit_power_law(surrogate_points)?;
    Ok(ScalingLawModel::from_fits(original, surrogate))
}

fn check_weight(n: usize, m: usize, alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid("alpha", format!("{alpha} outside [0, 1]")));
    }
    if (n == 0 && alpha < 1.0) || (m == 0 && alpha > 0.0) {
        return Err(Error::BadWeight { alpha, n, m });
    }
    Ok(())
}

/// Mixture scaling-law prediction at `(n, m, alpha)`.
pub fn predict_mixture_risk(model: &ScalingLawModel, n: usize, m: usize, alpha: f64) -> Result<f64> {
    check_weight(n, m, alpha)?;
    Ok(predict_unchecked(model, n as f64, m as f64, alpha))
}

fn predict_unchecked(model: &ScalingLawModel, n: f64, m: f64, alpha: f64) -> f64 {
    let r_star = model.bayes_risk;
    if alpha == 0.0 {
        return r_star + model.original_fit.excess(n);
    }
    if alpha == 1.0 {
        return r_star + model.surrogate_gap + model.surrogate_fit.excess(m);
    }
    let beta = model.beta;
    let inv = 1.0 / beta;
    // A zero-count side can only appear at the endpoints handled above, and an
    // infinite count contributes no excess.
    let su = if m.is_infinite() { 0.0 } else { model.surrogate_fit.excess(m) };
    let or = model.original_fit.excess(n);
    let bracket = alpha * alpha * su.powf(inv) + (1.0 - alpha).powi(2) * or.powf(inv);
    r_star + alpha * alpha * model.surrogate_gap + bracket.powf(beta)
}

/// Grid scan over 101 weights, then golden-section refinement next to the best.
fn minimize_alpha(mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    let grid: Vec<f64> = (0..ALPHA_GRID).map(|i| i as f64 / (ALPHA_GRID - 1) as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&a| f(a)).collect();
    let best = (0..ALPHA_GRID)
        .min_by(|&i, &j| values[i].total_cmp(&values[j]))
        .unwrap_or(0);
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(ALPHA_GRID - 1)];
    let refined = golden_section(&mut f, lo, hi, 1e-12);
    if refined.1 <= values[best] {
        refined
    } else {
        (grid[best], values[best])
    }
}

/// Weight minimizing the predicted risk, and that minimal risk.
pub fn optimal_alpha(model: &ScalingLawModel, n: usize, m: usize) -> Result<(f64, f64)> {
    if n == 0 && m == 0 {
        return Err(Error::BadWeight { alpha: 0.0, n, m });
    }
    if n == 0 {
        return Ok((1.0, predict_unchecked(model, 0.0, m as f64, 1.0)));
    }
    if m == 0 {
        return Ok((0.0, predict_unchecked(model, n as f64, 0.0, 0.0)));
    }
    Ok(minimize_alpha(|a| predict_unchecked(model, n as f64, m as f64, a)))
}

/// Smallest surrogate count whose optimally weighted predicted risk reaches
/// `target_risk`, or `None` if no `m <= 10^12` does.
pub fn required_surrogate(model: &ScalingLawModel, n: usize, target_risk: f64) -> Option<u64> {
    let risk_at = |m: u64| -> f64 {
        optimal_alpha(model, n, m as usize)
            .map(|r| r.1)
            .unwrap_or(f64::INFINITY)
    };
    if !target_risk.is_finite() || target_risk.is_nan() {
        return None;
    }
    if risk_at(1) <= target_risk {
        return Some(1);
    }
    // Infimum over m: the surrogate excess vanishes.
    let limit = if n == 0 {
        model.bayes_risk + model.surrogate_gap
    } else {
        minimize_alpha(|a| predict_unchecked(model, n as f64, f64::INFINITY, a)).1
    };
    if target_risk <= limit {
        return None;
    }
    let mut hi: u64 = 2;
    while risk_at(hi) > target_risk {
        if hi >= MAX_SURROGATE {
            return None;
        }
        hi = (hi * 2).min(MAX_SURROGATE);
    }
    let mut lo = hi / 2;
    // Invariant: risk_at(lo) > target >= risk_at(hi).
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if risk_at(mid) <= target_risk {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}
