//! Proportional-asymptotics risk of weighted ridge regression.
//!
//! The estimator is summarized by three scalars: `xi` (component along
//! `theta*`), `xi_perp` (component along the part of `theta*_s` orthogonal to
//! `theta*`) and `omega` (norm of everything else). The limiting risk is
//! `(xi - r)^2 + xi_perp^2 + omega^2` at the minimizer of the scalar objective
//! [`hidim_objective`]. The inner maximization over `(rho, rho_s)` is solved
//! through the scalar fixed point [`hidim_fixed_point`].

use serde::{Deserialize, Serialize};

use crate::optim::nelder_mead;
use crate::error::{Error, Result};
use crate::model::{HiDimSolution, HiDimSpec, RiskCurve, RiskPoint};

/// Endpoint offset: `alpha = 0` and `alpha = 1` are evaluated at
/// `EPS0` and `1 - EPS0` unless both aspect ratios exceed one.
pub const EPS0: f64 = 1e-3;

const FIXED_POINT_TOL: f64 = 1e-10;
const FIXED_POINT_MAX_ITER: usize = 10_000;
const DAMPING: f64 = 0.5;
const SIMPLEX_TOL: f64 = 1e-9;
const SIMPLEX_MAX_ITER: usize = 20_000;
const RESTARTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub rho_bar: f64,
    pub t: f64,
    pub rho: f64,
    pub rho_s: f64,
    /// `|rho_bar^2 - RHS(rho_bar)|` at the returned root.
    pub residual: f64,
}

/// Coefficients of the fixed-point equation at one `(tau, tau_s, omega)`.
#[derive(Debug, Clone, Copy)]
struct Equation {
    a: f64,
    b: f64,
    delta: f64,
    delta_s: f64,
    alpha: f64,
    omega: f64,
}

impl Equation {
    /// `h(x) = RHS(x) / x^2`, strictly decreasing in `x > 0`.
    fn h(&self, x: f64) -> f64 {
        let u = 1.0 - self.alpha;
        let p = self.delta * x + u * self.omega;
        let q = self.delta_s * x + self.alpha * self.omega;
        let mut v = 0.0;
        if u > 0.0 {
            v += self.a * u * u / (p * p);
        }
        if self.alpha > 0.0 {
            v += self.b * self.alpha * self.alpha / (q * q);
        }
        v
    }

    fn dh(&self, x: f64) -> f64 {
        let u = 1.0 - self.alpha;
        let p = self.delta * x + u * self.omega;
        let q = self.delta_s * x + self.alpha * self.omega;
        let mut v = 0.0;
        if u > 0.0 {
            v -= 2.0 * self.a * u * u * self.delta / (p * p * p);
        }
        if self.alpha > 0.0 {
            v -= 2.0 * self.b * self.alpha * self.alpha * self.delta_s / (q * q * q);
        }
        v
    }

    fn rhs(&self, x: f64) -> f64 {
        x * x * self.h(x)
    }

    fn residual(&self, x: f64) -> f64 {
        (x * x - self.rhs(x)).abs()
    }

    /// Root at `omega = 0`, also an upper bracket for every `omega`.
    fn decoupled_root(&self) -> f64 {
        let u = 1.0 - self.alpha;
        (self.a * u * u / (self.delta * self.delta)
            + self.b * self.alpha * self.alpha / (self.delta_s * self.delta_s))
            .sqrt()
    }
}

/// Solves `rho_bar^2 = A/(delta/(1-alpha) + omega/rho_bar)^2 + B/(delta_s/alpha + omega/rho_bar)^2`
/// with `A = delta (tau^2 + sigma^2)`, `B = delta_s (tau_s^2 + sigma_s^2)`.
pub fn hidim_fixed_point(
    spec: &HiDimSpec,
    alpha: f64,
    tau: f64,
    tau_s: f64,
    omega: f64,
) -> Result<FixedPoint> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid("alpha", format!("{alpha} outside [0, 1]")));
    }
    for (field, v) in [("tau", tau), ("tau_s", tau_s), ("omega", omega)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::invalid(field, format!("{v} must be finite and >= 0")));
        }
    }
    let eq = Equation {
        a: spec.delta * (tau * tau + spec.sigma * spec.sigma),
        b: spec.delta_s * (tau_s * tau_s + spec.sigma_s * spec.sigma_s),
        delta: spec.delta,
        delta_s: spec.delta_s,
        alpha,
        omega,
    };
    let upper = eq.decoupled_root();
    if !(upper > 0.0) {
        return Err(Error::invalid(
            "tau",
            "tau^2 + sigma^2 and tau_s^2 + sigma_s^2 carry no weight",
        ));
    }
    // A positive root exists iff h(0+) > 1.
    let h0 = if omega == 0.0 { f64::INFINITY } else { eq.h(0.0) };
    if !(h0 > 1.0) {
        return Err(Error::invalid(
            "omega",
            "no positive root: omega dominates the weighted noise levels",
        ));
    }

    let rho_bar = if omega == 0.0 {
        upper
    } else {
        solve_root(&eq, upper)?
    };
    let residual = eq.residual(rho_bar);
    if !(residual <= FIXED_POINT_TOL) {
        return Err(Error::NotConverged {
            iterations: FIXED_POINT_MAX_ITER,
            residual,
            last: vec![rho_bar],
        });
    }

    let t = if alpha == 0.0 {
        0.0
    } else if alpha == 1.0 || eq.a == 0.0 {
        f64::INFINITY
    } else {
        (omega + spec.delta * rho_bar / (1.0 - alpha)) / (omega + spec.delta_s * rho_bar / alpha)
            * (eq.b / eq.a).sqrt()
    };
    let (rho, rho_s) = if t.is_infinite() {
        (0.0, rho_bar)
    } else {
        let norm = (1.0 + t * t).sqrt();
        (rho_bar / norm, rho_bar * t / norm)
    };
    Ok(FixedPoint {
        rho_bar,
        t,
        rho,
        rho_s,
        residual,
    })
}

/// Damped iteration, bisection if it stalls, then Newton polishing on `h = 1`.
fn solve_root(eq: &Equation, upper: f64) -> Result<f64> {
    let mut x = upper;
    let mut converged = false;
    for _ in 0..FIXED_POINT_MAX_ITER {
        x = (1.0 - DAMPING) * x + DAMPING * eq.rhs(x).sqrt();
        if eq.residual(x) <= 0.01 * FIXED_POINT_TOL {
            converged = true;
            break;
        }
    }
    if !converged || !(x > 0.0) {
        // h is strictly decreasing with h(0+) > 1 >= h(upper).
        let (mut lo, mut hi) = (0.0, upper);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if eq.h(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        x = 0.5 * (lo + hi);
    }
    for _ in 0..8 {
        let step = (eq.h(x) - 1.0) / eq.dh(x);
        let next = x - step;
        if !(next > 0.0) || eq.residual(next) >= eq.residual(x) {
            break;
        }
        x = next;
    }
    Ok(x)
}

/// The scalar objective minimized over `xi`, `xi_perp >= 0`, `omega >= 0`.
///
/// Returns the objective value together with the fixed point and `(tau, tau_s)`.
fn objective_parts(
    spec: &HiDimSpec,
    alpha: f64,
    xi: f64,
    xi_perp: f64,
    omega: f64,
) -> Result<(f64, FixedPoint, f64, f64)> {
    let (sin_g, cos_g) = spec.gamma.sin_cos();
    let tau2 = (xi - spec.r).powi(2) + xi_perp * xi_perp + omega * omega;
    let tau_s2 = (xi - spec.r_s * cos_g).powi(2) + (xi_perp - spec.r_s * sin_g).powi(2) + omega * omega;
    let (tau, tau_s) = (tau2.sqrt(), tau_s2.sqrt());
    let fp = hidim_fixed_point(spec, alpha, tau, tau_s, omega)?;
    let mut value = -omega * fp.rho_bar
        + 0.5 * spec.lambda * (xi * xi + xi_perp * xi_perp + omega * omega);
    if alpha < 1.0 {
        value += fp.rho * (spec.delta * (tau2 + spec.sigma * spec.sigma)).sqrt()
            - spec.delta * fp.rho * fp.rho / (2.0 * (1.0 - alpha));
    }
    if alpha > 0.0 {
        value += fp.rho_s * (spec.delta_s * (tau_s2 + spec.sigma_s * spec.sigma_s)).sqrt()
            - spec.delta_s * fp.rho_s * fp.rho_s / (2.0 * alpha);
    }
    Ok((value, fp, tau, tau_s))
}

pub fn hidim_objective(spec: &HiDimSpec, alpha: f64, xi: f64, xi_perp: f64, omega: f64) -> Result<f64> {
    objective_parts(spec, alpha, xi, xi_perp, omega).map(|p| p.0)
}

/// The weight actually used for a requested `alpha`.
pub fn effective_alpha(spec: &HiDimSpec, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid("alpha", format!("{alpha} outside [0, 1]")));
    }
    let endpoints_ok = spec.delta > 1.0 && spec.delta_s > 1.0;
    Ok(if endpoints_ok {
        alpha
    } else {
        alpha.clamp(EPS0, 1.0 - EPS0)
    })
}

/// Limiting risk of weighted ridge at weight `alpha`.
///
/// `HiDimSolution::alpha` holds the weight after endpoint mapping.
pub fn hidim_asymptotic_risk(spec: &HiDimSpec, alpha: f64) -> Result<HiDimSolution> {
    if spec.delta + spec.delta_s <= 1.0 {
        return Err(Error::InvalidRegime {
            sum: spec.delta + spec.delta_s,
        });
    }
    let alpha = effective_alpha(spec, alpha)?;
    let mut f = |x: &[f64; 3]| -> Result<f64> {
        hidim_objective(spec, alpha, x[0], x[1].abs(), x[2].abs())
    };

    let (sin_g, cos_g) = spec.gamma.sin_cos();
    let scale = spec.r.max(spec.r_s).max(spec.sigma).max(spec.sigma_s).max(1.0);
    let start = [
        (1.0 - alpha) * spec.r + alpha * spec.r_s * cos_g,
        alpha * spec.r_s * sin_g,
        0.5 * scale,
    ];
    let mut best = nelder_mead(&mut f, start, 0.25 * scale, SIMPLEX_TOL, SIMPLEX_MAX_ITER)?;
    for k in 0..RESTARTS {
        // Fresh simplices around the incumbent, alternating orientation.
        let step = 0.1 * scale * if k % 2 == 0 { 1.0 } else { -1.0 } / (k + 1) as f64;
        let x0 = [best.0[0], best.0[1].abs(), best.0[2].abs()];
        let cand = nelder_mead(&mut f, x0, step, SIMPLEX_TOL, SIMPLEX_MAX_ITER)?;
        if cand.1 < best.1 {
            best = cand;
        }
    }

    let [xi, xi_perp, omega] = [best.0[0], best.0[1].abs(), best.0[2].abs()];
    let (_, fp, tau, tau_s) = objective_parts(spec, alpha, xi, xi_perp, omega)?;
    let risk = (xi - spec.r).powi(2) + xi_perp * xi_perp + omega * omega;
    let solution = HiDimSolution {
        alpha,
        xi,
        xi_perp,
        omega,
        rho_bar: fp.rho_bar,
        t: fp.t,
        rho: fp.rho,
        rho_s: fp.rho_s,
        tau,
        tau_s,
        risk,
    };
    solution.validate(spec.r)?;
    Ok(solution)
}

/// Limiting risk over a grid of weights; points keep the requested `alpha`.
pub fn hidim_risk_curve(spec: &HiDimSpec, alpha_grid: &[f64]) -> Result<RiskCurve> {
    let solve = |&a: &f64| hidim_asymptotic_risk(spec, a).map(|s| (a, s.risk));
    #[cfg(feature = "parallel")]
    let results: Vec<Result<(f64, f64)>> = {
        use rayon::prelude::*;
        alpha_grid.par_iter().map(solve).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<(f64, f64)>> = alpha_grid.iter().map(solve).collect();

    let points = results
        .into_iter()
        .map(|r| {
            r.map(|(alpha, risk)| RiskPoint {
                alpha,
                risk,
                std_error: 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    RiskCurve::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec(gamma: f64) -> HiDimSpec {
        HiDimSpec::new(2.0, 2.0, 1.0, 1.0, gamma, 1.0, 1.0, 0.1).unwrap()
    }

    #[test]
    fn omega_zero_closes() {
        let s = spec(0.3);
        let fp = hidim_fixed_point(&s, 0.3, 0.7, 0.4, 0.0).unwrap();
        let expect = 0.49 * (0.49 + 1.0) / 2.0 + 0.09 * (0.16 + 1.0) / 2.0;
        assert!((fp.rho_bar * fp.rho_bar - expect).abs() < 1e-14);
    }

    #[test]
    fn symmetric_half_weight() {
        let s = spec(0.0);
        let fp = hidim_fixed_point(&s, 0.5, 0.5, 0.5, 0.3).unwrap();
        assert!((fp.t - 1.0).abs() < 1e-14);
        assert!((fp.rho - fp.rho_s).abs() < 1e-14);
    }

    #[test]
    fn endpoints_have_degenerate_t() {
        let s = spec(0.0);
        let fp0 = hidim_fixed_point(&s, 0.0, 0.5, 0.5, 0.3).unwrap();
        assert_eq!(fp0.t, 0.0);
        assert_eq!(fp0.rho_s, 0.0);
        let fp1 = hidim_fixed_point(&s, 1.0, 0.5, 0.5, 0.3).unwrap();
        assert!(fp1.t.is_infinite());
        assert_eq!(fp1.rho, 0.0);
    }

    #[test]
    fn endpoint_mapping() {
        let s = HiDimSpec::new(0.8, 3.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.1).unwrap();
        assert_eq!(effective_alpha(&s, 0.0).unwrap(), EPS0);
        assert_eq!(effective_alpha(&s, 1.0).unwrap(), 1.0 - EPS0);
        assert_eq!(effective_alpha(&spec(0.0), 1.0).unwrap(), 1.0);
    }

    #[test]
    fn orthogonal_surrogate_cannot_beat_target_norm() {
        // At alpha = 1 nothing is learned along theta*, so the risk is at least r^2.
        let s = spec(PI / 2.0);
        let sol = hidim_asymptotic_risk(&s, 1.0).unwrap();
        assert!(sol.xi.abs() < 1e-6);
        assert!(sol.risk > 1.0 && sol.risk < 3.0);
    }
}
