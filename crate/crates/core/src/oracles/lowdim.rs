//! Fixed-dimension expansion of the excess risk for large `n`, `m`.
//!
//! Only the leading terms are computed:
//! `alpha^2 <g, H^-1 g> + (1-alpha)^2/n Tr(H^-1 K) + alpha^2/m Tr(H^-1 K_s)`.
//! They describe the risk when `n` and `m` are large and `alpha^2 |g|` is small.

use crate::error::{Error, Result};
use crate::model::LowDimCurvature;

/// `(<g, H^-1 g>, Tr(H^-1 K), Tr(H^-1 K_s))`.
pub fn lowdim_terms(curv: &LowDimCurvature) -> Result<(f64, f64, f64)> {
    let chol = curv
        .hessian()
        .clone()
        .cholesky()
        .ok_or(Error::SingularHessian)?;
    let g = curv.shift_gradient();
    let shift = g.dot(&chol.solve(g));
    let tr_or = chol.solve(curv.cov_original()).trace();
    let tr_su = chol.solve(curv.cov_surrogate()).trace();
    Ok((shift, tr_or, tr_su))
}

fn check_counts(n: usize, m: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("n", "must be >= 1"));
    }
    if m == 0 {
        return Err(Error::invalid("m", "must be >= 1"));
    }
    Ok(())
}

pub fn lowdim_risk(curv: &LowDimCurvature, n: usize, m: usize, alpha: f64) -> Result<f64> {
    check_counts(n, m)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid("alpha", format!("{alpha} outside [0, 1]")));
    }
    let (shift, tr_or, tr_su) = lowdim_terms(curv)?;
    Ok(alpha * alpha * shift
        + (1.0 - alpha).powi(2) * tr_or / n as f64
        + alpha * alpha * tr_su / m as f64)
}

/// `alpha* = R_or / (R_su + R_or)`, `risk* = (1/R_or + 1/R_su)^-1` with
/// `R_or = Tr(H^-1 K)/n` and `R_su = <g, H^-1 g> + Tr(H^-1 K_s)/m`.
pub fn lowdim_optimal_alpha(curv: &LowDimCurvature, n: usize, m: usize) -> Result<(f64, f64)> {
    check_counts(n, m)?;
    let (shift, tr_or, tr_su) = lowdim_terms(curv)?;
    let r_or = tr_or / n as f64;
    let r_su = shift + tr_su / m as f64;
    let total = r_or + r_su;
    if total == 0.0 {
        return Ok((0.0, 0.0));
    }
    Ok((r_or / total, r_or * r_su / total))
}
