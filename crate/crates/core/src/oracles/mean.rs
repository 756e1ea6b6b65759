//! Gaussian mean estimation: `z ~ N(theta*, I_d)`, `z^s ~ N(theta*_s, I_d)`,
//! estimator `(1-alpha) mean(z) + alpha mean(z^s)`.

use crate::error::{Error, Result};

fn check(n: usize, m: usize, alpha: f64, gap: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid("alpha", format!("{alpha} outside [0, 1]")));
    }
    if !(gap >= 0.0) {
        return Err(Error::invalid("gap", format!("{gap} must be >= 0")));
    }
    if (n == 0 && alpha < 1.0) || (m == 0 && alpha > 0.0) {
        return Err(Error::BadWeight { alpha, n, m });
    }
    Ok(())
}

/// `alpha^2 gap + (alpha^2/m + (1-alpha)^2/n) d`.
pub fn mean_risk(d: usize, n: usize, m: usize, alpha: f64, gap: f64) -> Result<f64> {
    check(n, m, alpha, gap)?;
    let d = d as f64;
    let mut risk = 0.0;
    if alpha < 1.0 {
        risk += (1.0 - alpha).powi(2) * d / n as f64;
    }
    if alpha > 0.0 {
        risk += alpha * alpha * (gap + d / m as f64);
    }
    Ok(risk)
}

/// Minimizer of [`mean_risk`] over `alpha` and the minimal risk.
pub fn mean_optimal_alpha(d: usize, n: usize, m: usize, gap: f64) -> Result<(f64, f64)> {
    if n == 0 && m == 0 {
        return Err(Error::BadWeight { alpha: 0.0, n, m });
    }
    if !(gap >= 0.0) {
        return Err(Error::invalid("gap", format!("{gap} must be >= 0")));
    }
    let df = d as f64;
    if n == 0 {
        return Ok((1.0, mean_risk(d, n, m, 1.0, gap)?));
    }
    if m == 0 {
        return Ok((0.0, df / n as f64));
    }
    let r_or = df / n as f64;
    let r_su = gap + df / m as f64;
    if r_or + r_su == 0.0 {
        return Ok((0.0, 0.0));
    }
    let alpha = r_or / (r_su + r_or);
    Ok((alpha, r_su / (r_su + r_or) * r_or))
}

/// Risk of unweighted ERM on the pooled sample.
pub fn naive_pooled_risk(d: usize, n: usize, m: usize, gap: f64) -> Result<f64> {
    if n + m == 0 {
        return Err(Error::BadWeight { alpha: 0.0, n, m });
    }
    if !(gap >= 0.0) {
        return Err(Error::invalid("gap", format!("{gap} must be >= 0")));
    }
    let total = (n + m) as f64;
    Ok((m as f64 / total).powi(2) * gap + d as f64 / total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert!((mean_risk(50, 100, 400, 0.3, 0.25).unwrap() - 0.27875).abs() < 1e-15);
        let (a, r) = mean_optimal_alpha(50, 100, 400, 0.25).unwrap();
        assert!((a - 0.5 / 0.875).abs() < 1e-15);
        assert!((r - 0.375 / 0.875 * 0.5).abs() < 1e-15);
        assert!((naive_pooled_risk(50, 100, 400, 0.25).unwrap() - 0.26).abs() < 1e-15);
    }

    #[test]
    fn endpoints_and_pooling() {
        assert_eq!(mean_risk(50, 100, 400, 0.0, 3.0).unwrap(), 0.5);
        let a = 400.0 / 500.0;
        assert!((mean_risk(50, 100, 400, a, 0.0).unwrap() - 0.1).abs() < 1e-15);
        let (a_star, r_star) = mean_optimal_alpha(50, 100, 400, 0.0).unwrap();
        assert!((a_star - 0.8).abs() < 1e-15);
        assert!((r_star - 0.1).abs() < 1e-15);
        assert_eq!(naive_pooled_risk(50, 100, 0, 1.0).unwrap(), 0.5);
    }

    #[test]
    fn useless_surrogate() {
        let (a, r) = mean_optimal_alpha(50, 100, 400, 1e9).unwrap();
        assert!(a < 1e-9);
        assert!((r - 0.5).abs() < 1e-9);
        assert!(r < 0.5);
    }

    #[test]
    fn bad_weight() {
        assert!(matches!(mean_risk(5, 10, 0, 0.1, 0.0), Err(Error::BadWeight { .. })));
        assert!(matches!(mean_risk(5, 0, 10, 0.9, 0.0), Err(Error::BadWeight { .. })));
        assert!(mean_risk(5, 0, 10, 1.0, 0.0).is_ok());
    }
}
