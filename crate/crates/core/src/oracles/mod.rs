//! Analytic and asymptotic risk predictors.

mod hidim;
mod lowdim;
mod mean;
mod nonparam;
mod sequence;

pub use hidim::{
    effective_alpha, hidim_asymptotic_risk, hidim_fixed_point, hidim_objective, hidim_risk_curve,
    FixedPoint, EPS0,
};
pub use lowdim::{lowdim_optimal_alpha, lowdim_risk, lowdim_terms};
pub use mean::{mean_optimal_alpha, mean_risk, naive_pooled_risk};
pub use nonparam::{nonparam_risk, nonparam_risk_detail, penalty_weight, NonparamRisk, DEFAULT_TRUNCATION};
pub use sequence::{sequence_beta, sequence_cutoff, sequence_lambda_star, sequence_risk, SequenceRisk};

use crate::error::Result;
use crate::model::{RiskCurve, RiskPoint};

/// Evaluates an analytic risk function on a grid (`std_error = 0`).
pub fn risk_curve(alpha_grid: &[f64], mut risk: impl FnMut(f64) -> Result<f64>) -> Result<RiskCurve> {
    let points = alpha_grid
        .iter()
        .map(|&alpha| {
            Ok(RiskPoint {
                alpha,
                risk: risk(alpha)?,
                std_error: 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    RiskCurve::new(points)
}
