//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each operation has a plain Rust function returning JSON (tested natively)
//! and a thin `#[wasm_bindgen]` wrapper for the page.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use surrogate_mix::model::{HiDimSpec, PowerLawFit, RiskCurve, ScalingLawModel};
use surrogate_mix::oracles::{hidim_risk_curve, mean_optimal_alpha, mean_risk, naive_pooled_risk, risk_curve};
use surrogate_mix::scaling::{optimal_alpha, predict_mixture_risk};

#[derive(Debug, Serialize, Deserialize)]
pub struct Curve {
    pub alpha: Vec<f64>,
    pub risk: Vec<f64>,
    pub alpha_star: f64,
    pub risk_star: f64,
    /// Reference value drawn as a horizontal line, if any.
    pub baseline: Option<f64>,
}

impl Curve {
    fn from_risk_curve(curve: &RiskCurve, best: (f64, f64), baseline: Option<f64>) -> Self {
        Curve {
            alpha: curve.points().iter().map(|p| p.alpha).collect(),
            risk: curve.points().iter().map(|p| p.risk).collect(),
            alpha_star: best.0,
            risk_star: best.1,
            baseline,
        }
    }
}

fn grid(points: usize) -> Result<Vec<f64>, String> {
    if points < 2 {
        return Err(format!("need at least 2 grid points, got {points}"));
    }
    Ok((0..points).map(|i| i as f64 / (points - 1) as f64).collect())
}

fn to_json(curve: &Curve) -> Result<String, String> {
    serde_json::to_string(curve).map_err(|e| e.to_string())
}

/// Exact mean-estimation risk curve; baseline is the naive pooled risk.
pub fn mean_curve(d: usize, n: usize, m: usize, gap: f64, points: usize) -> Result<Curve, String> {
    let alphas = grid(points)?;
    let curve = risk_curve(&alphas, |a| mean_risk(d, n, m, a, gap)).map_err(|e| e.to_string())?;
    let best = mean_optimal_alpha(d, n, m, gap).map_err(|e| e.to_string())?;
    let naive = naive_pooled_risk(d, n, m, gap).map_err(|e| e.to_string())?;
    Ok(Curve::from_risk_curve(&curve, best, Some(naive)))
}

/// Proportional-asymptotics ridge risk curve; baseline is the alpha = 0 risk.
pub fn hidim_curve(spec_json: &str, points: usize) -> Result<Curve, String> {
    let spec: HiDimSpec = serde_json::from_str(spec_json).map_err(|e| e.to_string())?;
    let alphas = grid(points)?;
    let curve = hidim_risk_curve(&spec, &alphas).map_err(|e| e.to_string())?;
    let best = curve.argmin().ok_or("empty curve")?;
    let at_zero = curve.points()[0].risk;
    Ok(Curve::from_risk_curve(&curve, (best.alpha, best.risk), Some(at_zero)))
}

/// Input of [`scaling_curve`]: the two fitted laws and the sample sizes.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingInput {
    pub original: [f64; 3],
    pub surrogate: [f64; 3],
    pub n: usize,
    pub m: usize,
    pub points: usize,
}

/// Scaling-law prediction; each law is `[asymptote, coefficient, exponent]`.
pub fn scaling_curve(input_json: &str) -> Result<Curve, String> {
    let input: ScalingInput = serde_json::from_str(input_json).map_err(|e| e.to_string())?;
    let law = |[a, b, beta]: [f64; 3]| PowerLawFit::new(a, b, beta, 0.0).map_err(|e| e.to_string());
    let model = ScalingLawModel::from_fits(law(input.original)?, law(input.surrogate)?);
    let alphas = grid(input.points)?;
    let curve = risk_curve(&alphas, |a| predict_mixture_risk(&model, input.n, input.m, a))
        .map_err(|e| e.to_string())?;
    let best = optimal_alpha(&model, input.n, input.m).map_err(|e| e.to_string())?;
    Ok(Curve::from_risk_curve(&curve, best, Some(model.bayes_risk)))
}

#[wasm_bindgen(js_name = meanCurve)]
pub fn mean_curve_js(d: usize, n: usize, m: usize, gap: f64, points: usize) -> Result<String, JsError> {
    mean_curve(d, n, m, gap, points).and_then(|c| to_json(&c)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = hidimCurve)]
pub fn hidim_curve_js(spec_json: &str, points: usize) -> Result<String, JsError> {
    hidim_curve(spec_json, points).and_then(|c| to_json(&c)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = scalingCurve)]
pub fn scaling_curve_js(input_json: &str) -> Result<String, JsError> {
    scaling_curve(input_json).and_then(|c| to_json(&c)).map_err(|e| JsError::new(&e))
}
