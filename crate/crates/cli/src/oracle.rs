//! Parameter files for the `oracle` subcommand.

use std::path::Path;

use serde::Deserialize;

use surrogate_mix::model::{HiDimSpec, LowDimCurvature, MixtureConfig, NonparamSpec, RiskCurve, SequenceModelSpec};
use surrogate_mix::oracles::{
    hidim_risk_curve, lowdim_risk, mean_risk, nonparam_risk, risk_curve, sequence_lambda_star,
    sequence_risk,
};

use crate::{read_json, Outcome, Setting};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeanParams {
    d: usize,
    n: usize,
    m: usize,
    gap: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceParams {
    spec: SequenceModelSpec,
    /// Fixed penalty; when absent the selection rule picks one per alpha.
    #[serde(default)]
    lambda: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LowDimParams {
    curvature: LowDimCurvature,
    n: usize,
    m: usize,
}

pub(crate) fn evaluate(setting: Setting, params: &Path, grid: &[f64]) -> Outcome<RiskCurve> {
    let curve = match setting {
        Setting::Mean => {
            let p: MeanParams = read_json(params)?;
            risk_curve(grid, |a| mean_risk(p.d, p.n, p.m, a, p.gap))?
        }
        Setting::Sequence => {
            let p: SequenceParams = read_json(params)?;
            risk_curve(grid, |a| {
                let lambda = match p.lambda {
                    Some(l) => l,
                    None => sequence_lambda_star(&p.spec, a)?,
                };
                Ok(sequence_risk(&p.spec, MixtureConfig::new(a, lambda)?).risk)
            })?
        }
        Setting::Nonparam => {
            let spec: NonparamSpec = read_json(params)?;
            risk_curve(grid, |a| nonparam_risk(&spec, a))?
        }
        Setting::Lowdim => {
            let p: LowDimParams = read_json(params)?;
            risk_curve(grid, |a| lowdim_risk(&p.curvature, p.n, p.m, a))?
        }
        Setting::Hidim => {
            let spec: HiDimSpec = read_json(params)?;
            hidim_risk_curve(&spec, grid)?
        }
    };
    Ok(curve)
}
