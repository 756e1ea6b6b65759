//! Weighted ERM solvers.
//!
//! Each solver minimizes
//! `(1-alpha)/n * sum_i loss(theta; z_i) + alpha/m * sum_j loss(theta; z^s_j) + penalty(theta)`.
//! A term whose weight or sample count is zero is dropped entirely, so the
//! endpoints `alpha = 0` and `alpha = 1` run exactly the single-dataset
//! computation.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{check_dims, LabeledDataset, MixtureConfig, SequenceModelSpec};

/// Per-sample weights `((1-alpha)/n, alpha/m)`, with `None` for dropped terms.
fn term_weights(n: usize, m: usize, alpha: f64) -> Result<(Option<f64>, Option<f64>)> {
    if (n == 0 && alpha < 1.0) || (m == 0 && alpha > 0.0) {
        return Err(Error::BadWeight { alpha, n, m });
    }
    let wo = (alpha < 1.0).then(|| (1.0 - alpha) / n as f64);
    let ws = (alpha > 0.0).then(|| alpha / m as f64);
    Ok((wo, ws))
}

fn column_mean(ds: &LabeledDataset) -> DVector<f64> {
    ds.features().row_mean().transpose()
}

/// `(1-alpha) * mean(original) + alpha * mean(surrogate)`, column-wise.
///
/// The side with zero weight may be empty.
pub fn weighted_mean(
    original: &LabeledDataset,
    surrogate: &LabeledDataset,
    alpha: f64,
) -> Result<DVector<f64>> {
    MixtureConfig::new(alpha, 0.0)?;
    check_dims(original, surrogate)?;
    if (original.is_empty() && alpha < 1.0) || (surrogate.is_empty() && alpha > 0.0) {
        return Err(Error::EmptyDataset);
    }
    if alpha == 0.0 {
        return Ok(column_mean(original));
    }
    if alpha == 1.0 {
        return Ok(column_mean(surrogate));
    }
    Ok(column_mean(original) * (1.0 - alpha) + column_mean(surrogate) * alpha)
}

/// Sufficient statistics of one dataset for ridge: `X^T X`, `X^T y`, count.
#[derive(Debug, Clone)]
struct Moments {
    gram: DMatrix<f64>,
    xty: DVector<f64>,
    count: usize,
}

impl Moments {
    fn of(ds: &LabeledDataset) -> Self {
        let x = ds.features();
        Self {
            gram: x.tr_mul(x),
            xty: x.tr_mul(ds.responses()),
            count: ds.count(),
        }
    }
}

/// Weighted ridge with the Gram matrices precomputed, for solving the same
/// data at many `(alpha, lambda)` pairs.
#[derive(Debug, Clone)]
pub struct WeightedRidge {
    dim: usize,
    original: Moments,
    surrogate: Moments,
}

impl WeightedRidge {
    pub fn new(original: &LabeledDataset, surrogate: &LabeledDataset) -> Result<Self> {
        check_dims(original, surrogate)?;
        if original.is_empty() && surrogate.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let dim = if original.is_empty() {
            surrogate.dim()
        } else {
            original.dim()
        };
        let moments = |ds: &LabeledDataset| {
            if ds.is_empty() {
                Moments {
                    gram: DMatrix::zeros(dim, dim),
                    xty: DVector::zeros(dim),
                    count: 0,
                }
            } else {
                Moments::of(ds)
            }
        };
        Ok(Self {
            dim,
            original: moments(original),
            surrogate: moments(surrogate),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Solves `(lambda I + wo X^T X + ws Xs^T Xs) theta = wo X^T y + ws Xs^T ys`.
    pub fn solve(&self, config: MixtureConfig) -> Result<DVector<f64>> {
        let (wo, ws) = term_weights(self.original.count, self.surrogate.count, config.alpha())?;
        let mut lhs = DMatrix::<f64>::zeros(self.dim, self.dim);
        let mut rhs = DVector::<f64>::zeros(self.dim);
        for (w, mom) in [(wo, &self.original), (ws, &self.surrogate)] {
            if let Some(w) = w {
                lhs += &mom.gram * w;
                rhs += &mom.xty * w;
            }
        }
        for i in 0..self.dim {
            lhs[(i, i)] += config.lambda();
        }
        let scale = lhs.diagonal().amax();
        let chol = lhs.cholesky().ok_or(Error::SingularSystem)?;
        // A rank-deficient Gram matrix can still factor with rounding-level pivots.
        let min_pivot = chol.l_dirty().diagonal().iter().fold(f64::INFINITY, |a, &b| a.min(b * b));
        if !(min_pivot > 1e-13 * scale) {
            return Err(Error::SingularSystem);
        }
        Ok(chol.solve(&rhs))
    }
}

/// Closed-form weighted ridge estimator.
pub fn weighted_ridge(
    original: &LabeledDataset,
    surrogate: &LabeledDataset,
    config: MixtureConfig,
) -> Result<DVector<f64>> {
    WeightedRidge::new(original, surrogate)?.solve(config)
}

/// Value of the weighted ridge objective with penalty `lambda/2 ||theta||^2`.
pub fn ridge_objective(
    original: &LabeledDataset,
    surrogate: &LabeledDataset,
    config: MixtureConfig,
    theta: &DVector<f64>,
) -> Result<f64> {
    let (wo, ws) = term_weights(original.count(), surrogate.count(), config.alpha())?;
    let mut value = 0.5 * config.lambda() * theta.norm_squared();
    for (w, ds) in [(wo, original), (ws, surrogate)] {
        if let Some(w) = w {
            let resid = ds.responses() - ds.features() * theta;
            value += 0.5 * w * resid.norm_squared();
        }
    }
    Ok(value)
}

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 100_000;

const ARMIJO: f64 = 1e-4;
const ROUNDOFF: f64 = 64.0 * f64::EPSILON;

/// `log(1 + exp(-z))` without overflow.
fn softplus_neg(z: f64) -> f64 {
    if z > 0.0 {
        (-z).exp().ln_1p()
    } else {
        -z + z.exp().ln_1p()
    }
}

/// `1 / (1 + exp(z))`, the derivative of `-softplus_neg`.
fn sigmoid_neg(z: f64) -> f64 {
    if z > 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

/// Weighted ridge-penalized logistic regression with penalty `lambda ||theta||^2`.
#[derive(Debug, Clone)]
pub struct WeightedLogistic<'a> {
    terms: Vec<(f64, &'a LabeledDataset)>,
    lambda: f64,
    dim: usize,
}

impl<'a> WeightedLogistic<'a> {
    pub fn new(
        original: &'a LabeledDataset,
        surrogate: &'a LabeledDataset,
        config: MixtureConfig,
    ) -> Result<Self> {
        check_dims(original, surrogate)?;
        if config.lambda() <= 0.0 {
            return Err(Error::invalid("lambda", "logistic regression needs lambda > 0"));
        }
        let (wo, ws) = term_weights(original.count(), surrogate.count(), config.alpha())?;
        let mut terms = Vec::with_capacity(2);
        for (w, ds) in [(wo, original), (ws, surrogate)] {
            let Some(w) = w else { continue };
            if let Some((row, &value)) = ds
                .responses()
                .iter()
                .enumerate()
                .find(|(_, &y)| y != 1.0 && y != -1.0)
            {
                return Err(Error::BadLabels { row, value });
            }
            terms.push((w, ds));
        }
        let dim = terms[0].1.dim();
        Ok(Self {
            terms,
            lambda: config.lambda(),
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn objective(&self, theta: &DVector<f64>) -> f64 {
        let mut value = self.lambda * theta.norm_squared();
        for &(w, ds) in &self.terms {
            let margins = ds.features() * theta;
            let loss: f64 = margins
                .iter()
                .zip(ds.responses().iter())
                .map(|(z, y)| softplus_neg(y * z))
                .sum();
            value += w * loss;
        }
        value
    }

    pub fn gradient(&self, theta: &DVector<f64>) -> DVector<f64> {
        let mut grad = theta * (2.0 * self.lambda);
        for &(w, ds) in &self.terms {
            let margins = ds.features() * theta;
            let coef = DVector::from_iterator(
                margins.len(),
                margins
                    .iter()
                    .zip(ds.responses().iter())
                    .map(|(z, y)| -w * y * sigmoid_neg(y * z)),
            );
            grad += ds.features().tr_mul(&coef);
        }
        grad
    }

    /// Full-batch gradient descent with Armijo backtracking from `theta = 0`.
    pub fn solve(&self, tol: f64, max_iter: usize) -> Result<DVector<f64>> {
        let mut theta = DVector::zeros(self.dim);
        let mut value = self.objective(&theta);
        let mut grad = self.gradient(&theta);
        for iter in 0..max_iter {
            let gnorm2 = grad.norm_squared();
            if gnorm2.sqrt() <= tol {
                return Ok(theta);
            }
            let mut step = 1.0;
            let mut next_grad = None;
            loop {
                let candidate = &theta - &grad * step;
                let cand_value = self.objective(&candidate);
                let decrease = ARMIJO * step * gnorm2;
                let accept = if decrease > ROUNDOFF * value.abs() {
                    cand_value <= value - decrease
                } else {
                    // Decrease below objective rounding: approximate Armijo
                    // on the directional derivative instead.
                    let g = self.gradient(&candidate);
                    let ok = g.dot(&grad) >= -(1.0 - 2.0 * ARMIJO) * gnorm2
                        && cand_value <= value + ROUNDOFF * value.abs();
                    next_grad = Some(g);
                    ok
                };
                if accept {
                    theta = candidate;
                    value = cand_value;
                    break;
                }
                next_grad = None;
                step *= 0.5;
                if step < 1e-20 {
                    // No representable decrease left; report where we stopped.
                    return Err(Error::NotConverged {
                        iterations: iter,
                        residual: gnorm2.sqrt(),
                        last: theta.iter().copied().collect(),
                    });
                }
            }
            grad = next_grad.unwrap_or_else(|| self.gradient(&theta));
        }
        let residual = grad.norm();
        if residual <= tol {
            return Ok(theta);
        }
        Err(Error::NotConverged {
            iterations: max_iter,
            residual,
            last: theta.iter().copied().collect(),
        })
    }
}

/// Weighted logistic regression; responses must be `+1` / `-1`.
pub fn weighted_logistic(
    original: &LabeledDataset,
    surrogate: &LabeledDataset,
    config: MixtureConfig,
    tol: f64,
    max_iter: usize,
) -> Result<DVector<f64>> {
    WeightedLogistic::new(original, surrogate, config)?.solve(tol, max_iter)
}

/// Penalized sequence-model estimate
/// `theta_k = ((1-alpha) y_k + alpha ys_k) / (1 + lambda omega_k)`.
pub fn sequence_estimate(
    spec: &SequenceModelSpec,
    obs_mean: &[f64],
    obs_mean_s: &[f64],
    config: MixtureConfig,
) -> Result<Vec<f64>> {
    let dim = spec.dim();
    for v in [obs_mean, obs_mean_s] {
        if v.len() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                found: v.len(),
            });
        }
    }
    let (a, l) = (config.alpha(), config.lambda());
    Ok(obs_mean
        .iter()
        .zip(obs_mean_s)
        .zip(&spec.omega)
        .map(|((y, ys), w)| ((1.0 - a) * y + a * ys) / (1.0 + l * w))
        .collect())
}
