//! Monte Carlo harness: train, select hyperparameters on fresh validation
//! draws, evaluate, aggregate.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::generators::{
    gen_gaussian_mean, gen_gaussian_mixture, gen_hidim_linear, gen_sequence_obs, gen_sequence_rows,
    planar_pair,
};
use super::rng::{Purpose, SimRng};
use crate::error::{Error, Result};
use crate::estimators::{sequence_estimate, weighted_mean, WeightedLogistic, WeightedRidge};
use crate::model::{ExperimentPlan, Generator, LabeledDataset, MixtureConfig, SequenceModelSpec, Source};

pub const MIN_VALIDATION: usize = 1000;

/// Kind of risk to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Mean,
    Linear,
    Classification,
    Sequence,
}

/// Ground truth needed to evaluate a task.
#[derive(Debug, Clone, PartialEq)]
pub enum Truth {
    Mean { theta: Vec<f64> },
    Linear { theta: Vec<f64> },
    /// Unit-norm class mean of the symmetric Gaussian mixture.
    Mixture { theta: Vec<f64> },
    Sequence { theta: Vec<f64> },
}

impl Truth {
    fn name(&self) -> &'static str {
        match self {
            Truth::Mean { .. } => "mean",
            Truth::Linear { .. } => "linear",
            Truth::Mixture { .. } => "mixture",
            Truth::Sequence { .. } => "sequence",
        }
    }

    fn theta(&self) -> &[f64] {
        match self {
            Truth::Mean { theta }
            | Truth::Linear { theta }
            | Truth::Mixture { theta }
            | Truth::Sequence { theta } => theta,
        }
    }
}

fn task_name(task: Task) -> &'static str {
    match task {
        Task::Mean => "mean",
        Task::Linear => "linear",
        Task::Classification => "classification",
        Task::Sequence => "sequence",
    }
}

/// Test risk of `theta_hat` and its standard error.
///
/// Mean, linear and sequence tasks return the exact excess risk
/// `||theta_hat - theta*||^2` with zero standard error. Classification draws
/// `test_size` fresh points from the mixture and returns the 0-1 error with its
/// binomial standard error. Only the projection of a test point on `theta_hat`
/// matters, and for `x = y theta + g` it equals
/// `y <theta, theta_hat> + |theta_hat| z` with `z` standard normal, so each
/// test point costs one label and one normal draw.
pub fn estimate_risk(
    task: Task,
    theta_hat: &[f64],
    truth: &Truth,
    test_size: usize,
    rng: &mut SimRng,
) -> Result<(f64, f64)> {
    let compatible = matches!(
        (task, truth),
        (Task::Mean, Truth::Mean { .. })
            | (Task::Linear, Truth::Linear { .. })
            | (Task::Sequence, Truth::Sequence { .. })
            | (Task::Classification, Truth::Mixture { .. })
    );
    if !compatible {
        return Err(Error::TaskMismatch {
            task: task_name(task),
            truth: truth.name(),
        });
    }
    let theta = truth.theta();
    if theta.len() != theta_hat.len() {
        return Err(Error::DimMismatch {
            expected: theta.len(),
            found: theta_hat.len(),
        });
    }
    if task != Task::Classification {
        let risk = theta.iter().zip(theta_hat).map(|(a, b)| (a - b) * (a - b)).sum();
        return Ok((risk, 0.0));
    }
    if test_size == 0 {
        return Err(Error::invalid("test_size", "must be positive"));
    }
    let align: f64 = theta.iter().zip(theta_hat).map(|(a, b)| a * b).sum();
    let norm = theta_hat.iter().map(|b| b * b).sum::<f64>().sqrt();
    let mut errors = 0usize;
    for _ in 0..test_size {
        let y = rng.sign();
        let score = y * align + norm * rng.normal();
        let predicted = if score >= 0.0 { 1.0 } else { -1.0 };
        if predicted != y {
            errors += 1;
        }
    }
    let p = errors as f64 / test_size as f64;
    Ok((p, (p * (1.0 - p) / test_size as f64).sqrt()))
}

/// Misclassification rate of the Bayes classifier `sign(<x, theta>)` for a
/// unit-norm `theta`: `Phi(-1)`.
pub fn mixture_bayes_error() -> f64 {
    Normal::standard().cdf(-1.0)
}

/// Estimator family used to fit a training set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Learner {
    /// Weighted mean; the penalty is ignored.
    Mean,
    Ridge,
    Logistic { tol: f64, max_iter: usize },
}

/// Training data of one replicate.
#[derive(Debug, Clone)]
pub enum TrainingSet {
    Samples {
        learner: Learner,
        original: LabeledDataset,
        surrogate: LabeledDataset,
    },
    Sequence {
        spec: SequenceModelSpec,
        obs_mean: Vec<f64>,
        obs_mean_s: Vec<f64>,
    },
}

/// A training set with any per-dataset precomputation done once.
enum Prepared<'a> {
    Mean(&'a LabeledDataset, &'a LabeledDataset),
    Ridge(WeightedRidge),
    Logistic(&'a LabeledDataset, &'a LabeledDataset, f64, usize),
    Sequence(&'a SequenceModelSpec, &'a [f64], &'a [f64]),
}

impl TrainingSet {
    fn prepare(&self) -> Result<Prepared<'_>> {
        Ok(match self {
            TrainingSet::Samples {
                learner,
                original,
                surrogate,
            } => match *learner {
                Learner::Mean => Prepared::Mean(original, surrogate),
                Learner::Ridge => Prepared::Ridge(WeightedRidge::new(original, surrogate)?),
                Learner::Logistic { tol, max_iter } => {
                    Prepared::Logistic(original, surrogate, tol, max_iter)
                }
            },
            TrainingSet::Sequence {
                spec,
                obs_mean,
                obs_mean_s,
            } => Prepared::Sequence(spec, obs_mean, obs_mean_s),
        })
    }

    fn ignores_lambda(&self) -> bool {
        matches!(
            self,
            TrainingSet::Samples {
                learner: Learner::Mean,
                ..
            }
        )
    }

    /// Fits the estimator at one configuration.
    pub fn fit(&self, config: MixtureConfig) -> Result<Vec<f64>> {
        self.prepare()?.fit(config)
    }
}

impl Prepared<'_> {
    fn fit(&self, config: MixtureConfig) -> Result<Vec<f64>> {
        let theta: DVector<f64> = match self {
            Prepared::Mean(o, s) => weighted_mean(o, s, config.alpha())?,
            Prepared::Ridge(r) => r.solve(config)?,
            Prepared::Logistic(o, s, tol, max_iter) => {
                WeightedLogistic::new(o, s, config)?.solve(*tol, *max_iter)?
            }
            Prepared::Sequence(spec, y, ys) => return sequence_estimate(spec, y, ys, config),
        };
        Ok(theta.iter().copied().collect())
    }

    /// Loss on validation rows from the original distribution.
    ///
    /// Mean and sequence: average `||theta - z_i||^2`; ridge: mean squared
    /// error; logistic: 0-1 error.
    fn validation_loss(&self, theta: &[f64], validation: &LabeledDataset) -> Result<f64> {
        if validation.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if validation.dim() != theta.len() {
            return Err(Error::DimMismatch {
                expected: theta.len(),
                found: validation.dim(),
            });
        }
        let x = validation.features();
        let count = validation.count() as f64;
        let loss = match self {
            Prepared::Mean(..) | Prepared::Sequence(..) => {
                x.row_iter()
                    .map(|row| row.iter().zip(theta).map(|(z, t)| (z - t) * (z - t)).sum::<f64>())
                    .sum::<f64>()
                    / count
            }
            Prepared::Ridge(_) => {
                let th = DVector::from_column_slice(theta);
                (validation.responses() - x * th).norm_squared() / count
            }
            Prepared::Logistic(..) => {
                let th = DVector::from_column_slice(theta);
                let scores = x * th;
                scores
                    .iter()
                    .zip(validation.responses().iter())
                    .filter(|(s, y)| (if **s >= 0.0 { 1.0 } else { -1.0 }) != **y)
                    .count() as f64
                    / count
            }
        };
        Ok(loss)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub alpha: f64,
    pub lambda: f64,
    pub theta: Vec<f64>,
    pub validation_loss: f64,
}

/// Fits every `(alpha, lambda)` pair and keeps the one with the smallest
/// validation loss. Ties go to the smaller `alpha`, then the larger `lambda`.
pub fn select_by_validation(
    training: &TrainingSet,
    alphas: &[f64],
    lambdas: &[f64],
    validation: &LabeledDataset,
) -> Result<Selection> {
    if alphas.is_empty() || lambdas.is_empty() {
        return Err(Error::invalid("alphas", "candidate grids must be non-empty"));
    }
    let prepared = training.prepare()?;
    let mut best: Option<Selection> = None;
    for &alpha in alphas {
        // The weighted mean does not depend on lambda: fit once, then let the
        // tie-break pick the largest lambda.
        let mut cached: Option<(Vec<f64>, f64)> = None;
        for &lambda in lambdas {
            let config = MixtureConfig::new(alpha, lambda)?;
            let (theta, loss) = match (&cached, training.ignores_lambda()) {
                (Some(c), true) => c.clone(),
                _ => {
                    let theta = prepared.fit(config)?;
                    let loss = prepared.validation_loss(&theta, validation)?;
                    cached = Some((theta.clone(), loss));
                    (theta, loss)
                }
            };
            let better = match &best {
                None => true,
                Some(b) => {
                    loss < b.validation_loss
                        || (loss == b.validation_loss
                            && (alpha < b.alpha || (alpha == b.alpha && lambda > b.lambda)))
                }
            };
            if better {
                best = Some(Selection {
                    alpha,
                    lambda,
                    theta,
                    validation_loss: loss,
                });
            }
        }
    }
    Ok(best.expect("grids are non-empty"))
}

/// One aggregated row of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub risk_mean: f64,
    pub risk_se: f64,
    pub replicates: usize,
}

/// Recursive pairwise summation; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let count = xs.len() as f64;
    let mean = pairwise_sum(xs) / count;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (count - 1.0);
    (mean, (var / count).sqrt())
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    index: u64,
    n: usize,
    m: usize,
    alpha: f64,
}

/// Cells in lexicographic `(n, m, alpha)` order. A cell is skipped when the
/// weight would fall on a side with no samples (`n = 0` with `alpha < 1`, or
/// `m = 0` with `alpha > 0`).
fn cells(plan: &ExperimentPlan) -> Vec<Cell> {
    let mut ns = plan.n_grid.clone();
    let mut ms = plan.m_grid.clone();
    let mut alphas = plan.alpha_grid.clone();
    ns.sort_unstable();
    ms.sort_unstable();
    alphas.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut index = 0u64;
    for &n in &ns {
        for &m in &ms {
            for &alpha in &alphas {
                let feasible = !((n == 0 && alpha < 1.0) || (m == 0 && alpha > 0.0));
                if feasible {
                    out.push(Cell { index, n, m, alpha });
                }
                index += 1;
            }
        }
    }
    out
}

/// Runs one train-select-evaluate cycle.
fn run_replicate(plan: &ExperimentPlan, cell: Cell, replicate: usize) -> Result<f64> {
    let rng = |purpose| SimRng::for_replicate(plan.seed, cell.index, replicate as u64, purpose);
    let (mut r_or, mut r_su) = (rng(Purpose::Original)?, rng(Purpose::Surrogate)?);
    let validation_rows = MIN_VALIDATION.max(cell.n);
    let needs_validation = plan.lambda_grid.len() > 1;

    let (training, truth, task, test_size, validation) = match &plan.generator {
        &Generator::GaussianMean {
            dim,
            gap,
            sigma,
            sigma_s,
        } => {
            let (theta, theta_s) = planar_pair(dim, 0.0, gap.sqrt(), 0.0);
            let original = gen_gaussian_mean(dim, cell.n, &theta, sigma, Source::Original, &mut r_or)?;
            let surrogate = gen_gaussian_mean(dim, cell.m, &theta_s, sigma_s, Source::Surrogate, &mut r_su)?;
            let training = TrainingSet::Samples {
                learner: Learner::Mean,
                original,
                surrogate,
            };
            // The mean estimator has no penalty to select.
            (training, Truth::Mean { theta }, Task::Mean, 0, None)
        }
        &Generator::GaussianMixture {
            dim,
            gamma,
            test_size,
            tol,
            max_iter,
        } => {
            let (theta, theta_s) = planar_pair(dim, 1.0, 1.0, gamma);
            let original = gen_gaussian_mixture(dim, cell.n, &theta, Source::Original, &mut r_or)?;
            let surrogate = gen_gaussian_mixture(dim, cell.m, &theta_s, Source::Surrogate, &mut r_su)?;
            let validation = if needs_validation {
                let mut r_val = rng(Purpose::Validation)?;
                Some(gen_gaussian_mixture(dim, validation_rows, &theta, Source::Original, &mut r_val)?)
            } else {
                None
            };
            let training = TrainingSet::Samples {
                learner: Learner::Logistic { tol, max_iter },
                original,
                surrogate,
            };
            (training, Truth::Mixture { theta }, Task::Classification, test_size, validation)
        }
        &Generator::HiDimLinear {
            dim,
            r,
            r_s,
            gamma,
            sigma,
            sigma_s,
        } => {
            let (theta, theta_s) = planar_pair(dim, r, r_s, gamma);
            let original = gen_hidim_linear(dim, cell.n, &theta, sigma, Source::Original, &mut r_or)?;
            let surrogate = gen_hidim_linear(dim, cell.m, &theta_s, sigma_s, Source::Surrogate, &mut r_su)?;
            let validation = if needs_validation {
                let mut r_val = rng(Purpose::Validation)?;
                Some(gen_hidim_linear(dim, validation_rows, &theta, sigma, Source::Original, &mut r_val)?)
            } else {
                None
            };
            let training = TrainingSet::Samples {
                learner: Learner::Ridge,
                original,
                surrogate,
            };
            (training, Truth::Linear { theta }, Task::Linear, 0, validation)
        }
        Generator::SequenceModel { spec } => {
            let spec = spec.with_counts(cell.n, cell.m)?;
            let (obs_mean, obs_mean_s) = gen_sequence_obs(&spec, &mut r_or, &mut r_su);
            let validation = if needs_validation {
                let mut r_val = rng(Purpose::Validation)?;
                Some(gen_sequence_rows(&spec, validation_rows, &mut r_val)?)
            } else {
                None
            };
            let truth = Truth::Sequence {
                theta: spec.theta_star.clone(),
            };
            let training = TrainingSet::Sequence {
                spec,
                obs_mean,
                obs_mean_s,
            };
            (training, truth, Task::Sequence, 0, validation)
        }
    };

    let theta_hat = match validation {
        Some(val) => select_by_validation(&training, &[cell.alpha], &plan.lambda_grid, &val)?.theta,
        None => training.fit(MixtureConfig::new(cell.alpha, plan.lambda_grid[0])?)?,
    };
    let mut r_test = rng(Purpose::Test)?;
    Ok(estimate_risk(task, &theta_hat, &truth, test_size.max(1), &mut r_test)?.0)
}

/// Runs every feasible `(n, m, alpha)` cell for `plan.replicates` replicates.
///
/// Replicates run in parallel when the `parallel` feature is on; results are
/// collected in replicate order and aggregated by pairwise summation, so the
/// output does not depend on scheduling. When the penalty grid has more than
/// one value, the penalty is chosen per replicate on fresh validation draws.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<Vec<ResultRow>> {
    let cells = cells(plan);
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..plan.replicates).map(move |r| (c, r)))
        .collect();
    let run = |&(c, r): &(usize, usize)| -> Result<f64> {
        let cell = cells[c];
        run_replicate(plan, cell, r).map_err(|e| Error::CellFailed {
            n: cell.n,
            m: cell.m,
            alpha: cell.alpha,
            replicate: r,
            source: Box::new(e),
        })
    };
    #[cfg(feature = "parallel")]
    let risks: Vec<Result<f64>> = {
        use rayon::prelude::*;
        jobs.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let risks: Vec<Result<f64>> = jobs.iter().map(run).collect();

    let risks = risks.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(cells
        .iter()
        .zip(risks.chunks(plan.replicates))
        .map(|(cell, chunk)| {
            let (risk_mean, risk_se) = mean_and_se(chunk);
            ResultRow {
                n: cell.n,
                m: cell.m,
                alpha: cell.alpha,
                risk_mean,
                risk_se,
                replicates: plan.replicates,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_risk_and_mismatch() {
        let truth = Truth::Mean { theta: vec![1.0, 2.0] };
        let mut rng = SimRng::new(0, 0);
        assert_eq!(estimate_risk(Task::Mean, &[1.0, 2.0], &truth, 1, &mut rng).unwrap(), (0.0, 0.0));
        assert!(matches!(
            estimate_risk(Task::Classification, &[1.0, 2.0], &truth, 1, &mut rng),
            Err(Error::TaskMismatch { .. })
        ));
    }

    #[test]
    fn zero_classifier_guesses_positive() {
        let truth = Truth::Mixture { theta: vec![1.0, 0.0] };
        let mut rng = SimRng::new(0, 0);
        let (p, se) = estimate_risk(Task::Classification, &[0.0, 0.0], &truth, 100_000, &mut rng).unwrap();
        assert!((p - 0.5).abs() < 4.0 * se);
    }

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let xs: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&xs), 500_500.0);
        let (m, se) = mean_and_se(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((se - 1.0).abs() < 1e-15);
    }

    #[test]
    fn infeasible_cells_are_skipped() {
        let plan = ExperimentPlan::new(
            vec![0, 10],
            vec![5],
            vec![0.0, 0.5, 1.0],
            vec![0.0],
            1,
            0,
            Generator::GaussianMean {
                dim: 2,
                gap: 0.0,
                sigma: 1.0,
                sigma_s: 1.0,
            },
        )
        .unwrap();
        let c = cells(&plan);
        let kept: Vec<(usize, f64)> = c.iter().map(|c| (c.n, c.alpha)).collect();
        assert_eq!(kept, vec![(0, 1.0), (10, 0.0), (10, 0.5), (10, 1.0)]);
        assert_eq!(c[0].index, 2);
    }
}
