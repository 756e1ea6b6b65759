//! Synthetic data generators. Rows are drawn in order, coordinates left to
//! right, so output depends only on the stream.

use nalgebra::{DMatrix, DVector};

use super::rng::SimRng;
use crate::error::{Error, Result};
use crate::model::{LabeledDataset, SequenceModelSpec, Source};

fn check_theta(d: usize, theta: &[f64]) -> Result<()> {
    if d == 0 {
        return Err(Error::invalid("dim", "must be positive"));
    }
    if theta.len() != d {
        return Err(Error::DimMismatch {
            expected: d,
            found: theta.len(),
        });
    }
    Ok(())
}

/// `n` rows `theta + sigma g`, no responses.
pub fn gen_gaussian_mean(
    d: usize,
    n: usize,
    theta: &[f64],
    sigma: f64,
    source: Source,
    rng: &mut SimRng,
) -> Result<LabeledDataset> {
    check_theta(d, theta)?;
    let mut x = DMatrix::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            x[(i, j)] = theta[j] + sigma * rng.normal();
        }
    }
    LabeledDataset::unlabeled(x, source)
}

/// Symmetric two-class mixture: `y` uniform on `{-1, +1}`, `x = y theta + g`.
pub fn gen_gaussian_mixture(
    d: usize,
    n: usize,
    theta: &[f64],
    source: Source,
    rng: &mut SimRng,
) -> Result<LabeledDataset> {
    check_theta(d, theta)?;
    let norm = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::NotUnitNorm { norm });
    }
    let mut x = DMatrix::zeros(n, d);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let label = rng.sign();
        y[i] = label;
        for j in 0..d {
            x[(i, j)] = label * theta[j] + rng.normal();
        }
    }
    LabeledDataset::new(x, y, source)
}

/// Linear model `y = <x, theta> + sigma eps` with standard normal rows.
pub fn gen_hidim_linear(
    d: usize,
    n: usize,
    theta: &[f64],
    sigma: f64,
    source: Source,
    rng: &mut SimRng,
) -> Result<LabeledDataset> {
    check_theta(d, theta)?;
    let mut x = DMatrix::zeros(n, d);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let mut dot = 0.0;
        for j in 0..d {
            let v = rng.normal();
            x[(i, j)] = v;
            dot += v * theta[j];
        }
        y[i] = dot + sigma * rng.normal();
    }
    LabeledDataset::new(x, y, source)
}

/// Sample means `(theta* + sigma g / sqrt(n), theta*_s + sigma_s g_s / sqrt(m))`.
///
/// The estimator only sees the data through these means, so drawing them
/// directly is equivalent to drawing all `n` and `m` observations.
pub fn gen_sequence_obs(
    spec: &SequenceModelSpec,
    original: &mut SimRng,
    surrogate: &mut SimRng,
) -> (Vec<f64>, Vec<f64>) {
    let scale = spec.sigma / (spec.n as f64).sqrt();
    let scale_s = spec.sigma_s / (spec.m as f64).sqrt();
    let obs = spec.theta_star.iter().map(|t| t + scale * original.normal()).collect();
    let obs_s = spec
        .theta_star_s
        .iter()
        .map(|t| t + scale_s * surrogate.normal())
        .collect();
    (obs, obs_s)
}

/// Individual sequence-model observations `theta* + sigma g`, one per row.
pub fn gen_sequence_rows(spec: &SequenceModelSpec, rows: usize, rng: &mut SimRng) -> Result<LabeledDataset> {
    gen_gaussian_mean(spec.dim(), rows, &spec.theta_star, spec.sigma, Source::Original, rng)
}

/// `r e_1` and `r_s (cos gamma e_1 + sin gamma e_2)`.
pub fn planar_pair(d: usize, r: f64, r_s: f64, gamma: f64) -> (Vec<f64>, Vec<f64>) {
    let mut theta = vec![0.0; d];
    let mut theta_s = vec![0.0; d];
    theta[0] = r;
    theta_s[0] = r_s * gamma.cos();
    if d > 1 {
        theta_s[1] = r_s * gamma.sin();
    }
    (theta, theta_s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_rows_equal_theta() {
        let mut rng = SimRng::new(1, 0);
        let ds = gen_gaussian_mean(3, 4, &[1.0, 2.0, 3.0], 0.0, Source::Original, &mut rng).unwrap();
        for row in ds.features().row_iter() {
            assert_eq!(row.iter().copied().collect::<Vec<_>>(), vec![1.0, 2.0, 3.0]);
        }
    }

    #[test]
    fn same_stream_same_bytes() {
        let draw = || {
            let mut rng = SimRng::new(11, 5);
            gen_hidim_linear(4, 6, &[1.0, 0.0, -1.0, 0.5], 0.3, Source::Original, &mut rng).unwrap()
        };
        assert_eq!(draw(), draw());
    }

    #[test]
    fn mixture_requires_unit_norm() {
        let mut rng = SimRng::new(1, 0);
        let err = gen_gaussian_mixture(2, 3, &[1.0, 1.0], Source::Original, &mut rng);
        assert!(matches!(err, Err(Error::NotUnitNorm { .. })));
    }

    #[test]
    fn zero_noise_sequence_obs_are_exact() {
        let spec = SequenceModelSpec::new(vec![1.0, 2.0], vec![0.5, 0.0], vec![1.0, 4.0], 0.0, 0.0, 3, 4, 2.0, 1.0).unwrap();
        let (mut a, mut b) = (SimRng::new(0, 0), SimRng::new(0, 1));
        let (o, s) = gen_sequence_obs(&spec, &mut a, &mut b);
        assert_eq!(o, spec.theta_star);
        assert_eq!(s, spec.theta_star_s);
    }
}
