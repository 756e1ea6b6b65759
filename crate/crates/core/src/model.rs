//! Domain types shared by the estimators, oracles, scaling law and simulator.
//!
//! Every type validates its invariants when constructed, including when it is
//! deserialized from JSON (`serde(try_from = ...)`), so a value that exists is
//! a valid value.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which distribution a dataset was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Original,
    Surrogate,
}

/// A design matrix with one response per row.
///
/// Classification responses are encoded as `+1.0` / `-1.0`; regression
/// responses are unrestricted. Mean-estimation samples have no response and
/// are built with [`LabeledDataset::unlabeled`], which stores zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetRepr", into = "DatasetRepr")]
pub struct LabeledDataset {
    features: DMatrix<f64>,
    responses: DVector<f64>,
    source: Source,
}

#[derive(Serialize, Deserialize)]
struct DatasetRepr {
    features: Vec<Vec<f64>>,
    responses: Vec<f64>,
    source: Source,
}

impl LabeledDataset {
    pub fn new(features: DMatrix<f64>, responses: DVector<f64>, source: Source) -> Result<Self> {
        if features.nrows() != responses.len() {
            return Err(Error::invalid(
                "responses",
                format!(
                    "{} responses for {} feature rows",
                    responses.len(),
                    features.nrows()
                ),
            ));
        }
        if features.iter().chain(responses.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("features", "non-finite entry"));
        }
        Ok(Self {
            features,
            responses,
            source,
        })
    }

    /// Samples without responses (mean estimation, sequence observations).
    pub fn unlabeled(features: DMatrix<f64>, source: Source) -> Result<Self> {
        let n = features.nrows();
        Self::new(features, DVector::zeros(n), source)
    }

    pub fn from_rows(rows: &[Vec<f64>], responses: Vec<f64>, source: Source) -> Result<Self> {
        let features = rows_to_matrix("features", rows)?;
        Self::new(features, DVector::from_vec(responses), source)
    }

    /// A dataset with zero rows, used to drop one side of the mixture.
    pub fn empty(dim: usize, source: Source) -> Self {
        Self {
            features: DMatrix::zeros(0, dim),
            responses: DVector::zeros(0),
            source,
        }
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn responses(&self) -> &DVector<f64> {
        &self.responses
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn count(&self) -> usize {
        self.features.nrows()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    /// Row-wise concatenation; the result keeps `self`'s source tag.
    pub fn concat(&self, other: &LabeledDataset) -> Result<Self> {
        check_dims(self, other)?;
        let dim = self.dim().max(other.dim());
        let n = self.count() + other.count();
        let features = DMatrix::from_fn(n, dim, |i, j| {
            if i < self.count() {
                self.features[(i, j)]
            } else {
                other.features[(i - self.count(), j)]
            }
        });
        let responses = DVector::from_iterator(
            n,
            self.responses.iter().chain(other.responses.iter()).copied(),
        );
        Self::new(features, responses, self.source)
    }
}

/// Dimension check that ignores zero-row datasets.
pub(crate) fn check_dims(a: &LabeledDataset, b: &LabeledDataset) -> Result<()> {
    if !a.is_empty() && !b.is_empty() && a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

impl TryFrom<DatasetRepr> for LabeledDataset {
    type Error = Error;

    fn try_from(repr: DatasetRepr) -> Result<Self> {
        Self::from_rows(&repr.features, repr.responses, repr.source)
    }
}

impl From<LabeledDataset> for DatasetRepr {
    fn from(ds: LabeledDataset) -> Self {
        DatasetRepr {
            features: matrix_to_rows(&ds.features),
            responses: ds.responses.iter().copied().collect(),
            source: ds.source,
        }
    }
}

/// Surrogate weight and ridge penalty for the weighted objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixtureConfigRepr")]
pub struct MixtureConfig {
    alpha: f64,
    lambda: f64,
}

#[derive(Deserialize)]
struct MixtureConfigRepr {
    alpha: f64,
    lambda: f64,
}

impl MixtureConfig {
    pub fn new(alpha: f64, lambda: f64) -> Result<Self> {
        check_unit_interval("alpha", alpha)?;
        check_nonneg("lambda", lambda)?;
        Ok(Self { alpha, lambda })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl TryFrom<MixtureConfigRepr> for MixtureConfig {
    type Error = Error;

    fn try_from(r: MixtureConfigRepr) -> Result<Self> {
        Self::new(r.alpha, r.lambda)
    }
}

/// `loss(n) = asymptote + coefficient * n^(-exponent)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PowerLawFitRepr")]
pub struct PowerLawFit {
    pub asymptote: f64,
    pub coefficient: f64,
    pub exponent: f64,
    /// Root-mean-square residual of the fit in loss space.
    pub residual: f64,
    /// Set when all losses were equal and no exponent could be identified.
    #[serde(default)]
    pub degenerate: bool,
}

#[derive(Deserialize)]
struct PowerLawFitRepr {
    asymptote: f64,
    coefficient: f64,
    exponent: f64,
    residual: f64,
    #[serde(default)]
    degenerate: bool,
}

impl PowerLawFit {
    pub fn new(asymptote: f64, coefficient: f64, exponent: f64, residual: f64) -> Result<Self> {
        check_nonneg("asymptote", asymptote)?;
        check_nonneg("coefficient", coefficient)?;
        check_positive("exponent", exponent)?;
        check_nonneg("residual", residual)?;
        Ok(Self {
            asymptote,
            coefficient,
            exponent,
            residual,
            degenerate: false,
        })
    }

    pub(crate) fn flagged_degenerate(mut self) -> Self {
        self.degenerate = true;
        self
    }

    /// Excess over the asymptote at sample size `n`.
    pub fn excess(&self, n: f64) -> f64 {
        self.coefficient * n.powf(-self.exponent)
    }

    pub fn predict(&self, n: f64) -> f64 {
        self.asymptote + self.excess(n)
    }
}

impl TryFrom<PowerLawFitRepr> for PowerLawFit {
    type Error = Error;

    fn try_from(r: PowerLawFitRepr) -> Result<Self> {
        let fit = Self::new(r.asymptote, r.coefficient, r.exponent, r.residual)?;
        Ok(if r.degenerate {
            fit.flagged_degenerate()
        } else {
            fit
        })
    }
}

/// Fitted ingredients of the mixture scaling law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScalingLawModelRepr")]
pub struct ScalingLawModel {
    /// Bayes risk estimate, the asymptote of the original-data fit.
    pub bayes_risk: f64,
    /// Excess risk of infinitely many surrogate samples.
    pub surrogate_gap: f64,
    pub original_fit: PowerLawFit,
    pub surrogate_fit: PowerLawFit,
    /// Exponent of the mixing bracket; equals `original_fit.exponent`.
    pub beta: f64,
    /// True when the surrogate asymptote fell below the original one and the
    /// gap was clamped to zero.
    #[serde(default)]
    pub gap_clamped: bool,
}

#[derive(Deserialize)]
struct ScalingLawModelRepr {
    bayes_risk: f64,
    surrogate_gap: f64,
    original_fit: PowerLawFit,
    surrogate_fit: PowerLawFit,
    beta: f64,
    #[serde(default)]
    gap_clamped: bool,
}

impl ScalingLawModel {
    pub fn from_fits(original_fit: PowerLawFit, surrogate_fit: PowerLawFit) -> Self {
        let raw_gap = surrogate_fit.asymptote - original_fit.asymptote;
        Self {
            bayes_risk: original_fit.asymptote,
            surrogate_gap: raw_gap.max(0.0),
            original_fit,
            surrogate_fit,
            beta: original_fit.exponent,
            gap_clamped: raw_gap < 0.0,
        }
    }

    pub fn degenerate(&self) -> bool {
        self.original_fit.degenerate || self.surrogate_fit.degenerate
    }
}

impl TryFrom<ScalingLawModelRepr> for ScalingLawModel {
    type Error = Error;

    fn try_from(r: ScalingLawModelRepr) -> Result<Self> {
        let expected = Self::from_fits(r.original_fit, r.surrogate_fit);
        let tol = 1e-12 * (1.0 + expected.surrogate_gap.abs());
        if (r.bayes_risk - expected.bayes_risk).abs() > tol {
            return Err(Error::invalid(
                "bayes_risk",
                "must equal original_fit.asymptote",
            ));
        }
        if (r.surrogate_gap - expected.surrogate_gap).abs() > tol {
            return Err(Error::invalid(
                "surrogate_gap",
                "must equal surrogate_fit.asymptote - original_fit.asymptote, clamped at 0",
            ));
        }
        if r.beta != expected.beta {
            return Err(Error::invalid("beta", "must equal original_fit.exponent"));
        }
        Ok(Self {
            gap_clamped: r.gap_clamped || expected.gap_clamped,
            ..expected
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskPoint {
    pub alpha: f64,
    pub risk: f64,
    pub std_error: f64,
}

/// Risk as a function of the surrogate weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RiskCurveRepr")]
pub struct RiskCurve {
    points: Vec<RiskPoint>,
}

#[derive(Deserialize)]
struct RiskCurveRepr {
    points: Vec<RiskPoint>,
}

impl RiskCurve {
    pub fn new(points: Vec<RiskPoint>) -> Result<Self> {
        for p in &points {
            check_unit_interval("alpha", p.alpha)?;
            check_nonneg("std_error", p.std_error)?;
            if p.risk.is_nan() {
                return Err(Error::invalid("risk", "NaN"));
            }
        }
        if points.windows(2).any(|w| w[1].alpha <= w[0].alpha) {
            return Err(Error::invalid("alpha", "must be strictly increasing"));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[RiskPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Point of minimal risk; the first one on ties.
    pub fn argmin(&self) -> Option<RiskPoint> {
        self.points
            .iter()
            .copied()
            .reduce(|best, p| if p.risk < best.risk { p } else { best })
    }
}

impl TryFrom<RiskCurveRepr> for RiskCurve {
    type Error = Error;

    fn try_from(r: RiskCurveRepr) -> Result<Self> {
        Self::new(r.points)
    }
}

/// Gaussian sequence model with a diagonal quadratic penalty.
///
/// `mu` and `rho_decay` describe the eigenvalue growth `omega_k ~ k^mu` and
/// the tail decay `||theta_{>k}||^2 ~ k^(-2 rho)`; they only feed the
/// penalty-selection rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SequenceModelSpecRepr")]
pub struct SequenceModelSpec {
    pub theta_star: Vec<f64>,
    pub theta_star_s: Vec<f64>,
    pub omega: Vec<f64>,
    pub sigma: f64,
    pub sigma_s: f64,
    pub n: usize,
    pub m: usize,
    pub mu: f64,
    pub rho_decay: f64,
}

#[derive(Deserialize)]
struct SequenceModelSpecRepr {
    theta_star: Vec<f64>,
    theta_star_s: Vec<f64>,
    omega: Vec<f64>,
    sigma: f64,
    sigma_s: f64,
    n: usize,
    m: usize,
    mu: f64,
    rho_decay: f64,
}

impl SequenceModelSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        theta_star: Vec<f64>,
        theta_star_s: Vec<f64>,
        omega: Vec<f64>,
        sigma: f64,
        sigma_s: f64,
        n: usize,
        m: usize,
        mu: f64,
        rho_decay: f64,
    ) -> Result<Self> {
        let dim = theta_star.len();
        if dim == 0 {
            return Err(Error::invalid("theta_star", "must be non-empty"));
        }
        for (field, v) in [("theta_star_s", &theta_star_s), ("omega", &omega)] {
            if v.len() != dim {
                return Err(Error::invalid(
                    field,
                    format!("length {} differs from theta_star length {dim}", v.len()),
                ));
            }
        }
        check_all_finite("theta_star", &theta_star)?;
        check_all_finite("theta_star_s", &theta_star_s)?;
        for &w in &omega {
            check_nonneg("omega", w)?;
        }
        if omega.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("omega", "must be non-decreasing"));
        }
        check_nonneg("sigma", sigma)?;
        check_nonneg("sigma_s", sigma_s)?;
        if n == 0 {
            return Err(Error::invalid("n", "must be positive"));
        }
        if m == 0 {
            return Err(Error::invalid("m", "must be positive"));
        }
        if !(mu > 0.5) || !mu.is_finite() {
            return Err(Error::invalid("mu", "must be > 1/2"));
        }
        check_positive("rho_decay", rho_decay)?;
        Ok(Self {
            theta_star,
            theta_star_s,
            omega,
            sigma,
            sigma_s,
            n,
            m,
            mu,
            rho_decay,
        })
    }

    pub fn dim(&self) -> usize {
        self.theta_star.len()
    }

    /// Same spec with different sample counts.
    pub fn with_counts(&self, n: usize, m: usize) -> Result<Self> {
        let mut s = self.clone();
        if n == 0 || m == 0 {
            return Err(Error::invalid("n", "sample counts must be positive"));
        }
        s.n = n;
        s.m = m;
        Ok(s)
    }

    /// Noise scale `(1-alpha)^2 sigma^2/n + alpha^2 sigma_s^2/m`.
    pub fn noise_scale(&self, alpha: f64) -> f64 {
        (1.0 - alpha).powi(2) * self.sigma * self.sigma / self.n as f64
            + alpha * alpha * self.sigma_s * self.sigma_s / self.m as f64
    }

    /// Squared distance between the two targets.
    pub fn gap(&self) -> f64 {
        self.theta_star
            .iter()
            .zip(&self.theta_star_s)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

impl TryFrom<SequenceModelSpecRepr> for SequenceModelSpec {
    type Error = Error;

    fn try_from(r: SequenceModelSpecRepr) -> Result<Self> {
        Self::new(
            r.theta_star,
            r.theta_star_s,
            r.omega,
            r.sigma,
            r.sigma_s,
            r.n,
            r.m,
            r.mu,
            r.rho_decay,
        )
    }
}

/// A complex Fourier coefficient as a `(real, imaginary)` pair.
pub type Coefficient = (f64, f64);

/// Fourier coefficients indexed by integer lattice point `k`; the frequency
/// is `q = 2 pi k`.
pub type CoefficientMap = BTreeMap<Vec<i64>, Coefficient>;

/// White-noise nonparametric regression on `[0,1]^dim` in the Fourier domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NonparamSpecRepr", into = "NonparamSpecRepr")]
pub struct NonparamSpec {
    pub dim: usize,
    pub penalty_order: f64,
    pub target_coeffs: CoefficientMap,
    pub surrogate_coeffs: CoefficientMap,
    /// Lattice is truncated to `max_i |k_i| <= truncation`.
    pub truncation: usize,
    pub sigma: f64,
    pub sigma_s: f64,
    pub n: usize,
    pub m: usize,
    pub lambda: f64,
}

#[derive(Serialize, Deserialize)]
struct CoeffEntry {
    q: Vec<i64>,
    value: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct NonparamSpecRepr {
    dim: usize,
    penalty_order: f64,
    target_coeffs: Vec<CoeffEntry>,
    surrogate_coeffs: Vec<CoeffEntry>,
    truncation: usize,
    sigma: f64,
    sigma_s: f64,
    n: usize,
    m: usize,
    lambda: f64,
}

impl NonparamSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dim: usize,
        penalty_order: f64,
        target_coeffs: CoefficientMap,
        surrogate_coeffs: CoefficientMap,
        truncation: usize,
        sigma: f64,
        sigma_s: f64,
        n: usize,
        m: usize,
        lambda: f64,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be positive"));
        }
        if truncation == 0 {
            return Err(Error::invalid("truncation", "must be positive"));
        }
        check_positive("penalty_order", penalty_order)?;
        check_nonneg("sigma", sigma)?;
        check_nonneg("sigma_s", sigma_s)?;
        check_nonneg("lambda", lambda)?;
        if n == 0 || m == 0 {
            return Err(Error::invalid("n", "sample counts must be positive"));
        }
        if !target_coeffs.keys().eq(surrogate_coeffs.keys()) {
            return Err(Error::invalid(
                "surrogate_coeffs",
                "key set differs from target_coeffs",
            ));
        }
        for (field, map) in [
            ("target_coeffs", &target_coeffs),
            ("surrogate_coeffs", &surrogate_coeffs),
        ] {
            for (k, &(re, im)) in map {
                if k.len() != dim {
                    return Err(Error::invalid(field, format!("lattice point {k:?} has wrong dimension")));
                }
                if k.iter().any(|c| c.unsigned_abs() as usize > truncation) {
                    return Err(Error::invalid(field, format!("lattice point {k:?} outside truncation")));
                }
                if !re.is_finite() || !im.is_finite() {
                    return Err(Error::invalid(field, "non-finite coefficient"));
                }
                let neg: Vec<i64> = k.iter().map(|c| -c).collect();
                let Some(&(nre, nim)) = map.get(&neg) else {
                    return Err(Error::invalid(field, format!("missing conjugate of {k:?}")));
                };
                let tol = 1e-12 * (1.0 + re.abs() + im.abs());
                if (nre - re).abs() > tol || (nim + im).abs() > tol {
                    return Err(Error::invalid(
                        field,
                        format!("coefficient at {neg:?} is not the conjugate of {k:?}"),
                    ));
                }
            }
        }
        Ok(Self {
            dim,
            penalty_order,
            target_coeffs,
            surrogate_coeffs,
            truncation,
            sigma,
            sigma_s,
            n,
            m,
            lambda,
        })
    }
}

impl TryFrom<NonparamSpecRepr> for NonparamSpec {
    type Error = Error;

    fn try_from(r: NonparamSpecRepr) -> Result<Self> {
        let collect = |field: &'static str, entries: Vec<CoeffEntry>| -> Result<CoefficientMap> {
            let mut map = CoefficientMap::new();
            for e in entries {
                if map.insert(e.q.clone(), (e.value[0], e.value[1])).is_some() {
                    return Err(Error::invalid(field, format!("duplicate lattice point {:?}", e.q)));
                }
            }
            Ok(map)
        };
        Self::new(
            r.dim,
            r.penalty_order,
            collect("target_coeffs", r.target_coeffs)?,
            collect("surrogate_coeffs", r.surrogate_coeffs)?,
            r.truncation,
            r.sigma,
            r.sigma_s,
            r.n,
            r.m,
            r.lambda,
        )
    }
}

impl From<NonparamSpec> for NonparamSpecRepr {
    fn from(s: NonparamSpec) -> Self {
        let entries = |map: CoefficientMap| {
            map.into_iter()
                .map(|(q, (re, im))| CoeffEntry { q, value: [re, im] })
                .collect()
        };
        NonparamSpecRepr {
            dim: s.dim,
            penalty_order: s.penalty_order,
            target_coeffs: entries(s.target_coeffs),
            surrogate_coeffs: entries(s.surrogate_coeffs),
            truncation: s.truncation,
            sigma: s.sigma,
            sigma_s: s.sigma_s,
            n: s.n,
            m: s.m,
            lambda: s.lambda,
        }
    }
}

/// Proportional-asymptotics ridge problem with isotropic Gaussian covariates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HiDimSpecRepr")]
pub struct HiDimSpec {
    /// Limit of `n / d`.
    pub delta: f64,
    /// Limit of `m / d`.
    pub delta_s: f64,
    pub r: f64,
    pub r_s: f64,
    /// Angle between the original and surrogate coefficient vectors.
    pub gamma: f64,
    pub sigma: f64,
    pub sigma_s: f64,
    pub lambda: f64,
}

#[derive(Deserialize)]
struct HiDimSpecRepr {
    delta: f64,
    delta_s: f64,
    r: f64,
    r_s: f64,
    gamma: f64,
    sigma: f64,
    sigma_s: f64,
    lambda: f64,
}

impl HiDimSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        delta: f64,
        delta_s: f64,
        r: f64,
        r_s: f64,
        gamma: f64,
        sigma: f64,
        sigma_s: f64,
        lambda: f64,
    ) -> Result<Self> {
        check_positive("delta", delta)?;
        check_positive("delta_s", delta_s)?;
        check_nonneg("r", r)?;
        check_nonneg("r_s", r_s)?;
        if !(0.0..=PI).contains(&gamma) {
            return Err(Error::invalid("gamma", format!("{gamma} outside [0, pi]")));
        }
        check_nonneg("sigma", sigma)?;
        check_nonneg("sigma_s", sigma_s)?;
        check_positive("lambda", lambda)?;
        if delta + delta_s <= 1.0 {
            return Err(Error::InvalidRegime {
                sum: delta + delta_s,
            });
        }
        Ok(Self {
            delta,
            delta_s,
            r,
            r_s,
            gamma,
            sigma,
            sigma_s,
            lambda,
        })
    }

    /// `||theta* - theta*_s||^2`, the infinite-surrogate excess risk.
    pub fn gap(&self) -> f64 {
        self.r * self.r + self.r_s * self.r_s - 2.0 * self.r * self.r_s * self.gamma.cos()
    }
}

impl TryFrom<HiDimSpecRepr> for HiDimSpec {
    type Error = Error;

    fn try_from(r: HiDimSpecRepr) -> Result<Self> {
        Self::new(
            r.delta, r.delta_s, r.r, r.r_s, r.gamma, r.sigma, r.sigma_s, r.lambda,
        )
    }
}

/// Minimizer of the scalar variational problem for one `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HiDimSolutionRepr")]
pub struct HiDimSolution {
    pub alpha: f64,
    pub xi: f64,
    pub xi_perp: f64,
    pub omega: f64,
    pub rho_bar: f64,
    /// `rho_s / rho`; infinite at `alpha = 1`, serialized as `"inf"`.
    #[serde(with = "extended_float")]
    pub t: f64,
    pub rho: f64,
    pub rho_s: f64,
    pub tau: f64,
    pub tau_s: f64,
    pub risk: f64,
}

#[derive(Deserialize)]
struct HiDimSolutionRepr {
    alpha: f64,
    xi: f64,
    xi_perp: f64,
    omega: f64,
    rho_bar: f64,
    #[serde(with = "extended_float")]
    t: f64,
    rho: f64,
    rho_s: f64,
    tau: f64,
    tau_s: f64,
    risk: f64,
}

impl HiDimSolution {
    /// Checks `rho^2 + rho_s^2 = rho_bar^2` and `risk = (xi - r)^2 + xi_perp^2 + omega^2`
    /// to a relative tolerance of 1e-9.
    pub fn validate(&self, r: f64) -> Result<()> {
        for (field, v) in [
            ("xi_perp", self.xi_perp),
            ("omega", self.omega),
            ("rho", self.rho),
            ("rho_s", self.rho_s),
            ("tau", self.tau),
            ("tau_s", self.tau_s),
            ("risk", self.risk),
        ] {
            check_nonneg(field, v)?;
        }
        check_positive("rho_bar", self.rho_bar)?;
        if self.t.is_nan() || self.t < 0.0 {
            return Err(Error::invalid("t", "must be >= 0"));
        }
        let rr = self.rho * self.rho + self.rho_s * self.rho_s;
        let rb = self.rho_bar * self.rho_bar;
        if (rr - rb).abs() > 1e-9 * rb.max(1e-300) {
            return Err(Error::invalid("rho_bar", "rho^2 + rho_s^2 != rho_bar^2"));
        }
        let risk = (self.xi - r).powi(2) + self.xi_perp.powi(2) + self.omega.powi(2);
        if (risk - self.risk).abs() > 1e-9 * (1.0 + risk) {
            return Err(Error::invalid("risk", "inconsistent with (xi, xi_perp, omega)"));
        }
        Ok(())
    }

    /// Recover `r` from `tau` and the minimizer, then validate.
    fn self_consistent(&self) -> Result<()> {
        // tau^2 = (xi - r)^2 + xi_perp^2 + omega^2 = risk, so tau^2 must equal risk.
        if (self.tau * self.tau - self.risk).abs() > 1e-9 * (1.0 + self.risk) {
            return Err(Error::invalid("tau", "tau^2 must equal risk"));
        }
        let excess = (self.risk - self.xi_perp.powi(2) - self.omega.powi(2)).max(0.0);
        // Either root r = xi +- sqrt(excess) reproduces the same risk.
        self.validate(self.xi + excess.sqrt())
    }
}

impl TryFrom<HiDimSolutionRepr> for HiDimSolution {
    type Error = Error;

    fn try_from(r: HiDimSolutionRepr) -> Result<Self> {
        let s = HiDimSolution {
            alpha: r.alpha,
            xi: r.xi,
            xi_perp: r.xi_perp,
            omega: r.omega,
            rho_bar: r.rho_bar,
            t: r.t,
            rho: r.rho,
            rho_s: r.rho_s,
            tau: r.tau,
            tau_s: r.tau_s,
            risk: r.risk,
        };
        s.self_consistent()?;
        Ok(s)
    }
}

/// Local curvature data for the fixed-dimension expansion of the excess risk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LowDimCurvatureRepr", into = "LowDimCurvatureRepr")]
pub struct LowDimCurvature {
    hessian: DMatrix<f64>,
    cov_original: DMatrix<f64>,
    cov_surrogate: DMatrix<f64>,
    shift_gradient: DVector<f64>,
}

#[derive(Serialize, Deserialize)]
struct LowDimCurvatureRepr {
    hessian: Vec<Vec<f64>>,
    cov_original: Vec<Vec<f64>>,
    cov_surrogate: Vec<Vec<f64>>,
    shift_gradient: Vec<f64>,
}

impl LowDimCurvature {
    pub fn new(
        hessian: DMatrix<f64>,
        cov_original: DMatrix<f64>,
        cov_surrogate: DMatrix<f64>,
        shift_gradient: DVector<f64>,
    ) -> Result<Self> {
        let d = hessian.nrows();
        if d == 0 {
            return Err(Error::invalid("hessian", "must be non-empty"));
        }
        for (field, mat) in [
            ("hessian", &hessian),
            ("cov_original", &cov_original),
            ("cov_surrogate", &cov_surrogate),
        ] {
            if mat.nrows() != d || mat.ncols() != d {
                return Err(Error::invalid(field, format!("must be {d}x{d}")));
            }
            if mat.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(field, "non-finite entry"));
            }
            let scale = mat.amax().max(1.0);
            if (mat - mat.transpose()).amax() > 1e-10 * scale {
                return Err(Error::invalid(field, "must be symmetric"));
            }
        }
        if shift_gradient.len() != d {
            return Err(Error::DimMismatch {
                expected: d,
                found: shift_gradient.len(),
            });
        }
        if hessian.clone().cholesky().is_none() {
            return Err(Error::SingularHessian);
        }
        for (field, mat) in [("cov_original", &cov_original), ("cov_surrogate", &cov_surrogate)] {
            let min_eig = mat.clone().symmetric_eigenvalues().min();
            if min_eig < -1e-10 * mat.amax().max(1.0) {
                return Err(Error::invalid(field, "must be positive semi-definite"));
            }
        }
        Ok(Self {
            hessian,
            cov_original,
            cov_surrogate,
            shift_gradient,
        })
    }

    pub fn dim(&self) -> usize {
        self.hessian.nrows()
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.hessian
    }

    pub fn cov_original(&self) -> &DMatrix<f64> {
        &self.cov_original
    }

    pub fn cov_surrogate(&self) -> &DMatrix<f64> {
        &self.cov_surrogate
    }

    pub fn shift_gradient(&self) -> &DVector<f64> {
        &self.shift_gradient
    }
}

impl TryFrom<LowDimCurvatureRepr> for LowDimCurvature {
    type Error = Error;

    fn try_from(r: LowDimCurvatureRepr) -> Result<Self> {
        Self::new(
            rows_to_matrix("hessian", &r.hessian)?,
            rows_to_matrix("cov_original", &r.cov_original)?,
            rows_to_matrix("cov_surrogate", &r.cov_surrogate)?,
            DVector::from_vec(r.shift_gradient),
        )
    }
}

impl From<LowDimCurvature> for LowDimCurvatureRepr {
    fn from(c: LowDimCurvature) -> Self {
        LowDimCurvatureRepr {
            hessian: matrix_to_rows(&c.hessian),
            cov_original: matrix_to_rows(&c.cov_original),
            cov_surrogate: matrix_to_rows(&c.cov_surrogate),
            shift_gradient: c.shift_gradient.iter().copied().collect(),
        }
    }
}

fn default_sigma() -> f64 {
    1.0
}

fn default_test_size() -> usize {
    100_000
}

fn default_tol() -> f64 {
    1e-8
}

fn default_max_iter() -> usize {
    100_000
}

/// Data-generating process of a simulated experiment, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    /// `z ~ N(theta*, sigma^2 I)` vs `N(theta*_s, sigma_s^2 I)` with
    /// `||theta* - theta*_s||^2 = gap`; estimator is the weighted mean.
    GaussianMean {
        dim: usize,
        gap: f64,
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default = "default_sigma")]
        sigma_s: f64,
    },
    /// Symmetric two-class mixture `x | y ~ N(y theta, I)` with unit-norm
    /// targets at angle `gamma`; estimator is weighted logistic regression,
    /// risk is the 0-1 test error.
    GaussianMixture {
        dim: usize,
        gamma: f64,
        #[serde(default = "default_test_size")]
        test_size: usize,
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default = "default_max_iter")]
        max_iter: usize,
    },
    /// `y = <x, theta> + noise` with isotropic Gaussian rows; estimator is
    /// weighted ridge.
    HiDimLinear {
        dim: usize,
        r: f64,
        r_s: f64,
        gamma: f64,
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default = "default_sigma")]
        sigma_s: f64,
    },
    /// Gaussian sequence model; `n` and `m` of `spec` are replaced by the
    /// plan grids.
    SequenceModel { spec: SequenceModelSpec },
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::GaussianMean { .. } => "gaussian_mean",
            Generator::GaussianMixture { .. } => "gaussian_mixture",
            Generator::HiDimLinear { .. } => "hi_dim_linear",
            Generator::SequenceModel { .. } => "sequence_model",
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Generator::GaussianMean {
                dim,
                gap,
                sigma,
                sigma_s,
            } => {
                check_dim(dim)?;
                check_nonneg("gap", gap)?;
                check_nonneg("sigma", sigma)?;
                check_nonneg("sigma_s", sigma_s)
            }
            Generator::GaussianMixture {
                dim,
                gamma,
                test_size,
                tol,
                max_iter,
            } => {
                check_dim(dim)?;
                check_angle(dim, gamma)?;
                if test_size == 0 {
                    return Err(Error::invalid("test_size", "must be positive"));
                }
                if max_iter == 0 {
                    return Err(Error::invalid("max_iter", "must be positive"));
                }
                check_positive("tol", tol)
            }
            Generator::HiDimLinear {
                dim,
                r,
                r_s,
                gamma,
                sigma,
                sigma_s,
            } => {
                check_dim(dim)?;
                check_nonneg("r", r)?;
                check_nonneg("r_s", r_s)?;
                check_angle(dim, gamma)?;
                check_nonneg("sigma", sigma)?;
                check_nonneg("sigma_s", sigma_s)
            }
            Generator::SequenceModel { .. } => Ok(()),
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::invalid("dim", "must be positive"));
    }
    Ok(())
}

fn check_angle(dim: usize, gamma: f64) -> Result<()> {
    if !(0.0..=PI).contains(&gamma) {
        return Err(Error::invalid("gamma", format!("{gamma} outside [0, pi]")));
    }
    if dim < 2 && gamma != 0.0 && gamma != PI {
        return Err(Error::invalid("gamma", "a non-trivial angle needs dim >= 2"));
    }
    Ok(())
}

/// Grid of simulated experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExperimentPlanRepr")]
pub struct ExperimentPlan {
    pub n_grid: Vec<usize>,
    pub m_grid: Vec<usize>,
    pub alpha_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub generator: Generator,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentPlanRepr {
    n_grid: Vec<usize>,
    m_grid: Vec<usize>,
    alpha_grid: Vec<f64>,
    lambda_grid: Vec<f64>,
    replicates: usize,
    seed: u64,
    generator: Generator,
}

impl ExperimentPlan {
    pub fn new(
        n_grid: Vec<usize>,
        m_grid: Vec<usize>,
        alpha_grid: Vec<f64>,
        lambda_grid: Vec<f64>,
        replicates: usize,
        seed: u64,
        generator: Generator,
    ) -> Result<Self> {
        if replicates == 0 {
            return Err(Error::invalid("replicates", "must be >= 1"));
        }
        for (field, empty) in [
            ("n_grid", n_grid.is_empty()),
            ("m_grid", m_grid.is_empty()),
            ("alpha_grid", alpha_grid.is_empty()),
            ("lambda_grid", lambda_grid.is_empty()),
        ] {
            if empty {
                return Err(Error::invalid(field, "must be non-empty"));
            }
        }
        for &a in &alpha_grid {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::invalid(
                    "alpha_grid",
                    format!("alpha {a} outside [0, 1]"),
                ));
            }
        }
        for &l in &lambda_grid {
            check_nonneg("lambda_grid", l)?;
            if matches!(generator, Generator::GaussianMixture { .. }) && l <= 0.0 {
                return Err(Error::invalid(
                    "lambda_grid",
                    "logistic regression needs lambda > 0",
                ));
            }
        }
        if n_grid.contains(&0) && m_grid.contains(&0) {
            return Err(Error::invalid(
                "n_grid",
                "n = 0 and m = 0 would share a cell",
            ));
        }
        if matches!(generator, Generator::SequenceModel { .. })
            && (n_grid.contains(&0) || m_grid.contains(&0))
        {
            return Err(Error::invalid(
                "n_grid",
                "the sequence model needs n >= 1 and m >= 1 in every cell",
            ));
        }
        generator.validate()?;
        Ok(Self {
            n_grid,
            m_grid,
            alpha_grid,
            lambda_grid,
            replicates,
            seed,
            generator,
        })
    }
}

impl TryFrom<ExperimentPlanRepr> for ExperimentPlan {
    type Error = Error;

    fn try_from(r: ExperimentPlanRepr) -> Result<Self> {
        Self::new(
            r.n_grid,
            r.m_grid,
            r.alpha_grid,
            r.lambda_grid,
            r.replicates,
            r.seed,
            r.generator,
        )
    }
}

pub(crate) fn rows_to_matrix(field: &'static str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::invalid(field, "rows have unequal lengths"));
    }
    Ok(DMatrix::from_fn(n, d, |i, j| rows[i][j]))
}

pub(crate) fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn check_unit_interval(field: &'static str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::invalid(field, format!("{v} outside [0, 1]")));
    }
    Ok(())
}

fn check_nonneg(field: &'static str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::invalid(field, format!("{v} must be finite and >= 0")));
    }
    Ok(())
}

fn check_positive(field: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::invalid(field, format!("{v} must be finite and > 0")));
    }
    Ok(())
}

fn check_all_finite(field: &'static str, v: &[f64]) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid(field, "non-finite entry"));
    }
    Ok(())
}

mod extended_float {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Str(s) => Err(de::Error::custom(format!("expected number or \"inf\", got {s:?}"))),
        }
    }
}
