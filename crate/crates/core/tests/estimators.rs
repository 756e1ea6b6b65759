use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use surrogate_mix::estimators::*;
use surrogate_mix::model::{LabeledDataset, MixtureConfig, SequenceModelSpec, Source};
use surrogate_mix::sim::{gen_gaussian_mixture, gen_hidim_linear, planar_pair, SimRng};

fn linear_pair(d: usize, n: usize, m: usize, seed: u64) -> (LabeledDataset, LabeledDataset) {
    let (t, ts) = planar_pair(d, 1.0, 0.8, 0.7);
    let o = gen_hidim_linear(d, n, &t, 0.5, Source::Original, &mut SimRng::new(seed, 0)).unwrap();
    let s = gen_hidim_linear(d, m, &ts, 0.5, Source::Surrogate, &mut SimRng::new(seed, 1)).unwrap();
    (o, s)
}

fn mixture_pair(d: usize, n: usize, m: usize, seed: u64) -> (LabeledDataset, LabeledDataset) {
    let (t, ts) = planar_pair(d, 1.0, 1.0, 0.5);
    let o = gen_gaussian_mixture(d, n, &t, Source::Original, &mut SimRng::new(seed, 0)).unwrap();
    let s = gen_gaussian_mixture(d, m, &ts, Source::Surrogate, &mut SimRng::new(seed, 1)).unwrap();
    (o, s)
}

fn cfg(alpha: f64, lambda: f64) -> MixtureConfig {
    MixtureConfig::new(alpha, lambda).unwrap()
}

#[test]
fn endpoints_are_bit_identical_to_single_source_fits() {
    let (o, s) = linear_pair(6, 40, 70, 3);
    let empty_o = LabeledDataset::empty(6, Source::Original);
    let empty_s = LabeledDataset::empty(6, Source::Surrogate);

    let r0 = weighted_ridge(&o, &s, cfg(0.0, 0.3)).unwrap();
    assert_eq!(r0, weighted_ridge(&o, &empty_s, cfg(0.0, 0.3)).unwrap());
    let r1 = weighted_ridge(&o, &s, cfg(1.0, 0.3)).unwrap();
    assert_eq!(r1, weighted_ridge(&empty_o, &s, cfg(1.0, 0.3)).unwrap());

    assert_eq!(
        weighted_mean(&o, &s, 0.0).unwrap(),
        weighted_mean(&o, &empty_s, 0.0).unwrap()
    );
    assert_eq!(
        weighted_mean(&o, &s, 1.0).unwrap(),
        weighted_mean(&empty_o, &s, 1.0).unwrap()
    );

    let (mo, ms) = mixture_pair(4, 60, 80, 5);
    let l0 = weighted_logistic(&mo, &ms, cfg(0.0, 0.05), 1e-10, 100_000).unwrap();
    let e = LabeledDataset::empty(4, Source::Surrogate);
    assert_eq!(l0, weighted_logistic(&mo, &e, cfg(0.0, 0.05), 1e-10, 100_000).unwrap());
    let l1 = weighted_logistic(&mo, &ms, cfg(1.0, 0.05), 1e-10, 100_000).unwrap();
    let e = LabeledDataset::empty(4, Source::Original);
    assert_eq!(l1, weighted_logistic(&e, &ms, cfg(1.0, 0.05), 1e-10, 100_000).unwrap());
}

#[test]
fn pooling_weight_matches_concatenated_ridge() {
    let (o, s) = linear_pair(5, 30, 90, 11);
    let alpha = 90.0 / 120.0;
    let weighted = weighted_ridge(&o, &s, cfg(alpha, 0.2)).unwrap();
    let pooled = o.concat(&s).unwrap();
    let empty = LabeledDataset::empty(5, Source::Surrogate);
    let direct = weighted_ridge(&pooled, &empty, cfg(0.0, 0.2)).unwrap();
    assert!((weighted - &direct).norm() <= 1e-10 * direct.norm());

    // Objective identity at an arbitrary point.
    let theta = DVector::from_fn(5, |i, _| 0.3 * i as f64 - 0.5);
    let a = ridge_objective(&o, &s, cfg(alpha, 0.2), &theta).unwrap();
    let b = ridge_objective(&pooled, &empty, cfg(0.0, 0.2), &theta).unwrap();
    assert!((a - b).abs() <= 1e-12 * b.abs());
}

fn central_difference(f: impl Fn(&DVector<f64>) -> f64, at: &DVector<f64>, h: f64) -> DVector<f64> {
    DVector::from_fn(at.len(), |i, _| {
        let mut p = at.clone();
        let mut q = at.clone();
        p[i] += h;
        q[i] -= h;
        (f(&p) - f(&q)) / (2.0 * h)
    })
}

#[test]
fn ridge_gradient_vanishes_at_solution() {
    let (o, s) = linear_pair(5, 25, 35, 17);
    let c = cfg(0.4, 0.1);
    let theta = weighted_ridge(&o, &s, c).unwrap();
    let f = |t: &DVector<f64>| ridge_objective(&o, &s, c, t).unwrap();
    let fd = central_difference(f, &theta, 1e-5);
    assert!(fd.norm() < 1e-6, "finite-difference gradient {}", fd.norm());

    // Away from the solution the closed-form gradient matches too.
    let at = &theta + DVector::from_element(5, 0.3);
    let wo = 0.6 / 25.0;
    let ws = 0.4 / 35.0;
    let analytic = -(o.features().transpose() * (o.responses() - o.features() * &at)) * wo
        - (s.features().transpose() * (s.responses() - s.features() * &at)) * ws
        + &at * 0.1;
    let fd = central_difference(f, &at, 1e-5);
    assert!((&analytic - &fd).norm() <= 1e-4 * analytic.norm());
}

#[test]
fn logistic_gradient_matches_finite_difference() {
    let (o, s) = mixture_pair(4, 50, 70, 23);
    let c = cfg(0.3, 0.02);
    let model = WeightedLogistic::new(&o, &s, c).unwrap();
    let theta = model.solve(1e-10, 100_000).unwrap();
    assert!(model.gradient(&theta).norm() <= 1e-10);
    let fd = central_difference(|t| model.objective(t), &theta, 1e-5);
    assert!(fd.norm() < 1e-7);

    for shift in [0.1, -0.4, 1.0] {
        let at = &theta + DVector::from_fn(4, |i, _| shift * (i as f64 + 1.0));
        let g = model.gradient(&at);
        let fd = central_difference(|t| model.objective(t), &at, 1e-5);
        assert!((&g - &fd).norm() <= 1e-4 * g.norm(), "shift {shift}");
    }
}

#[test]
fn logistic_alpha_zero_on_symmetric_data_is_zero() {
    // Rows (x, +1) and (-x, +1): closed under (x, y) -> (-x, y).
    let rows = vec![vec![1.0, 2.0], vec![-1.0, -2.0], vec![0.5, -3.0], vec![-0.5, 3.0]];
    let o = LabeledDataset::from_rows(&rows, vec![1.0; 4], Source::Original).unwrap();
    let s = LabeledDataset::empty(2, Source::Surrogate);
    let theta = weighted_logistic(&o, &s, cfg(0.0, 0.1), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    assert!(theta.norm() < 1e-9);
}

#[test]
fn logistic_scalar_example_matches_grid_search() {
    let o = LabeledDataset::from_rows(&[vec![1.0]], vec![1.0], Source::Original).unwrap();
    let s = LabeledDataset::from_rows(&[vec![1.0]], vec![-1.0], Source::Surrogate).unwrap();
    let c = cfg(0.5, 0.1);
    let model = WeightedLogistic::new(&o, &s, c).unwrap();
    let theta = model.solve(DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();

    // Independent scalar objective on a grid over [-5, 5].
    let f = |t: f64| 0.5 * (1.0 + (-t).exp()).ln() + 0.5 * (1.0 + t.exp()).ln() + 0.1 * t * t;
    let best = (0..=100_000)
        .map(|i| -5.0 + 1e-4 * i as f64)
        .min_by(|a, b| f(*a).total_cmp(&f(*b)))
        .unwrap();
    assert!((theta[0] - best).abs() < 1e-4);
    assert!(theta[0].abs() < 1e-9);
}

#[test]
fn sequence_estimate_limits() {
    let spec = SequenceModelSpec::new(
        vec![1.0, 1.0],
        vec![0.0, 0.0],
        vec![1.0, 1e12],
        1.0,
        1.0,
        10,
        10,
        1.0,
        1.0,
    )
    .unwrap();
    let y = [2.0, 2.0];
    let ys = [0.0, 0.0];
    let free = sequence_estimate(&spec, &y, &ys, cfg(0.25, 0.0)).unwrap();
    assert_eq!(free, vec![1.5, 1.5]);
    let pen = sequence_estimate(&spec, &y, &ys, cfg(0.25, 1.0)).unwrap();
    assert!((pen[0] - 0.75).abs() < 1e-15);
    assert!(pen[1].abs() < 1e-11);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ridge_is_affine_equivariant_in_responses(
        seed in 0u64..1000,
        alpha in 0.0f64..=1.0,
        lambda in 0.01f64..2.0,
        c in -5.0f64..5.0,
    ) {
        let (o, s) = linear_pair(4, 12, 15, seed);
        let scale = |ds: &LabeledDataset| {
            LabeledDataset::new(ds.features().clone(), ds.responses() * c, ds.source()).unwrap()
        };
        let base = weighted_ridge(&o, &s, cfg(alpha, lambda)).unwrap();
        let scaled = weighted_ridge(&scale(&o), &scale(&s), cfg(alpha, lambda)).unwrap();
        prop_assert!((scaled - base.clone() * c).norm() <= 1e-10 * (1.0 + c.abs() * base.norm()));
    }

    #[test]
    fn weighted_mean_is_convex_combination(
        rows in proptest::collection::vec(-10.0f64..10.0, 6),
        alpha in 0.0f64..=1.0,
    ) {
        let o = LabeledDataset::unlabeled(DMatrix::from_row_slice(1, 3, &rows[..3]), Source::Original).unwrap();
        let s = LabeledDataset::unlabeled(DMatrix::from_row_slice(1, 3, &rows[3..]), Source::Surrogate).unwrap();
        let m = weighted_mean(&o, &s, alpha).unwrap();
        for j in 0..3 {
            let expect = (1.0 - alpha) * rows[j] + alpha * rows[3 + j];
            prop_assert!((m[j] - expect).abs() <= 1e-12);
        }
    }
}
