//! Small derivative-free minimizers used by the oracles and the scaling fit.

use crate::error::{Error, Result};

pub(crate) const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
///
/// Returns `(x, f(x))`; the endpoints are compared too, so a monotone `f`
/// yields the better endpoint.
pub(crate) fn golden_section(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Nelder-Mead on `R^3` with standard coefficients.
///
/// Stops once every vertex lies within `tol` of the best one.
pub(crate) fn nelder_mead(
    f: &mut impl FnMut(&[f64; 3]) -> Result<f64>,
    start: [f64; 3],
    step: f64,
    tol: f64,
    max_iter: usize,
) -> Result<([f64; 3], f64)> {
    const N: usize = 3;
    let mut simplex: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    simplex.push((start, f(&start)?));
    for i in 0..N {
        let mut x = start;
        x[i] += step;
        simplex.push((x, f(&x)?));
    }
    let lerp = |a: &[f64; N], b: &[f64; N], t: f64| -> [f64; N] {
        std::array::from_fn(|i| a[i] + t * (b[i] - a[i]))
    };

    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].0;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&best)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if diameter <= tol {
            return Ok(simplex[0]);
        }

        let centroid: [f64; N] =
            std::array::from_fn(|i| simplex[..N].iter().map(|(x, _)| x[i]).sum::<f64>() / N as f64);
        let (worst, f_worst) = simplex[N];
        let reflected = lerp(&centroid, &worst, -1.0);
        let f_ref = f(&reflected)?;

        if f_ref < simplex[0].1 {
            let expanded = lerp(&centroid, &worst, -2.0);
            let f_exp = f(&expanded)?;
            simplex[N] = if f_exp < f_ref {
                (expanded, f_exp)
            } else {
                (reflected, f_ref)
            };
            continue;
        }
        if f_ref < simplex[N - 1].1 {
            simplex[N] = (reflected, f_ref);
            continue;
        }
        let (contracted, f_con) = if f_ref < f_worst {
            let x = lerp(&centroid, &worst, -0.5);
            (x, f(&x)?)
        } else {
            let x = lerp(&centroid, &worst, 0.5);
            (x, f(&x)?)
        };
        if f_con < f_worst.min(f_ref) {
            simplex[N] = (contracted, f_con);
            continue;
        }
        for k in 1..=N {
            let x = lerp(&best, &simplex[k].0, 0.5);
            simplex[k] = (x, f(&x)?);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Err(Error::NotConverged {
        iterations: max_iter,
        residual: f64::NAN,
        last: simplex[0].0.to_vec(),
    })
}
