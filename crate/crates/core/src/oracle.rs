//! Independent reference implementations used to validate the main code
//! paths. Nothing here shares algorithmic machinery with the modules it
//! checks: the GLM oracle is classical IRLS on normal equations (no line
//! search), the dominance oracle is direct expectation arithmetic for the
//! rigid one-dimensional case, and the generator oracle is plain Monte
//! Carlo. The `oracle` CLI subcommand exposes them for inspection.

use crate::dataset::LabeledView;
use crate::error::{Error, Result};
use crate::glm::ModelSpec;
use crate::linalg;
use crate::rng::Rng;

/// Iteratively reweighted least squares for binary logistic regression:
/// repeatedly solves `(X'WX + P) theta = X'W z` with working response
/// `z = X theta + W^-1 (y - p)` until the coefficients settle. `P` is the
/// same scale-aware ridge used by the Newton path (`ridge * var(column)`,
/// intercept exempt), recomputed here from scratch. Returns the coefficients
/// and the unpenalized log-likelihood.
pub fn irls_fit(
    view: &LabeledView,
    spec: &ModelSpec,
    ridge: f64,
) -> Result<(Vec<f64>, f64)> {
    let d = spec.dim();
    let n = view.n();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| spec.design_row(view.x(i))).collect();
    let ys: Vec<f64> = (0..n).map(|i| view.y(i) as f64).collect();
    let penalty: Vec<f64> = (0..d)
        .map(|j| {
            if spec.intercept && j == 0 {
                return 0.0;
            }
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n as f64;
            let var = rows.iter().map(|r| (r[j] - mean) * (r[j] - mean)).sum::<f64>() / n as f64;
            ridge * var
        })
        .collect();
    let mut theta = vec![0.0; d];
    for _ in 0..200 {
        let mut xtwx = vec![vec![0.0; d]; d];
        let mut xtwz = vec![0.0; d];
        for (row, &y) in rows.iter().zip(&ys) {
            let eta = linalg::dot(row, &theta);
            let p = (1.0 / (1.0 + (-eta).exp())).clamp(1e-10, 1.0 - 1e-10);
            let w = p * (1.0 - p);
            let z = eta + (y - p) / w;
            for a in 0..d {
                for b in 0..d {
                    xtwx[a][b] += w * row[a] * row[b];
                }
                xtwz[a] += w * row[a] * z;
            }
        }
        for j in 0..d {
            xtwx[j][j] += penalty[j];
        }
        let next = linalg::solve_spd(&xtwx, &xtwz)
            .map_err(|col| Error::InvalidInput(format!("IRLS normal equations singular at {col}")))?;
        let delta = theta
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        theta = next;
        if delta < 1e-10 {
            break;
        }
    }
    let mut log_lik = 0.0;
    for (row, &y) in rows.iter().zip(&ys) {
        let eta = linalg::dot(row, &theta);
        let p = (1.0 / (1.0 + (-eta).exp())).clamp(1e-12, 1.0 - 1e-12);
        log_lik += y * p.ln() + (1.0 - y) * (1.0 - p).ln();
    }
    Ok((theta, log_lik))
}

/// Kendall rank correlation (tau-a) between two score vectors.
pub fn kendall_tau(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    assert!(n >= 2);
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            let x = (a[i] - a[j]).signum();
            let y = (b[i] - b[j]).signum();
            let prod = x * y;
            if prod > 0.0 {
                concordant += 1;
            } else if prod < 0.0 {
                discordant += 1;
            }
        }
    }
    (concordant - discordant) as f64 / (n * (n - 1) / 2) as f64
}

/// Monte Carlo estimate of `E[logistic(slope * x) | x > lo]` for standard
/// normal `x`; the oracle behind the strong-slope synthetic-data example.
pub fn mc_conditional_logistic_rate(slope: f64, lo: f64, draws: usize, seed: u64) -> f64 {
    let mut rng = Rng::new(seed);
    let mut sum = 0.0;
    let mut count = 0usize;
    while count < draws {
        let x = rng.next_normal();
        if x > lo {
            sum += 1.0 / (1.0 + (-slope * x).exp());
            count += 1;
        }
    }
    sum / draws as f64
}

/// One-dimensional dominance degree in the rigid case: when the observed
/// utilities span the full uniform lattice, the cardinal-difference
/// constraints pin the representation to the identity, so
/// `d_pi(a1, a2) = sum_s w_s (u[a1][s] - u[a2][s])` on the normalized scale.
/// `utilities[candidate][state]` are scalars.
pub fn k1_affine_degree(utilities: &[Vec<f64>], weights: &[f64], a1: usize, a2: usize) -> f64 {
    let lo = utilities
        .iter()
        .flatten()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let hi = utilities
        .iter()
        .flatten()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    weights
        .iter()
        .enumerate()
        .map(|(s, w)| w * ((utilities[a1][s] - lo) / span - (utilities[a2][s] - lo) / span))
        .sum()
}
