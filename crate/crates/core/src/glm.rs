//! Binary logistic regression: Newton-Raphson fitting, log-likelihood,
//! observed Fisher information, predictions and predictive variance.
//!
//! The design matrix of a [`ModelSpec`] is `[1?, x[c1], x[c2], ...]` with the
//! intercept column first. Fitted probabilities are clamped to
//! `[1e-12, 1 - 1e-12]` so log-likelihoods stay finite. The reported Fisher
//! matrix is always the unpenalized observed information `X' W X` at the
//! returned coefficients, even for ridge-stabilized fits.

use crate::dataset::LabeledView;
use crate::error::{Error, Result};
use crate::linalg;

pub const PROB_CLAMP: f64 = 1e-12;
pub const GRAD_TOL: f64 = 1e-8;
const MAX_ITER: usize = 100;
const MAX_HALVINGS: usize = 30;
/// Coefficient cap used to flag quasi-separation for unpenalized fits.
const SEPARATION_CAP: f64 = 30.0;

/// A model is a subset of feature columns plus an optional intercept.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ModelSpec {
    pub covariates: Vec<usize>,
    pub intercept: bool,
    pub model_id: usize,
}

impl ModelSpec {
    pub fn new(covariates: Vec<usize>, intercept: bool, model_id: usize) -> Result<Self> {
        let mut seen = covariates.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != covariates.len() {
            return Err(Error::InvalidInput("duplicate covariate in model spec".into()));
        }
        Ok(ModelSpec {
            covariates,
            intercept,
            model_id,
        })
    }

    pub fn full(n_features: usize, model_id: usize) -> Self {
        ModelSpec {
            covariates: (0..n_features).collect(),
            intercept: true,
            model_id,
        }
    }

    pub fn dim(&self) -> usize {
        self.covariates.len() + usize::from(self.intercept)
    }

    /// True when this model's parameter space is contained in `other`'s.
    pub fn nested_in(&self, other: &ModelSpec) -> bool {
        (!self.intercept || other.intercept)
            && self.covariates.iter().all(|c| other.covariates.contains(c))
    }

    pub fn design_row(&self, features: &[f64]) -> Vec<f64> {
        let mut row = Vec::with_capacity(self.dim());
        if self.intercept {
            row.push(1.0);
        }
        for &c in &self.covariates {
            row.push(features[c]);
        }
        row
    }

    fn column_name(&self, j: usize, feature_names: &[String]) -> String {
        if self.intercept && j == 0 {
            "(intercept)".into()
        } else {
            let c = self.covariates[j - usize::from(self.intercept)];
            feature_names
                .get(c)
                .cloned()
                .unwrap_or_else(|| format!("feature {c}"))
        }
    }
}

/// Enumerates every covariate subset (including the empty, intercept-only
/// model), ordered by dimension and then lexicographically, so the full model
/// comes last. Model ids are 1-based positions in that order.
pub fn all_subset_models(n_features: usize, cap: usize) -> Result<Vec<ModelSpec>> {
    subset_models(n_features, cap, true)
}

/// As [`all_subset_models`], optionally without the intercept-only model.
pub fn subset_models(n_features: usize, cap: usize, include_empty: bool) -> Result<Vec<ModelSpec>> {
    if n_features >= 20 || (1usize << n_features) > cap {
        return Err(Error::InvalidInput(format!(
            "2^{n_features} covariate subsets exceed the cap of {cap}"
        )));
    }
    let start = usize::from(!include_empty);
    let mut subsets: Vec<Vec<usize>> = (start..(1usize << n_features))
        .map(|mask| (0..n_features).filter(|j| mask >> j & 1 == 1).collect())
        .collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(subsets
        .into_iter()
        .enumerate()
        .map(|(i, covariates)| ModelSpec {
            covariates,
            intercept: true,
            model_id: i + 1,
        })
        .collect())
}

/// Nested chain `{}, {0}, {0,1}, ...` up to the full model, intercept always
/// included.
pub fn nested_chain_models(n_features: usize) -> Vec<ModelSpec> {
    (0..=n_features)
        .map(|k| ModelSpec {
            covariates: (0..k).collect(),
            intercept: true,
            model_id: k + 1,
        })
        .collect()
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ModelFit {
    pub theta: Vec<f64>,
    pub log_lik: f64,
    pub fisher: Vec<Vec<f64>>,
    pub spec: ModelSpec,
    pub converged: bool,
    pub n_obs: usize,
}

fn logistic(eta: f64) -> f64 {
    let p = 1.0 / (1.0 + (-eta).exp());
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

/// Per-observation log-likelihood `y log p + (1-y) log(1-p)`.
pub fn point_log_lik(spec: &ModelSpec, theta: &[f64], features: &[f64], label: usize) -> f64 {
    let eta = linalg::dot(&spec.design_row(features), theta);
    let p = logistic(eta);
    if label == 1 {
        p.ln()
    } else {
        (1.0 - p).ln()
    }
}

/// Log-likelihood of a labeled view at arbitrary coefficients.
pub fn log_lik_at(view: &LabeledView, spec: &ModelSpec, theta: &[f64]) -> Result<f64> {
    if theta.len() != spec.dim() {
        return Err(Error::InvalidInput(format!(
            "theta has {} entries, model dimension is {}",
            theta.len(),
            spec.dim()
        )));
    }
    Ok((0..view.n())
        .map(|i| point_log_lik(spec, theta, view.x(i), view.y(i)))
        .sum())
}

/// Analytic score vector `X'(y - p)` at `theta`. Probabilities here are the
/// raw sigmoid (no clamp): saturated observations then contribute exactly
/// zero, which keeps the gradient criterion attainable for ridge-stabilized
/// quasi-separated fits.
pub fn score_at(view: &LabeledView, spec: &ModelSpec, theta: &[f64]) -> Vec<f64> {
    let d = spec.dim();
    let mut g = vec![0.0; d];
    for i in 0..view.n() {
        let row = spec.design_row(view.x(i));
        let p = 1.0 / (1.0 + (-linalg::dot(&row, theta)).exp());
        let resid = view.y(i) as f64 - p;
        for j in 0..d {
            g[j] += row[j] * resid;
        }
    }
    g
}

/// Observed information `X' W X` at `theta`, with `W = diag(p(1-p))`.
pub fn fisher_at(view: &LabeledView, spec: &ModelSpec, theta: &[f64]) -> Vec<Vec<f64>> {
    let d = spec.dim();
    let mut info = vec![vec![0.0; d]; d];
    for i in 0..view.n() {
        let row = spec.design_row(view.x(i));
        let p = 1.0 / (1.0 + (-linalg::dot(&row, theta)).exp());
        let w = p * (1.0 - p);
        for a in 0..d {
            for b in a..d {
                info[a][b] += w * row[a] * row[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            info[a][b] = info[b][a];
        }
    }
    info
}

/// Newton-Raphson fit of the (optionally ridge-penalized) binary logistic
/// log-likelihood, with step-halving line search. `converged` is set when the
/// penalized gradient max-norm drops below `1e-8` within the iteration cap.
///
/// The ridge penalty is scale-aware: `0.5 * ridge * sum_j (sd_j * theta_j)^2`
/// over non-intercept design columns, with `sd_j` the column's standard
/// deviation on the training view. This is the usual standardized-coefficient
/// penalty, so one `ridge` value behaves the same on raw measurement scales
/// as on unit-variance features, and the intercept is never shrunk.
pub fn fit(view: &LabeledView, spec: &ModelSpec, ridge: f64) -> Result<ModelFit> {
    fit_from(view, spec, ridge, None)
}

/// As [`fit`], but optionally warm-started; used by the max-max backend where
/// thousands of one-row-augmented refits share a nearby optimum.
pub fn fit_from(
    view: &LabeledView,
    spec: &ModelSpec,
    ridge: f64,
    warm_start: Option<&[f64]>,
) -> Result<ModelFit> {
    if view.class_count() != 2 {
        return Err(Error::InvalidInput(
            "binary logistic regression requires exactly 2 classes".into(),
        ));
    }
    if view.n() < 2 {
        return Err(Error::FitFailure {
            model_id: spec.model_id,
            message: "need at least 2 observations".into(),
        });
    }
    if ridge < 0.0 {
        return Err(Error::InvalidInput("ridge must be nonnegative".into()));
    }
    if ridge == 0.0 {
        let present = view.classes_present();
        if !present.iter().all(|&p| p) {
            return Err(Error::FitFailure {
                model_id: spec.model_id,
                message: "one class absent from the labeled data; use ridge > 0".into(),
            });
        }
    }
    let d = spec.dim();
    let mut theta = match warm_start {
        Some(t) if t.len() == d => t.to_vec(),
        _ => vec![0.0; d],
    };

    // per-column penalty weights: ridge * var(column), intercept exempt
    let penalty_diag: Vec<f64> = {
        let n = view.n() as f64;
        let mut sums = vec![0.0; d];
        let mut sq = vec![0.0; d];
        for i in 0..view.n() {
            let row = spec.design_row(view.x(i));
            for j in 0..d {
                sums[j] += row[j];
                sq[j] += row[j] * row[j];
            }
        }
        (0..d)
            .map(|j| {
                if spec.intercept && j == 0 {
                    0.0
                } else {
                    ridge * (sq[j] / n - (sums[j] / n) * (sums[j] / n)).max(0.0)
                }
            })
            .collect()
    };

    let penalized = |theta: &[f64]| -> f64 {
        let ll: f64 = (0..view.n())
            .map(|i| point_log_lik(spec, theta, view.x(i), view.y(i)))
            .sum();
        ll - 0.5
            * theta
                .iter()
                .zip(&penalty_diag)
                .map(|(t, p)| p * t * t)
                .sum::<f64>()
    };

    let mut converged = false;
    for _ in 0..MAX_ITER {
        let mut grad = score_at(view, spec, &theta);
        for j in 0..d {
            grad[j] -= penalty_diag[j] * theta[j];
        }
        if linalg::max_abs(&grad) < GRAD_TOL {
            converged = true;
            break;
        }
        let mut hess = fisher_at(view, spec, &theta);
        for (j, row) in hess.iter_mut().enumerate() {
            row[j] += penalty_diag[j];
        }
        let step = linalg::solve_spd(&hess, &grad).map_err(|col| {
            let names: Vec<String> = view.dataset().feature_names().to_vec();
            Error::SingularInformation {
                column: col,
                name: spec.column_name(col, &names),
            }
        })?;

        let base = penalized(&theta);
        // near the optimum (or on f64-flat plateaus) the true improvement of
        // a Newton step can sit below the objective's resolution; accept a
        // full step whose objective change is within numerical noise as long
        // as it makes clear progress on the gradient norm
        let noise = 1e-13 * (1.0 + base.abs());
        let grad_norm = |theta: &[f64]| -> f64 {
            let mut g = score_at(view, spec, theta);
            for j in 0..d {
                g[j] -= penalty_diag[j] * theta[j];
            }
            linalg::max_abs(&g)
        };
        let mut scale = 1.0;
        let mut accepted = false;
        for halving in 0..MAX_HALVINGS {
            let trial: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t + scale * s).collect();
            let value = penalized(&trial);
            let improved = value > base
                || (halving == 0
                    && value >= base - noise
                    && grad_norm(&trial) < 0.5 * grad_norm(&theta));
            if improved {
                theta = trial;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
        if ridge == 0.0 && linalg::max_abs(&theta) > SEPARATION_CAP {
            return Err(Error::QuasiSeparation { cap: SEPARATION_CAP });
        }
    }
    if !converged {
        let mut grad = score_at(view, spec, &theta);
        for j in 0..d {
            grad[j] -= penalty_diag[j] * theta[j];
        }
        converged = linalg::max_abs(&grad) < GRAD_TOL;
        if !converged && ridge == 0.0 && linalg::max_abs(&theta) > SEPARATION_CAP / 2.0 {
            return Err(Error::QuasiSeparation { cap: SEPARATION_CAP });
        }
    }
    // A separated problem can also "converge" with every fitted probability
    // saturated: the gradient vanishes while the MLE sits at infinity.
    if ridge == 0.0 {
        let saturated = (0..view.n()).all(|i| {
            let p = logistic(linalg::dot(&spec.design_row(view.x(i)), &theta));
            !(1e-6..=1.0 - 1e-6).contains(&p)
        });
        if saturated {
            return Err(Error::QuasiSeparation { cap: SEPARATION_CAP });
        }
    }

    let log_lik = log_lik_at(view, spec, &theta)?;
    let fisher = fisher_at(view, spec, &theta);
    Ok(ModelFit {
        theta,
        log_lik,
        fisher,
        spec: spec.clone(),
        converged,
        n_obs: view.n(),
    })
}

impl ModelFit {
    /// Class probability vector `(P(y=0|x), P(y=1|x))` for a raw feature row.
    pub fn predict_proba(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() < self.spec.covariates.iter().copied().max().map_or(0, |m| m + 1) {
            return Err(Error::InvalidInput("feature row arity mismatch".into()));
        }
        let eta = linalg::dot(&self.spec.design_row(features), &self.theta);
        let p = logistic(eta);
        Ok(vec![1.0 - p, p])
    }

    pub fn predict_label(&self, features: &[f64]) -> Result<usize> {
        let proba = self.predict_proba(features)?;
        Ok(argmax_proba(&proba))
    }

    /// Delta-method variance of the linear predictor, `x' I(theta)^-1 x`
    /// with `x` the design row (intercept included when the model has one).
    pub fn predictive_variance(&self, features: &[f64]) -> Result<f64> {
        self.variance_of_design_row(&self.spec.design_row(features))
    }

    pub fn variance_of_design_row(&self, design: &[f64]) -> Result<f64> {
        if design.len() != self.spec.dim() {
            return Err(Error::InvalidInput("design row arity mismatch".into()));
        }
        linalg::quad_form_inv(&self.fisher, design).map_err(|col| Error::SingularInformation {
            column: col,
            name: format!("design column {col}"),
        })
    }
}

/// Argmax with lowest-index tie-break.
pub fn argmax_proba(proba: &[f64]) -> usize {
    let mut best = 0;
    for j in 1..proba.len() {
        if proba[j] > proba[best] {
            best = j;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{parse_csv, Dataset};

    fn toy_symmetric() -> Dataset {
        parse_csv("x,y\n0,a\n0,b\n1,a\n1,b\n", "y", None).unwrap()
    }

    fn full_view(data: &Dataset) -> LabeledView<'_> {
        let rows = (0..data.n_rows())
            .map(|r| (r, data.ground_truth(r).unwrap()))
            .collect();
        LabeledView::from_rows(data, rows)
    }

    #[test]
    fn symmetric_data_gives_zero_coefficients() {
        let data = toy_symmetric();
        let view = full_view(&data);
        let spec = ModelSpec::full(1, 1);
        let fit = fit(&view, &spec, 0.0).unwrap();
        assert!(fit.converged);
        assert!(linalg::max_abs(&fit.theta) < 1e-9);
        assert!((fit.log_lik - 4.0 * 0.5_f64.ln()).abs() < 1e-10);
        // X'WX with W = I/4 on design rows (1,0),(1,0),(1,1),(1,1)
        assert!((fit.fisher[0][0] - 1.0).abs() < 1e-9);
        assert!((fit.fisher[0][1] - 0.5).abs() < 1e-9);
        assert!((fit.fisher[1][1] - 0.5).abs() < 1e-9);
        assert!(linalg::max_asymmetry(&fit.fisher) < 1e-10);
    }

    #[test]
    fn log_lik_at_matches_hand_sum() {
        let data = parse_csv("x,y\n-1.0,a\n0.5,b\n2.0,a\n-0.3,b\n1.1,a\n", "y", None).unwrap();
        let view = full_view(&data);
        let spec = ModelSpec::full(1, 1);
        let theta = [0.4, -1.3];
        let mut hand = 0.0;
        for i in 0..view.n() {
            let eta = 0.4 + -1.3 * view.x(i)[0];
            let p = 1.0 / (1.0 + (-eta as f64).exp());
            hand += if view.y(i) == 1 { p.ln() } else { (1.0 - p).ln() };
        }
        let got = log_lik_at(&view, &spec, &theta).unwrap();
        assert!((got - hand).abs() < 1e-12);
        // theta = 0 gives n ln(1/2)
        let at_zero = log_lik_at(&view, &spec, &[0.0, 0.0]).unwrap();
        assert!((at_zero - 5.0 * 0.5_f64.ln()).abs() < 1e-12);
        // consistency with the fitted value
        let f = fit(&view, &spec, 0.0).unwrap();
        let ll = log_lik_at(&view, &spec, &f.theta).unwrap();
        assert!((ll - f.log_lik).abs() < 1e-10);
    }

    #[test]
    fn predictions_are_probabilities() {
        let data = toy_symmetric();
        let view = full_view(&data);
        let spec = ModelSpec::full(1, 1);
        let f = fit(&view, &spec, 0.0).unwrap();
        let p = f.predict_proba(&[0.7]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-9 && (p[1] - 0.5).abs() < 1e-9);
        assert!((p[0] + p[1] - 1.0).abs() < 1e-12);

        // logistic(ln 3) = 3/4 for theta = (0, 1)
        let hand = ModelFit {
            theta: vec![0.0, 1.0],
            log_lik: 0.0,
            fisher: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            spec: ModelSpec::full(1, 1),
            converged: true,
            n_obs: 4,
        };
        let p = hand.predict_proba(&[3.0_f64.ln()]).unwrap();
        assert!((p[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn predictive_variance_examples() {
        // identity information, no intercept: design row == feature row
        let ident = ModelFit {
            theta: vec![0.0, 0.0],
            log_lik: 0.0,
            fisher: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            spec: ModelSpec::new(vec![0, 1], false, 1).unwrap(),
            converged: true,
            n_obs: 4,
        };
        assert!((ident.predictive_variance(&[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!(ident.predictive_variance(&[0.0, 0.0]).unwrap().abs() < 1e-12);

        // I = [[1, .5], [.5, .5]], x = (1,1): x' I^-1 x = 2
        let f = ModelFit {
            theta: vec![0.0, 0.0],
            log_lik: 0.0,
            fisher: vec![vec![1.0, 0.5], vec![0.5, 0.5]],
            spec: ModelSpec::new(vec![0, 1], false, 1).unwrap(),
            converged: true,
            n_obs: 4,
        };
        assert!((f.predictive_variance(&[1.0, 1.0]).unwrap() - 2.0).abs() < 1e-12);

        // singular information is an error
        let s = ModelFit {
            fisher: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
            ..f
        };
        assert!(s.predictive_variance(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn duplicated_data_doubles_log_lik() {
        let data = parse_csv("x,y\n-1,a\n0.5,b\n2,b\n", "y", None).unwrap();
        let view = full_view(&data);
        let mut doubled = view.clone();
        for i in 0..view.n() {
            doubled.push(view.row_index(i), view.y(i));
        }
        let spec = ModelSpec::full(1, 1);
        let theta = [0.2, 0.7];
        let single = log_lik_at(&view, &spec, &theta).unwrap();
        let twice = log_lik_at(&doubled, &spec, &theta).unwrap();
        assert!((twice - 2.0 * single).abs() < 1e-10);
    }

    #[test]
    fn nested_models_are_monotone_in_log_lik() {
        let data = crate::dataset::generate_binomial(60, &[1.0, -0.7, 0.2], 0.1, 3).unwrap();
        let view = full_view(&data);
        let mut prev = f64::NEG_INFINITY;
        for spec in nested_chain_models(3) {
            let f = fit(&view, &spec, 0.0).unwrap();
            assert!(
                f.log_lik >= prev - 1e-7,
                "nested log-lik decreased: {prev} -> {}",
                f.log_lik
            );
            prev = f.log_lik;
        }
    }

    #[test]
    fn gradient_and_fisher_match_finite_differences() {
        for seed in 0..20 {
            let data =
                crate::dataset::generate_binomial(40, &[0.8, -0.5], 0.2, 100 + seed).unwrap();
            let view = full_view(&data);
            let spec = ModelSpec::full(2, 1);
            let f = fit(&view, &spec, 0.0).unwrap();
            let d = spec.dim();
            let h = 1e-5;
            let analytic = score_at(&view, &spec, &f.theta);
            for j in 0..d {
                let mut up = f.theta.clone();
                let mut dn = f.theta.clone();
                up[j] += h;
                dn[j] -= h;
                let fd = (log_lik_at(&view, &spec, &up).unwrap()
                    - log_lik_at(&view, &spec, &dn).unwrap())
                    / (2.0 * h);
                assert!(
                    (analytic[j] - fd).abs() < 1e-5,
                    "seed {seed} grad[{j}]: {} vs {fd}",
                    analytic[j]
                );
            }
            // Fisher = negative Hessian of the log-likelihood
            let h2 = 1e-4;
            for a in 0..d {
                for b in 0..d {
                    let mut pp = f.theta.clone();
                    let mut pm = f.theta.clone();
                    let mut mp = f.theta.clone();
                    let mut mm = f.theta.clone();
                    pp[a] += h2;
                    pp[b] += h2;
                    pm[a] += h2;
                    pm[b] -= h2;
                    mp[a] -= h2;
                    mp[b] += h2;
                    mm[a] -= h2;
                    mm[b] -= h2;
                    let hess = (log_lik_at(&view, &spec, &pp).unwrap()
                        - log_lik_at(&view, &spec, &pm).unwrap()
                        - log_lik_at(&view, &spec, &mp).unwrap()
                        + log_lik_at(&view, &spec, &mm).unwrap())
                        / (4.0 * h2 * h2);
                    let denom = f.fisher[a][b].abs().max(1e-3);
                    assert!(
                        (f.fisher[a][b] + hess).abs() / denom < 1e-4,
                        "seed {seed} fisher[{a}][{b}]: {} vs {}",
                        f.fisher[a][b],
                        -hess
                    );
                }
            }
        }
    }

    #[test]
    fn separation_is_reported() {
        let data = parse_csv("x,y\n-2,a\n-1,a\n1,b\n2,b\n", "y", None).unwrap();
        let view = full_view(&data);
        let spec = ModelSpec::full(1, 1);
        let err = fit(&view, &spec, 0.0).unwrap_err();
        assert!(matches!(err, Error::QuasiSeparation { .. }), "{err:?}");
        // ridge rescues it
        let f = fit(&view, &spec, 1e-6).unwrap();
        assert!(f.converged);
    }

    #[test]
    fn collinear_columns_are_named() {
        let data = parse_csv("a,b,y\n1,1,u\n2,2,v\n3,3,u\n4,4,v\n", "y", None).unwrap();
        let view = full_view(&data);
        let spec = ModelSpec::full(2, 1);
        let err = fit(&view, &spec, 0.0).unwrap_err();
        match err {
            Error::SingularInformation { name, .. } => assert_eq!(name, "b"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn multiclass_rejected() {
        let data = parse_csv("x,y\n1,a\n2,b\n3,c\n", "y", None).unwrap();
        let view = full_view(&data);
        assert!(fit(&view, &ModelSpec::full(1, 1), 0.0).is_err());
    }
}
