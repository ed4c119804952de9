//! Pseudo-label selection criteria.
//!
//! All criteria consume a [`UtilityTensor`]: per-candidate, per-model,
//! per-label log utilities, where entry `(i, k, j)` is the (approximate) log
//! pseudo-label likelihood of adding candidate `i` with label `j` under model
//! `k`. Predicted labels and probabilities always come from the largest model
//! in the family (the last one), which is pinned here because selection is
//! orthogonal to prediction.
//!
//! Utilities are handled in log space throughout; weighted sums of raw
//! likelihoods are combined with log-sum-exp. Rankings break ties towards the
//! lowest candidate index so results are reproducible.

use std::collections::BTreeMap;

use crate::dataset::LabeledView;
use crate::error::{Error, Result};
use crate::evidence::{ppp_approx, PppVariant};
use crate::glm::{self, ModelFit, ModelSpec};
use crate::linalg;

pub const CRITERION_PROB_SCORE: &str = "prob_score";
pub const CRITERION_VARIANCE: &str = "variance";
pub const CRITERION_LIKELIHOOD_MAXMAX: &str = "likelihood_maxmax";
pub const CRITERION_PPP: &str = "ppp";
pub const CRITERION_MULTI_MODEL_PPP: &str = "multi_model_ppp";
pub const CRITERION_OCCAM_THRESHOLD: &str = "occam_threshold";
pub const CRITERION_MULTI_LABEL: &str = "multi_label";
pub const CRITERION_FULL_BAYES: &str = "full_bayes";
pub const CRITERION_MULTI_DATA: &str = "multi_data";

/// Which utility fills the tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ScoreBackend {
    /// Approximate log pseudo posterior predictive (Bayes-flavored).
    PppApprox,
    /// Log-likelihood maximized over parameters of the augmented data
    /// (max-max flavored; one warm-started refit per entry).
    MaxLikelihood,
}

#[derive(Debug, Clone)]
pub struct UtilityTensor {
    values: Vec<f64>,
    n_candidates: usize,
    n_models: usize,
    n_labels: usize,
    pub models: Vec<ModelSpec>,
    /// Predicted label per candidate, from the largest model.
    pub predicted_label: Vec<usize>,
    /// Predicted class probabilities per candidate, from the largest model.
    pub predicted_proba: Vec<Vec<f64>>,
    /// Dataset row index per candidate.
    pub candidate_rows: Vec<usize>,
}

impl UtilityTensor {
    pub fn n_candidates(&self) -> usize {
        self.n_candidates
    }

    pub fn n_models(&self) -> usize {
        self.n_models
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    pub fn get(&self, candidate: usize, model: usize, label: usize) -> f64 {
        self.values[(candidate * self.n_models + model) * self.n_labels + label]
    }

    pub fn from_values(
        values: Vec<f64>,
        n_candidates: usize,
        n_models: usize,
        n_labels: usize,
        predicted_label: Vec<usize>,
        predicted_proba: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if values.len() != n_candidates * n_models * n_labels {
            return Err(Error::InvalidInput("tensor shape mismatch".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("tensor entries must be finite".into()));
        }
        Ok(UtilityTensor {
            values,
            n_candidates,
            n_models,
            n_labels,
            models: Vec::new(),
            predicted_label,
            predicted_proba,
            candidate_rows: (0..n_candidates).collect(),
        })
    }

    /// Per-model score of a candidate at its predicted label.
    pub fn predicted_score(&self, candidate: usize, model: usize) -> f64 {
        self.get(candidate, model, self.predicted_label[candidate])
    }
}

/// Builds the utility tensor: one fit per model on the labeled view, then one
/// entry per (candidate, model, label). Any fit failure aborts and names the
/// failing model.
pub fn build_tensor(
    view: &LabeledView,
    pool_rows: &[usize],
    family: &[ModelSpec],
    backend: ScoreBackend,
    ridge: f64,
) -> Result<UtilityTensor> {
    if family.is_empty() {
        return Err(Error::InvalidInput("empty model family".into()));
    }
    let data = view.dataset();
    let n_labels = data.class_count();
    let fits: Vec<ModelFit> = family
        .iter()
        .map(|spec| {
            glm::fit(view, spec, ridge).map_err(|e| Error::FitFailure {
                model_id: spec.model_id,
                message: e.to_string(),
            })
        })
        .collect::<Result<_>>()?;
    let full = fits.last().expect("non-empty family");

    let mut predicted_label = Vec::with_capacity(pool_rows.len());
    let mut predicted_proba = Vec::with_capacity(pool_rows.len());
    for &row in pool_rows {
        let proba = full.predict_proba(data.features(row))?;
        predicted_label.push(glm::argmax_proba(&proba));
        predicted_proba.push(proba);
    }

    let mut values = Vec::with_capacity(pool_rows.len() * family.len() * n_labels);
    for &row in pool_rows {
        let x = data.features(row);
        for fit in &fits {
            for label in 0..n_labels {
                let v = match backend {
                    ScoreBackend::PppApprox => {
                        ppp_approx(fit, row, x, label, PppVariant::PointAugmented)?.value
                    }
                    ScoreBackend::MaxLikelihood => {
                        let mut aug = view.clone();
                        aug.push(row, label);
                        let refit =
                            glm::fit_from(&aug, &fit.spec, ridge, Some(&fit.theta)).map_err(
                                |e| Error::FitFailure {
                                    model_id: fit.spec.model_id,
                                    message: e.to_string(),
                                },
                            )?;
                        refit.log_lik
                    }
                };
                if !v.is_finite() {
                    return Err(Error::FitFailure {
                        model_id: fit.spec.model_id,
                        message: "non-finite utility".into(),
                    });
                }
                values.push(v);
            }
        }
    }
    Ok(UtilityTensor {
        values,
        n_candidates: pool_rows.len(),
        n_models: family.len(),
        n_labels,
        models: family.to_vec(),
        predicted_label,
        predicted_proba,
        candidate_rows: pool_rows.to_vec(),
    })
}

/// One criterion's verdict over a candidate set.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SelectionResult {
    /// Candidates sorted by score, descending, ties to the lowest index.
    pub ranked: Vec<(usize, f64)>,
    /// The criterion's selected set (the top candidate for ranking criteria,
    /// the surviving set for thresholding / dominance criteria).
    pub selected: Vec<usize>,
    pub criterion_name: String,
    pub audit: BTreeMap<usize, serde_json::Value>,
}

/// Sorts candidate indices by score descending with lowest-index tie-break.
pub fn rank_scores(scores: &[f64]) -> Vec<(usize, f64)> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.into_iter().map(|i| (i, scores[i])).collect()
}

fn ranking_result(name: &str, scores: Vec<f64>) -> SelectionResult {
    let ranked = rank_scores(&scores);
    let selected = ranked.first().map(|&(i, _)| vec![i]).unwrap_or_default();
    SelectionResult {
        ranked,
        selected,
        criterion_name: name.to_string(),
        audit: BTreeMap::new(),
    }
}

/// Highest predicted class probability wins.
pub fn criterion_probability_score(tensor: &UtilityTensor) -> SelectionResult {
    let scores: Vec<f64> = tensor
        .predicted_proba
        .iter()
        .map(|p| p.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    ranking_result(CRITERION_PROB_SCORE, scores)
}

/// Lowest delta-method predictive variance wins (score is the negated
/// variance). Candidates with a singular information matrix are excluded
/// from the ranking, with an audit note.
pub fn criterion_variance(
    fit: &ModelFit,
    data: &crate::dataset::Dataset,
    pool_rows: &[usize],
) -> SelectionResult {
    let mut scores = Vec::with_capacity(pool_rows.len());
    let mut audit = BTreeMap::new();
    let mut included = Vec::new();
    for (i, &row) in pool_rows.iter().enumerate() {
        match fit.predictive_variance(data.features(row)) {
            Ok(v) => {
                scores.push(-v);
                included.push(i);
            }
            Err(e) => {
                audit.insert(i, serde_json::json!({ "excluded": e.to_string() }));
            }
        }
    }
    let ranked_local = rank_scores(&scores);
    let ranked: Vec<(usize, f64)> = ranked_local
        .into_iter()
        .map(|(local, s)| (included[local], s))
        .collect();
    let selected = ranked.first().map(|&(i, _)| vec![i]).unwrap_or_default();
    SelectionResult {
        ranked,
        selected,
        criterion_name: CRITERION_VARIANCE.to_string(),
        audit,
    }
}

/// Single-model criterion: the utility of each candidate at its predicted
/// label under one model of the family (default: the largest).
pub fn criterion_single_model(
    tensor: &UtilityTensor,
    model: Option<usize>,
    name: &str,
) -> Result<SelectionResult> {
    let k = model.unwrap_or(tensor.n_models - 1);
    if k >= tensor.n_models {
        return Err(Error::InvalidInput(format!("model index {k} out of range")));
    }
    let scores: Vec<f64> = (0..tensor.n_candidates)
        .map(|i| tensor.predicted_score(i, k))
        .collect();
    Ok(ranking_result(name, scores))
}

/// Dimension-proportional weights for a nested family, normalized to sum 1.
pub fn nested_dim_weights(models: &[ModelSpec]) -> Vec<f64> {
    let dims: Vec<f64> = models.iter().map(|m| m.dim() as f64).collect();
    let total: f64 = dims.iter().sum();
    dims.iter().map(|d| d / total).collect()
}

pub fn uniform_weights(k: usize) -> Vec<f64> {
    vec![1.0 / k as f64; k]
}

fn validate_simplex(weights: &[f64], what: &str) -> Result<()> {
    if weights.iter().any(|w| !(*w > 0.0 && *w < 1.0 + 1e-12)) {
        return Err(Error::InvalidInput(format!("{what} must lie in (0, 1)")));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "{what} must sum to 1 (got {sum})"
        )));
    }
    Ok(())
}

/// Weighted sum of per-model likelihood utilities:
/// `score_i = log sum_k w_k exp(u[i, k, h_i])`, mixed with log-sum-exp so
/// raw likelihood sums cannot underflow. Utilities carry each model's
/// evidence-like constant (`2 ll_k - 1/2 log|I_k|`), so the mixture is in
/// effect an evidence-weighted model average: models explaining the labeled
/// data best dominate the sum, and the criterion follows their view of the
/// candidates rather than the full model's alone.
pub fn criterion_multi_model_weighted(
    tensor: &UtilityTensor,
    weights: &[f64],
) -> Result<SelectionResult> {
    if weights.len() != tensor.n_models {
        return Err(Error::InvalidInput("one weight per model required".into()));
    }
    validate_simplex(weights, "model weights")?;
    let log_w: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
    let mut scores = Vec::with_capacity(tensor.n_candidates);
    let mut audit = BTreeMap::new();
    for i in 0..tensor.n_candidates {
        let contributions: Vec<f64> = (0..tensor.n_models)
            .map(|k| log_w[k] + tensor.predicted_score(i, k))
            .collect();
        audit.insert(i, serde_json::json!({ "log_contributions": contributions }));
        scores.push(linalg::log_sum_exp(&contributions));
    }
    let mut result = ranking_result(CRITERION_MULTI_MODEL_PPP, scores);
    result.audit = audit;
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum ThresholdMode {
    /// `tau`/`xi` are quantile levels of each model's score distribution for
    /// the current round (absolute likelihood scales vary per dataset).
    Quantile,
    /// `tau`/`xi` are raw score values, shared across models.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ThresholdConfig {
    pub tau: f64,
    pub xi: f64,
    pub mode: ThresholdMode,
}

impl ThresholdConfig {
    pub fn new(tau: f64, xi: f64, mode: ThresholdMode) -> Result<Self> {
        if !(xi > tau) {
            return Err(Error::InvalidInput(format!(
                "thresholds require xi > tau (got tau={tau}, xi={xi})"
            )));
        }
        if matches!(mode, ThresholdMode::Quantile) && !(tau >= 0.0 && xi <= 1.0) {
            return Err(Error::InvalidInput("quantile levels must lie in [0, 1]".into()));
        }
        Ok(ThresholdConfig { tau, xi, mode })
    }

    pub fn quantile_default() -> Self {
        ThresholdConfig {
            tau: 0.5,
            xi: 0.9,
            mode: ThresholdMode::Quantile,
        }
    }
}

/// Three-valued threshold criterion over a candidate's per-model expected
/// scores: 0 if any model falls below `tau`, 1 if all models reach `xi`,
/// 0.5 otherwise (including the mixed case).
pub fn phi_threshold(expected_scores: &[f64], tau: f64, xi: f64) -> f64 {
    if expected_scores.iter().any(|s| *s < tau) {
        0.0
    } else if expected_scores.iter().all(|s| *s >= xi) {
        1.0
    } else {
        0.5
    }
}

/// Nearest-rank empirical quantile (deterministic, no interpolation).
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let idx = ((n - 1) as f64 * q).round() as usize;
    sorted[idx.min(n - 1)]
}

#[derive(Debug)]
pub struct OccamResult {
    pub selection: SelectionResult,
    /// Surviving sets `S_k` in visited order (largest model first).
    pub threshold_sets: Vec<Vec<usize>>,
    /// Resolved per-model `xi` thresholds, largest model first.
    pub resolved_xi: Vec<f64>,
}

/// Threshold selection over a nested family, visiting models from the
/// largest down: keep the running intersection of per-model threshold
/// survivor sets, stopping as soon as it would become empty. An empty
/// survivor set under the largest model is the "lower the threshold" error;
/// the retry loop lives in the self-training driver.
pub fn criterion_threshold_occam(
    scores: &[Vec<f64>],
    config: &ThresholdConfig,
) -> Result<OccamResult> {
    let n = scores.len();
    if n == 0 {
        return Err(Error::InvalidInput("no candidates".into()));
    }
    let k_models = scores[0].len();
    if k_models == 0 || scores.iter().any(|row| row.len() != k_models) {
        return Err(Error::InvalidInput("ragged score matrix".into()));
    }

    let xi_for = |k: usize| -> f64 {
        match config.mode {
            ThresholdMode::Raw => config.xi,
            ThresholdMode::Quantile => {
                let mut col: Vec<f64> = (0..n).map(|i| scores[i][k]).collect();
                col.sort_by(f64::total_cmp);
                quantile(&col, config.xi)
            }
        }
    };

    let mut threshold_sets: Vec<Vec<usize>> = Vec::new();
    let mut resolved_xi = Vec::new();
    let mut running: Option<Vec<usize>> = None;
    for k in (0..k_models).rev() {
        let xi = xi_for(k);
        let s_k: Vec<usize> = (0..n).filter(|&i| scores[i][k] >= xi).collect();
        match &running {
            None => {
                if s_k.is_empty() {
                    return Err(Error::ThresholdTooHigh);
                }
                resolved_xi.push(xi);
                threshold_sets.push(s_k.clone());
                running = Some(s_k);
            }
            Some(current) => {
                let inter: Vec<usize> =
                    current.iter().copied().filter(|i| s_k.contains(i)).collect();
                if inter.is_empty() {
                    break;
                }
                resolved_xi.push(xi);
                threshold_sets.push(s_k);
                running = Some(inter);
            }
        }
    }
    let selected = running.expect("at least the full model was visited");

    // rank by full-model score for reporting; selection is the intersection
    let full_scores: Vec<f64> = (0..n).map(|i| scores[i][k_models - 1]).collect();
    let ranked = rank_scores(&full_scores);
    let mut audit = BTreeMap::new();
    for &i in &selected {
        let phis = phi_threshold(
            &scores[i],
            match config.mode {
                ThresholdMode::Raw => config.tau,
                ThresholdMode::Quantile => f64::NEG_INFINITY,
            },
            resolved_xi[0],
        );
        audit.insert(i, serde_json::json!({ "phi_full": phis }));
    }
    Ok(OccamResult {
        selection: SelectionResult {
            ranked,
            selected,
            criterion_name: CRITERION_OCCAM_THRESHOLD.to_string(),
            audit,
        },
        threshold_sets,
        resolved_xi,
    })
}

/// Per-candidate score matrix `scores[i][k] = u[i, k, h_i]` for the
/// thresholding criterion.
pub fn occam_scores(tensor: &UtilityTensor) -> Vec<Vec<f64>> {
    (0..tensor.n_candidates)
        .map(|i| {
            (0..tensor.n_models)
                .map(|k| tensor.predicted_score(i, k))
                .collect()
        })
        .collect()
}

/// Multi-label utility: mixes the utilities of all hypothetical labels under
/// the largest model, default weights the predicted probabilities.
/// `score_i = log sum_j w_ij exp(u[i, K, j])`.
pub fn criterion_multi_label(
    tensor: &UtilityTensor,
    weights: Option<&[Vec<f64>]>,
) -> Result<SelectionResult> {
    let k = tensor.n_models - 1;
    let mut scores = Vec::with_capacity(tensor.n_candidates);
    for i in 0..tensor.n_candidates {
        let w: &[f64] = match weights {
            Some(ws) => {
                if ws.len() != tensor.n_candidates || ws[i].len() != tensor.n_labels {
                    return Err(Error::InvalidInput(
                        "per-candidate label weights must be J-vectors".into(),
                    ));
                }
                &ws[i]
            }
            None => &tensor.predicted_proba[i],
        };
        validate_simplex(w, "label weights")?;
        let terms: Vec<f64> = (0..tensor.n_labels)
            .map(|j| w[j].ln() + tensor.get(i, k, j))
            .collect();
        scores.push(linalg::log_sum_exp(&terms));
    }
    Ok(ranking_result(CRITERION_MULTI_LABEL, scores))
}

pub struct FullBayesResult {
    pub selection: SelectionResult,
    /// Per candidate, the best `(candidate, label)` action over the expanded
    /// action space.
    pub best_actions: Vec<(usize, usize)>,
}

/// Full Bayes criterion on the expanded action space `{(x_i, y_j)}`: every
/// (candidate, label) pair is an action with its own Bayes value, and the
/// candidate score is the rho-expectation over labels. Kept deliberately
/// independent of [`criterion_multi_label`] so their agreement (the
/// weighted-utility proposition) is a checkable fact rather than shared code.
pub fn criterion_full_bayes(
    tensor: &UtilityTensor,
    rho: Option<&[Vec<f64>]>,
) -> Result<FullBayesResult> {
    let k = tensor.n_models - 1;
    // Expanded action space: Bayes value per action (i, j).
    let mut action_values = vec![vec![0.0; tensor.n_labels]; tensor.n_candidates];
    for (i, row) in action_values.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = tensor.get(i, k, j);
        }
    }
    let mut scores = Vec::with_capacity(tensor.n_candidates);
    let mut best_actions = Vec::with_capacity(tensor.n_candidates);
    for (i, row) in action_values.iter().enumerate() {
        let r: &[f64] = match rho {
            Some(rs) => {
                if rs.len() != tensor.n_candidates || rs[i].len() != tensor.n_labels {
                    return Err(Error::InvalidInput("rho rows must be J-vectors".into()));
                }
                &rs[i]
            }
            None => &tensor.predicted_proba[i],
        };
        validate_simplex(r, "rho")?;
        let mut acc = f64::NEG_INFINITY;
        let mut best_j = 0;
        let mut best_v = f64::NEG_INFINITY;
        for (j, &v) in row.iter().enumerate() {
            let term = r[j].ln() + v;
            acc = if acc == f64::NEG_INFINITY {
                term
            } else {
                let m = acc.max(term);
                m + ((acc - m).exp() + (term - m).exp()).ln()
            };
            if v > best_v {
                best_v = v;
                best_j = j;
            }
        }
        scores.push(acc);
        best_actions.push((i, best_j));
    }
    Ok(FullBayesResult {
        selection: ranking_result(CRITERION_FULL_BAYES, scores),
        best_actions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum MultiDataAggregation {
    /// Worst case over the two data views.
    Min,
    /// Generalized stochastic dominance over the bi-objective vectors.
    Gsd,
}

/// Bi-objective utility over the de-facto data `D` and a hypothetical i.i.d.
/// sample `D'`. Both tensors must cover the same candidates; each candidate
/// is scored at the label predicted under `D`.
pub fn criterion_multi_data(
    tensor_d: &UtilityTensor,
    tensor_dprime: &UtilityTensor,
    aggregation: MultiDataAggregation,
) -> Result<SelectionResult> {
    if tensor_d.candidate_rows != tensor_dprime.candidate_rows
        || tensor_d.n_models != tensor_dprime.n_models
        || tensor_d.n_labels != tensor_dprime.n_labels
    {
        return Err(Error::InvalidInput(
            "multi-data tensors must cover identical candidates and shapes".into(),
        ));
    }
    let k = tensor_d.n_models - 1;
    let pairs: Vec<[f64; 2]> = (0..tensor_d.n_candidates)
        .map(|i| {
            let h = tensor_d.predicted_label[i];
            [tensor_d.get(i, k, h), tensor_dprime.get(i, k, h)]
        })
        .collect();
    let min_scores: Vec<f64> = pairs.iter().map(|p| p[0].min(p[1])).collect();
    let mut result = ranking_result(CRITERION_MULTI_DATA, min_scores);
    if aggregation == MultiDataAggregation::Gsd {
        // Single-state dominance instance over the bi-objective vectors; at
        // loop scale the candidate set is first reduced to the top survivors
        // of the min aggregation to respect the dominance module's size cap.
        let cap = crate::gsd::MAX_CANDIDATES;
        let considered: Vec<usize> = result.ranked.iter().take(cap).map(|&(i, _)| i).collect();
        let utilities: Vec<Vec<Vec<f64>>> = considered
            .iter()
            .map(|&i| vec![vec![pairs[i][0], pairs[i][1]]])
            .collect();
        let instance = crate::gsd::DominanceInstance::from_log_utilities(
            &utilities,
            vec![vec![1.0]],
        )?;
        let verdict = crate::gsd::solution_set_pi(&instance, 0)?;
        let mut selected: Vec<usize> =
            verdict.nondominated.iter().map(|&c| considered[c]).collect();
        selected.sort_unstable();
        if considered.len() < result.ranked.len() {
            for &(i, _) in result.ranked.iter().skip(cap) {
                result
                    .audit
                    .insert(i, serde_json::json!({ "gsd_prefiltered": true }));
            }
        }
        result.selected = selected;
    }
    Ok(result)
}
