//! Pseudo posterior predictive (PPP) scores and marginal likelihoods.
//!
//! The working approximation for the log PPP of a candidate `(x, j)` under a
//! fitted model is
//!
//! ```text
//! 2 * [ ll_D(theta_hat) + log p(j | x, theta_hat) ] - 1/2 * log |I(theta_hat)|
//! ```
//!
//! i.e. twice the plug-in log-likelihood of the augmented data minus half the
//! log-determinant of the observed information on the labeled data. The
//! candidate's own plug-in term is included so that scores discriminate
//! between candidates; [`PppVariant::CandidateFree`] drops it and recovers
//! the candidate-independent value `2 ll - 1/2 log|I|` for fidelity checks.
//!
//! [`ppp_exact`] integrates the posterior predictive on a bounded tensor grid
//! (models of dimension <= 2 only) and serves as the oracle the approximation
//! is validated against. [`laplace_log_marginal`] supplies Gaussian-prior
//! Laplace evidence `m(l, pi)` for the credal machinery.

use crate::credal::PriorSpec;
use crate::dataset::LabeledView;
use crate::error::{Error, Result};
use crate::glm::{self, ModelFit, ModelSpec};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PppVariant {
    /// Augment the plug-in log-likelihood with the candidate's own term.
    PointAugmented,
    /// The displayed approximation as written: candidate-independent.
    CandidateFree,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PppScore {
    pub candidate_idx: usize,
    pub model_id: usize,
    pub label_idx: usize,
    /// Log-scale score.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Evidence {
    pub prior_id: usize,
    pub model_id: usize,
    pub log_marginal: f64,
}

/// Approximate log PPP of one candidate under a converged fit on the labeled
/// data. Errors if the information matrix is singular (log-det undefined) or
/// the fit did not converge.
pub fn ppp_approx(
    fit: &ModelFit,
    candidate_idx: usize,
    candidate_x: &[f64],
    label: usize,
    variant: PppVariant,
) -> Result<PppScore> {
    if !fit.converged {
        return Err(Error::InvalidInput(
            "ppp_approx requires a converged (possibly ridge-stabilized) fit".into(),
        ));
    }
    let l = linalg::cholesky(&fit.fisher).map_err(|col| Error::SingularInformation {
        column: col,
        name: format!("design column {col}"),
    })?;
    let log_det = linalg::cholesky_log_det(&l);
    let point = match variant {
        PppVariant::PointAugmented => {
            glm::point_log_lik(&fit.spec, &fit.theta, candidate_x, label)
        }
        PppVariant::CandidateFree => 0.0,
    };
    Ok(PppScore {
        candidate_idx,
        model_id: fit.spec.model_id,
        label_idx: label,
        value: 2.0 * (fit.log_lik + point) - 0.5 * log_det,
    })
}

/// Tensor-grid quadrature settings for the exact-PPP oracle.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureGrid {
    pub points_per_dim: usize,
    pub half_width_sigmas: f64,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        QuadratureGrid {
            points_per_dim: 201,
            half_width_sigmas: 8.0,
        }
    }
}

fn log_prior_density(prior: &PriorSpec, theta: &[f64]) -> f64 {
    let q = theta.len() as f64;
    let s2 = prior.scale * prior.scale;
    let sq: f64 = theta
        .iter()
        .zip(&prior.mean)
        .map(|(t, m)| (t - m) * (t - m))
        .sum();
    -0.5 * q * (2.0 * std::f64::consts::PI * s2).ln() - sq / (2.0 * s2)
}

/// Log of `integral L(theta) pi(theta) dtheta` by trapezoidal quadrature on
/// `prior.mean ± half_width * scale`, where `log_l` evaluates the
/// log-likelihood at a grid node. Dimension 1 or 2 only.
fn log_marginal_on_grid<F: Fn(&[f64]) -> f64>(
    prior: &PriorSpec,
    grid: &QuadratureGrid,
    log_l: F,
) -> Result<f64> {
    let dim = prior.mean.len();
    if dim == 0 || dim > 2 {
        return Err(Error::InvalidInput(format!(
            "grid quadrature supports dimension 1..=2, got {dim}"
        )));
    }
    let n = grid.points_per_dim.max(3);
    let hw = grid.half_width_sigmas * prior.scale;
    let axis = |d: usize| -> Vec<f64> {
        (0..n)
            .map(|i| prior.mean[d] - hw + 2.0 * hw * i as f64 / (n - 1) as f64)
            .collect()
    };
    let h = 2.0 * hw / (n - 1) as f64;
    let log_w1 = |i: usize| -> f64 {
        if i == 0 || i == n - 1 {
            (h / 2.0).ln()
        } else {
            h.ln()
        }
    };
    let mut terms = Vec::new();
    match dim {
        1 => {
            let xs = axis(0);
            for (i, &x) in xs.iter().enumerate() {
                let theta = [x];
                terms.push(log_l(&theta) + log_prior_density(prior, &theta) + log_w1(i));
            }
        }
        _ => {
            let xs = axis(0);
            let ys = axis(1);
            for (i, &x) in xs.iter().enumerate() {
                for (j, &y) in ys.iter().enumerate() {
                    let theta = [x, y];
                    terms.push(
                        log_l(&theta) + log_prior_density(prior, &theta) + log_w1(i) + log_w1(j),
                    );
                }
            }
        }
    }
    Ok(linalg::log_sum_exp(&terms))
}

/// Exact log PPP by quadrature:
/// `log m(D u {(x,j)}, pi) - log m(D, pi)`. Oracle-grade, dimension <= 2.
pub fn ppp_exact(
    view: &LabeledView,
    candidate_x: &[f64],
    label: usize,
    spec: &ModelSpec,
    prior: &PriorSpec,
    grid: &QuadratureGrid,
) -> Result<f64> {
    if prior.mean.len() != spec.dim() {
        return Err(Error::InvalidInput("prior dimension must match model".into()));
    }
    let log_m_base = log_marginal_on_grid(prior, grid, |theta| {
        glm::log_lik_at(view, spec, theta).expect("dim checked")
    })?;
    let log_m_aug = log_marginal_on_grid(prior, grid, |theta| {
        glm::log_lik_at(view, spec, theta).expect("dim checked")
            + glm::point_log_lik(spec, theta, candidate_x, label)
    })?;
    Ok(log_m_aug - log_m_base)
}

/// Log-likelihood target for Laplace approximation: anything exposing a
/// log-likelihood with analytic score and negative Hessian.
pub trait LogLikTarget {
    fn dim(&self) -> usize;
    fn log_lik(&self, theta: &[f64]) -> f64;
    fn score(&self, theta: &[f64]) -> Vec<f64>;
    fn neg_hessian(&self, theta: &[f64]) -> Vec<Vec<f64>>;
}

/// GLM adapter; `extra` appends one (features, label) observation, which is
/// how the per-(label, model) marginals `m(l_jk, pi)` are produced.
pub struct GlmTarget<'a> {
    pub view: &'a LabeledView<'a>,
    pub spec: &'a ModelSpec,
    pub extra: Option<(&'a [f64], usize)>,
}

impl LogLikTarget for GlmTarget<'_> {
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn log_lik(&self, theta: &[f64]) -> f64 {
        let mut ll = glm::log_lik_at(self.view, self.spec, theta).expect("dim checked");
        if let Some((x, y)) = self.extra {
            ll += glm::point_log_lik(self.spec, theta, x, y);
        }
        ll
    }

    fn score(&self, theta: &[f64]) -> Vec<f64> {
        let mut g = glm::score_at(self.view, self.spec, theta);
        if let Some((x, y)) = self.extra {
            let row = self.spec.design_row(x);
            let p = 1.0 / (1.0 + (-linalg::dot(&row, theta)).exp());
            for (gj, rj) in g.iter_mut().zip(&row) {
                *gj += rj * (y as f64 - p);
            }
        }
        g
    }

    fn neg_hessian(&self, theta: &[f64]) -> Vec<Vec<f64>> {
        let mut h = glm::fisher_at(self.view, self.spec, theta);
        if let Some((x, _)) = self.extra {
            let row = self.spec.design_row(x);
            let p = 1.0 / (1.0 + (-linalg::dot(&row, theta)).exp());
            let w = p * (1.0 - p);
            for a in 0..row.len() {
                for b in 0..row.len() {
                    h[a][b] += w * row[a] * row[b];
                }
            }
        }
        h
    }
}

const MAP_MAX_ITER: usize = 100;
const MAP_TOL: f64 = 1e-9;

/// Newton solve for the posterior mode under an isotropic Gaussian prior.
fn map_solve(target: &dyn LogLikTarget, prior: &PriorSpec) -> Result<Vec<f64>> {
    let d = target.dim();
    if prior.mean.len() != d {
        return Err(Error::InvalidInput("prior dimension mismatch".into()));
    }
    let s2 = prior.scale * prior.scale;
    let log_post =
        |theta: &[f64]| -> f64 { target.log_lik(theta) + log_prior_density(prior, theta) };
    let mut theta = prior.mean.clone();
    for _ in 0..MAP_MAX_ITER {
        let mut g = target.score(&theta);
        for j in 0..d {
            g[j] -= (theta[j] - prior.mean[j]) / s2;
        }
        if linalg::max_abs(&g) < MAP_TOL {
            return Ok(theta);
        }
        let mut h = target.neg_hessian(&theta);
        for (j, row) in h.iter_mut().enumerate() {
            row[j] += 1.0 / s2;
        }
        let step = linalg::solve_spd(&h, &g)
            .map_err(|_| Error::InvalidInput("MAP Hessian not positive definite".into()))?;
        let base = log_post(&theta);
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t + scale * s).collect();
            if log_post(&trial) > base {
                theta = trial;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            return Ok(theta);
        }
    }
    let mut g = target.score(&theta);
    for j in 0..d {
        g[j] -= (theta[j] - prior.mean[j]) / s2;
    }
    if linalg::max_abs(&g) < 1e-5 {
        Ok(theta)
    } else {
        Err(Error::InvalidInput("MAP Newton did not converge".into()))
    }
}

/// Gaussian (Laplace) summary of a posterior: mode, negative log-posterior
/// Hessian at the mode, and the implied log marginal likelihood.
#[derive(Debug, Clone)]
pub struct LaplacePosterior {
    pub mode: Vec<f64>,
    pub neg_hessian: Vec<Vec<f64>>,
    pub log_marginal: f64,
}

/// Laplace approximation of the log marginal likelihood
/// `log m = ll(theta_map) + log pi(theta_map) + q/2 log 2pi - 1/2 log |H|`
/// with `H` the negative log-posterior Hessian at the mode.
pub fn laplace_log_marginal(target: &dyn LogLikTarget, prior: &PriorSpec) -> Result<f64> {
    Ok(laplace_posterior(target, prior)?.log_marginal)
}

pub fn laplace_posterior(target: &dyn LogLikTarget, prior: &PriorSpec) -> Result<LaplacePosterior> {
    let theta = map_solve(target, prior)?;
    let d = target.dim();
    let s2 = prior.scale * prior.scale;
    let mut h = target.neg_hessian(&theta);
    for (j, row) in h.iter_mut().enumerate() {
        row[j] += 1.0 / s2;
    }
    let l = linalg::cholesky(&h)
        .map_err(|_| Error::InvalidInput("Laplace Hessian not positive definite".into()))?;
    let log_det = linalg::cholesky_log_det(&l);
    let log_marginal = target.log_lik(&theta)
        + log_prior_density(prior, &theta)
        + 0.5 * d as f64 * (2.0 * std::f64::consts::PI).ln()
        - 0.5 * log_det;
    Ok(LaplacePosterior {
        mode: theta,
        neg_hessian: h,
        log_marginal,
    })
}

/// Laplace evidence of a GLM on the labeled view under one Gaussian prior.
pub fn laplace_evidence(
    view: &LabeledView,
    spec: &ModelSpec,
    prior: &PriorSpec,
) -> Result<Evidence> {
    let target = GlmTarget {
        view,
        spec,
        extra: None,
    };
    let log_marginal = laplace_log_marginal(&target, prior)?;
    Ok(Evidence {
        prior_id: prior.prior_id,
        model_id: spec.model_id,
        log_marginal,
    })
}
