//! Generalized stochastic dominance over multi-dimensional utilities.
//!
//! Candidates are compared through the preference system spanned by their
//! utility vectors: a representation `phi` maps the (per-dimension min-max
//! normalized) utility vectors into `[0,1]`, must respect componentwise
//! dominance (`R1`, with margin `xi` on strictly comparable pairs) and the
//! cardinal difference order (`R2`, generated over pairs of immediate
//! predecessors in the dominance DAG; full quadruple generation is available
//! for validation at tiny sizes). The dominance degree
//!
//! ```text
//! d_pi(a1, a2) = inf_phi  E_pi[phi(u(a1, .))] - E_pi[phi(u(a2, .))]
//! ```
//!
//! is a linear program per ordered pair, solved with the dense two-phase
//! simplex. `a'` excludes `a` when `d_pi(a', a) >= 0` and `d_pi(a, a') < 0`;
//! the nondominated rest is the solution set `A^pi`. Under a prior set the
//! degrees are robustified to `D = min over priors of d_pi`.
//!
//! Normalization anchors: the componentwise-min envelope is pinned to
//! `phi = 0` and the max envelope to `phi = 1`. Synthetic anchor vectors (when
//! no observed vector attains an envelope) only serve that normalization;
//! order constraints are generated over observed vectors.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::simplex::{BoxedLp, LpRow, TwoPhaseSimplex};

pub const MAX_CANDIDATES: usize = 25;
pub const MAX_STATES: usize = 41;
const D_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum R2Mode {
    /// Quadruples over immediate-predecessor (cover) pairs.
    Generators,
    /// All quadruples of comparable pairs; O(n^4), validation only.
    Full,
}

#[derive(Debug, Clone)]
pub struct DominanceInstance {
    /// Distinct utility vectors, normalized to `[0,1]` per dimension.
    /// Observed vectors first, then up to two synthetic envelope anchors.
    pub vectors: Vec<Vec<f64>>,
    /// Number of observed (non-synthetic) vectors.
    n_observed: usize,
    /// `assignment[candidate][state]` -> vector index.
    pub assignment: Vec<Vec<usize>>,
    /// `weights[prior][state]`, each row a probability vector.
    pub weights: Vec<Vec<f64>>,
    pub n_dims: usize,
    min_anchor: usize,
    max_anchor: usize,
}

fn key_of(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

impl DominanceInstance {
    /// Builds an instance from raw (already comparable-scale) utilities
    /// `raw[candidate][state][dim]` and per-prior state weights.
    pub fn from_raw_utilities(raw: &[Vec<Vec<f64>>], weights: Vec<Vec<f64>>) -> Result<Self> {
        let n_cand = raw.len();
        if n_cand == 0 {
            return Err(Error::InvalidInput("no candidates".into()));
        }
        if n_cand > MAX_CANDIDATES {
            return Err(Error::InvalidInput(format!(
                "{n_cand} candidates exceed the dominance cap of {MAX_CANDIDATES}"
            )));
        }
        let n_states = raw[0].len();
        if n_states == 0 || n_states > MAX_STATES {
            return Err(Error::InvalidInput(format!(
                "state count {n_states} outside 1..={MAX_STATES}"
            )));
        }
        let n_dims = raw[0][0].len();
        if n_dims == 0 {
            return Err(Error::InvalidInput("utility vectors need >= 1 dimension".into()));
        }
        for per_cand in raw {
            if per_cand.len() != n_states || per_cand.iter().any(|v| v.len() != n_dims) {
                return Err(Error::InvalidInput("ragged utility table".into()));
            }
        }
        if weights.is_empty() {
            return Err(Error::InvalidInput("need at least one prior weight vector".into()));
        }
        for w in &weights {
            if w.len() != n_states {
                return Err(Error::InvalidInput("weight vector state mismatch".into()));
            }
            if w.iter().any(|x| !(*x >= 0.0)) {
                return Err(Error::InvalidInput("weights must be nonnegative".into()));
            }
            let s: f64 = w.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!("weights must sum to 1 (got {s})")));
            }
        }

        // per-dimension min-max normalization
        let mut lo = vec![f64::INFINITY; n_dims];
        let mut hi = vec![f64::NEG_INFINITY; n_dims];
        for per_cand in raw {
            for v in per_cand {
                for (d, &x) in v.iter().enumerate() {
                    if !x.is_finite() {
                        return Err(Error::InvalidInput("utilities must be finite".into()));
                    }
                    lo[d] = lo[d].min(x);
                    hi[d] = hi[d].max(x);
                }
            }
        }
        let norm = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .enumerate()
                .map(|(d, &x)| {
                    if hi[d] > lo[d] {
                        (x - lo[d]) / (hi[d] - lo[d])
                    } else {
                        0.0
                    }
                })
                .collect()
        };

        let mut vectors: Vec<Vec<f64>> = Vec::new();
        let mut index: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
        let mut assignment = vec![vec![0usize; n_states]; n_cand];
        for (a, per_cand) in raw.iter().enumerate() {
            for (s, v) in per_cand.iter().enumerate() {
                let nv = norm(v);
                let k = key_of(&nv);
                let idx = *index.entry(k).or_insert_with(|| {
                    vectors.push(nv.clone());
                    vectors.len() - 1
                });
                assignment[a][s] = idx;
            }
        }
        let n_observed = vectors.len();

        let zeros = vec![0.0; n_dims];
        let ones = vec![1.0; n_dims];
        let min_anchor = match index.get(&key_of(&zeros)) {
            Some(&i) => i,
            None => {
                vectors.push(zeros);
                vectors.len() - 1
            }
        };
        let max_anchor = match index.get(&key_of(&ones)) {
            Some(&i) => i,
            None => {
                vectors.push(ones);
                vectors.len() - 1
            }
        };

        Ok(DominanceInstance {
            vectors,
            n_observed,
            assignment,
            weights,
            n_dims,
            min_anchor,
            max_anchor,
        })
    }

    /// As [`from_raw_utilities`], but entries are log utilities; they are
    /// mapped through a numerically safe exponential before normalization so
    /// dominance operates on the likelihood scale.
    pub fn from_log_utilities(log_raw: &[Vec<Vec<f64>>], weights: Vec<Vec<f64>>) -> Result<Self> {
        let n_dims = log_raw
            .first()
            .and_then(|c| c.first())
            .map(|v| v.len())
            .unwrap_or(0);
        let mut max_per_dim = vec![f64::NEG_INFINITY; n_dims];
        for per_cand in log_raw {
            for v in per_cand {
                for (d, &x) in v.iter().enumerate() {
                    max_per_dim[d] = max_per_dim[d].max(x);
                }
            }
        }
        let raw: Vec<Vec<Vec<f64>>> = log_raw
            .iter()
            .map(|per_cand| {
                per_cand
                    .iter()
                    .map(|v| {
                        v.iter()
                            .enumerate()
                            .map(|(d, &x)| (x - max_per_dim[d]).exp())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self::from_raw_utilities(&raw, weights)
    }

    /// Single-state instance over a utility tensor's per-model expected
    /// scores: dimension k holds model k's score of each candidate.
    pub fn from_tensor_expectations(tensor: &crate::criteria::UtilityTensor) -> Result<Self> {
        let log_raw: Vec<Vec<Vec<f64>>> = (0..tensor.n_candidates())
            .map(|i| {
                vec![(0..tensor.n_models())
                    .map(|k| tensor.predicted_score(i, k))
                    .collect()]
            })
            .collect();
        Self::from_log_utilities(&log_raw, vec![vec![1.0]])
    }

    pub fn n_candidates(&self) -> usize {
        self.assignment.len()
    }

    pub fn n_priors(&self) -> usize {
        self.weights.len()
    }

    fn dominates(&self, v: usize, w: usize) -> bool {
        v != w
            && self.vectors[v]
                .iter()
                .zip(&self.vectors[w])
                .all(|(a, b)| a >= b)
    }
}

/// Indexing metadata shared by every LP over one (instance, xi) pair.
struct PhiVariables {
    /// vector index -> LP variable index (None for the fixed anchors)
    free_of: Vec<Option<usize>>,
    n_free: usize,
}

fn phi_variables(instance: &DominanceInstance) -> PhiVariables {
    let mut free_of = vec![None; instance.vectors.len()];
    let mut n_free = 0;
    for v in 0..instance.vectors.len() {
        if v != instance.min_anchor && v != instance.max_anchor {
            free_of[v] = Some(n_free);
            n_free += 1;
        }
    }
    PhiVariables { free_of, n_free }
}

/// phi value of a vector expressed as (coef on free var, constant).
fn phi_term(instance: &DominanceInstance, vars: &PhiVariables, v: usize) -> (Option<usize>, f64) {
    if v == instance.max_anchor {
        (None, 1.0)
    } else if v == instance.min_anchor {
        (None, 0.0)
    } else {
        (vars.free_of[v], 0.0)
    }
}

fn constraint_rows(
    instance: &DominanceInstance,
    vars: &PhiVariables,
    xi: f64,
    r2: R2Mode,
) -> Result<Vec<LpRow>> {
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::InvalidInput(format!("xi {xi} outside [0, 1]")));
    }
    let n_obs = instance.n_observed;
    let mut rows: Vec<LpRow> = Vec::new();
    let mut push_diff = |plus: &[(Option<usize>, f64)], minus: &[(Option<usize>, f64)], rhs: f64| {
        // sum(plus) - sum(minus) >= rhs, moving constants to the right
        let mut coefs = vec![0.0; vars.n_free];
        let mut rhs = rhs;
        for &(var, c) in plus {
            match var {
                Some(j) => coefs[j] += 1.0,
                None => rhs -= c,
            }
        }
        for &(var, c) in minus {
            match var {
                Some(j) => coefs[j] -= 1.0,
                None => rhs += c,
            }
        }
        if coefs.iter().any(|c| *c != 0.0) || rhs > 0.0 {
            rows.push(LpRow { coefs, rhs });
        }
    };

    // R1: all componentwise-comparable ordered pairs of observed vectors;
    // every such pair is strict (vectors are deduplicated), so the xi margin
    // applies uniformly.
    let mut comparable: Vec<(usize, usize)> = Vec::new();
    for v in 0..n_obs {
        for w in 0..n_obs {
            if instance.dominates(v, w) {
                comparable.push((v, w));
            }
        }
    }
    for &(v, w) in &comparable {
        push_diff(&[phi_term(instance, vars, v)], &[phi_term(instance, vars, w)], xi);
    }

    // R2: phi(v1) - phi(v2) >= phi(v3) - phi(v4) whenever
    // (v1 - v2) >= (v3 - v4) componentwise, over the generator pairs.
    let generator_pairs: Vec<(usize, usize)> = match r2 {
        R2Mode::Full => comparable.clone(),
        R2Mode::Generators => {
            // covers: comparable pairs with no vector strictly between
            comparable
                .iter()
                .copied()
                .filter(|&(v, w)| {
                    !(0..n_obs).any(|u| {
                        u != v && u != w && instance.dominates(v, u) && instance.dominates(u, w)
                    })
                })
                .collect()
        }
    };
    for &(v1, v2) in &generator_pairs {
        for &(v3, v4) in &generator_pairs {
            if (v1, v2) == (v3, v4) {
                continue;
            }
            let diff_dominates = (0..instance.n_dims).all(|d| {
                instance.vectors[v1][d] - instance.vectors[v2][d]
                    >= instance.vectors[v3][d] - instance.vectors[v4][d] - 1e-12
            });
            if diff_dominates {
                push_diff(
                    &[phi_term(instance, vars, v1), phi_term(instance, vars, v4)],
                    &[phi_term(instance, vars, v2), phi_term(instance, vars, v3)],
                    0.0,
                );
            }
        }
    }
    Ok(rows)
}

/// Objective for `d_pi(a1, a2)`: minimize
/// `sum_s p_s [phi(u(a1, s)) - phi(u(a2, s))]`; returns (coefficients on the
/// free variables, constant contributed by the anchors).
fn objective_for(
    instance: &DominanceInstance,
    vars: &PhiVariables,
    a1: usize,
    a2: usize,
    prior: usize,
) -> (Vec<f64>, f64) {
    let mut c = vec![0.0; vars.n_free];
    let mut constant = 0.0;
    let w = &instance.weights[prior];
    for (s, &p) in w.iter().enumerate() {
        for (vec_idx, sign) in [
            (instance.assignment[a1][s], 1.0),
            (instance.assignment[a2][s], -1.0),
        ] {
            match phi_term(instance, vars, vec_idx) {
                (Some(j), _) => c[j] += sign * p,
                (None, k) => constant += sign * p * k,
            }
        }
    }
    (c, constant)
}

/// A built dominance LP for one ordered pair under one prior.
pub struct DominanceLp {
    pub lp: BoxedLp,
    pub objective: Vec<f64>,
    pub constant: f64,
    free_of: Vec<Option<usize>>,
    n_vectors: usize,
    min_anchor: usize,
    max_anchor: usize,
}

pub fn build_lp(
    instance: &DominanceInstance,
    a1: usize,
    a2: usize,
    prior: usize,
    xi: f64,
) -> Result<DominanceLp> {
    build_lp_with(instance, a1, a2, prior, xi, R2Mode::Generators)
}

pub fn build_lp_with(
    instance: &DominanceInstance,
    a1: usize,
    a2: usize,
    prior: usize,
    xi: f64,
    r2: R2Mode,
) -> Result<DominanceLp> {
    if a1 >= instance.n_candidates() || a2 >= instance.n_candidates() {
        return Err(Error::InvalidInput("candidate index out of range".into()));
    }
    if prior >= instance.n_priors() {
        return Err(Error::InvalidInput("prior index out of range".into()));
    }
    let vars = phi_variables(instance);
    let rows = constraint_rows(instance, &vars, xi, r2)?;
    let (objective, constant) = objective_for(instance, &vars, a1, a2, prior);
    Ok(DominanceLp {
        lp: BoxedLp {
            n_vars: vars.n_free,
            rows,
        },
        objective,
        constant,
        free_of: vars.free_of,
        n_vectors: instance.vectors.len(),
        min_anchor: instance.min_anchor,
        max_anchor: instance.max_anchor,
    })
}

/// Solves a built dominance LP; returns the dominance degree and the
/// certificate `phi` per distinct vector.
pub fn solve_lp(dlp: &DominanceLp) -> Result<(f64, Vec<f64>)> {
    let sol = crate::simplex::solve_boxed_lp(&dlp.lp, &dlp.objective)?;
    let mut phi = vec![0.0; dlp.n_vectors];
    for (v, slot) in dlp.free_of.iter().enumerate() {
        phi[v] = match slot {
            Some(j) => sol.x[*j],
            None => {
                if v == dlp.max_anchor {
                    1.0
                } else {
                    debug_assert_eq!(v, dlp.min_anchor);
                    0.0
                }
            }
        };
    }
    Ok((sol.objective + dlp.constant, phi))
}

/// Shared constraint system for sweeping many (pair, prior) objectives over
/// one instance: phase 1 runs once, every objective warm-starts phase 2.
pub struct DominanceSystem<'a> {
    instance: &'a DominanceInstance,
    vars: PhiVariables,
    solver: TwoPhaseSimplex,
}

impl<'a> DominanceSystem<'a> {
    pub fn new(instance: &'a DominanceInstance, xi: f64, r2: R2Mode) -> Result<Self> {
        let vars = phi_variables(instance);
        let rows = constraint_rows(instance, &vars, xi, r2)?;
        let solver = TwoPhaseSimplex::new(&BoxedLp {
            n_vars: vars.n_free,
            rows,
        })?;
        Ok(DominanceSystem {
            instance,
            vars,
            solver,
        })
    }

    pub fn d_pi(&mut self, a1: usize, a2: usize, prior: usize) -> Result<f64> {
        let (c, constant) = objective_for(self.instance, &self.vars, a1, a2, prior);
        let sol = self.solver.minimize(&c)?;
        Ok(sol.objective + constant)
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DominanceVerdict {
    /// `d[a1][a2]`, diagonal zero. `d_pi` for one prior, `D = min_pi d_pi`
    /// for a prior set.
    pub d: Vec<Vec<f64>>,
    /// Candidates not strictly dominated: no `a'` has
    /// `d(a', a) >= 0 && d(a, a') < 0` (tolerance 1e-9).
    pub nondominated: Vec<usize>,
}

fn nondominated_from(d: &[Vec<f64>]) -> Vec<usize> {
    let n = d.len();
    (0..n)
        .filter(|&a| {
            !(0..n).any(|ap| ap != a && d[ap][a] >= -D_TOL && d[a][ap] < -D_TOL)
        })
        .collect()
}

/// Solution set under one prior (by index into the instance's weight rows).
pub fn solution_set_pi(instance: &DominanceInstance, prior: usize) -> Result<DominanceVerdict> {
    solution_set_pi_xi(instance, prior, 0.0)
}

pub fn solution_set_pi_xi(
    instance: &DominanceInstance,
    prior: usize,
    xi: f64,
) -> Result<DominanceVerdict> {
    if prior >= instance.n_priors() {
        return Err(Error::InvalidInput("prior index out of range".into()));
    }
    let n = instance.n_candidates();
    let mut system = DominanceSystem::new(instance, xi, R2Mode::Generators)?;
    let mut d = vec![vec![0.0; n]; n];
    for a1 in 0..n {
        for a2 in 0..n {
            if a1 != a2 {
                d[a1][a2] = system.d_pi(a1, a2, prior)?;
            }
        }
    }
    let nondominated = nondominated_from(&d);
    Ok(DominanceVerdict { d, nondominated })
}

/// Solution set under the prior set: a candidate survives when no prior's
/// dominance relation excludes it, i.e. the intersection of the per-prior
/// solution sets. The verdict's degrees are the robustified
/// `D(a1, a2) = min over (retained) priors of d_pi(a1, a2)`.
///
/// Note the set excluded via `D` directly (`d(a', a) >= 0 && d(a, a') < 0`
/// on the minima) can be a strict subset of the per-prior exclusions: an
/// exclusion witnessed by one prior may be masked in the minimum by another
/// prior. The intersection is the operative semantics ("not dominated no
/// matter which prior") and is what this function returns; the `D` matrix is
/// reported for inspection. `retained` defaults to all priors; pass the
/// survivors of an alpha-cut to apply the credal reduction.
pub fn solution_set_big_pi(
    instance: &DominanceInstance,
    retained: Option<&[usize]>,
    xi: f64,
) -> Result<DominanceVerdict> {
    let priors: Vec<usize> = match retained {
        Some(r) => {
            if r.is_empty() {
                return Err(Error::InvalidInput("empty retained prior set".into()));
            }
            if r.iter().any(|&p| p >= instance.n_priors()) {
                return Err(Error::InvalidInput("retained prior index out of range".into()));
            }
            r.to_vec()
        }
        None => (0..instance.n_priors()).collect(),
    };
    let n = instance.n_candidates();
    let mut system = DominanceSystem::new(instance, xi, R2Mode::Generators)?;
    let mut d = vec![vec![f64::INFINITY; n]; n];
    let mut surviving = vec![true; n];
    for &p in &priors {
        let mut d_pi = vec![vec![0.0; n]; n];
        for a1 in 0..n {
            for a2 in 0..n {
                if a1 != a2 {
                    let v = system.d_pi(a1, a2, p)?;
                    d_pi[a1][a2] = v;
                    d[a1][a2] = d[a1][a2].min(v);
                }
            }
        }
        let kept = nondominated_from(&d_pi);
        for (a, keep) in surviving.iter_mut().enumerate() {
            if *keep && !kept.contains(&a) {
                *keep = false;
            }
        }
    }
    for (a1, row) in d.iter_mut().enumerate() {
        row[a1] = 0.0;
    }
    let nondominated = (0..n).filter(|&a| surviving[a]).collect();
    Ok(DominanceVerdict { d, nondominated })
}

/// Expected scalarized score per candidate under one prior and positive
/// dimension weights; the Bayes criterion this dominance notion is
/// compatible with.
pub fn weighted_expected_scores(
    instance: &DominanceInstance,
    prior: usize,
    dim_weights: &[f64],
) -> Result<Vec<f64>> {
    if dim_weights.len() != instance.n_dims {
        return Err(Error::InvalidInput("one weight per dimension required".into()));
    }
    if prior >= instance.n_priors() {
        return Err(Error::InvalidInput("prior index out of range".into()));
    }
    let w = &instance.weights[prior];
    Ok((0..instance.n_candidates())
        .map(|a| {
            w.iter()
                .enumerate()
                .map(|(s, &p)| {
                    let v = &instance.vectors[instance.assignment[a][s]];
                    p * crate::linalg::dot(v, dim_weights)
                })
                .sum()
        })
        .collect())
}
