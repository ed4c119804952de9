//! Robust pseudo-label selection (PLS) for semi-supervised self-training.
//!
//! Self-training iteratively augments a labeled set with model-predicted
//! labels on unlabeled data. Everything here revolves around making the
//! *selection* of those pseudo-labeled points robust: candidates are scored
//! by likelihood-based utilities under one or many models, under one or many
//! hypothetical labels, or under sets of priors, and the winners are folded
//! back into the training data.
//!
//! Module map:
//!
//! * [`dataset`] — data container, CSV ingestion, synthetic generators, and
//!   seeded labeled/unlabeled/test splits.
//! * [`glm`] — binary logistic regression via Newton-Raphson with observed
//!   Fisher information, the probabilistic substrate for every criterion.
//! * [`evidence`] — pseudo posterior predictive (PPP) scores, Laplace
//!   marginal likelihoods, and a quadrature oracle that validates them.
//! * [`criteria`] — the selection criteria: probability score, variance,
//!   max-max likelihood, PPP, multi-model, threshold ("reversed Occam")
//!   selection, multi-label, full-Bayes, and multi-data.
//! * [`credal`] — finite prior sets, Gamma-maximin, alpha-cut updating
//!   (generic and regret-based) with the 1/alpha regret guarantee.
//! * [`gsd`] — generalized stochastic dominance over multi-dimensional
//!   utilities via preference-system linear programs.
//! * [`simplex`] — the dense two-phase simplex solver behind [`gsd`].
//! * [`selftrain`] — the fit/score/select/augment loop.
//! * [`bench`] — seeded experiment harness and report emission.
//! * [`oracle`] — independent reference implementations (IRLS, Monte Carlo,
//!   brute-force dominance) used by the test and acceptance suites.

pub mod bench;
pub mod credal;
pub mod criteria;
pub mod dataset;
pub mod error;
pub mod evidence;
pub mod glm;
pub mod gsd;
pub mod linalg;
pub mod oracle;
pub mod rng;
pub mod selftrain;
pub mod simplex;

pub use error::{Error, Result};
