//! Gaussian graphical model selection.
//!
//! The crate selects the conditional-independence graph of a multivariate
//! Gaussian from a finite sample. Every unordered pair of variables gets an
//! exact partial-correlation test whose acceptance interval comes from a
//! symmetric beta quantile; with additive edge losses `a_ij` (false inclusion)
//! and `b_ij` (false exclusion) the per-edge level `b_ij / (a_ij + b_ij)`
//! yields the procedure with minimal risk among unbiased multiple-decision
//! procedures.
//!
//! Modules:
//!
//! * [`graph`] and [`loss`]: adjacency graphs, additive loss and error counts.
//! * [`stats`]: sample covariance, precision and partial correlations.
//! * [`beta`]: regularized incomplete beta function and its inverse.
//! * [`edge_test`]: the per-edge partial-correlation test.
//! * [`selection`]: the optimal unbiased procedure and Fisher-z baselines.
//! * [`model`] and [`risk`]: ground-truth models, sampling and Monte Carlo
//!   estimation of Type I/II error counts and risk.
//! * [`oracle`]: an independent three-variable check that solves the
//!   conditional critical-value equations by quadrature.

pub mod beta;
mod error;
pub mod graph;
mod linalg;
pub mod loss;
pub mod model;
pub mod normal;
pub mod oracle;
pub mod quadrature;
pub mod risk;
pub mod rng;
pub mod selection;
pub mod stats;

pub use edge_test::EdgeTestConfig;
pub use error::{Error, Result};
pub use graph::AdjacencyGraph;
pub use loss::{alpha_from_losses, count_errors, loss, ErrorCount, LossSpec};
pub use model::{generate_model, sample_gaussian, GroundTruthModel, Structure};
pub use risk::{compare_procedures, estimate_risk, Comparison, RiskReport};
pub use selection::{select_fisher_z, select_ou, select_with_alpha, Correction, GraphSelector, Procedure};
pub use stats::{CovarianceMatrix, PartialCorrelationMatrix, SampleMatrix};
