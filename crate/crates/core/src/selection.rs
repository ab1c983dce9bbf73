//! Graph selection procedures.
//!
//! The optimal unbiased procedure (`ou`) runs one exact partial-correlation
//! test per unordered pair, at level `alpha_ij = b_ij / (a_ij + b_ij)`, and
//! includes the edge iff that test rejects. The Fisher-z procedures are
//! asymptotic baselines over the same sample partial correlations.

use std::fmt;

use serde::Serialize;

use crate::edge_test::EdgeTestConfig;
use crate::error::{Error, Result};
use crate::graph::{pair_count, pairs, AdjacencyGraph};
use crate::loss::LossSpec;
use crate::normal::normal_quantile;
use crate::stats::{sample_partial_correlations, PartialCorrelationMatrix, SampleMatrix};

/// Anything that maps a sample to a graph. Implemented by [`Procedure`];
/// tests and callers may supply their own.
pub trait GraphSelector: Sync {
    /// Stable short name used in reports.
    fn name(&self) -> String;

    fn select(&self, x: &SampleMatrix) -> Result<AdjacencyGraph>;
}

/// Multiplicity correction for the Fisher-z baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Correction {
    None,
    Bonferroni,
    Holm,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Procedure {
    /// Per-edge levels from general losses.
    OptimalUnbiased(LossSpec),
    /// Every edge at the same level, i.e. losses `(1 - alpha, alpha)`.
    OptimalUnbiasedAlpha(f64),
    FisherZ { alpha: f64, correction: Correction },
}

impl Procedure {
    /// Names accepted: `ou`, `fisher-z`, `fisher-z-bonferroni`,
    /// `fisher-z-holm`. Fisher-z variants need scalar losses and use
    /// `alpha = b / (a + b)`.
    pub fn from_name(name: &str, losses: &LossSpec) -> Result<Self> {
        let fisher = |correction| match losses.scalar() {
            Some((a, b)) => Ok(Procedure::FisherZ {
                alpha: b / (a + b),
                correction,
            }),
            None => Err(Error::InvalidParameter(
                "fisher-z baselines need uniform losses".into(),
            )),
        };
        match name {
            "ou" => Ok(Procedure::OptimalUnbiased(losses.clone())),
            "fisher-z" => fisher(Correction::None),
            "fisher-z-bonferroni" => fisher(Correction::Bonferroni),
            "fisher-z-holm" => fisher(Correction::Holm),
            other => Err(Error::InvalidParameter(format!("unknown procedure `{other}`"))),
        }
    }
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Procedure::OptimalUnbiased(l) => match l.scalar() {
                Some((a, b)) => write!(f, "optimal unbiased (a={a}, b={b})"),
                None => write!(f, "optimal unbiased (per-edge losses)"),
            },
            Procedure::OptimalUnbiasedAlpha(alpha) => write!(f, "optimal unbiased (alpha={alpha})"),
            Procedure::FisherZ { alpha, correction } => {
                write!(f, "fisher-z baseline (alpha={alpha}, correction={correction:?})")
            }
        }
    }
}

impl GraphSelector for Procedure {
    fn name(&self) -> String {
        match self {
            Procedure::OptimalUnbiased(_) | Procedure::OptimalUnbiasedAlpha(_) => "ou".into(),
            Procedure::FisherZ { correction, .. } => match correction {
                Correction::None => "fisher-z".into(),
                Correction::Bonferroni => "fisher-z-bonferroni".into(),
                Correction::Holm => "fisher-z-holm".into(),
            },
        }
    }

    fn select(&self, x: &SampleMatrix) -> Result<AdjacencyGraph> {
        match self {
            Procedure::OptimalUnbiased(losses) => select_ou(x, losses),
            Procedure::OptimalUnbiasedAlpha(alpha) => select_with_alpha(x, *alpha),
            Procedure::FisherZ { alpha, correction } => select_fisher_z(x, *alpha, *correction),
        }
    }
}

/// A selected graph together with the quantities that produced it.
#[derive(Debug, Clone)]
pub struct Selection {
    pub graph: AdjacencyGraph,
    pub n: usize,
    pub partials: PartialCorrelationMatrix,
    /// Row-major per-edge levels; zero on the diagonal.
    pub alpha: Vec<Vec<f64>>,
    /// Row-major acceptance half-widths `t_ij`; zero on the diagonal.
    pub thresholds: Vec<Vec<f64>>,
}

/// Applies the per-edge tests to precomputed sample partial correlations.
/// The decision for `(i, j)` uses nothing but `r^{ij}`, `n`, `p` and `alpha_ij`.
pub fn select_ou_from_partials(
    partials: &PartialCorrelationMatrix,
    n: usize,
    losses: &LossSpec,
) -> Result<Selection> {
    let p = partials.p();
    if losses.p() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: losses.p(),
        });
    }
    // one quantile evaluation per distinct level
    let mut configs: Vec<EdgeTestConfig> = Vec::with_capacity(1);
    let mut graph = AdjacencyGraph::empty(p);
    let mut alpha = vec![vec![0.0; p]; p];
    let mut thresholds = vec![vec![0.0; p]; p];
    for (i, j) in pairs(p) {
        let level = losses.alpha(i, j);
        let cfg = match configs.iter().find(|c| c.alpha.to_bits() == level.to_bits()) {
            Some(c) => *c,
            None => {
                let c = EdgeTestConfig::new(n, p, level)?;
                configs.push(c);
                c
            }
        };
        graph.set_edge(i, j, cfg.rejects(partials.get(i, j))?);
        alpha[i][j] = level;
        alpha[j][i] = level;
        thresholds[i][j] = cfg.threshold;
        thresholds[j][i] = cfg.threshold;
    }
    Ok(Selection {
        graph,
        n,
        partials: partials.clone(),
        alpha,
        thresholds,
    })
}

pub fn select_ou_detailed(x: &SampleMatrix, losses: &LossSpec) -> Result<Selection> {
    if losses.p() != x.p() {
        return Err(Error::DimensionMismatch {
            expected: x.p(),
            found: losses.p(),
        });
    }
    let partials = sample_partial_correlations(x)?;
    select_ou_from_partials(&partials, x.n(), losses)
}

/// The optimal unbiased procedure for additive losses.
pub fn select_ou(x: &SampleMatrix, losses: &LossSpec) -> Result<AdjacencyGraph> {
    select_ou_detailed(x, losses).map(|s| s.graph)
}

/// [`select_ou`] with losses `(1 - alpha, alpha)`: every edge tested at `alpha`.
pub fn select_with_alpha(x: &SampleMatrix, alpha: f64) -> Result<AdjacencyGraph> {
    select_ou(x, &LossSpec::from_alpha(x.p(), alpha)?)
}

/// Fisher-z baseline. `sqrt(n - p - 1) * |atanh(r)|` is compared with
/// standard normal quantiles; the conditioning set of size `p - 2` reduces
/// the effective sample size to `n - p + 2`.
pub fn select_fisher_z(x: &SampleMatrix, alpha: f64, correction: Correction) -> Result<AdjacencyGraph> {
    let (n, p) = (x.n(), x.p());
    if n <= p + 3 {
        return Err(Error::InvalidParameter(format!(
            "fisher-z needs n - p - 3 > 0 (n={n}, p={p})"
        )));
    }
    let partials = sample_partial_correlations(x)?;
    fisher_z_from_partials(&partials, n, alpha, correction)
}

pub fn fisher_z_from_partials(
    partials: &PartialCorrelationMatrix,
    n: usize,
    alpha: f64,
    correction: Correction,
) -> Result<AdjacencyGraph> {
    let p = partials.p();
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let scale = ((n - p - 1) as f64).sqrt();
    let mut stats = Vec::with_capacity(pair_count(p));
    for (i, j) in pairs(p) {
        let r = partials.get(i, j);
        if !(r.abs() < 1.0) {
            return Err(Error::Domain(format!(
                "partial correlation ({}, {}) is {r}; z-transform undefined",
                i + 1,
                j + 1
            )));
        }
        stats.push(((i, j), scale * r.atanh().abs()));
    }
    let m = stats.len();
    let two_sided = |level: f64| normal_quantile(1.0 - level / 2.0);
    let mut graph = AdjacencyGraph::empty(p);
    match correction {
        Correction::None | Correction::Bonferroni => {
            let level = if correction == Correction::None { alpha } else { alpha / m as f64 };
            let crit = two_sided(level)?;
            for ((i, j), z) in stats {
                graph.set_edge(i, j, z > crit);
            }
        }
        Correction::Holm => {
            // step-down: k-th largest statistic faces level alpha / (m - k)
            stats.sort_by(|a, b| b.1.total_cmp(&a.1));
            for (k, ((i, j), z)) in stats.into_iter().enumerate() {
                if z > two_sided(alpha / (m - k) as f64)? {
                    graph.set_edge(i, j, true);
                } else {
                    break;
                }
            }
        }
    }
    Ok(graph)
}
