//! Ground-truth Gaussian models and seeded sampling.
//!
//! A model is specified through its precision matrix `Ω`. Structural zeros of
//! `Ω` are exact, so non-edges have partial correlation exactly zero.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{pairs, AdjacencyGraph};
use crate::linalg::{cholesky_lower, spd_inverse};
use crate::rng;
use crate::stats::{PartialCorrelationMatrix, SampleMatrix};

/// Row dominance margin kept by generated precision matrices.
pub const DOMINANCE_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Structure {
    Empty,
    Chain,
    Star,
    Cycle,
    /// Each pair is an edge independently with probability `density`.
    Random { density: f64 },
}

impl Structure {
    pub fn parse(name: &str, density: Option<f64>) -> Result<Self> {
        Ok(match name {
            "empty" => Structure::Empty,
            "chain" => Structure::Chain,
            "star" => Structure::Star,
            "cycle" => Structure::Cycle,
            "random" => Structure::Random {
                density: density.ok_or_else(|| {
                    Error::InvalidParameter("random structure needs a density".into())
                })?,
            },
            other => return Err(Error::InvalidParameter(format!("unknown structure `{other}`"))),
        })
    }

    fn graph(&self, p: usize, seed: u64) -> AdjacencyGraph {
        let mut g = AdjacencyGraph::empty(p);
        match *self {
            Structure::Empty => {}
            Structure::Chain => (1..p).for_each(|v| g.set_edge(v - 1, v, true)),
            Structure::Star => (1..p).for_each(|v| g.set_edge(0, v, true)),
            Structure::Cycle => {
                (1..p).for_each(|v| g.set_edge(v - 1, v, true));
                g.set_edge(p - 1, 0, true);
            }
            Structure::Random { density } => {
                let mut r = rng::stream(seed, rng::STRUCTURE_STREAM);
                for (i, j) in pairs(p) {
                    if r.random::<f64>() < density {
                        g.set_edge(i, j, true);
                    }
                }
            }
        }
        g
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Structure::Empty => f.write_str("empty"),
            Structure::Chain => f.write_str("chain"),
            Structure::Star => f.write_str("star"),
            Structure::Cycle => f.write_str("cycle"),
            Structure::Random { density } => write!(f, "random({density})"),
        }
    }
}

/// Serializable summary of how a model was built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelDescriptor {
    pub p: usize,
    pub structure: Option<Structure>,
    pub requested_strength: Option<f64>,
    /// Factor applied to the off-diagonal of `Ω` to keep it dominant.
    pub rescale: f64,
    pub seed: Option<u64>,
    pub graph: AdjacencyGraph,
    /// Partial correlation of each true edge, as `[i, j, rho]` (1-based).
    pub edge_partial_correlations: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct GroundTruthModel {
    precision: DMatrix<f64>,
    covariance: DMatrix<f64>,
    factor: DMatrix<f64>,
    mean: DVector<f64>,
    graph: AdjacencyGraph,
    partials: PartialCorrelationMatrix,
    descriptor: ModelDescriptor,
}

impl GroundTruthModel {
    /// Model with the given precision matrix and zero mean. The graph is the
    /// exact nonzero pattern of the off-diagonal of `precision`.
    pub fn from_precision(precision: DMatrix<f64>) -> Result<Self> {
        let p = precision.nrows();
        Self::build(precision, DVector::zeros(p), None, None, 1.0, None)
    }

    pub fn with_mean(mut self, mean: DVector<f64>) -> Result<Self> {
        if mean.len() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                found: mean.len(),
            });
        }
        self.mean = mean;
        Ok(self)
    }

    fn build(
        precision: DMatrix<f64>,
        mean: DVector<f64>,
        structure: Option<Structure>,
        strength: Option<f64>,
        rescale: f64,
        seed: Option<u64>,
    ) -> Result<Self> {
        let p = precision.nrows();
        if !precision.is_square() || precision != precision.transpose() {
            return Err(Error::InvalidParameter("precision must be square and symmetric".into()));
        }
        cholesky_lower(&precision)?;
        let mut graph = AdjacencyGraph::empty(p);
        for (i, j) in pairs(p) {
            graph.set_edge(i, j, precision[(i, j)] != 0.0);
        }
        let covariance = spd_inverse(&precision)?;
        let factor = cholesky_lower(&covariance)?;
        let partials = PartialCorrelationMatrix::from_precision(&precision);
        let edge_partial_correlations = graph
            .edges()
            .map(|(i, j)| (i + 1, j + 1, partials.get(i, j)))
            .collect();
        let descriptor = ModelDescriptor {
            p,
            structure,
            requested_strength: strength,
            rescale,
            seed,
            graph: graph.clone(),
            edge_partial_correlations,
        };
        Ok(Self {
            precision,
            covariance,
            factor,
            mean,
            graph,
            partials,
            descriptor,
        })
    }

    pub fn p(&self) -> usize {
        self.precision.nrows()
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// True structure `S`.
    pub fn graph(&self) -> &AdjacencyGraph {
        &self.graph
    }

    /// Population partial correlations `ρ^{ij}`.
    pub fn partial_correlations(&self) -> &PartialCorrelationMatrix {
        &self.partials
    }

    pub fn descriptor(&self) -> &ModelDescriptor {
        &self.descriptor
    }
}

/// Builds `Ω` with unit diagonal and `-strength` on the edges of the chosen
/// structure, shrinking the off-diagonal when needed so that every row sum of
/// off-diagonal magnitudes stays at most `1 - DOMINANCE_MARGIN`.
pub fn generate_model(p: usize, structure: Structure, strength: f64, seed: u64) -> Result<GroundTruthModel> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!("model needs p >= 2, got {p}")));
    }
    if !(strength != 0.0 && strength.is_finite()) {
        return Err(Error::InvalidParameter(format!("strength must be nonzero, got {strength}")));
    }
    if let Structure::Random { density } = structure {
        if !(0.0..=1.0).contains(&density) {
            return Err(Error::InvalidParameter(format!("density {density} outside [0, 1]")));
        }
    }
    let graph = structure.graph(p, seed);
    let max_degree = (0..p)
        .map(|i| (0..p).filter(|&j| graph.has_edge(i, j)).count())
        .max()
        .unwrap_or(0);
    let row_sum = max_degree as f64 * strength.abs();
    let rescale = if row_sum > 1.0 - DOMINANCE_MARGIN {
        (1.0 - DOMINANCE_MARGIN) / row_sum
    } else {
        1.0
    };
    let mut omega = DMatrix::identity(p, p);
    for (i, j) in graph.edges() {
        omega[(i, j)] = -strength * rescale;
        omega[(j, i)] = -strength * rescale;
    }
    let model = GroundTruthModel::build(
        omega,
        DVector::zeros(p),
        Some(structure),
        Some(strength),
        rescale,
        Some(seed),
    );
    assert!(model.is_ok(), "diagonally dominant precision must be positive definite");
    model
}

/// Draws `n` observations `x(t) = μ + L z(t)` from stream 0 of `seed`.
pub fn sample_gaussian(model: &GroundTruthModel, n: usize, seed: u64) -> Result<SampleMatrix> {
    sample_gaussian_stream(model, n, seed, 0)
}

/// Like [`sample_gaussian`] but reading stream `stream` of `seed`.
pub fn sample_gaussian_stream(
    model: &GroundTruthModel,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<SampleMatrix> {
    let p = model.p();
    if n <= p {
        return Err(Error::InsufficientSamples { n, p });
    }
    let mut r = rng::stream(seed, stream);
    let z = DMatrix::from_fn(p, n, |_, _| r.sample::<f64, _>(StandardNormal));
    let mut x = &model.factor * z;
    for mut col in x.column_iter_mut() {
        col += &model.mean;
    }
    SampleMatrix::new(x)
}
