//! Additive edge losses and Type I/II error accounting.
//!
//! Two counting conventions coexist and differ by exactly a factor of two:
//!
//! * [`count_errors`] counts each *unordered* pair once, giving the numbers of
//!   falsely included (Type I) and falsely excluded (Type II) edges.
//! * [`loss`] sums the per-edge loss over *ordered* pairs `i != j`, so every
//!   misclassified edge contributes twice. For scalar losses
//!   `loss(S, Q) = 2 * (a * Y_I + b * Y_II)`.
//!
//! Risk reports carry both the unordered and the ordered figure, labelled.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{pairs, AdjacencyGraph};

/// Per-edge losses: `a[i][j]` for false inclusion, `b[i][j]` for false
/// exclusion. Both matrices are symmetric; the diagonal is ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSpec {
    p: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    uniform: Option<(f64, f64)>,
}

impl LossSpec {
    /// Scalar losses `a_ij = a`, `b_ij = b`.
    pub fn uniform(p: usize, a: f64, b: f64) -> Result<Self> {
        check_positive(a, b)?;
        Ok(Self {
            p,
            a: vec![a; p * p],
            b: vec![b; p * p],
            uniform: Some((a, b)),
        })
    }

    /// `a = 1 - alpha`, `b = alpha`: every edge test runs at level `alpha`.
    pub fn from_alpha(p: usize, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        Self::uniform(p, 1.0 - alpha, alpha)
    }

    /// Per-edge losses from row-major `p x p` matrices. Off-diagonal entries
    /// must be positive and symmetric.
    pub fn from_matrices(p: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        for m in [&a, &b] {
            if m.len() != p * p {
                return Err(Error::DimensionMismatch {
                    expected: p * p,
                    found: m.len(),
                });
            }
        }
        for (i, j) in pairs(p) {
            let (aij, bij) = (a[i * p + j], b[i * p + j]);
            check_positive(aij, bij)?;
            if aij != a[j * p + i] || bij != b[j * p + i] {
                return Err(Error::InvalidParameter(format!(
                    "loss matrices asymmetric at ({i}, {j})"
                )));
            }
        }
        let first = pairs(p).next().map(|(i, j)| (a[i * p + j], b[i * p + j]));
        let uniform = first.filter(|&(a0, b0)| {
            pairs(p).all(|(i, j)| a[i * p + j] == a0 && b[i * p + j] == b0)
        });
        Ok(Self { p, a, b, uniform })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.p + j]
    }

    #[inline]
    pub fn b(&self, i: usize, j: usize) -> f64 {
        self.b[i * self.p + j]
    }

    /// `(a, b)` when all edges share the same losses.
    pub fn scalar(&self) -> Option<(f64, f64)> {
        self.uniform
    }

    /// Level of the test for edge `(i, j)`.
    pub fn alpha(&self, i: usize, j: usize) -> f64 {
        self.b(i, j) / (self.a(i, j) + self.b(i, j))
    }
}

fn check_positive(a: f64, b: f64) -> Result<()> {
    if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "losses must be positive and finite, got a={a}, b={b}"
        )))
    }
}

/// Numbers of Type I (false inclusion) and Type II (false exclusion) edge
/// errors, each unordered pair counted once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ErrorCount {
    pub type_one: usize,
    pub type_two: usize,
}

impl ErrorCount {
    pub fn total(&self) -> usize {
        self.type_one + self.type_two
    }
}

fn check_dims(truth: &AdjacencyGraph, other: usize) -> Result<()> {
    if truth.p() != other {
        return Err(Error::DimensionMismatch {
            expected: truth.p(),
            found: other,
        });
    }
    Ok(())
}

pub fn count_errors(truth: &AdjacencyGraph, selected: &AdjacencyGraph) -> Result<ErrorCount> {
    check_dims(truth, selected.p())?;
    let mut out = ErrorCount::default();
    for (i, j) in pairs(truth.p()) {
        match (truth.has_edge(i, j), selected.has_edge(i, j)) {
            (false, true) => out.type_one += 1,
            (true, false) => out.type_two += 1,
            _ => {}
        }
    }
    Ok(out)
}

/// Additive loss `w(S, Q)` summed over ordered pairs `i != j`.
pub fn loss(truth: &AdjacencyGraph, selected: &AdjacencyGraph, losses: &LossSpec) -> Result<f64> {
    check_dims(truth, selected.p())?;
    check_dims(truth, losses.p())?;
    let p = truth.p();
    let mut total = 0.0;
    for i in 0..p {
        for j in 0..p {
            if i == j {
                continue;
            }
            match (truth.has_edge(i, j), selected.has_edge(i, j)) {
                (false, true) => total += losses.a(i, j),
                (true, false) => total += losses.b(i, j),
                _ => {}
            }
        }
    }
    Ok(total)
}

/// Per-edge level `b / (a + b)` that makes the edge test risk-optimal.
pub fn alpha_from_losses(a: f64, b: f64) -> Result<f64> {
    check_positive(a, b)?;
    Ok(b / (a + b))
}
