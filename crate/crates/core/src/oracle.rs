//! Three-variable check of the closed-form edge test.
//!
//! For `p = 3` the conditional test of `h_ij` fixes every entry of the sample
//! cross-product matrix except `s_ij`. On the interval `I` of values keeping
//! the matrix positive definite, `s_ij` has conditional density proportional
//! to `det(S)^{(n-p-2)/2}`, and the critical values `c1 < c2` solve
//!
//! ```text
//!   ∫_{[c1, c2]} det^e ds            = (1 - α) ∫_I det^e ds
//!   ∫_{I ∖ (c1, c2)} s · det^e ds    =  α ∫_I s · det^e ds
//! ```
//!
//! Both equations are solved here by quadrature and root finding, without
//! reference to the beta distribution, so the decisions can be compared with
//! [`crate::edge_test`].

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::edge_test::EdgeTestConfig;
use crate::error::{Error, Result};
use crate::model::{generate_model, sample_gaussian_stream, Structure};
use crate::quadrature::integrate_with_offsets;
use crate::stats::{partial_correlations, sample_covariance, CovarianceMatrix};

const QUAD_TOL: f64 = 1e-12;
const MAX_BISECTIONS: usize = 200;

/// Entries of a `3 x 3` symmetric matrix with the target `(i, j)` left free.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalSlice {
    s: DMatrix<f64>,
    i: usize,
    j: usize,
    k: usize,
}

impl ConditionalSlice {
    /// The value currently stored at `(i, j)` is ignored by every method
    /// except [`ConditionalSlice::current`].
    pub fn new(s: &DMatrix<f64>, i: usize, j: usize) -> Result<Self> {
        if s.shape() != (3, 3) {
            return Err(Error::DimensionMismatch {
                expected: 3,
                found: s.nrows(),
            });
        }
        if i == j || i > 2 || j > 2 {
            return Err(Error::InvalidParameter(format!("bad target pair ({i}, {j})")));
        }
        if s != &s.transpose() {
            return Err(Error::InvalidParameter("matrix is not symmetric".into()));
        }
        let (i, j) = (i.min(j), i.max(j));
        let k = 3 - i - j;
        Ok(Self { s: s.clone(), i, j, k })
    }

    pub fn pair(&self) -> (usize, usize) {
        (self.i, self.j)
    }

    /// The stored value of the free entry.
    pub fn current(&self) -> f64 {
        self.s[(self.i, self.j)]
    }

    /// Determinant with `s_ij = s_ji = x`, by cofactor expansion.
    pub fn det_at(&self, x: f64) -> f64 {
        let mut m = self.s.clone();
        m[(self.i, self.j)] = x;
        m[(self.j, self.i)] = x;
        m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
            - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
            + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
    }

    /// Open interval of `s_ij` values that keep the matrix positive definite.
    ///
    /// `det` is the concave quadratic `-s_kk x^2 + 2 s_ik s_jk x + c0`; its
    /// roots are `s_ik s_jk / s_kk ± sqrt(m_i m_j) / s_kk` with the 2x2 minors
    /// `m_i = s_ii s_kk - s_ik^2`, `m_j = s_jj s_kk - s_jk^2`.
    pub fn pd_interval(&self) -> Result<(f64, f64)> {
        let (i, j, k) = (self.i, self.j, self.k);
        let s = &self.s;
        let skk = s[(k, k)];
        let mi = s[(i, i)] * skk - s[(i, k)] * s[(i, k)];
        let mj = s[(j, j)] * skk - s[(j, k)] * s[(j, k)];
        if !(skk > 0.0 && mi > 0.0 && mj > 0.0) {
            return Err(Error::InfeasibleSlice { i, j });
        }
        let centre = s[(i, k)] * s[(j, k)] / skk;
        let half = (mi * mj).sqrt() / skk;
        Ok((centre - half, centre + half))
    }

    /// Conditional weight `det^{e}` in the factored form
    /// `s_kk (x - lo) (hi - x)`, taking the two distances as arguments so
    /// callers can pass exact values next to the interval ends.
    fn weight(&self, exponent: f64) -> impl Fn(f64, f64) -> f64 {
        let skk = self.s[(self.k, self.k)];
        move |to_lo: f64, to_hi: f64| {
            let d = skk * to_lo * to_hi;
            if d > 0.0 {
                d.powf(exponent)
            } else {
                0.0
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalValues {
    pub lower: f64,
    pub upper: f64,
    pub interval: (f64, f64),
    /// `|mass([c1, c2]) / mass(I) - (1 - α)|`.
    pub mass_residual: f64,
    /// Tail first-moment residual divided by `mass(I) * max(|lo|, |hi|)`.
    pub moment_residual: f64,
}

/// Root of an increasing function on `[a, b]` with `g(a) <= 0 <= g(b)`:
/// Newton steps on the supplied derivative, bisection whenever a step leaves
/// the bracket.
fn increasing_root<G, D>(g: G, dg: D, mut a: f64, mut b: f64, x0: f64, width: f64) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
    D: Fn(f64) -> f64,
{
    let mut x = x0.clamp(a, b);
    for _ in 0..MAX_BISECTIONS {
        let v = g(x)?;
        if v == 0.0 {
            return Ok(x);
        }
        if v < 0.0 {
            a = x;
        } else {
            b = x;
        }
        if b - a <= width {
            return Ok(0.5 * (a + b));
        }
        let step = x - v / dg(x);
        let next = if step.is_finite() && step > a && step < b {
            step
        } else {
            0.5 * (a + b)
        };
        if (next - x).abs() <= 0.25 * width {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::Convergence("root bracket did not shrink".into()))
}

/// Solves the two conditional critical-value equations for the slice.
pub fn critical_values(slice: &ConditionalSlice, n: usize, alpha: f64) -> Result<CriticalValues> {
    if n <= 3 {
        return Err(Error::InsufficientSamples { n, p: 3 });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let (lo, hi) = slice.pd_interval()?;
    let exponent = (n as f64 - 5.0) / 2.0;
    let w = slice.weight(exponent);
    let at = |x: f64| w(x - lo, hi - x);
    // on a piece that ends at lo or hi the quadrature's own offsets are exact
    let piece = |a: f64, b: f64, first: bool| {
        let w = &w;
        integrate_with_offsets(
            move |x, da, db| {
                let to_lo = if a == lo { da } else { x - lo };
                let to_hi = if b == hi { db } else { hi - x };
                let v = w(to_lo, to_hi);
                if first {
                    x * v
                } else {
                    v
                }
            },
            a,
            b,
            QUAD_TOL,
        )
    };
    let mass = |a: f64, b: f64| piece(a, b, false);
    let moment = |a: f64, b: f64| piece(a, b, true);

    let total = mass(lo, hi)?;
    let total_moment = moment(lo, hi)?;
    let len = hi - lo;
    let width = 1e-15 * len.max(lo.abs().max(hi.abs()));

    // largest admissible c1: all of the α mass in the lower tail
    let c1_max = increasing_root(
        |c| Ok(mass(lo, c)? - alpha * total),
        at,
        lo,
        hi,
        lo + alpha * len,
        width,
    )?;

    // c2 from the coverage equation, for a given c1
    let upper_for = |c1: f64, guess: f64| -> Result<f64> {
        let target = (1.0 - alpha) * total;
        increasing_root(|c| Ok(mass(c1, c)? - target), at, c1, hi, guess, width)
    };
    // first-moment residual; positive when the upper tail carries too much
    let residual = |c1: f64, c2: f64| -> Result<f64> {
        Ok(moment(lo, c1)? + moment(c2, hi)? - alpha * total_moment)
    };

    let (mut a, mut b) = (lo, c1_max);
    let mut c2 = hi - 0.5 * alpha * len;
    let mut c1 = 0.5 * (a + b);
    let mut converged = false;
    for _ in 0..MAX_BISECTIONS {
        c1 = 0.5 * (a + b);
        c2 = upper_for(c1, c2.max(c1))?;
        let r = residual(c1, c2)?;
        if r > 0.0 {
            a = c1;
        } else if r < 0.0 {
            b = c1;
        }
        if r == 0.0 || b - a <= width {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence("critical value bisection".into()));
    }

    let mass_residual = (mass(c1, c2)? / total - (1.0 - alpha)).abs();
    let moment_residual = residual(c1, c2)?.abs() / (total * lo.abs().max(hi.abs()));
    Ok(CriticalValues {
        lower: c1,
        upper: c2,
        interval: (lo, hi),
        mass_residual,
        moment_residual,
    })
}

/// Conditional test of `h_ij` on a `3 x 3` positive definite cross-product
/// matrix: `true` (include the edge) unless `c1 < s_ij < c2`.
pub fn oracle_decision(s: &DMatrix<f64>, n: usize, alpha: f64, pair: (usize, usize)) -> Result<bool> {
    let slice = ConditionalSlice::new(s, pair.0, pair.1)?;
    let cv = critical_values(&slice, n, alpha)?;
    let x = slice.current();
    Ok(!(cv.lower < x && x < cv.upper))
}

/// Agreement statistics between the quadrature oracle and the closed-form
/// test over Wishart-sampled matrices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheckSummary {
    pub samples: usize,
    pub n: usize,
    pub alpha: f64,
    pub seed: u64,
    pub decisions: usize,
    pub agreements: usize,
    pub agreement_rate: f64,
    pub oracle_rejections: usize,
    pub threshold: f64,
    /// Largest `||r| - t|` over the disagreements (0 when there are none).
    pub max_boundary_distance: f64,
    pub max_mass_residual: f64,
    pub max_moment_residual: f64,
}

struct MatrixCheck {
    agree: usize,
    rejections: usize,
    boundary: f64,
    mass_residual: f64,
    moment_residual: f64,
}

/// Draws `samples` cross-product matrices from `n` observations of a
/// standard trivariate normal (stream `k` for matrix `k`) and compares the
/// oracle with the closed-form test on every pair of every matrix.
pub fn run_oracle_check(samples: usize, n: usize, alpha: f64, seed: u64) -> Result<OracleCheckSummary> {
    let cfg = EdgeTestConfig::new(n, 3, alpha)?;
    let model = generate_model(3, Structure::Empty, 1.0, seed)?;
    let checks: Vec<Result<MatrixCheck>> = (0..samples as u64)
        .into_par_iter()
        .map(|k| {
            let x = sample_gaussian_stream(&model, n, seed, k)?;
            let s = sample_covariance(&x)?;
            let partials = partial_correlations(&s)?;
            let mut out = MatrixCheck {
                agree: 0,
                rejections: 0,
                boundary: 0.0,
                mass_residual: 0.0,
                moment_residual: 0.0,
            };
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                let slice = ConditionalSlice::new(s.values(), i, j)?;
                let cv = critical_values(&slice, n, alpha)?;
                let v = slice.current();
                let oracle = !(cv.lower < v && v < cv.upper);
                let r = partials.get(i, j);
                let closed = cfg.rejects(r)?;
                out.mass_residual = out.mass_residual.max(cv.mass_residual);
                out.moment_residual = out.moment_residual.max(cv.moment_residual);
                out.rejections += oracle as usize;
                if oracle == closed {
                    out.agree += 1;
                } else {
                    out.boundary = out.boundary.max((r.abs() - cfg.threshold).abs());
                }
            }
            Ok(out)
        })
        .collect();
    let mut summary = OracleCheckSummary {
        samples,
        n,
        alpha,
        seed,
        decisions: 3 * samples,
        agreements: 0,
        agreement_rate: 0.0,
        oracle_rejections: 0,
        threshold: cfg.threshold,
        max_boundary_distance: 0.0,
        max_mass_residual: 0.0,
        max_moment_residual: 0.0,
    };
    for c in checks {
        let c = c?;
        summary.agreements += c.agree;
        summary.oracle_rejections += c.rejections;
        summary.max_boundary_distance = summary.max_boundary_distance.max(c.boundary);
        summary.max_mass_residual = summary.max_mass_residual.max(c.mass_residual);
        summary.max_moment_residual = summary.max_moment_residual.max(c.moment_residual);
    }
    summary.agreement_rate = if summary.decisions == 0 {
        1.0
    } else {
        summary.agreements as f64 / summary.decisions as f64
    };
    Ok(summary)
}

/// Convenience for tests and the CLI: a `CovarianceMatrix` view of `s`.
pub fn closed_form_decision(s: &DMatrix<f64>, n: usize, alpha: f64, pair: (usize, usize)) -> Result<bool> {
    let pc = partial_correlations(&CovarianceMatrix::new(s.clone())?)?;
    EdgeTestConfig::new(n, 3, alpha)?.rejects(pc.get(pair.0, pair.1))
}
