//! Monte Carlo estimation of Type I/II error counts and risk.
//!
//! Replication `k` draws its sample from stream `k` of the run seed and every
//! procedure under comparison sees that same sample. Replications run in
//! parallel in fixed-size chunks; per-replication results are folded in
//! replication order, so reports are bit-identical for any thread count.
//!
//! Risk is reported twice: `risk_unordered = a E[Y_I] + b E[Y_II]` counts each
//! unordered pair once, `risk_ordered` is twice that and matches the additive
//! loss summed over ordered pairs.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{pairs, AdjacencyGraph};
use crate::loss::{count_errors, loss, ErrorCount, LossSpec};
use crate::model::{sample_gaussian_stream, GroundTruthModel, ModelDescriptor};
use crate::selection::GraphSelector;

const CHUNK: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskReport {
    pub procedure: String,
    pub seed: u64,
    pub n: usize,
    pub p: usize,
    pub replications: u64,
    pub failed_replications: u64,
    /// Scalar losses, when the loss specification is uniform.
    pub loss_a: Option<f64>,
    pub loss_b: Option<f64>,
    pub mean_type_one: f64,
    pub mean_type_two: f64,
    pub risk_unordered: f64,
    pub risk_ordered: f64,
    pub se_type_one: f64,
    pub se_type_two: f64,
    pub se_risk_unordered: f64,
    pub se_risk_ordered: f64,
    /// Fraction of replications that included each edge; zero diagonal.
    pub per_edge_rejection_rate: Vec<Vec<f64>>,
    pub model: ModelDescriptor,
}

impl RiskReport {
    /// Sum over unordered pairs of the per-edge risks implied by the
    /// rejection rates: `a_ij * rate` at non-edges, `b_ij * (1 - rate)` at
    /// edges. Equals `risk_unordered` up to rounding.
    pub fn edge_risk_sum(&self, truth: &AdjacencyGraph, losses: &LossSpec) -> f64 {
        pairs(self.p)
            .map(|(i, j)| {
                let rate = self.per_edge_rejection_rate[i][j];
                if truth.has_edge(i, j) {
                    losses.b(i, j) * (1.0 - rate)
                } else {
                    losses.a(i, j) * rate
                }
            })
            .sum()
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:?},{:?},{:?},{:?}",
            self.procedure, self.mean_type_one, self.mean_type_two, self.risk_unordered, self.se_risk_unordered
        )
    }
}

/// Paired difference of per-replication unordered risk against the first
/// procedure of a comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedDifference {
    pub procedure: String,
    pub baseline: String,
    pub mean_risk_difference: f64,
    pub se_risk_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub seed: u64,
    pub reports: Vec<RiskReport>,
    pub paired: Vec<PairedDifference>,
}

pub const CSV_HEADER: &str = "procedure,E_YI,E_YII,risk,se_risk";

impl Comparison {
    /// One row per procedure: name, E_YI, E_YII, risk (unordered), se_risk.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.reports {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Running mean and variance (Welford), fed in replication order.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.count += 1;
        let delta = v - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (v - self.mean);
    }

    fn standard_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
    }
}

#[derive(Debug, Clone)]
struct Tally {
    ok: u64,
    failed: u64,
    type_one: u64,
    type_two: u64,
    y1: Moments,
    y2: Moments,
    risk: Moments,
    risk_sum: KahanSum,
    rejections: Vec<u64>,
}

impl Tally {
    fn new(p: usize) -> Self {
        Self {
            ok: 0,
            failed: 0,
            type_one: 0,
            type_two: 0,
            y1: Moments::default(),
            y2: Moments::default(),
            risk: Moments::default(),
            risk_sum: KahanSum::default(),
            rejections: vec![0; p * p],
        }
    }
}

struct Outcome {
    graph: AdjacencyGraph,
    errors: ErrorCount,
    risk: f64,
}

/// Unordered-pair loss of one decision.
fn unordered_risk(truth: &AdjacencyGraph, selected: &AdjacencyGraph, losses: &LossSpec, c: ErrorCount) -> f64 {
    if let Some((a, b)) = losses.scalar() {
        return a * c.type_one as f64 + b * c.type_two as f64;
    }
    let mut s = KahanSum::default();
    for (i, j) in pairs(truth.p()) {
        match (truth.has_edge(i, j), selected.has_edge(i, j)) {
            (false, true) => s.add(losses.a(i, j)),
            (true, false) => s.add(losses.b(i, j)),
            _ => {}
        }
    }
    s.value()
}

fn is_failure(e: &Error) -> bool {
    matches!(e, Error::SingularCovariance { .. })
}

fn run_replication(
    model: &GroundTruthModel,
    procedures: &[&dyn GraphSelector],
    n: usize,
    losses: &LossSpec,
    seed: u64,
    k: u64,
) -> Result<Vec<Option<Outcome>>> {
    let truth = model.graph();
    let x = match sample_gaussian_stream(model, n, seed, k) {
        Ok(x) => x,
        Err(e) if is_failure(&e) => return Ok(procedures.iter().map(|_| None).collect()),
        Err(e) => return Err(e),
    };
    procedures
        .iter()
        .map(|proc| match proc.select(&x) {
            Ok(graph) => {
                let errors = count_errors(truth, &graph)?;
                if let Some((a, b)) = losses.scalar() {
                    let ordered = loss(truth, &graph, losses)?;
                    let identity = 2.0 * (a * errors.type_one as f64 + b * errors.type_two as f64);
                    assert!(
                        (ordered - identity).abs() <= 1e-12 * identity.max(1.0),
                        "additive loss identity violated: {ordered} vs {identity}"
                    );
                }
                let risk = unordered_risk(truth, &graph, losses, errors);
                Ok(Some(Outcome { graph, errors, risk }))
            }
            Err(e) if is_failure(&e) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

fn validate(model: &GroundTruthModel, n: usize, replications: u64, losses: &LossSpec) -> Result<()> {
    if replications == 0 {
        return Err(Error::InvalidParameter("replications must be at least 1".into()));
    }
    if n <= model.p() {
        return Err(Error::InsufficientSamples { n, p: model.p() });
    }
    if losses.p() != model.p() {
        return Err(Error::DimensionMismatch {
            expected: model.p(),
            found: losses.p(),
        });
    }
    Ok(())
}

/// Runs every procedure on identical sample streams and reports each one
/// together with paired risk differences against the first procedure.
pub fn compare_procedures(
    model: &GroundTruthModel,
    procedures: &[&dyn GraphSelector],
    n: usize,
    replications: u64,
    losses: &LossSpec,
    seed: u64,
) -> Result<Comparison> {
    validate(model, n, replications, losses)?;
    let p = model.p();
    let mut tallies: Vec<Tally> = procedures.iter().map(|_| Tally::new(p)).collect();
    let mut diffs: Vec<Moments> = procedures.iter().map(|_| Moments::default()).collect();

    let mut start = 0;
    while start < replications && !procedures.is_empty() {
        let end = (start + CHUNK).min(replications);
        let chunk: Vec<Result<Vec<Option<Outcome>>>> = (start..end)
            .into_par_iter()
            .map(|k| run_replication(model, procedures, n, losses, seed, k))
            .collect();
        for outcomes in chunk {
            let outcomes = outcomes?;
            let baseline = outcomes[0].as_ref().map(|o| o.risk);
            for (idx, outcome) in outcomes.iter().enumerate() {
                let t = &mut tallies[idx];
                let Some(o) = outcome else {
                    t.failed += 1;
                    continue;
                };
                t.ok += 1;
                t.type_one += o.errors.type_one as u64;
                t.type_two += o.errors.type_two as u64;
                t.y1.push(o.errors.type_one as f64);
                t.y2.push(o.errors.type_two as f64);
                t.risk.push(o.risk);
                t.risk_sum.add(o.risk);
                for (i, j) in o.graph.edges() {
                    t.rejections[i * p + j] += 1;
                }
                if let (Some(base), true) = (baseline, idx > 0) {
                    diffs[idx].push(o.risk - base);
                }
            }
        }
        start = end;
    }

    let mut reports = Vec::with_capacity(procedures.len());
    for (proc, t) in procedures.iter().zip(&tallies) {
        if t.failed * 1000 > replications || t.ok == 0 {
            return Err(Error::TooManyFailures {
                failed: t.failed,
                replications,
            });
        }
        let ok = t.ok as f64;
        let mean_type_one = t.type_one as f64 / ok;
        let mean_type_two = t.type_two as f64 / ok;
        let scalar = losses.scalar();
        let risk_unordered = match scalar {
            Some((a, b)) => a * mean_type_one + b * mean_type_two,
            None => t.risk_sum.value() / ok,
        };
        let se_risk = t.risk.standard_error();
        let mut rates = vec![vec![0.0; p]; p];
        for (i, j) in pairs(p) {
            let r = t.rejections[i * p + j] as f64 / ok;
            rates[i][j] = r;
            rates[j][i] = r;
        }
        reports.push(RiskReport {
            procedure: proc.name(),
            seed,
            n,
            p,
            replications,
            failed_replications: t.failed,
            loss_a: scalar.map(|s| s.0),
            loss_b: scalar.map(|s| s.1),
            mean_type_one,
            mean_type_two,
            risk_unordered,
            risk_ordered: 2.0 * risk_unordered,
            se_type_one: t.y1.standard_error(),
            se_type_two: t.y2.standard_error(),
            se_risk_unordered: se_risk,
            se_risk_ordered: 2.0 * se_risk,
            per_edge_rejection_rate: rates,
            model: model.descriptor().clone(),
        });
    }
    let paired = reports
        .iter()
        .zip(&diffs)
        .skip(1)
        .map(|(r, d)| PairedDifference {
            procedure: r.procedure.clone(),
            baseline: reports[0].procedure.clone(),
            mean_risk_difference: d.mean,
            se_risk_difference: d.standard_error(),
        })
        .collect();
    Ok(Comparison {
        seed,
        reports,
        paired,
    })
}

/// Monte Carlo risk of a single procedure.
pub fn estimate_risk(
    model: &GroundTruthModel,
    procedure: &dyn GraphSelector,
    n: usize,
    replications: u64,
    losses: &LossSpec,
    seed: u64,
) -> Result<RiskReport> {
    let mut cmp = compare_procedures(model, &[procedure], n, replications, losses, seed)?;
    Ok(cmp.reports.remove(0))
}

/// Monte Carlo estimate of `E_θ w(S'; δ)` (ordered-pair loss) for each
/// candidate structure `S'`, with θ the given model. Used to check
/// w-unbiasedness: the true structure should attain the minimum.
pub fn expected_loss_against(
    model: &GroundTruthModel,
    procedure: &dyn GraphSelector,
    n: usize,
    replications: u64,
    losses: &LossSpec,
    seed: u64,
    hypotheses: &[AdjacencyGraph],
) -> Result<Vec<f64>> {
    validate(model, n, replications, losses)?;
    let per_rep: Vec<Result<Option<Vec<f64>>>> = (0..replications)
        .into_par_iter()
        .map(|k| {
            let x = match sample_gaussian_stream(model, n, seed, k) {
                Ok(x) => x,
                Err(e) if is_failure(&e) => return Ok(None),
                Err(e) => return Err(e),
            };
            let g = match procedure.select(&x) {
                Ok(g) => g,
                Err(e) if is_failure(&e) => return Ok(None),
                Err(e) => return Err(e),
            };
            hypotheses.iter().map(|h| loss(h, &g, losses)).collect::<Result<Vec<_>>>().map(Some)
        })
        .collect();
    let mut sums = vec![KahanSum::default(); hypotheses.len()];
    let mut ok = 0u64;
    for r in per_rep {
        if let Some(v) = r? {
            ok += 1;
            for (s, x) in sums.iter_mut().zip(v) {
                s.add(x);
            }
        }
    }
    if (replications - ok) * 1000 > replications || ok == 0 {
        return Err(Error::TooManyFailures {
            failed: replications - ok,
            replications,
        });
    }
    Ok(sums.iter().map(|s| s.value() / ok as f64).collect())
}
