//! Rendering of command results. Every artifact starts with, or contains,
//! the tool version, the command and all parameters needed to rerun it.

use ggms::edge_test::EdgeTestConfig;
use ggms::oracle::OracleCheckSummary;
use ggms::selection::Selection;
use ggms::{Comparison, Error, LossSpec};
use serde_json::{json, Map, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Provenance {
    command: &'static str,
    params: Vec<(&'static str, Value)>,
}

impl Provenance {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            params: Vec::new(),
        }
    }

    pub fn with(mut self, key: &'static str, value: impl Into<Value>) -> Self {
        self.params.push((key, value.into()));
        self
    }

    pub fn with_opt(self, key: &'static str, value: Option<f64>) -> Self {
        match value {
            Some(v) => self.with(key, v),
            None => self,
        }
    }

    fn all_params(&self, losses: &LossSpec) -> Vec<(&'static str, Value)> {
        let mut out = self.params.clone();
        let (a, b) = losses.scalar().expect("command-line losses are uniform");
        out.push(("alpha", losses.alpha(0, 1).into()));
        out.push(("loss_a", a.into()));
        out.push(("loss_b", b.into()));
        out
    }

    /// Two comment lines: tool and command, then `key=value` pairs.
    pub fn comment_lines(&self, prefix: &str, losses: &LossSpec) -> String {
        let pairs: Vec<String> = self
            .all_params(losses)
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k}={s}"),
                other => format!("{k}={other}"),
            })
            .collect();
        format!(
            "{prefix}ggms {VERSION} {}\n{prefix}{}\n",
            self.command,
            pairs.join(" ")
        )
    }

    fn json_header(&self, losses: &LossSpec) -> Map<String, Value> {
        let mut params = Map::new();
        for (k, v) in self.all_params(losses) {
            params.insert(k.to_string(), v);
        }
        let mut m = Map::new();
        m.insert("tool".into(), "ggms".into());
        m.insert("version".into(), VERSION.into());
        m.insert("command".into(), self.command.into());
        m.insert("parameters".into(), Value::Object(params));
        m
    }
}

fn to_json(m: Map<String, Value>) -> Result<String, Error> {
    let mut s = serde_json::to_string_pretty(&Value::Object(m))
        .map_err(|e| Error::InvalidParameter(format!("json encoding: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// The selection uses a single level when the losses are uniform.
fn single_threshold(sel: &Selection) -> f64 {
    if sel.thresholds.len() > 1 {
        sel.thresholds[0][1]
    } else {
        f64::NAN
    }
}

pub fn edge_list(prov: &Provenance, losses: &LossSpec, sel: &Selection) -> String {
    format!(
        "{}# threshold={}\n{}",
        prov.comment_lines("# ", losses),
        single_threshold(sel),
        sel.graph.to_edge_list()
    )
}

pub fn dot(prov: &Provenance, losses: &LossSpec, sel: &Selection) -> String {
    format!(
        "{}// threshold={}\n{}",
        prov.comment_lines("// ", losses),
        single_threshold(sel),
        sel.graph.to_dot()
    )
}

pub fn select_json(prov: &Provenance, losses: &LossSpec, sel: &Selection) -> Result<String, Error> {
    let p = sel.graph.p();
    let partials: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| sel.partials.get(i, j)).collect())
        .collect();
    let mut m = prov.json_header(losses);
    m.insert("p".into(), p.into());
    m.insert("edges".into(), json!(sel.graph.one_based_edges()));
    m.insert("alpha_matrix".into(), json!(sel.alpha));
    m.insert("thresholds".into(), json!(sel.thresholds));
    m.insert("partial_correlations".into(), json!(partials));
    to_json(m)
}

pub fn report_json(
    prov: &Provenance,
    losses: &LossSpec,
    comparison: &Comparison,
    compare: bool,
) -> Result<String, Error> {
    let mut m = prov.json_header(losses);
    if compare {
        m.insert("comparison".into(), json!(comparison));
    } else {
        m.insert("report".into(), json!(comparison.reports[0]));
    }
    to_json(m)
}

/// Rounds to 15 decimals and drops trailing zeros, so `0.95` prints as
/// `0.95` even when the computed value is one ulp away.
fn short(x: f64) -> String {
    let s = format!("{x:.15}");
    let s = s.trim_end_matches('0');
    s.strip_suffix('.').unwrap_or(s).to_string()
}

pub fn threshold_text(prov: &Provenance, losses: &LossSpec, cfg: &EdgeTestConfig) -> String {
    format!(
        "{}q = {}\nt = {}\n",
        prov.comment_lines("# ", losses),
        short(cfg.q),
        short(cfg.threshold)
    )
}

pub fn threshold_json(prov: &Provenance, losses: &LossSpec, cfg: &EdgeTestConfig) -> Result<String, Error> {
    let mut m = prov.json_header(losses);
    m.insert("q".into(), cfg.q.into());
    m.insert("threshold".into(), cfg.threshold.into());
    to_json(m)
}

pub fn oracle_text(prov: &Provenance, losses: &LossSpec, s: &OracleCheckSummary) -> String {
    format!(
        "{}decisions = {}\nagreements = {}\nagreement_rate = {}\noracle_rejections = {}\n\
         threshold = {}\nmax_boundary_distance = {:e}\nmax_mass_residual = {:e}\nmax_moment_residual = {:e}\n",
        prov.comment_lines("# ", losses),
        s.decisions,
        s.agreements,
        s.agreement_rate,
        s.oracle_rejections,
        s.threshold,
        s.max_boundary_distance,
        s.max_mass_residual,
        s.max_moment_residual
    )
}

pub fn oracle_json(prov: &Provenance, losses: &LossSpec, s: &OracleCheckSummary) -> Result<String, Error> {
    let mut m = prov.json_header(losses);
    m.insert("summary".into(), json!(s));
    to_json(m)
}
