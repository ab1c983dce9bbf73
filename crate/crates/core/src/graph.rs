//! Simple undirected graphs on `p` labelled vertices.
//!
//! An [`AdjacencyGraph`] plays three roles: the true structure `S` of a model,
//! a hypothesis about that structure, and the decision matrix produced by a
//! selection procedure. Storage is a dense `p x p` boolean matrix that is kept
//! symmetric with a zero diagonal by every mutator.
//!
//! Text form (edge list): a header line `p=<int>` followed by one `i j` line
//! per unordered edge, 1-based, `i < j`. Lines starting with `#` are comments.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AdjacencyGraph {
    p: usize,
    adj: Vec<bool>,
}

impl AdjacencyGraph {
    pub fn empty(p: usize) -> Self {
        Self {
            p,
            adj: vec![false; p * p],
        }
    }

    pub fn complete(p: usize) -> Self {
        let mut g = Self::empty(p);
        for i in 0..p {
            for j in (i + 1)..p {
                g.set_edge(i, j, true);
            }
        }
        g
    }

    /// Builds a graph from 0-based unordered pairs. Self loops and
    /// out-of-range vertices are rejected.
    pub fn from_edges(p: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(p);
        for &(i, j) in edges {
            if i >= p || j >= p {
                return Err(Error::InvalidParameter(format!(
                    "edge ({i}, {j}) out of range for p={p}"
                )));
            }
            if i == j {
                return Err(Error::InvalidParameter(format!("self loop at vertex {i}")));
            }
            g.set_edge(i, j, true);
        }
        Ok(g)
    }

    /// Builds a graph from a full boolean matrix, checking symmetry and the
    /// zero diagonal.
    pub fn from_matrix(p: usize, m: &[bool]) -> Result<Self> {
        if m.len() != p * p {
            return Err(Error::DimensionMismatch {
                expected: p * p,
                found: m.len(),
            });
        }
        for i in 0..p {
            if m[i * p + i] {
                return Err(Error::InvalidParameter(format!("nonzero diagonal at {i}")));
            }
            for j in (i + 1)..p {
                if m[i * p + j] != m[j * p + i] {
                    return Err(Error::InvalidParameter(format!(
                        "asymmetric entry ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { p, adj: m.to_vec() })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.p + j]
    }

    /// Sets or clears the unordered edge `{i, j}`. Diagonal writes are ignored.
    pub fn set_edge(&mut self, i: usize, j: usize, present: bool) {
        if i == j {
            return;
        }
        self.adj[i * self.p + j] = present;
        self.adj[j * self.p + i] = present;
    }

    /// Unordered edges `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        pairs(self.p).filter(|&(i, j)| self.has_edge(i, j))
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Number of unordered pairs that are not edges.
    pub fn non_edge_count(&self) -> usize {
        pair_count(self.p) - self.edge_count()
    }

    /// True when every edge of `self` is also an edge of `other`.
    pub fn is_subgraph_of(&self, other: &AdjacencyGraph) -> bool {
        self.p == other.p && self.edges().all(|(i, j)| other.has_edge(i, j))
    }

    /// Relabels vertices: vertex `v` of `self` becomes vertex `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.p, "permutation length");
        let mut g = Self::empty(self.p);
        for (i, j) in self.edges() {
            g.set_edge(perm[i], perm[j], true);
        }
        g
    }

    /// Row-major 0/1 matrix.
    pub fn to_matrix(&self) -> Vec<Vec<u8>> {
        (0..self.p)
            .map(|i| (0..self.p).map(|j| self.has_edge(i, j) as u8).collect())
            .collect()
    }

    /// 1-based edge pairs, as used by every text format.
    pub fn one_based_edges(&self) -> Vec<[usize; 2]> {
        self.edges().map(|(i, j)| [i + 1, j + 1]).collect()
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("p={}\n", self.p);
        for (i, j) in self.edges() {
            let _ = writeln!(out, "{} {}", i + 1, j + 1);
        }
        out
    }

    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line_no, header) = lines
            .next()
            .ok_or_else(|| Error::Malformed("edge list is empty".into()))?;
        let p: usize = header
            .strip_prefix("p=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| {
                Error::Malformed(format!("line {line_no}: expected header `p=<int>`"))
            })?;
        let mut g = Self::empty(p);
        for (line_no, line) in lines {
            let mut it = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<usize> {
                let v: usize = tok.and_then(|t| t.parse().ok()).ok_or_else(|| {
                    Error::Malformed(format!("line {line_no}: expected `i j`"))
                })?;
                if v == 0 || v > p {
                    return Err(Error::Malformed(format!(
                        "line {line_no}: vertex {v} outside 1..={p}"
                    )));
                }
                Ok(v - 1)
            };
            let i = parse(it.next())?;
            let j = parse(it.next())?;
            if it.next().is_some() || i == j {
                return Err(Error::Malformed(format!("line {line_no}: bad edge `{line}`")));
            }
            g.set_edge(i, j, true);
        }
        Ok(g)
    }

    /// Graphviz form with undirected `--` edges and 1-based node names.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph G {\n");
        for v in 1..=self.p {
            let _ = writeln!(out, "  {v};");
        }
        for (i, j) in self.edges() {
            let _ = writeln!(out, "  {} -- {};", i + 1, j + 1);
        }
        out.push_str("}\n");
        out
    }
}

impl Serialize for AdjacencyGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("AdjacencyGraph", 2)?;
        st.serialize_field("p", &self.p)?;
        st.serialize_field("edges", &self.one_based_edges())?;
        st.end()
    }
}

/// All unordered pairs `(i, j)`, `i < j`, in row-major order.
pub fn pairs(p: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..p).flat_map(move |i| ((i + 1)..p).map(move |j| (i, j)))
}

/// `p (p - 1) / 2`
pub fn pair_count(p: usize) -> usize {
    p * p.saturating_sub(1) / 2
}
