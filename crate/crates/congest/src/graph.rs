//! Weighted graphs with integer weights, a line-oriented text format, and
//! the underlying undirected adjacency used for communication.
//!
//! Directed and undirected graphs share one representation. An undirected
//! edge is stored once and traversable both ways. Whatever the edge
//! directions, messages travel on the underlying undirected graph, so
//! communication neighborhoods are precomputed separately from the
//! weighted adjacency.

use std::fmt::Write as _;

use thiserror::Error;

pub type NodeId = u32;

/// Caps applied while parsing untrusted text so a short input cannot ask
/// for an enormous allocation.
pub const MAX_PARSE_NODES: u32 = 1_000_000;
pub const MAX_PARSE_EDGES: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightMode {
    /// All weights >= 0.
    Nonnegative,
    /// Any i64 weights; algorithms that assume nonnegativity must check.
    Arbitrary,
}

impl WeightMode {
    pub fn tag(self) -> &'static str {
        match self {
            WeightMode::Nonnegative => "nn",
            WeightMode::Arbitrary => "arb",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub weight: i64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("self loop at node {node}")]
    SelfLoop { node: NodeId },
    #[error("duplicate edge {from} -> {to}")]
    DuplicateEdge { from: NodeId, to: NodeId },
    #[error("negative weight {weight} on edge {from} -> {to} in nonnegative mode")]
    NegativeWeight {
        from: NodeId,
        to: NodeId,
        weight: i64,
    },
    #[error("node {node} out of range for n = {n}")]
    NodeOutOfRange { node: NodeId, n: u32 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Debug)]
pub struct WeightedGraph {
    n: u32,
    directed: bool,
    mode: WeightMode,
    edges: Vec<Edge>,
    /// Weighted successors per node, sorted by neighbor id. For undirected
    /// graphs each stored edge appears in both endpoint lists.
    out_nbrs: Vec<Vec<(NodeId, i64)>>,
    in_nbrs: Vec<Vec<(NodeId, i64)>>,
    /// Underlying undirected neighbors, deduplicated and sorted.
    comm: Vec<Vec<NodeId>>,
}

impl WeightedGraph {
    pub fn new(
        n: u32,
        directed: bool,
        mode: WeightMode,
        edges: Vec<Edge>,
    ) -> Result<Self, GraphError> {
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for e in &edges {
            if e.from >= n {
                return Err(GraphError::NodeOutOfRange { node: e.from, n });
            }
            if e.to >= n {
                return Err(GraphError::NodeOutOfRange { node: e.to, n });
            }
            if e.from == e.to {
                return Err(GraphError::SelfLoop { node: e.from });
            }
            if mode == WeightMode::Nonnegative && e.weight < 0 {
                return Err(GraphError::NegativeWeight {
                    from: e.from,
                    to: e.to,
                    weight: e.weight,
                });
            }
            let key = if directed {
                (e.from, e.to)
            } else {
                (e.from.min(e.to), e.from.max(e.to))
            };
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge {
                    from: e.from,
                    to: e.to,
                });
            }
        }

        let mut out_nbrs = vec![Vec::new(); n as usize];
        let mut in_nbrs = vec![Vec::new(); n as usize];
        let mut comm = vec![Vec::new(); n as usize];
        for e in &edges {
            out_nbrs[e.from as usize].push((e.to, e.weight));
            in_nbrs[e.to as usize].push((e.from, e.weight));
            if !directed {
                out_nbrs[e.to as usize].push((e.from, e.weight));
                in_nbrs[e.from as usize].push((e.to, e.weight));
            }
            comm[e.from as usize].push(e.to);
            comm[e.to as usize].push(e.from);
        }
        for v in 0..n as usize {
            out_nbrs[v].sort_unstable();
            in_nbrs[v].sort_unstable();
            comm[v].sort_unstable();
            comm[v].dedup();
        }

        Ok(WeightedGraph {
            n,
            directed,
            mode,
            edges,
            out_nbrs,
            in_nbrs,
            comm,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        0..self.n
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn weight_mode(&self) -> WeightMode {
        self.mode
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Weighted edges leaving `v` (both orientations when undirected).
    pub fn out_neighbors(&self, v: NodeId) -> &[(NodeId, i64)] {
        &self.out_nbrs[v as usize]
    }

    /// Weighted edges entering `v` (both orientations when undirected).
    pub fn in_neighbors(&self, v: NodeId) -> &[(NodeId, i64)] {
        &self.in_nbrs[v as usize]
    }

    /// Neighbors on the underlying undirected graph. This is the set of
    /// nodes `v` may exchange messages with, regardless of edge direction.
    pub fn comm_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.comm[v as usize]
    }

    pub fn max_abs_weight(&self) -> u64 {
        self.edges
            .iter()
            .map(|e| e.weight.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    pub fn has_negative_weight(&self) -> bool {
        self.edges.iter().any(|e| e.weight < 0)
    }

    /// Line format:
    /// ```text
    /// # comment
    /// p <n> <m> <directed:0|1> <mode:nn|ar>
    /// e <from> <to> <weight>     (exactly m of these)
    /// ```
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let err = |line: usize, msg: &str| GraphError::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut header: Option<(u32, usize, bool, WeightMode)> = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_ascii_whitespace();
            match parts.next() {
                Some("p") => {
                    if header.is_some() {
                        return Err(err(lineno, "duplicate header"));
                    }
                    let n: u32 = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(lineno, "bad node count"))?;
                    let m: usize = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(lineno, "bad edge count"))?;
                    let directed = match parts.next() {
                        Some("0") => false,
                        Some("1") => true,
                        _ => return Err(err(lineno, "directed flag must be 0 or 1")),
                    };
                    let mode = match parts.next() {
                        Some("nn") => WeightMode::Nonnegative,
                        Some("arb") => WeightMode::Arbitrary,
                        _ => return Err(err(lineno, "mode must be nn or arb")),
                    };
                    if parts.next().is_some() {
                        return Err(err(lineno, "trailing tokens in header"));
                    }
                    if n > MAX_PARSE_NODES {
                        return Err(err(lineno, "node count exceeds parser cap"));
                    }
                    if m > MAX_PARSE_EDGES {
                        return Err(err(lineno, "edge count exceeds parser cap"));
                    }
                    header = Some((n, m, directed, mode));
                    edges.reserve(m.min(1 << 20));
                }
                Some("e") => {
                    if header.is_none() {
                        return Err(err(lineno, "edge before header"));
                    }
                    let from: NodeId = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(lineno, "bad from node"))?;
                    let to: NodeId = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(lineno, "bad to node"))?;
                    let weight: i64 = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(lineno, "bad weight"))?;
                    if parts.next().is_some() {
                        return Err(err(lineno, "trailing tokens in edge line"));
                    }
                    edges.push(Edge { from, to, weight });
                    if edges.len() > header.unwrap().1 {
                        return Err(err(lineno, "more edges than header declares"));
                    }
                }
                _ => return Err(err(lineno, "unknown line type")),
            }
        }
        let (n, m, directed, mode) = header.ok_or_else(|| err(0, "missing header"))?;
        if edges.len() != m {
            return Err(GraphError::Parse {
                line: 0,
                msg: format!("header declares {m} edges, found {}", edges.len()),
            });
        }
        WeightedGraph::new(n, directed, mode, edges)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "p {} {} {} {}",
            self.n,
            self.edges.len(),
            if self.directed { 1 } else { 0 },
            self.mode.tag()
        );
        for e in &self.edges {
            let _ = writeln!(s, "e {} {} {}", e.from, e.to, e.weight);
        }
        s
    }
}
