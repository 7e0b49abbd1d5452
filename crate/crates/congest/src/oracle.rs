//! Sequential reference implementations. Everything here is written to be
//! obviously correct rather than fast: Dijkstra with a binary heap, plain
//! layered dynamic programs for hop-bounded distances, exhaustive path
//! enumeration in the verifiers. Distributed results are compared against
//! these, never against each other alone.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::csssp::CsSspCollection;
use crate::graph::{NodeId, WeightedGraph};

/// Distance with an explicit unreachable value that never participates in
/// arithmetic. `Finite` orders before `Unreachable`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dist {
    Finite(i64),
    Unreachable,
}

impl Dist {
    pub fn is_finite(self) -> bool {
        matches!(self, Dist::Finite(_))
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Dist::Finite(d) => Some(d),
            Dist::Unreachable => None,
        }
    }

    /// Extend a finite distance by an edge weight; unreachable stays
    /// unreachable.
    pub fn plus(self, w: i64) -> Dist {
        match self {
            Dist::Finite(d) => Dist::Finite(d + w),
            Dist::Unreachable => Dist::Unreachable,
        }
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dist::Finite(d) => write!(f, "{d}"),
            Dist::Unreachable => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("graph has negative weights; this oracle requires nonnegative mode")]
    NegativeWeight,
    #[error("negative cycle reachable from the source set")]
    NegativeCycle,
}

/// Distances (and optional parents) for a set of source rows.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DistanceMatrix {
    n: u32,
    rows: BTreeMap<NodeId, Vec<Dist>>,
    parents: BTreeMap<NodeId, Vec<Option<NodeId>>>,
}

impl DistanceMatrix {
    pub fn new(n: u32) -> Self {
        DistanceMatrix {
            n,
            rows: BTreeMap::new(),
            parents: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn insert_row(&mut self, source: NodeId, dist: Vec<Dist>, parent: Vec<Option<NodeId>>) {
        assert_eq!(dist.len(), self.n as usize);
        self.rows.insert(source, dist);
        self.parents.insert(source, parent);
    }

    pub fn sources(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.rows.keys().copied()
    }

    pub fn row(&self, source: NodeId) -> &[Dist] {
        &self.rows[&source]
    }

    pub fn get(&self, source: NodeId, target: NodeId) -> Dist {
        self.rows[&source][target as usize]
    }

    pub fn parent(&self, source: NodeId, target: NodeId) -> Option<NodeId> {
        self.parents
            .get(&source)
            .and_then(|row| row.get(target as usize).copied().flatten())
    }
}

/// Exact all-pairs distances by one Dijkstra per source. Parents are the
/// smallest-id predecessor achieving the distance.
pub fn dijkstra_apsp(graph: &WeightedGraph) -> Result<DistanceMatrix, OracleError> {
    if graph.has_negative_weight() {
        return Err(OracleError::NegativeWeight);
    }
    let mut out = DistanceMatrix::new(graph.n());
    for s in graph.node_ids() {
        let dist = dijkstra_row(graph, s);
        let parent = smallest_id_parents(graph, s, &dist);
        out.insert_row(s, dist, parent);
    }
    Ok(out)
}

fn dijkstra_row(graph: &WeightedGraph, source: NodeId) -> Vec<Dist> {
    let n = graph.n() as usize;
    let mut dist = vec![Dist::Unreachable; n];
    dist[source as usize] = Dist::Finite(0);
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0i64, source)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if dist[v as usize] != Dist::Finite(d) {
            continue;
        }
        for &(to, w) in graph.out_neighbors(v) {
            let cand = d + w;
            if Dist::Finite(cand) < dist[to as usize] {
                dist[to as usize] = Dist::Finite(cand);
                heap.push(Reverse((cand, to)));
            }
        }
    }
    dist
}

fn smallest_id_parents(graph: &WeightedGraph, source: NodeId, dist: &[Dist]) -> Vec<Option<NodeId>> {
    (0..graph.n())
        .map(|v| {
            if v == source {
                return None;
            }
            let dv = dist[v as usize].finite()?;
            graph
                .in_neighbors(v)
                .iter()
                .find(|&&(u, w)| dist[u as usize].plus(w) == Dist::Finite(dv))
                .map(|&(u, _)| u)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HopDist {
    pub dist: Dist,
    /// Fewest hops among minimum-weight walks within the bound; 0 when
    /// unreachable.
    pub hops: u32,
}

/// Hop-bounded single source distances for any weight mode, by `max_hops`
/// rounds of layered relaxation. Lexicographic (distance, hops) minimum.
/// With `max_hops >= n`, a relaxation succeeding at layer >= n means a
/// negative cycle is reachable.
pub fn bellman_ford_oracle(
    graph: &WeightedGraph,
    source: NodeId,
    max_hops: u32,
) -> Result<Vec<HopDist>, OracleError> {
    let n = graph.n() as usize;
    let mut best = vec![
        HopDist {
            dist: Dist::Unreachable,
            hops: 0
        };
        n
    ];
    best[source as usize] = HopDist {
        dist: Dist::Finite(0),
        hops: 0,
    };
    for layer in 1..=max_hops {
        let prev = best.clone();
        let mut improved = false;
        for v in 0..n {
            for &(u, w) in graph.in_neighbors(v as NodeId) {
                let Some(du) = prev[u as usize].dist.finite() else {
                    continue;
                };
                let cand = (du + w, prev[u as usize].hops + 1);
                let cur = (
                    best[v].dist.finite().unwrap_or(i64::MAX),
                    if best[v].dist.is_finite() { best[v].hops } else { u32::MAX },
                );
                if (cand.0, cand.1) < cur {
                    best[v] = HopDist {
                        dist: Dist::Finite(cand.0),
                        hops: cand.1,
                    };
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
        if layer >= graph.n() {
            return Err(OracleError::NegativeCycle);
        }
    }
    Ok(best)
}

/// True iff the graph contains any negative-weight cycle. Uses the
/// standard all-zeros initialization so every cycle is "reachable".
pub fn negative_cycle_anywhere(graph: &WeightedGraph) -> bool {
    let n = graph.n() as usize;
    let mut best = vec![0i64; n];
    for layer in 1..=graph.n() {
        let prev = best.clone();
        let mut improved = false;
        for v in 0..n {
            for &(u, w) in graph.in_neighbors(v as NodeId) {
                if prev[u as usize] + w < best[v] {
                    best[v] = prev[u as usize] + w;
                    improved = true;
                }
            }
        }
        if !improved {
            return false;
        }
        if layer >= graph.n() {
            return true;
        }
    }
    false
}

/// One node's entry in a hop-bounded shortest-path tree: minimum weight,
/// fewest hops for that weight, and the smallest-id predecessor achieving
/// both. This triple is the canonical tie-breaking rule used everywhere.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HopEntry {
    pub dist: Dist,
    pub hops: u32,
    pub parent: Option<NodeId>,
}

/// Hop-bounded distances from one source with all intermediate layers
/// retained. `layers[j][v]` is the minimum weight over walks of at most j
/// hops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HopRow {
    pub source: NodeId,
    pub h: u32,
    pub layers: Vec<Vec<Dist>>,
    pub canonical: Vec<HopEntry>,
}

impl HopRow {
    pub fn dist(&self, target: NodeId) -> Dist {
        self.canonical[target as usize].dist
    }

    pub fn dist_at(&self, hop_bound: u32, target: NodeId) -> Dist {
        self.layers[hop_bound as usize][target as usize]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HopBoundedTable {
    pub h: u32,
    pub rows: Vec<HopRow>,
}

impl HopBoundedTable {
    pub fn row(&self, source: NodeId) -> &HopRow {
        &self.rows[source as usize]
    }

    pub fn dist(&self, source: NodeId, target: NodeId) -> Dist {
        self.rows[source as usize].dist(target)
    }
}

pub fn hop_bounded_sssp(graph: &WeightedGraph, source: NodeId, h: u32) -> HopRow {
    let n = graph.n() as usize;
    let mut layers = Vec::with_capacity(h as usize + 1);
    let mut pairs: Vec<(Dist, u32)> = vec![(Dist::Unreachable, 0); n];
    pairs[source as usize] = (Dist::Finite(0), 0);
    layers.push(pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    for _ in 1..=h {
        let prev = pairs.clone();
        for v in 0..n {
            for &(u, w) in graph.in_neighbors(v as NodeId) {
                let Some(du) = prev[u as usize].0.finite() else {
                    continue;
                };
                let cand = (Dist::Finite(du + w), prev[u as usize].1 + 1);
                if better(cand, pairs[v]) {
                    pairs[v] = cand;
                }
            }
        }
        layers.push(pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    }
    let canonical = (0..n)
        .map(|v| {
            let (dist, hops) = pairs[v];
            // hops == 0 covers the source at rest; a source lying on a
            // negative closed walk can re-enter the table with hops > 0
            // and then has a genuine predecessor like any other node
            let parent = if !dist.is_finite() || hops == 0 {
                None
            } else {
                let d = dist.finite().unwrap();
                graph
                    .in_neighbors(v as NodeId)
                    .iter()
                    .find(|&&(u, w)| {
                        layers[hops as usize - 1][u as usize].plus(w) == Dist::Finite(d)
                    })
                    .map(|&(u, _)| u)
            };
            HopEntry { dist, hops, parent }
        })
        .collect();
    HopRow {
        source,
        h,
        layers,
        canonical,
    }
}

fn better(cand: (Dist, u32), cur: (Dist, u32)) -> bool {
    match (cand.0, cur.0) {
        (Dist::Finite(a), Dist::Finite(b)) => (a, cand.1) < (b, cur.1),
        (Dist::Finite(_), Dist::Unreachable) => true,
        _ => false,
    }
}

/// The full Def.-1 table: one hop-bounded row per source.
pub fn hop_bounded_apsp(graph: &WeightedGraph, h: u32) -> HopBoundedTable {
    HopBoundedTable {
        h,
        rows: graph.node_ids().map(|s| hop_bounded_sssp(graph, s, h)).collect(),
    }
}

/// Distances reachable from a set of pre-seeded values by at most h more
/// hops, capped at `delta_cap`. The reference for the extension variant:
/// seeds restart the hop budget.
pub fn seeded_hop_dp(
    graph: &WeightedGraph,
    seeds: &BTreeMap<NodeId, i64>,
    h: u32,
    delta_cap: i64,
) -> Vec<Dist> {
    let n = graph.n() as usize;
    let mut best = vec![Dist::Unreachable; n];
    for (&v, &d) in seeds {
        if d <= delta_cap && Dist::Finite(d) < best[v as usize] {
            best[v as usize] = Dist::Finite(d);
        }
    }
    for _ in 1..=h {
        let prev = best.clone();
        for v in 0..n {
            for &(u, w) in graph.in_neighbors(v as NodeId) {
                let Some(du) = prev[u as usize].finite() else {
                    continue;
                };
                let cand = du + w;
                if cand <= delta_cap && Dist::Finite(cand) < best[v] {
                    best[v] = Dist::Finite(cand);
                }
            }
        }
    }
    best
}

/// One consistency failure found by `verify_csssp`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CssspViolation {
    /// Trees rooted at `tree_a` and `tree_b` both contain a path from
    /// `from` to `to`, and the two paths differ.
    PathMismatch {
        tree_a: NodeId,
        tree_b: NodeId,
        from: NodeId,
        to: NodeId,
    },
    /// The entry for `node` in the tree rooted at `tree` is not the
    /// canonical hop-bounded value for that root.
    NotCanonical {
        tree: NodeId,
        node: NodeId,
        got: HopEntry,
        want: HopEntry,
    },
    /// `node` has an unrestricted shortest path from `tree` of at most h
    /// hops but is absent from that tree.
    MissingNode { tree: NodeId, node: NodeId },
}

/// Check a collection of h-hop trees for consistency: (a) any two trees
/// containing a path between the same ordered pair of nodes contain the
/// same path, (b) every entry matches the canonical hop-bounded table for
/// its root, and (c) every node whose unrestricted shortest path from a
/// root needs at most h hops appears in that root's tree.
///
/// Check (b) demands the full canonical triple, not just the weight.
/// Weight-only agreement would accept a single-source collection with
/// mixed tie-breaking that the path-agreement clause can never see.
/// Trees may omit nodes that only have hop-limited paths; (c) is the
/// only containment requirement.
pub fn verify_csssp(graph: &WeightedGraph, collection: &CsSspCollection) -> Vec<CssspViolation> {
    let h = collection.h;
    let full_h = graph.n().saturating_sub(1).max(h);
    let mut violations = Vec::new();

    for (&x, tree) in &collection.trees {
        let row = hop_bounded_sssp(graph, x, h);
        let full = hop_bounded_sssp(graph, x, full_h);
        for (v, entry) in tree.entries() {
            let got = HopEntry {
                dist: Dist::Finite(entry.dist),
                hops: entry.hops,
                parent: entry.parent,
            };
            let want = row.canonical[v as usize];
            if got != want {
                violations.push(CssspViolation::NotCanonical { tree: x, node: v, got, want });
            }
        }
        for v in graph.node_ids() {
            let e = full.canonical[v as usize];
            if e.dist.is_finite() && e.hops <= h && !tree.contains(v) {
                violations.push(CssspViolation::MissingNode { tree: x, node: v });
            }
        }
    }

    let sources: Vec<NodeId> = collection.trees.keys().copied().collect();
    for (i, &x) in sources.iter().enumerate() {
        for &y in &sources[i + 1..] {
            let tx = collection.tree(x);
            let ty = collection.tree(y);
            for (v, _) in tx.entries() {
                if !ty.contains(v) {
                    continue;
                }
                let px = tx.path_from_root(v).expect("entry is in the tree");
                let py = ty.path_from_root(v).expect("entry is in the tree");
                // strip the longest common suffix; paths toward v agree
                // exactly on ancestors inside it
                let mut i = px.len();
                let mut j = py.len();
                while i > 0 && j > 0 && px[i - 1] == py[j - 1] {
                    i -= 1;
                    j -= 1;
                }
                // a node on both diverged prefixes reaches v along
                // different chains in the two trees
                if let Some(&u) = px[..i].iter().find(|u| py[..j].contains(u)) {
                    violations.push(CssspViolation::PathMismatch {
                        tree_a: x,
                        tree_b: y,
                        from: u,
                        to: v,
                    });
                }
            }
        }
    }

    violations
}

/// A root-to-leaf path of hop-length exactly h that avoids every vertex of
/// the candidate blocker set. The path is identified by its leaf.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockerViolation {
    pub tree: NodeId,
    pub leaf: NodeId,
}

/// Check that `q` covers every root-to-leaf path of hop-length exactly h
/// in every tree. Any vertex on the path counts, endpoints included.
pub fn verify_blocker(
    collection: &CsSspCollection,
    h: u32,
    q: &[NodeId],
) -> Vec<BlockerViolation> {
    let qset: BTreeSet<NodeId> = q.iter().copied().collect();
    let mut violations = Vec::new();
    for (&x, tree) in &collection.trees {
        for leaf in tree.nodes_at_depth(h) {
            let path = tree.path_from_root(leaf).expect("depth listing is in the tree");
            if !path.iter().any(|u| qset.contains(u)) {
                violations.push(BlockerViolation { tree: x, leaf });
            }
        }
    }
    violations
}
