//! Hop-bounded shortest-path trees and consistent collections of them.
//!
//! A collection is consistent when any two trees that both realize a path
//! between the same pair of nodes realize it identically. Collections are
//! built by running a multi-source construction with hop bound 2h and
//! keeping only the first h hops of every tree; `oracle::verify_csssp`
//! checks the result from scratch.
//!
//! The same `SpTree` shape doubles for the derived structures used by the
//! blocker algorithm: the out-tree of everything below a node c across the
//! collection, and the in-tree of all root paths leading to c. In both the
//! entries carry (distance, hops) relative to c.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::engine::PhasedMetrics;
use crate::graph::{NodeId, WeightedGraph, MAX_PARSE_NODES};
use crate::short_range;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeEntry {
    pub dist: i64,
    pub hops: u32,
    /// None exactly at the root.
    pub parent: Option<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpTree {
    root: NodeId,
    entries: BTreeMap<NodeId, TreeEntry>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("root {root} missing or not a (0, 0, none) entry")]
    BadRoot { root: NodeId },
    #[error("node {node} has parent {parent} outside the tree")]
    OrphanParent { node: NodeId, parent: NodeId },
    #[error("node {node} hop count does not extend its parent's")]
    BadHops { node: NodeId },
    #[error("node {node} is its own ancestor")]
    Cycle { node: NodeId },
}

impl SpTree {
    /// A tree with no nodes at all (a root that appears in no execution).
    pub fn empty(root: NodeId) -> Self {
        SpTree {
            root,
            entries: BTreeMap::new(),
        }
    }

    pub fn singleton(root: NodeId) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(
            root,
            TreeEntry {
                dist: 0,
                hops: 0,
                parent: None,
            },
        );
        SpTree { root, entries }
    }

    /// Structural validation only: the root is anchored at (0, 0, none),
    /// parents exist, hop counts increment along edges. Whether distances
    /// agree with graph weights is the verifier's business, since it needs
    /// the graph.
    pub fn with_entries(
        root: NodeId,
        entries: BTreeMap<NodeId, TreeEntry>,
    ) -> Result<Self, TreeError> {
        if entries.is_empty() {
            return Ok(SpTree::empty(root));
        }
        let anchored = entries.get(&root).copied()
            == Some(TreeEntry {
                dist: 0,
                hops: 0,
                parent: None,
            });
        if !anchored {
            return Err(TreeError::BadRoot { root });
        }
        for (&v, e) in &entries {
            if v == root {
                continue;
            }
            let Some(p) = e.parent else {
                return Err(TreeError::BadRoot { root: v });
            };
            let Some(pe) = entries.get(&p) else {
                return Err(TreeError::OrphanParent { node: v, parent: p });
            };
            if e.hops != pe.hops + 1 {
                return Err(TreeError::BadHops { node: v });
            }
        }
        // hops strictly decrease along parent chains, so reaching the root
        // is guaranteed and cycles are impossible
        Ok(SpTree { root, entries })
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.entries.contains_key(&v)
    }

    pub fn entry(&self, v: NodeId) -> Option<TreeEntry> {
        self.entries.get(&v).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (NodeId, TreeEntry)> + '_ {
        self.entries.iter().map(|(&v, &e)| (v, e))
    }

    pub fn children_of(&self, v: NodeId) -> Vec<NodeId> {
        self.entries
            .iter()
            .filter(|(_, e)| e.parent == Some(v))
            .map(|(&c, _)| c)
            .collect()
    }

    /// Node sequence root ..= v, or None when v is absent.
    pub fn path_from_root(&self, v: NodeId) -> Option<Vec<NodeId>> {
        let mut path = vec![v];
        let mut cur = self.entries.get(&v)?;
        while let Some(p) = cur.parent {
            path.push(p);
            cur = self.entries.get(&p).expect("validated tree");
        }
        path.reverse();
        Some(path)
    }

    pub fn nodes_at_depth(&self, hops: u32) -> Vec<NodeId> {
        self.entries
            .iter()
            .filter(|(_, e)| e.hops == hops)
            .map(|(&v, _)| v)
            .collect()
    }

    pub fn max_depth(&self) -> u32 {
        self.entries.values().map(|e| e.hops).max().unwrap_or(0)
    }

    /// Keep only entries within `h` hops of the root.
    pub fn truncated(&self, h: u32) -> SpTree {
        SpTree {
            root: self.root,
            entries: self
                .entries
                .iter()
                .filter(|(_, e)| e.hops <= h)
                .map(|(&v, &e)| (v, e))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsSspCollection {
    pub h: u32,
    pub sources: Vec<NodeId>,
    pub trees: BTreeMap<NodeId, SpTree>,
}

impl CsSspCollection {
    pub fn tree(&self, source: NodeId) -> &SpTree {
        &self.trees[&source]
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CollectionError {
    #[error("node {node} has conflicting placements across trees; not a tree")]
    NotATree { node: NodeId },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Which 2h-hop construction backs the collection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CssspMethod {
    /// Pipelined schedule, rounds scaling with sqrt(delta * h * k).
    Pipelined,
    /// Synchronous relaxation, rounds scaling with h.
    BellmanFord,
}

/// Run the chosen multi-source construction with hop bound 2h, then keep
/// the first h hops of every tree. Metrics reflect the full 2h run.
pub fn build_csssp(
    graph: &WeightedGraph,
    sources: &[NodeId],
    h: u32,
    delta_cap: i64,
    method: CssspMethod,
) -> Result<(CsSspCollection, PhasedMetrics), short_range::SsspError> {
    let outcome = match method {
        CssspMethod::Pipelined => {
            short_range::multi_source_pipelined(graph, sources, 2 * h, delta_cap)?
        }
        CssspMethod::BellmanFord => {
            short_range::distributed_bellman_ford(graph, sources, 2 * h, delta_cap)?
        }
    };
    let mut trees = BTreeMap::new();
    for &s in sources {
        trees.insert(s, initial_hops_tree(graph, &outcome, s, h)?);
    }
    let collection = CsSspCollection {
        h,
        sources: sources.to_vec(),
        trees,
    };
    let mut metrics = PhasedMetrics::default();
    metrics.push(
        match method {
            CssspMethod::Pipelined => "pipelined-2h",
            CssspMethod::BellmanFord => "bellman-ford-2h",
        },
        outcome.metrics,
    );
    Ok((collection, metrics))
}

/// The initial h hops of one stream's final parent structure. Depth is
/// measured by walking the parent pointers rather than by trusting the hop
/// labels: a pair superseded right at the 2h cap keeps a small hop label
/// while its witness chain runs through a parent whose own chain is 2h
/// deep. Walking the pointers carries such entries past depth h, so they
/// fall away together with their parents instead of orphaning the tree.
/// On every retained path the labels and the walk agree, which is exactly
/// what the tree validation re-checks.
fn initial_hops_tree(
    graph: &WeightedGraph,
    outcome: &short_range::SsspOutcome,
    source: NodeId,
    h: u32,
) -> Result<SpTree, TreeError> {
    let n = graph.n();
    let mut depth: Vec<Option<u64>> = vec![None; n as usize];
    if outcome.label(source, source).is_some() {
        depth[source as usize] = Some(0);
    }
    for v in 0..n {
        if depth[v as usize].is_some() || outcome.label(source, v).is_none() {
            continue;
        }
        let mut chain = vec![v];
        let base = loop {
            let cur = *chain.last().expect("chain starts nonempty");
            let Some((_, _, parent)) = outcome.label(source, cur) else {
                return Err(TreeError::OrphanParent {
                    node: chain[chain.len() - 2],
                    parent: cur,
                });
            };
            let Some(p) = parent else {
                // A parentless non-root label; depth 0 hands it to the
                // tree validation, which rejects it as a second root.
                chain.pop();
                depth[cur as usize] = Some(0);
                break 0;
            };
            if let Some(d) = depth[p as usize] {
                break d;
            }
            if chain.contains(&p) {
                return Err(TreeError::Cycle { node: p });
            }
            chain.push(p);
        };
        for (i, &w) in chain.iter().rev().enumerate() {
            depth[w as usize] = Some(base + 1 + i as u64);
        }
    }

    let entries: BTreeMap<NodeId, TreeEntry> = (0..n)
        .filter(|&v| depth[v as usize].is_some_and(|d| d <= u64::from(h)))
        .filter_map(|v| {
            outcome
                .label(source, v)
                .map(|(dist, hops, parent)| (v, TreeEntry { dist, hops, parent }))
        })
        .collect();
    SpTree::with_entries(source, entries)
}

/// Drop every entry deeper than h hops. Parents survive automatically
/// since a kept node's parent is one hop shallower.
pub fn truncate_to_h(trees_2h: &CsSspCollection, h: u32) -> CsSspCollection {
    CsSspCollection {
        h,
        sources: trees_2h.sources.clone(),
        trees: trees_2h
            .trees
            .iter()
            .map(|(&s, t)| (s, t.truncated(h)))
            .collect(),
    }
}

/// Union of the subtrees hanging below c in every tree, as one out-tree
/// rooted at c with (dist, hops) relative to c. Consistency of the
/// collection makes the union a tree; any conflict is reported.
pub fn subtree_out_tree(
    collection: &CsSspCollection,
    c: NodeId,
) -> Result<SpTree, CollectionError> {
    let mut entries: BTreeMap<NodeId, TreeEntry> = BTreeMap::new();
    let mut present = false;
    for tree in collection.trees.values() {
        let Some(ce) = tree.entry(c) else { continue };
        present = true;
        // walk downward from c
        let mut frontier = vec![c];
        while let Some(u) = frontier.pop() {
            for child in tree.children_of(u) {
                let e = tree.entry(child).expect("child listed");
                let rel = TreeEntry {
                    dist: e.dist - ce.dist,
                    hops: e.hops - ce.hops,
                    parent: Some(u),
                };
                match entries.get(&child) {
                    None => {
                        entries.insert(child, rel);
                    }
                    Some(&prev) if prev == rel => {}
                    Some(_) => return Err(CollectionError::NotATree { node: child }),
                }
                frontier.push(child);
            }
        }
    }
    if !present {
        return Ok(SpTree::empty(c));
    }
    entries.insert(
        c,
        TreeEntry {
            dist: 0,
            hops: 0,
            parent: None,
        },
    );
    SpTree::with_entries(c, entries).map_err(CollectionError::from)
}

/// Union over sources x of the x-to-c path in T_x, as an in-tree rooted at
/// c: each node's `parent` is its successor toward c and (dist, hops)
/// measure the remaining way to c.
pub fn paths_in_tree(collection: &CsSspCollection, c: NodeId) -> Result<SpTree, CollectionError> {
    let mut entries: BTreeMap<NodeId, TreeEntry> = BTreeMap::new();
    let mut present = false;
    for tree in collection.trees.values() {
        let Some(ce) = tree.entry(c) else { continue };
        let path = tree.path_from_root(c).expect("entry implies path");
        present = true;
        for i in 0..path.len() - 1 {
            let v = path[i];
            let e = tree.entry(v).expect("path node");
            let rel = TreeEntry {
                dist: ce.dist - e.dist,
                hops: ce.hops - e.hops,
                parent: Some(path[i + 1]),
            };
            match entries.get(&v) {
                None => {
                    entries.insert(v, rel);
                }
                Some(&prev) if prev == rel => {}
                Some(_) => return Err(CollectionError::NotATree { node: v }),
            }
        }
    }
    if !present {
        return Ok(SpTree::empty(c));
    }
    entries.insert(
        c,
        TreeEntry {
            dist: 0,
            hops: 0,
            parent: None,
        },
    );
    SpTree::with_entries(c, entries).map_err(CollectionError::from)
}

/// Line format:
/// ```text
/// c <h>
/// t <source>
/// v <node> <parent|-> <dist> <hops>
/// ```
pub fn collection_to_text(collection: &CsSspCollection) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "c {}", collection.h);
    for source in &collection.sources {
        let _ = writeln!(s, "t {source}");
        for (v, e) in collection.trees[source].entries() {
            match e.parent {
                Some(p) => {
                    let _ = writeln!(s, "v {v} {p} {} {}", e.dist, e.hops);
                }
                None => {
                    let _ = writeln!(s, "v {v} - {} {}", e.dist, e.hops);
                }
            }
        }
    }
    s
}

const MAX_PARSE_TREES: usize = 10_000;
const MAX_PARSE_ENTRIES: usize = 1_000_000;

pub fn parse_collection(text: &str) -> Result<CsSspCollection, CollectionError> {
    let err = |line: usize, msg: &str| CollectionError::Parse {
        line,
        msg: msg.to_string(),
    };
    let mut h: Option<u32> = None;
    let mut sources: Vec<NodeId> = Vec::new();
    let mut trees: BTreeMap<NodeId, SpTree> = BTreeMap::new();
    let mut current: Option<(NodeId, BTreeMap<NodeId, TreeEntry>)> = None;
    let mut total_entries = 0usize;

    let finish =
        |cur: Option<(NodeId, BTreeMap<NodeId, TreeEntry>)>,
         trees: &mut BTreeMap<NodeId, SpTree>|
         -> Result<(), CollectionError> {
            if let Some((src, entries)) = cur {
                trees.insert(src, SpTree::with_entries(src, entries)?);
            }
            Ok(())
        };

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_ascii_whitespace();
        match parts.next() {
            Some("c") => {
                if h.is_some() {
                    return Err(err(lineno, "duplicate collection header"));
                }
                let hv: u32 = parts
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(lineno, "bad hop bound"))?;
                if parts.next().is_some() {
                    return Err(err(lineno, "trailing tokens"));
                }
                h = Some(hv);
            }
            Some("t") => {
                if h.is_none() {
                    return Err(err(lineno, "tree before collection header"));
                }
                let src: NodeId = parts
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(lineno, "bad source id"))?;
                if parts.next().is_some() {
                    return Err(err(lineno, "trailing tokens"));
                }
                if src > MAX_PARSE_NODES {
                    return Err(err(lineno, "source id exceeds parser cap"));
                }
                if sources.contains(&src) {
                    return Err(err(lineno, "duplicate tree"));
                }
                if sources.len() >= MAX_PARSE_TREES {
                    return Err(err(lineno, "too many trees"));
                }
                finish(current.take(), &mut trees)?;
                sources.push(src);
                current = Some((src, BTreeMap::new()));
            }
            Some("v") => {
                let Some((_, entries)) = current.as_mut() else {
                    return Err(err(lineno, "entry before any tree header"));
                };
                let node: NodeId = parts
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(lineno, "bad node id"))?;
                let parent_tok = parts.next().ok_or_else(|| err(lineno, "missing parent"))?;
                let parent: Option<NodeId> = if parent_tok == "-" {
                    None
                } else {
                    Some(
                        parent_tok
                            .parse()
                            .map_err(|_| err(lineno, "bad parent id"))?,
                    )
                };
                let dist: i64 = parts
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(lineno, "bad distance"))?;
                let hops: u32 = parts
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(lineno, "bad hop count"))?;
                if parts.next().is_some() {
                    return Err(err(lineno, "trailing tokens"));
                }
                if node > MAX_PARSE_NODES || parent.is_some_and(|p| p > MAX_PARSE_NODES) {
                    return Err(err(lineno, "node id exceeds parser cap"));
                }
                total_entries += 1;
                if total_entries > MAX_PARSE_ENTRIES {
                    return Err(err(lineno, "too many entries"));
                }
                if entries.insert(node, TreeEntry { dist, hops, parent }).is_some() {
                    return Err(err(lineno, "duplicate node in tree"));
                }
            }
            _ => return Err(err(lineno, "unknown line type")),
        }
    }
    finish(current.take(), &mut trees)?;
    let h = h.ok_or_else(|| err(0, "missing collection header"))?;
    Ok(CsSspCollection { h, sources, trees })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(dist: i64, hops: u32, parent: Option<NodeId>) -> TreeEntry {
        TreeEntry { dist, hops, parent }
    }

    /// The worked collection: two 2-hop trees over the four-node fixture
    /// graph, sources 0 and 1.
    fn worked_collection() -> CsSspCollection {
        let t0 = SpTree::with_entries(
            0,
            [
                (0, entry(0, 0, None)),
                (1, entry(1, 1, Some(0))),
                (3, entry(2, 2, Some(1))),
            ]
            .into_iter()
            .collect(),
        )
        .unwrap();
        let t1 = SpTree::with_entries(
            1,
            [
                (1, entry(0, 0, None)),
                (3, entry(1, 1, Some(1))),
                (2, entry(2, 2, Some(3))),
            ]
            .into_iter()
            .collect(),
        )
        .unwrap();
        CsSspCollection {
            h: 2,
            sources: vec![0, 1],
            trees: [(0, t0), (1, t1)].into_iter().collect(),
        }
    }

    #[test]
    fn tree_validation_catches_breakage() {
        let bad_root = SpTree::with_entries(0, [(0, entry(1, 0, None))].into_iter().collect());
        assert_eq!(bad_root.unwrap_err(), TreeError::BadRoot { root: 0 });

        let orphan = SpTree::with_entries(
            0,
            [(0, entry(0, 0, None)), (2, entry(3, 1, Some(7)))]
                .into_iter()
                .collect(),
        );
        assert_eq!(orphan.unwrap_err(), TreeError::OrphanParent { node: 2, parent: 7 });

        let bad_hops = SpTree::with_entries(
            0,
            [(0, entry(0, 0, None)), (2, entry(3, 2, Some(0)))]
                .into_iter()
                .collect(),
        );
        assert_eq!(bad_hops.unwrap_err(), TreeError::BadHops { node: 2 });
    }

    #[test]
    fn paths_and_depths() {
        let c = worked_collection();
        let t0 = c.tree(0);
        assert_eq!(t0.path_from_root(3), Some(vec![0, 1, 3]));
        assert_eq!(t0.path_from_root(2), None);
        assert_eq!(t0.nodes_at_depth(2), vec![3]);
        assert_eq!(t0.max_depth(), 2);
        assert_eq!(t0.children_of(0), vec![1]);
    }

    #[test]
    fn truncation_keeps_shallow_prefix() {
        let c = worked_collection();
        let t = truncate_to_h(&c, 1);
        assert_eq!(t.h, 1);
        assert!(t.tree(0).contains(1));
        assert!(!t.tree(0).contains(3));
        assert!(t.tree(1).contains(3));
        assert!(!t.tree(1).contains(2));
        // truncating to the existing depth changes nothing
        let same = truncate_to_h(&c, 2);
        assert_eq!(same, c);
        // a chain of 2h+1 nodes keeps h+1 of them
        let chain = SpTree::with_entries(
            0,
            (0..5)
                .map(|i| {
                    (
                        i,
                        entry(i as i64, i, if i == 0 { None } else { Some(i - 1) }),
                    )
                })
                .collect(),
        )
        .unwrap();
        assert_eq!(chain.truncated(2).len(), 3);
    }

    #[test]
    fn out_tree_unions_subtrees() {
        let c = worked_collection();
        // below node 1: {1 -> 3} in T_0, {1 -> 3, 3 -> 2} in T_1
        let out = subtree_out_tree(&c, 1).unwrap();
        assert_eq!(out.root(), 1);
        assert_eq!(out.entry(1), Some(entry(0, 0, None)));
        assert_eq!(out.entry(3), Some(entry(1, 1, Some(1))));
        assert_eq!(out.entry(2), Some(entry(2, 2, Some(3))));

        // a node absent everywhere yields the empty tree
        let none = subtree_out_tree(&c, 9).unwrap();
        assert!(none.is_empty());

        // a leaf everywhere yields a single node
        let leaf = subtree_out_tree(&c, 2).unwrap();
        assert_eq!(leaf.len(), 1);
        assert!(leaf.contains(2));
    }

    #[test]
    fn in_tree_unions_root_paths() {
        let c = worked_collection();
        // paths to 3: 0 -> 1 -> 3 and 1 -> 3
        let int = paths_in_tree(&c, 3).unwrap();
        assert_eq!(int.root(), 3);
        assert_eq!(int.entry(0), Some(entry(2, 2, Some(1))));
        assert_eq!(int.entry(1), Some(entry(1, 1, Some(3))));
        assert_eq!(int.entry(3), Some(entry(0, 0, None)));

        // c = a source itself: just the single node
        let only = paths_in_tree(&c, 0).unwrap();
        assert_eq!(only.len(), 1);

        let none = paths_in_tree(&c, 9).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn conflicting_union_is_not_a_tree() {
        // two trees placing node 2 under different parents below node 0
        let t5 = SpTree::with_entries(
            5,
            [
                (5, entry(0, 0, None)),
                (0, entry(1, 1, Some(5))),
                (1, entry(2, 2, Some(0))),
                (2, entry(3, 3, Some(1))),
            ]
            .into_iter()
            .collect(),
        )
        .unwrap();
        let t6 = SpTree::with_entries(
            6,
            [
                (6, entry(0, 0, None)),
                (0, entry(1, 1, Some(6))),
                (2, entry(4, 2, Some(0))),
            ]
            .into_iter()
            .collect(),
        )
        .unwrap();
        let c = CsSspCollection {
            h: 3,
            sources: vec![5, 6],
            trees: [(5, t5), (6, t6)].into_iter().collect(),
        };
        assert_eq!(
            subtree_out_tree(&c, 0).unwrap_err(),
            CollectionError::NotATree { node: 2 }
        );
    }

    #[test]
    fn collection_round_trips_through_text() {
        let c = worked_collection();
        let text = collection_to_text(&c);
        let back = parse_collection(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn golden_collection_fixture_parses() {
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../fixtures/fig1-h2.trees"
        ))
        .unwrap();
        let c = parse_collection(&text).unwrap();
        assert_eq!(c, worked_collection());
    }

    #[test]
    fn parser_rejects_malformed_collections() {
        assert!(matches!(
            parse_collection(""),
            Err(CollectionError::Parse { .. })
        ));
        assert!(matches!(
            parse_collection("t 0\n"),
            Err(CollectionError::Parse { .. })
        ));
        assert!(matches!(
            parse_collection("c 2\nv 0 - 0 0\n"),
            Err(CollectionError::Parse { .. })
        ));
        assert!(matches!(
            parse_collection("c 2\nt 0\nv 0 - 0 0\nv 0 - 0 0\n"),
            Err(CollectionError::Parse { .. })
        ));
        assert!(matches!(
            parse_collection("c 2\nt 0\nt 0\n"),
            Err(CollectionError::Parse { .. })
        ));
        // structurally broken tree surfaces the tree error
        assert!(matches!(
            parse_collection("c 2\nt 0\nv 0 - 0 0\nv 1 9 1 1\n"),
            Err(CollectionError::Tree(TreeError::OrphanParent { .. }))
        ));
    }

    fn fig1() -> WeightedGraph {
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../fixtures/fig1.graph"
        ))
        .unwrap();
        WeightedGraph::parse(&text).unwrap()
    }

    #[test]
    fn build_reproduces_the_worked_collection() {
        let g = fig1();
        for method in [CssspMethod::Pipelined, CssspMethod::BellmanFord] {
            let (built, metrics) =
                build_csssp(&g, &[0, 1], 2, short_range::NO_CAP, method).unwrap();
            assert_eq!(built, worked_collection(), "{method:?}");
            // the heavy direct edge b->c is in neither tree
            assert_eq!(built.tree(0).entry(2), None);
            assert_eq!(built.tree(1).entry(2).unwrap().parent, Some(3));
            assert_eq!(metrics.phases.len(), 1);
        }
    }

    #[test]
    fn doubled_run_reaches_c_before_truncation_drops_it() {
        let g = fig1();
        let out = short_range::multi_source_pipelined(&g, &[0, 1], 4, short_range::NO_CAP).unwrap();
        let full = out.trees_collection(4).unwrap();
        assert_eq!(
            full.tree(0).entry(2),
            Some(TreeEntry { dist: 3, hops: 3, parent: Some(3) })
        );
        let cut = truncate_to_h(&full, 2);
        assert_eq!(cut.tree(0).entry(2), None);
        assert_eq!(cut.tree(0).max_depth(), 2);
    }

    #[test]
    fn relaxation_backend_builds_verified_collections() {
        use crate::generate::{generate, GeneratorSpec, GraphKind};
        use crate::oracle::verify_csssp;
        let spec = GeneratorSpec {
            kind: GraphKind::Gnp,
            n: 40,
            p: 0.15,
            weight_low: 0,
            weight_high: 9,
            zero_fraction: 0.2,
            seed: 7,
        };
        let g = generate(&spec).unwrap();
        let sources: Vec<NodeId> = (0..6).map(|i| i * 6).collect();
        let (built, _) =
            build_csssp(&g, &sources, 5, short_range::NO_CAP, CssspMethod::BellmanFord).unwrap();
        assert_eq!(verify_csssp(&g, &built), vec![]);
        // spot-check retained entries against the hop-bounded table
        let row = crate::oracle::hop_bounded_sssp(&g, sources[0], 5);
        for (v, e) in built.tree(sources[0]).entries() {
            let want = row.canonical[v as usize];
            assert_eq!(crate::oracle::Dist::Finite(e.dist), want.dist);
            assert_eq!(e.hops, want.hops);
        }
    }
}
