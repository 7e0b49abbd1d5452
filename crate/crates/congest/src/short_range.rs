//! Pipelined hop-bounded shortest paths.
//!
//! Everything here drives one node program. Per source, a node keeps its
//! best known (distance, hops) pair and forwards it along out-edges at
//! round ceil(distance * gamma) + hops. The slope gamma trades dilation
//! against how often a node retransmits: with gamma = sqrt(h) a
//! single-source run settles within ceil(delta * sqrt(h)) + h + 1 rounds
//! while no node fires more than ceil(sqrt(h)) times, because consecutive
//! transmitted pairs drop in distance and their scheduled rounds are at
//! least sqrt(h) apart per unit of distance.
//!
//! gamma = 0 degenerates to synchronous relaxation: a pair with j hops is
//! adopted in round j-1 and forwarded in round j. That variant tolerates
//! negative weights and is the reference backend everything else is
//! compared against.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::csssp::{CsSspCollection, SpTree, TreeEntry, TreeError};
use crate::engine::{
    run_program, EngineConfig, EngineError, NodeProgram, NodeView, Payload, RoundMetrics,
};
use crate::graph::{NodeId, WeightedGraph};
use crate::num::{bitlen, bitlen_signed, ceil_sqrt, ceil_sqrt_div};
use crate::oracle::{Dist, HopEntry};

/// Pass as `delta_cap` to disable distance pruning.
pub const NO_CAP: i64 = i64::MAX;

/// Slope of the send schedule: a pair (d, l) is transmitted in round
/// ceil(d * gamma) + l.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gamma {
    /// Plain synchronous relaxation.
    Zero,
    /// Single-source pipelining.
    SqrtH { h: u32 },
    /// Multi-source pipelining, gamma = sqrt(h * k / delta).
    SqrtRatio { h: u32, k: u32, delta: i64 },
}

impl Gamma {
    /// The scheduled round, computed exactly in integers: the smallest s
    /// with s >= d * gamma, plus l. Saturates instead of wrapping when a
    /// distance near NO_CAP pushes the product past u128; such a schedule
    /// is unreachable within any round limit either way.
    pub fn send_round(self, d: i64, l: u32) -> u64 {
        let d = d.max(0) as u128;
        let lead = match self {
            Gamma::Zero => 0,
            Gamma::SqrtH { h } => ceil_sqrt(d.saturating_mul(d).saturating_mul(h as u128)),
            Gamma::SqrtRatio { h, k, delta } => ceil_sqrt_div(
                d.saturating_mul(d)
                    .saturating_mul(h as u128)
                    .saturating_mul(k as u128),
                delta.max(1) as u128,
            ),
        };
        u64::try_from(lead).unwrap_or(u64::MAX).saturating_add(l as u64)
    }
}

/// Latest round at which anything can still be in flight, plus the closing
/// quiet round: no pair beats (delta_cap, h).
pub fn round_bound(gamma: Gamma, delta_cap: i64, h: u32) -> u64 {
    gamma.send_round(delta_cap, h).saturating_add(1)
}

#[derive(Clone, Debug)]
pub struct PairMsg {
    /// Stream key, the source node. Costs bits only in tagged runs.
    src: NodeId,
    d: i64,
    l: u32,
    tagged: bool,
}

impl Payload for PairMsg {
    fn bit_size(&self) -> u64 {
        let src_bits = if self.tagged { bitlen(self.src as u64) } else { 0 };
        src_bits + bitlen_signed(self.d) + bitlen(self.l as u64)
    }

    fn stream(&self) -> Option<u32> {
        Some(self.src)
    }
}

#[derive(Clone, Debug)]
pub struct LabelState {
    pub d: i64,
    pub l: u32,
    pub parent: Option<NodeId>,
    /// Round at which the current pair is due for transmission; None once
    /// sent (or superseded by a rescheduled improvement).
    sched: Option<u64>,
    /// Times this node fired for this stream.
    pub fires: u32,
    /// Adoptions whose natural schedule had already passed. Zero on every
    /// run with correctly ordered delivery; counted, not corrected away.
    pub late_adoptions: u32,
    /// Pairs actually transmitted, in order.
    pub sent_pairs: Vec<(i64, u32)>,
}

#[derive(Clone, Debug, Default)]
pub struct PipeState {
    pub labels: BTreeMap<NodeId, LabelState>,
}

struct PipelinedProgram {
    /// Initial distance per node, per stream.
    init: BTreeMap<NodeId, BTreeMap<NodeId, i64>>,
    hop_cap: u32,
    delta_cap: i64,
    gamma: Gamma,
    tagged: bool,
}

impl NodeProgram for PipelinedProgram {
    type State = PipeState;
    type Msg = PairMsg;

    fn init(&self, view: &NodeView) -> PipeState {
        let mut labels = BTreeMap::new();
        for (&stream, starts) in &self.init {
            let Some(&d) = starts.get(&view.id) else {
                continue;
            };
            if d > self.delta_cap {
                continue;
            }
            labels.insert(
                stream,
                LabelState {
                    d,
                    l: 0,
                    parent: None,
                    sched: Some(self.gamma.send_round(d, 0)),
                    fires: 0,
                    late_adoptions: 0,
                    sent_pairs: Vec::new(),
                },
            );
        }
        PipeState { labels }
    }

    fn send(&self, state: &mut PipeState, round: u64, view: &NodeView) -> Vec<(NodeId, PairMsg)> {
        let mut out = Vec::new();
        for (&src, ls) in state.labels.iter_mut() {
            if ls.sched.is_some_and(|s| s <= round) {
                ls.sched = None;
                ls.fires += 1;
                ls.sent_pairs.push((ls.d, ls.l));
                for &(to, _) in view.out_edges {
                    out.push((
                        to,
                        PairMsg {
                            src,
                            d: ls.d,
                            l: ls.l,
                            tagged: self.tagged,
                        },
                    ));
                }
            }
        }
        out
    }

    fn receive(
        &self,
        state: &mut PipeState,
        round: u64,
        inbox: &[(NodeId, PairMsg)],
        view: &NodeView,
    ) {
        for &(sender, ref msg) in inbox {
            let w = view.in_weight(sender).expect("delivered along an in-edge");
            let nd = msg.d.saturating_add(w);
            let nl = msg.l + 1;
            if nl > self.hop_cap || nd > self.delta_cap {
                continue;
            }
            match state.labels.entry(msg.src) {
                Entry::Vacant(slot) => {
                    let natural = self.gamma.send_round(nd, nl);
                    slot.insert(LabelState {
                        d: nd,
                        l: nl,
                        parent: Some(sender),
                        sched: Some(natural.max(round + 1)),
                        fires: 0,
                        late_adoptions: u32::from(natural <= round),
                        sent_pairs: Vec::new(),
                    });
                }
                Entry::Occupied(mut slot) => {
                    let ls = slot.get_mut();
                    if (nd, nl) < (ls.d, ls.l) {
                        ls.d = nd;
                        ls.l = nl;
                        ls.parent = Some(sender);
                        let natural = self.gamma.send_round(nd, nl);
                        if natural <= round {
                            ls.late_adoptions += 1;
                        }
                        ls.sched = Some(natural.max(round + 1));
                    } else if (nd, nl) == (ls.d, ls.l) && ls.parent.is_some_and(|p| sender < p) {
                        // same pair from a smaller neighbor: adjust the
                        // parent pointer, nothing new to transmit
                        ls.parent = Some(sender);
                    }
                }
            }
        }
    }

    fn is_quiescent(&self, state: &PipeState) -> bool {
        state.labels.values().all(|ls| ls.sched.is_none())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SsspError {
    #[error("hop bound must be at least 1")]
    InvalidHopBound,
    #[error("distance cap must be nonnegative")]
    InvalidDistanceCap,
    #[error("distance caps cannot prune soundly under negative weights")]
    CapWithNegativeWeights,
    #[error("source {0} is not a node of the graph")]
    UnknownSource(NodeId),
    #[error("duplicate source {0}")]
    DuplicateSource(NodeId),
    #[error("no sources given")]
    NoSources,
    #[error("seed distances must be nonnegative")]
    NegativeSeed(NodeId),
    #[error("the pipelined schedule requires nonnegative weights")]
    NegativeWeights,
    #[error("negative cycle reachable from the sources")]
    NegativeCycle,
    #[error("run produced structurally inconsistent trees")]
    InconsistentTrees(#[from] TreeError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Result of one multi-stream run: final per-node labels plus the engine's
/// metering.
#[derive(Debug)]
pub struct SsspOutcome {
    sources: Vec<NodeId>,
    states: Vec<PipeState>,
    pub metrics: RoundMetrics,
}

impl SsspOutcome {
    pub fn sources(&self) -> &[NodeId] {
        &self.sources
    }

    pub fn label(&self, source: NodeId, v: NodeId) -> Option<(i64, u32, Option<NodeId>)> {
        self.states[v as usize]
            .labels
            .get(&source)
            .map(|ls| (ls.d, ls.l, ls.parent))
    }

    pub fn dist(&self, source: NodeId, v: NodeId) -> Dist {
        match self.label(source, v) {
            Some((d, _, _)) => Dist::Finite(d),
            None => Dist::Unreachable,
        }
    }

    pub fn dist_row(&self, source: NodeId) -> Vec<Dist> {
        (0..self.states.len() as NodeId)
            .map(|v| self.dist(source, v))
            .collect()
    }

    /// Final labels in the oracle's shape for direct comparison.
    pub fn canonical_row(&self, source: NodeId) -> Vec<HopEntry> {
        (0..self.states.len() as NodeId)
            .map(|v| match self.label(source, v) {
                Some((d, l, parent)) => HopEntry {
                    dist: Dist::Finite(d),
                    hops: l,
                    parent,
                },
                None => HopEntry {
                    dist: Dist::Unreachable,
                    hops: 0,
                    parent: None,
                },
            })
            .collect()
    }

    pub fn sent_pairs(&self, source: NodeId, v: NodeId) -> Option<&[(i64, u32)]> {
        self.states[v as usize]
            .labels
            .get(&source)
            .map(|ls| ls.sent_pairs.as_slice())
    }

    pub fn total_late_adoptions(&self) -> u64 {
        self.states
            .iter()
            .flat_map(|s| s.labels.values())
            .map(|ls| ls.late_adoptions as u64)
            .sum()
    }

    /// Largest per-stream fire count over all nodes.
    pub fn max_fires(&self) -> u32 {
        self.states
            .iter()
            .flat_map(|s| s.labels.values())
            .map(|ls| ls.fires)
            .max()
            .unwrap_or(0)
    }

    pub fn tree(&self, source: NodeId) -> Result<SpTree, TreeError> {
        let entries: BTreeMap<NodeId, TreeEntry> = (0..self.states.len() as NodeId)
            .filter_map(|v| {
                self.label(source, v).map(|(d, l, parent)| {
                    (
                        v,
                        TreeEntry {
                            dist: d,
                            hops: l,
                            parent,
                        },
                    )
                })
            })
            .collect();
        SpTree::with_entries(source, entries)
    }

    pub fn trees_collection(&self, h: u32) -> Result<CsSspCollection, TreeError> {
        let mut trees = BTreeMap::new();
        for &s in &self.sources {
            trees.insert(s, self.tree(s)?);
        }
        Ok(CsSspCollection {
            h,
            sources: self.sources.clone(),
            trees,
        })
    }
}

fn validate(
    graph: &WeightedGraph,
    sources: &[NodeId],
    h: u32,
    delta_cap: i64,
) -> Result<(), SsspError> {
    if h == 0 {
        return Err(SsspError::InvalidHopBound);
    }
    if delta_cap < 0 {
        return Err(SsspError::InvalidDistanceCap);
    }
    if sources.is_empty() {
        return Err(SsspError::NoSources);
    }
    let mut seen = BTreeSet::new();
    for &s in sources {
        if s >= graph.n() {
            return Err(SsspError::UnknownSource(s));
        }
        if !seen.insert(s) {
            return Err(SsspError::DuplicateSource(s));
        }
    }
    Ok(())
}

fn run_streams(
    graph: &WeightedGraph,
    sources: Vec<NodeId>,
    init: BTreeMap<NodeId, BTreeMap<NodeId, i64>>,
    hop_cap: u32,
    delta_cap: i64,
    gamma: Gamma,
    tagged: bool,
) -> Result<SsspOutcome, SsspError> {
    let program = PipelinedProgram {
        init,
        hop_cap,
        delta_cap,
        gamma,
        tagged,
    };
    let base = EngineConfig::for_graph(graph).directed_only();
    let limit = base
        .round_limit
        .max(round_bound(gamma, delta_cap, hop_cap).saturating_add(1));
    let config = base.with_round_limit(limit);
    let (states, metrics) = run_program(graph, &program, &config)?;
    Ok(SsspOutcome {
        sources,
        states,
        metrics,
    })
}

/// Hop-bounded single-source shortest paths with the sqrt(h) schedule.
/// Labels beyond `delta_cap` are pruned, which is sound because prefixes
/// of nonnegative paths never exceed the whole.
pub fn short_range(
    graph: &WeightedGraph,
    source: NodeId,
    h: u32,
    delta_cap: i64,
) -> Result<SsspOutcome, SsspError> {
    validate(graph, &[source], h, delta_cap)?;
    if graph.has_negative_weight() {
        return Err(SsspError::NegativeWeights);
    }
    run_streams(
        graph,
        vec![source],
        [(source, [(source, 0)].into_iter().collect())].into_iter().collect(),
        h,
        delta_cap,
        Gamma::SqrtH { h },
        false,
    )
}

/// All sources run concurrently, sharing the bandwidth. The flatter slope
/// sqrt(h * k / delta) balances the k interleaved streams: the run settles
/// within ceil(sqrt(delta * h * k)) + h + 1 rounds.
pub fn multi_source_pipelined(
    graph: &WeightedGraph,
    sources: &[NodeId],
    h: u32,
    delta_cap: i64,
) -> Result<SsspOutcome, SsspError> {
    validate(graph, sources, h, delta_cap)?;
    if graph.has_negative_weight() {
        return Err(SsspError::NegativeWeights);
    }
    let gamma = Gamma::SqrtRatio {
        h,
        k: sources.len() as u32,
        delta: delta_cap,
    };
    let init = sources
        .iter()
        .map(|&s| (s, [(s, 0)].into_iter().collect()))
        .collect();
    run_streams(
        graph,
        sources.to_vec(),
        init,
        h,
        delta_cap,
        gamma,
        sources.len() > 1,
    )
}

/// Continuation run: final distances from some earlier computation seed
/// the labels, and the hop budget counts only the new hops. Equivalent to
/// the seeded layered relaxation oracle.
#[derive(Debug)]
pub struct ExtensionOutcome {
    pub dist: Vec<Dist>,
    pub hops: Vec<u32>,
    pub parent: Vec<Option<NodeId>>,
    pub late_adoptions: u64,
    pub metrics: RoundMetrics,
}

pub fn short_range_extension(
    graph: &WeightedGraph,
    seeds: &BTreeMap<NodeId, i64>,
    h: u32,
    delta_cap: i64,
) -> Result<ExtensionOutcome, SsspError> {
    if h == 0 {
        return Err(SsspError::InvalidHopBound);
    }
    if delta_cap < 0 {
        return Err(SsspError::InvalidDistanceCap);
    }
    if seeds.is_empty() {
        return Err(SsspError::NoSources);
    }
    for (&v, &d) in seeds {
        if v >= graph.n() {
            return Err(SsspError::UnknownSource(v));
        }
        if d < 0 {
            return Err(SsspError::NegativeSeed(v));
        }
    }
    if graph.has_negative_weight() {
        return Err(SsspError::NegativeWeights);
    }
    // one anonymous stream; key 0 only labels the metrics
    let outcome = run_streams(
        graph,
        vec![],
        [(0, seeds.clone())].into_iter().collect(),
        h,
        delta_cap,
        Gamma::SqrtH { h },
        false,
    )?;
    let n = graph.n();
    let mut dist = vec![Dist::Unreachable; n as usize];
    let mut hops = vec![0u32; n as usize];
    let mut parent = vec![None; n as usize];
    for v in 0..n {
        if let Some((d, l, p)) = outcome.label(0, v) {
            dist[v as usize] = Dist::Finite(d);
            hops[v as usize] = l;
            parent[v as usize] = p;
        }
    }
    Ok(ExtensionOutcome {
        dist,
        hops,
        parent,
        late_adoptions: outcome.total_late_adoptions(),
        metrics: outcome.metrics,
    })
}

/// Synchronous relaxation (gamma = 0) from each source, up to `max_hops`.
/// Handles negative weights; pass [`NO_CAP`] then, since distance pruning
/// is unsound when a prefix can cost more than the whole path. With
/// `max_hops >= n`, a surviving n-hop label certifies a reachable negative
/// cycle and the run reports it.
pub fn distributed_bellman_ford(
    graph: &WeightedGraph,
    sources: &[NodeId],
    max_hops: u32,
    delta_cap: i64,
) -> Result<SsspOutcome, SsspError> {
    validate(graph, sources, max_hops, delta_cap)?;
    if graph.has_negative_weight() && delta_cap != NO_CAP {
        return Err(SsspError::CapWithNegativeWeights);
    }
    let init = sources
        .iter()
        .map(|&s| (s, [(s, 0)].into_iter().collect()))
        .collect();
    let outcome = run_streams(
        graph,
        sources.to_vec(),
        init,
        max_hops,
        delta_cap,
        Gamma::Zero,
        sources.len() > 1,
    )?;
    let cycle = outcome
        .states
        .iter()
        .flat_map(|s| s.labels.values())
        .any(|ls| ls.l >= graph.n());
    if cycle {
        return Err(SsspError::NegativeCycle);
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GeneratorSpec, GraphKind};
    use crate::graph::{Edge, WeightMode};
    use crate::num::ceil_sqrt;
    use crate::oracle::{bellman_ford_oracle, hop_bounded_sssp, seeded_hop_dp};
    use proptest::prelude::*;

    fn fig1() -> WeightedGraph {
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../fixtures/fig1.graph"
        ))
        .unwrap();
        WeightedGraph::parse(&text).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = fig1();
        assert_eq!(short_range(&g, 0, 0, 9).unwrap_err(), SsspError::InvalidHopBound);
        assert_eq!(short_range(&g, 0, 2, -1).unwrap_err(), SsspError::InvalidDistanceCap);
        assert_eq!(short_range(&g, 7, 2, 9).unwrap_err(), SsspError::UnknownSource(7));
        assert_eq!(
            multi_source_pipelined(&g, &[], 2, 9).unwrap_err(),
            SsspError::NoSources
        );
        assert_eq!(
            multi_source_pipelined(&g, &[0, 1, 0], 2, 9).unwrap_err(),
            SsspError::DuplicateSource(0)
        );

        let neg = WeightedGraph::new(
            2,
            true,
            WeightMode::Arbitrary,
            vec![Edge { from: 0, to: 1, weight: -1 }],
        )
        .unwrap();
        assert_eq!(short_range(&neg, 0, 1, 9).unwrap_err(), SsspError::NegativeWeights);
        assert_eq!(
            distributed_bellman_ford(&neg, &[0], 1, 9).unwrap_err(),
            SsspError::CapWithNegativeWeights
        );
        assert!(distributed_bellman_ford(&neg, &[0], 1, NO_CAP).is_ok());

        let seeds: BTreeMap<NodeId, i64> = [(0, -2)].into_iter().collect();
        assert_eq!(
            short_range_extension(&g, &seeds, 1, 9).unwrap_err(),
            SsspError::NegativeSeed(0)
        );
    }

    /// Source b with cap 2: the direct b -> c edge of weight 8 is pruned,
    /// c is reached as (2, 2) through d and fires in round
    /// ceil(2 * sqrt(2)) + 2 = 5, so the run closes in round 6.
    #[test]
    fn capped_run_prunes_and_settles_on_schedule() {
        let g = fig1();
        let out = short_range(&g, 1, 2, 2).unwrap();
        assert_eq!(out.label(1, 1), Some((0, 0, None)));
        assert_eq!(out.label(1, 3), Some((1, 1, Some(1))));
        assert_eq!(out.label(1, 2), Some((2, 2, Some(3))));
        assert_eq!(out.label(1, 0), None);
        assert_eq!(out.metrics.rounds, 6);
        assert_eq!(out.sent_pairs(1, 2), Some(&[(2, 2)][..]));
        assert_eq!(out.total_late_adoptions(), 0);
        // one pair crossed each usable edge, including the pruned offer
        assert_eq!(out.metrics.per_edge_messages[&(1, 2)], 1);
        assert_eq!(out.metrics.per_edge_messages[&(1, 3)], 1);
        assert_eq!(out.metrics.per_edge_messages[&(3, 2)], 1);
        assert_eq!(out.metrics.congestion(), 1);
    }

    /// Source a with the cap off: c settles at (9, 2) through b and fires
    /// in round ceil(9 * sqrt(2)) + 2 = 15. The run needs the full bound
    /// of 16 rounds.
    #[test]
    fn uncapped_run_hits_the_round_bound_exactly() {
        let g = fig1();
        let out = short_range(&g, 0, 2, 9).unwrap();
        assert_eq!(out.label(0, 0), Some((0, 0, None)));
        assert_eq!(out.label(0, 1), Some((1, 1, Some(0))));
        assert_eq!(out.label(0, 3), Some((2, 2, Some(1))));
        assert_eq!(out.label(0, 2), Some((9, 2, Some(1))));
        assert_eq!(out.metrics.rounds, 16);
        assert_eq!(round_bound(Gamma::SqrtH { h: 2 }, 9, 2), 16);
        assert_eq!(out.canonical_row(0), hop_bounded_sssp(&g, 0, 2).canonical);
        assert_eq!(out.total_late_adoptions(), 0);

        let tree = out.tree(0).unwrap();
        assert_eq!(tree.path_from_root(3), Some(vec![0, 1, 3]));
        assert_eq!(tree.path_from_root(2), Some(vec![0, 1, 2]));
    }

    #[test]
    fn extension_continues_where_a_run_stopped() {
        let g = fig1();
        // exact 1-hop distances from a, then one more hop
        let first = short_range(&g, 0, 1, 9).unwrap();
        let seeds: BTreeMap<NodeId, i64> = g
            .node_ids()
            .filter_map(|v| first.label(0, v).map(|(d, _, _)| (v, d)))
            .collect();
        assert_eq!(seeds.len(), 2);
        let cont = short_range_extension(&g, &seeds, 1, 9).unwrap();
        let full = hop_bounded_sssp(&g, 0, 2);
        for v in g.node_ids() {
            assert_eq!(cont.dist[v as usize], full.dist(v), "node {v}");
        }
        // hop budget restarts at the seeds
        assert_eq!(cont.hops[3], 1);
        assert_eq!(cont.late_adoptions, 0);

        // against the seeded relaxation oracle on a fresh seed set
        let seeds: BTreeMap<NodeId, i64> = [(1, 3)].into_iter().collect();
        let cont = short_range_extension(&g, &seeds, 1, 20).unwrap();
        assert_eq!(cont.dist, seeded_hop_dp(&g, &seeds, 1, 20));
        assert_eq!(cont.parent[3], Some(1));
    }

    #[test]
    fn relaxation_matches_the_layered_oracle() {
        let g = fig1();
        for h in 1..=3 {
            let out = distributed_bellman_ford(&g, &[0], h, NO_CAP).unwrap();
            let oracle = bellman_ford_oracle(&g, 0, h).unwrap();
            for v in g.node_ids() {
                let e = &oracle[v as usize];
                assert_eq!(out.dist(0, v), e.dist);
                if let Some((_, l, _)) = out.label(0, v) {
                    assert_eq!(l, e.hops);
                }
            }
            assert_eq!(out.canonical_row(0), hop_bounded_sssp(&g, 0, h).canonical);
            // pairs with j hops travel in round j
            assert!(out.metrics.rounds <= h as u64 + 1);
        }
    }

    #[test]
    fn relaxation_handles_negative_weights() {
        // 0 -> 1 costs 5, 1 -> 2 costs -3, 0 -> 2 costs 4: the two-hop
        // detour wins
        let g = WeightedGraph::new(
            3,
            true,
            WeightMode::Arbitrary,
            vec![
                Edge { from: 0, to: 1, weight: 5 },
                Edge { from: 1, to: 2, weight: -3 },
                Edge { from: 0, to: 2, weight: 4 },
            ],
        )
        .unwrap();
        let out = distributed_bellman_ford(&g, &[0], 2, NO_CAP).unwrap();
        assert_eq!(out.label(0, 2), Some((2, 2, Some(1))));

        let cyclic = WeightedGraph::new(
            2,
            true,
            WeightMode::Arbitrary,
            vec![
                Edge { from: 0, to: 1, weight: 1 },
                Edge { from: 1, to: 0, weight: -2 },
            ],
        )
        .unwrap();
        // a 1-hop horizon cannot close the cycle
        assert!(distributed_bellman_ford(&cyclic, &[0], 1, NO_CAP).is_ok());
        assert_eq!(
            distributed_bellman_ford(&cyclic, &[0], 2, NO_CAP).unwrap_err(),
            SsspError::NegativeCycle
        );
    }

    #[test]
    fn uncapped_schedules_saturate_instead_of_wrapping() {
        let b = round_bound(Gamma::SqrtH { h: 9 }, NO_CAP, 9);
        assert!(b > u64::MAX / 2);
        let b = round_bound(Gamma::SqrtRatio { h: 16, k: 10, delta: 1 }, NO_CAP, 16);
        assert!(b > u64::MAX / 2);
    }

    fn small_graph(seed: u64, n: u32, negative: bool) -> WeightedGraph {
        let spec = GeneratorSpec {
            kind: GraphKind::Gnp,
            n,
            p: 0.3,
            weight_low: if negative { -3 } else { 1 },
            weight_high: 9,
            zero_fraction: 0.0,
            seed,
        };
        generate(&spec).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        // The pipelined run is compared against the layered DP in two tiers.
        // A node whose unrestricted shortest path already fits within the
        // hop budget always settles on the exact canonical triple: such a
        // label has globally minimal weight, so nothing can displace it
        // before its scheduled send, and the argument extends link by link
        // from the source. A node that needs the hop bound to bite (its
        // best h-hop weight exceeds its true distance) may keep a heavier
        // label or none at all: an intermediate label can be displaced by a
        // lighter-but-longer one before it was due to be forwarded, and the
        // displaced value is lost to downstream nodes. For those nodes only
        // the one-sided witness property holds: any label is backed by a
        // real walk of its recorded hop count.
        #[test]
        fn pipelined_agrees_with_the_dp(seed in 0u64..5000, n in 2u32..20, h in 1u32..6) {
            let g = small_graph(seed, n, false);
            let source = seed as NodeId % n;
            let cap = n as i64 * 9;
            let out = short_range(&g, source, h, cap).unwrap();
            let row = hop_bounded_sssp(&g, source, h);
            let full = hop_bounded_sssp(&g, source, n - 1);
            let got = out.canonical_row(source);
            for v in g.node_ids() {
                let vi = v as usize;
                let settled = full.canonical[vi].dist.is_finite() && full.canonical[vi].hops <= h;
                if settled {
                    prop_assert_eq!(got[vi], row.canonical[vi]);
                } else if let Some((d, l, _)) = out.label(source, v) {
                    prop_assert!(l <= h);
                    let floor = row.layers[l as usize][vi];
                    prop_assert!(floor.is_finite() && floor.finite().unwrap() <= d);
                }
            }
            prop_assert_eq!(out.total_late_adoptions(), 0);
            let bound = round_bound(Gamma::SqrtH { h }, cap, h);
            prop_assert!(out.metrics.rounds <= bound);
            prop_assert!(u128::from(out.max_fires()) <= ceil_sqrt(h as u128));
            // transmitted pairs strictly improve
            for v in g.node_ids() {
                if let Some(pairs) = out.sent_pairs(source, v) {
                    for w in pairs.windows(2) {
                        prop_assert!(w[1] < w[0]);
                    }
                }
            }
        }

        #[test]
        fn multi_source_streams_stay_independent(seed in 0u64..5000, n in 3u32..16, h in 1u32..5) {
            let g = small_graph(seed, n, false);
            let sources: Vec<NodeId> = (0..n.min(3)).collect();
            let cap = n as i64 * 9;
            let out = multi_source_pipelined(&g, &sources, h, cap).unwrap();
            for &s in &sources {
                let row = hop_bounded_sssp(&g, s, h);
                let full = hop_bounded_sssp(&g, s, n - 1);
                let got = out.canonical_row(s);
                for v in g.node_ids() {
                    let vi = v as usize;
                    let settled =
                        full.canonical[vi].dist.is_finite() && full.canonical[vi].hops <= h;
                    if settled {
                        prop_assert_eq!(got[vi], row.canonical[vi]);
                    } else if let Some((d, l, _)) = out.label(s, v) {
                        prop_assert!(l <= h);
                        let floor = row.layers[l as usize][vi];
                        prop_assert!(floor.is_finite() && floor.finite().unwrap() <= d);
                    }
                }
            }
            prop_assert_eq!(out.total_late_adoptions(), 0);
            let k = sources.len() as u32;
            let gamma = Gamma::SqrtRatio { h, k, delta: cap };
            prop_assert!(out.metrics.rounds <= round_bound(gamma, cap, h));
            let fire_cap = ceil_sqrt_div(cap as u128 * u128::from(h), u128::from(k)) + 1;
            prop_assert!(u128::from(out.max_fires()) <= fire_cap);
        }

        #[test]
        fn relaxation_agrees_with_the_dp_under_negatives(seed in 0u64..5000, n in 2u32..16, h in 1u32..6) {
            let g = small_graph(seed, n, true);
            let source = seed as NodeId % n;
            let h = h.min(n - 1).max(1);
            let out = distributed_bellman_ford(&g, &[source], h, NO_CAP).unwrap();
            prop_assert_eq!(out.canonical_row(source), hop_bounded_sssp(&g, source, h).canonical);
        }
    }
}
