//! (1+epsilon)-approximate all-pairs shortest paths over nonnegative
//! weights with zero edges allowed. Zero-weight reachability is computed
//! outright; every other pair goes through the scaling reduction: multiply
//! nonzero weights by n^2, lift zeros to 1, solve the strictly positive
//! instance, divide back. The additive error the lifted zeros introduce is
//! under 1/n per pair, inside the epsilon budget whenever epsilon > 3/n.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::engine::{
    run_program, EngineConfig, EngineError, NodeProgram, NodeView, Payload, PhasedMetrics,
    RoundMetrics,
};
use crate::graph::{Edge, NodeId, WeightedGraph, WeightMode};
use crate::oracle::Dist;
use crate::short_range::{distributed_bellman_ford, SsspError, NO_CAP};

/// A positive rational tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Epsilon {
    pub num: u64,
    pub den: u64,
}

impl Epsilon {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(num >= 1 && den >= 1, "epsilon must be positive");
        Epsilon { num, den }
    }

    /// Exact decimal parse: "0.1" is 1/10, "2" is 2/1. Anything that is
    /// not a plain positive decimal comes back None.
    pub fn parse_decimal(s: &str) -> Option<Epsilon> {
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return None;
        }
        if frac_part.len() > 18 {
            return None;
        }
        let den = 10u64.checked_pow(frac_part.len() as u32)?;
        let int_val: u64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().ok()?
        };
        let frac_val: u64 = if frac_part.is_empty() {
            0
        } else {
            frac_part.parse().ok()?
        };
        let num = int_val.checked_mul(den)?.checked_add(frac_val)?;
        if num == 0 {
            return None;
        }
        Some(Epsilon { num, den })
    }
}

#[derive(Debug, Error)]
pub enum ApproxError {
    #[error("epsilon {num}/{den} must exceed 3/{n} for this graph")]
    EpsilonTooSmall { num: u64, den: u64, n: u32 },
    #[error("the scaling reduction requires nonnegative weights")]
    NegativeWeights,
    #[error(transparent)]
    Sssp(#[from] SsspError),
}

/// Ordered pairs joined by a directed path of weight-zero edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroReach {
    reach: Vec<Vec<bool>>,
}

impl ZeroReach {
    pub fn reaches(&self, u: NodeId, v: NodeId) -> bool {
        self.reach[u as usize][v as usize]
    }

    pub fn pair_count(&self) -> usize {
        self.reach.iter().flatten().filter(|&&b| b).count()
    }
}

#[derive(Clone, Debug)]
struct ZeroTok;

impl Payload for ZeroTok {
    fn bit_size(&self) -> u64 {
        1
    }
}

/// Wavefront over zero-weight out-edges from one source.
struct ZeroBfs {
    source: NodeId,
}

#[derive(Clone)]
struct ZeroState {
    reached: bool,
    fresh: bool,
}

impl NodeProgram for ZeroBfs {
    type State = ZeroState;
    type Msg = ZeroTok;

    fn init(&self, view: &NodeView) -> ZeroState {
        let reached = view.id == self.source;
        ZeroState {
            reached,
            fresh: reached,
        }
    }

    fn send(&self, state: &mut ZeroState, _round: u64, view: &NodeView) -> Vec<(NodeId, ZeroTok)> {
        if !state.fresh {
            return Vec::new();
        }
        state.fresh = false;
        view.out_edges
            .iter()
            .filter(|&&(_, w)| w == 0)
            .map(|&(to, _)| (to, ZeroTok))
            .collect()
    }

    fn receive(
        &self,
        state: &mut ZeroState,
        _round: u64,
        inbox: &[(NodeId, ZeroTok)],
        _view: &NodeView,
    ) {
        if !inbox.is_empty() && !state.reached {
            state.reached = true;
            state.fresh = true;
        }
    }

    fn is_quiescent(&self, state: &ZeroState) -> bool {
        !state.fresh
    }
}

/// One zero-edge BFS per source, run in sequence; the returned metric is
/// their concatenation.
pub fn zero_reachability(graph: &WeightedGraph) -> Result<(ZeroReach, RoundMetrics), EngineError> {
    let config = EngineConfig::for_graph(graph);
    let mut total = RoundMetrics::default();
    let mut reach = Vec::with_capacity(graph.n() as usize);
    for source in graph.node_ids() {
        let (states, metrics) = run_program(graph, &ZeroBfs { source }, &config)?;
        total.absorb(&metrics);
        reach.push(states.into_iter().map(|s| s.reached).collect());
    }
    Ok((ZeroReach { reach }, total))
}

/// w' = 1 for zero edges, n^2 * w otherwise; every weight strictly
/// positive afterwards.
pub fn scale_weights(graph: &WeightedGraph) -> WeightedGraph {
    let factor = i64::from(graph.n()).saturating_mul(i64::from(graph.n()));
    let edges = graph
        .edges()
        .iter()
        .map(|e| Edge {
            from: e.from,
            to: e.to,
            weight: if e.weight == 0 {
                1
            } else {
                e.weight.saturating_mul(factor)
            },
        })
        .collect();
    WeightedGraph::new(graph.n(), graph.directed(), WeightMode::Nonnegative, edges)
        .expect("scaling preserves graph invariants")
}

/// All-pairs distances on a strictly positive instance. The default is an
/// exact synchronous relaxation; any implementation whose results stay
/// within a (1 + epsilon/3) factor above the truth preserves the final
/// sandwich.
pub trait PositiveWeightApsp {
    fn apsp(
        &self,
        graph: &WeightedGraph,
    ) -> Result<(BTreeMap<NodeId, Vec<Dist>>, RoundMetrics), SsspError>;
}

pub struct ExactBellmanFord;

impl PositiveWeightApsp for ExactBellmanFord {
    fn apsp(
        &self,
        graph: &WeightedGraph,
    ) -> Result<(BTreeMap<NodeId, Vec<Dist>>, RoundMetrics), SsspError> {
        let sources: Vec<NodeId> = graph.node_ids().collect();
        let hops = graph.n().saturating_sub(1).max(1);
        let outcome = distributed_bellman_ford(graph, &sources, hops, NO_CAP)?;
        let rows = sources
            .iter()
            .map(|&s| (s, outcome.dist_row(s)))
            .collect();
        Ok((rows, outcome.metrics))
    }
}

/// Approximate distances as exact rationals over the shared denominator
/// n^2. None means unreachable.
#[derive(Debug)]
pub struct ApproxOutput {
    pub n: u32,
    pub den: u64,
    rows: BTreeMap<NodeId, Vec<Option<u64>>>,
    pub metrics: PhasedMetrics,
}

impl ApproxOutput {
    pub fn est(&self, u: NodeId, v: NodeId) -> Option<(u64, u64)> {
        self.rows[&u][v as usize].map(|num| (num, self.den))
    }

    pub fn row(&self, u: NodeId) -> &[Option<u64>] {
        &self.rows[&u]
    }
}

pub fn approx_apsp(graph: &WeightedGraph, epsilon: Epsilon) -> Result<ApproxOutput, ApproxError> {
    approx_apsp_with(graph, epsilon, &ExactBellmanFord)
}

pub fn approx_apsp_with(
    graph: &WeightedGraph,
    epsilon: Epsilon,
    subroutine: &impl PositiveWeightApsp,
) -> Result<ApproxOutput, ApproxError> {
    if graph.has_negative_weight() {
        return Err(ApproxError::NegativeWeights);
    }
    let n = graph.n();
    // epsilon > 3/n, compared exactly.
    if u128::from(epsilon.num) * u128::from(n) <= 3 * u128::from(epsilon.den) {
        return Err(ApproxError::EpsilonTooSmall {
            num: epsilon.num,
            den: epsilon.den,
            n,
        });
    }

    let mut metrics = PhasedMetrics::default();
    let (zero, zero_metrics) = zero_reachability(graph).map_err(SsspError::from)?;
    metrics.push("zero-reachability", zero_metrics);

    let scaled = scale_weights(graph);
    let (scaled_rows, sub_metrics) = subroutine.apsp(&scaled)?;
    metrics.push("scaled-apsp", sub_metrics);

    let den = u64::from(n) * u64::from(n);
    let rows = graph
        .node_ids()
        .map(|u| {
            let row = graph
                .node_ids()
                .map(|v| {
                    if zero.reaches(u, v) {
                        Some(0)
                    } else {
                        // A scaled distance is an integer, so dividing by
                        // n^2 already lands on a multiple of 1/n^2.
                        scaled_rows[&u][v as usize].finite().map(|d| d as u64)
                    }
                })
                .collect();
            (u, row)
        })
        .collect();

    Ok(ApproxOutput {
        n,
        den,
        rows,
        metrics,
    })
}
