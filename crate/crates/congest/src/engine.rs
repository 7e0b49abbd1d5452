//! Round-synchronous execution engine.
//!
//! A run proceeds in rounds indexed from 0. In each round the engine asks
//! every node for its outgoing messages (computed from the state as of the
//! end of the previous round), delivers them, and applies receives. A
//! message sent in round r therefore influences what its receiver sends in
//! round r+1, never round r. The run ends at the top of the first round
//! where every node is quiescent and nothing is in flight; `rounds` is the
//! number of rounds actually executed.
//!
//! Messages travel only between neighbors on the underlying undirected
//! graph. `CommScope::DirectedOnly` narrows sending to actual edge
//! directions for algorithms that only relax forward along edges.

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::graph::{NodeId, WeightedGraph};
use crate::num::{ceil_log2, ceil_sqrt};

/// Message contents. `bit_size` is the honest encoded width of the payload
/// and is checked against the engine's bit budget at send time. `stream`
/// optionally tags the message with a logical substream (e.g. a source
/// index) for per-stream congestion accounting.
pub trait Payload: Clone {
    fn bit_size(&self) -> u64;
    fn stream(&self) -> Option<u32> {
        None
    }
}

/// What a node is allowed to see: its own id and its incident edges.
/// Programs receive no other topology, which keeps them local by
/// construction.
#[derive(Clone, Copy)]
pub struct NodeView<'a> {
    pub id: NodeId,
    /// Weighted edges leaving this node (both orientations if the graph is
    /// undirected), sorted by neighbor.
    pub out_edges: &'a [(NodeId, i64)],
    /// Weighted edges entering this node, sorted by neighbor.
    pub in_edges: &'a [(NodeId, i64)],
    /// Communication neighbors on the underlying undirected graph.
    pub comm: &'a [NodeId],
}

impl<'a> NodeView<'a> {
    pub fn in_weight(&self, from: NodeId) -> Option<i64> {
        self.in_edges
            .binary_search_by_key(&from, |e| e.0)
            .ok()
            .map(|i| self.in_edges[i].1)
    }

    pub fn out_weight(&self, to: NodeId) -> Option<i64> {
        self.out_edges
            .binary_search_by_key(&to, |e| e.0)
            .ok()
            .map(|i| self.out_edges[i].1)
    }
}

/// Per-node behavior driven by the engine. `send` and `receive` may
/// mutate only this node's own state.
pub trait NodeProgram {
    type State;
    type Msg: Payload;

    fn init(&self, view: &NodeView) -> Self::State;
    /// Messages to emit this round, computed before any delivery of the
    /// round is visible.
    fn send(&self, state: &mut Self::State, round: u64, view: &NodeView) -> Vec<(NodeId, Self::Msg)>;
    /// Inbox is sorted by sender id.
    fn receive(&self, state: &mut Self::State, round: u64, inbox: &[(NodeId, Self::Msg)], view: &NodeView);
    fn is_quiescent(&self, state: &Self::State) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BandwidthMode {
    /// Deliver everything queued on an edge direction each round and meter
    /// it. Round bounds in the suite assume this mode.
    UnboundedMetered,
    /// Deliver at most one message per edge direction per round, FIFO;
    /// the backlog stays in flight and delays termination.
    Fifo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommScope {
    /// Any communication neighbor may be messaged.
    Undirected,
    /// Only targets of directed out-edges may be messaged.
    DirectedOnly,
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub round_limit: u64,
    pub bandwidth: BandwidthMode,
    pub bit_budget: u64,
    pub scope: CommScope,
}

impl EngineConfig {
    pub fn for_graph(graph: &WeightedGraph) -> Self {
        EngineConfig {
            round_limit: default_round_limit(graph.n(), graph.max_abs_weight()),
            bandwidth: BandwidthMode::UnboundedMetered,
            bit_budget: bit_budget_for(graph.n(), graph.max_abs_weight()),
            scope: CommScope::Undirected,
        }
    }

    pub fn directed_only(mut self) -> Self {
        self.scope = CommScope::DirectedOnly;
        self
    }

    pub fn with_round_limit(mut self, limit: u64) -> Self {
        self.round_limit = limit;
        self
    }

    pub fn with_bandwidth(mut self, mode: BandwidthMode) -> Self {
        self.bandwidth = mode;
        self
    }
}

/// B = 4 * ceil(log2(max(n, W+2))): four machine words of the model, each
/// wide enough for a node id or an edge weight, so a message can carry a
/// couple of ids plus a distance.
pub fn bit_budget_for(n: u32, max_weight: u64) -> u64 {
    4 * ceil_log2((n as u64).max(max_weight + 2))
}

/// Default guard against divergent programs: 10 * n * ceil(sqrt(n * max(lambda, 1))),
/// comfortably above every round bound in the suite. A positive integer in
/// CONGEST_ROUND_LIMIT overrides the formula.
pub fn default_round_limit(n: u32, lambda: u64) -> u64 {
    if let Ok(raw) = std::env::var("CONGEST_ROUND_LIMIT") {
        if let Ok(limit) = raw.trim().parse::<u64>() {
            if limit > 0 {
                return limit;
            }
        }
    }
    let inner = (n as u128) * (lambda.max(1) as u128);
    10 * (n as u64).max(1) * ceil_sqrt(inner) as u64
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("round limit {limit} exceeded without quiescence")]
    RoundLimitExceeded { limit: u64 },
    #[error("message of {bits} bits from {from} to {to} in round {round} exceeds budget {budget}")]
    MessageTooLarge {
        round: u64,
        from: NodeId,
        to: NodeId,
        bits: u64,
        budget: u64,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RoundMetrics {
    /// Number of rounds executed.
    pub rounds: u64,
    /// Delivered message counts per (from, to) direction.
    pub per_edge_messages: BTreeMap<(NodeId, NodeId), u64>,
    /// Delivered messages per executed round.
    pub per_round_totals: Vec<u64>,
    /// Largest single-round inbox any node saw.
    pub max_receives_per_node_round: u64,
    /// Delivered counts per (stream, from, to) for payloads that declare a
    /// stream.
    pub per_stream_messages: BTreeMap<(u32, NodeId, NodeId), u64>,
}

impl RoundMetrics {
    pub fn dilation(&self) -> u64 {
        self.rounds
    }

    /// Max delivered count over all edge directions.
    pub fn congestion(&self) -> u64 {
        self.per_edge_messages.values().copied().max().unwrap_or(0)
    }

    pub fn total_messages(&self) -> u64 {
        self.per_edge_messages.values().sum()
    }

    /// Max per-direction count within a single stream.
    pub fn stream_congestion(&self) -> u64 {
        self.per_stream_messages.values().copied().max().unwrap_or(0)
    }

    /// Fold another execution's counts into this one (phased algorithms).
    pub fn absorb(&mut self, other: &RoundMetrics) {
        self.rounds += other.rounds;
        for (k, v) in &other.per_edge_messages {
            *self.per_edge_messages.entry(*k).or_insert(0) += v;
        }
        self.per_round_totals.extend_from_slice(&other.per_round_totals);
        self.max_receives_per_node_round = self
            .max_receives_per_node_round
            .max(other.max_receives_per_node_round);
        for (k, v) in &other.per_stream_messages {
            *self.per_stream_messages.entry(*k).or_insert(0) += v;
        }
    }
}

/// Named sequence of engine executions making up one composite algorithm.
#[derive(Clone, Debug, Default)]
pub struct PhasedMetrics {
    pub phases: Vec<(String, RoundMetrics)>,
}

impl PhasedMetrics {
    pub fn push(&mut self, name: impl Into<String>, metrics: RoundMetrics) {
        self.phases.push((name.into(), metrics));
    }

    pub fn total_rounds(&self) -> u64 {
        self.phases.iter().map(|(_, m)| m.rounds).sum()
    }

    /// All phases folded into a single metrics view; congestion of the
    /// combined view sums per-edge counts across phases.
    pub fn combined(&self) -> RoundMetrics {
        let mut all = RoundMetrics::default();
        for (_, m) in &self.phases {
            all.absorb(m);
        }
        all
    }

    pub fn rounds_by_phase(&self) -> Vec<(String, u64)> {
        self.phases.iter().map(|(n, m)| (n.clone(), m.rounds)).collect()
    }
}

pub fn run_program<P: NodeProgram>(
    graph: &WeightedGraph,
    program: &P,
    config: &EngineConfig,
) -> Result<(Vec<P::State>, RoundMetrics), EngineError> {
    let n = graph.n();
    let views: Vec<NodeView> = (0..n)
        .map(|v| NodeView {
            id: v,
            out_edges: graph.out_neighbors(v),
            in_edges: graph.in_neighbors(v),
            comm: graph.comm_neighbors(v),
        })
        .collect();
    let mut states: Vec<P::State> = views.iter().map(|vw| program.init(vw)).collect();

    let mut queues: BTreeMap<(NodeId, NodeId), VecDeque<P::Msg>> = BTreeMap::new();
    let mut metrics = RoundMetrics::default();
    let mut in_flight: u64 = 0;
    let mut round: u64 = 0;

    loop {
        if in_flight == 0 && states.iter().all(|s| program.is_quiescent(s)) {
            metrics.rounds = round;
            return Ok((states, metrics));
        }
        if round >= config.round_limit {
            return Err(EngineError::RoundLimitExceeded {
                limit: config.round_limit,
            });
        }

        for v in 0..n {
            let outgoing = program.send(&mut states[v as usize], round, &views[v as usize]);
            for (to, msg) in outgoing {
                let legal = match config.scope {
                    CommScope::Undirected => views[v as usize].comm.binary_search(&to).is_ok(),
                    CommScope::DirectedOnly => views[v as usize].out_weight(to).is_some(),
                };
                assert!(legal, "node {v} sent to {to}, not a legal target in scope");
                let bits = msg.bit_size();
                if bits > config.bit_budget {
                    return Err(EngineError::MessageTooLarge {
                        round,
                        from: v,
                        to,
                        bits,
                        budget: config.bit_budget,
                    });
                }
                queues.entry((v, to)).or_default().push_back(msg);
                in_flight += 1;
            }
        }

        // Delivery. BTreeMap order means each inbox fills in ascending
        // sender order.
        let mut inboxes: BTreeMap<NodeId, Vec<(NodeId, P::Msg)>> = BTreeMap::new();
        let mut delivered_this_round: u64 = 0;
        for ((from, to), queue) in queues.iter_mut() {
            let take = match config.bandwidth {
                BandwidthMode::UnboundedMetered => queue.len(),
                BandwidthMode::Fifo => queue.len().min(1),
            };
            for _ in 0..take {
                let msg = queue.pop_front().expect("queue length checked");
                *metrics.per_edge_messages.entry((*from, *to)).or_insert(0) += 1;
                if let Some(stream) = msg.stream() {
                    *metrics
                        .per_stream_messages
                        .entry((stream, *from, *to))
                        .or_insert(0) += 1;
                }
                inboxes.entry(*to).or_default().push((*from, msg));
                delivered_this_round += 1;
                in_flight -= 1;
            }
        }
        queues.retain(|_, q| !q.is_empty());
        metrics.per_round_totals.push(delivered_this_round);

        for (to, inbox) in inboxes {
            metrics.max_receives_per_node_round =
                metrics.max_receives_per_node_round.max(inbox.len() as u64);
            program.receive(&mut states[to as usize], round, &inbox, &views[to as usize]);
        }

        round += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, WeightMode};

    #[derive(Clone)]
    struct Word(u64);

    impl Payload for Word {
        fn bit_size(&self) -> u64 {
            crate::num::bitlen(self.0)
        }
    }

    fn fig1() -> WeightedGraph {
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../fixtures/fig1.graph"
        ))
        .unwrap();
        WeightedGraph::parse(&text).unwrap()
    }

    /// Each node forwards a token to every comm neighbor once, starting
    /// from node 0.
    struct Flood;

    #[derive(Clone, Debug, PartialEq)]
    struct FloodState {
        heard_at: Option<u64>,
        sent: bool,
    }

    impl NodeProgram for Flood {
        type State = FloodState;
        type Msg = Word;

        fn init(&self, view: &NodeView) -> FloodState {
            FloodState {
                heard_at: if view.id == 0 { Some(0) } else { None },
                sent: false,
            }
        }

        fn send(&self, state: &mut FloodState, _round: u64, view: &NodeView) -> Vec<(NodeId, Word)> {
            if state.heard_at.is_some() && !state.sent {
                state.sent = true;
                view.comm.iter().map(|&nb| (nb, Word(1))).collect()
            } else {
                Vec::new()
            }
        }

        fn receive(&self, state: &mut FloodState, round: u64, _inbox: &[(NodeId, Word)], _view: &NodeView) {
            if state.heard_at.is_none() {
                state.heard_at = Some(round);
            }
        }

        fn is_quiescent(&self, state: &FloodState) -> bool {
            state.heard_at.is_none() || state.sent
        }
    }

    #[test]
    fn single_node_terminates_at_round_zero() {
        let g = WeightedGraph::new(1, true, WeightMode::Nonnegative, vec![]).unwrap();
        let (_, m) = run_program(&g, &Flood, &EngineConfig::for_graph(&g)).unwrap();
        // flood marks itself done during round 0's (empty) send
        assert_eq!(m.rounds, 1);
        assert_eq!(m.congestion(), 0);

        struct Mute;
        impl NodeProgram for Mute {
            type State = ();
            type Msg = Word;
            fn init(&self, _: &NodeView) {}
            fn send(&self, _: &mut (), _: u64, _: &NodeView) -> Vec<(NodeId, Word)> {
                Vec::new()
            }
            fn receive(&self, _: &mut (), _: u64, _: &[(NodeId, Word)], _: &NodeView) {}
            fn is_quiescent(&self, _: &()) -> bool {
                true
            }
        }
        let (_, m) = run_program(&g, &Mute, &EngineConfig::for_graph(&g)).unwrap();
        assert_eq!(m.rounds, 0);
        assert_eq!(m.congestion(), 0);
    }

    #[test]
    fn flood_covers_fig1_in_three_rounds() {
        let g = fig1();
        let (states, m) = run_program(&g, &Flood, &EngineConfig::for_graph(&g)).unwrap();
        assert_eq!(m.rounds, 3);
        // a -> b in round 0, b -> c,d in round 1, c/d answer in round 2
        assert_eq!(states[1].heard_at, Some(0));
        assert_eq!(states[2].heard_at, Some(1));
        assert_eq!(states[3].heard_at, Some(1));
        assert!(states.iter().all(|s| s.heard_at.is_some()));
        assert_eq!(m.congestion(), 1);
    }

    #[test]
    fn flood_on_path_uses_each_direction_once() {
        let g = WeightedGraph::new(
            3,
            false,
            WeightMode::Nonnegative,
            vec![
                Edge { from: 0, to: 1, weight: 1 },
                Edge { from: 1, to: 2, weight: 1 },
            ],
        )
        .unwrap();
        let (_, m) = run_program(&g, &Flood, &EngineConfig::for_graph(&g)).unwrap();
        let expect: BTreeMap<(NodeId, NodeId), u64> =
            [((0, 1), 1), ((1, 0), 1), ((1, 2), 1), ((2, 1), 1)]
                .into_iter()
                .collect();
        assert_eq!(m.per_edge_messages, expect);
        assert_eq!(m.congestion(), 1);
    }

    #[test]
    fn deterministic_across_runs() {
        let g = fig1();
        let cfg = EngineConfig::for_graph(&g);
        let (s1, m1) = run_program(&g, &Flood, &cfg).unwrap();
        let (s2, m2) = run_program(&g, &Flood, &cfg).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(s1, s2);
    }

    #[test]
    fn oversized_message_is_rejected() {
        struct Shout;
        impl NodeProgram for Shout {
            type State = bool;
            type Msg = Word;
            fn init(&self, _: &NodeView) -> bool {
                false
            }
            fn send(&self, done: &mut bool, _: u64, view: &NodeView) -> Vec<(NodeId, Word)> {
                if *done || view.comm.is_empty() {
                    *done = true;
                    return Vec::new();
                }
                *done = true;
                vec![(view.comm[0], Word(u64::MAX))]
            }
            fn receive(&self, _: &mut bool, _: u64, _: &[(NodeId, Word)], _: &NodeView) {}
            fn is_quiescent(&self, done: &bool) -> bool {
                *done
            }
        }
        let g = fig1();
        let err = run_program(&g, &Shout, &EngineConfig::for_graph(&g)).unwrap_err();
        // fig1 budget: 4 * ceil(log2(max(4, 10))) = 16 bits, u64::MAX is 64
        assert_eq!(
            err,
            EngineError::MessageTooLarge {
                round: 0,
                from: 0,
                to: 1,
                bits: 64,
                budget: 16
            }
        );
    }

    #[test]
    fn round_limit_catches_chatter() {
        struct Chatter;
        impl NodeProgram for Chatter {
            type State = ();
            type Msg = Word;
            fn init(&self, _: &NodeView) {}
            fn send(&self, _: &mut (), _: u64, view: &NodeView) -> Vec<(NodeId, Word)> {
                view.comm.first().map(|&nb| (nb, Word(1))).into_iter().collect()
            }
            fn receive(&self, _: &mut (), _: u64, _: &[(NodeId, Word)], _: &NodeView) {}
            fn is_quiescent(&self, _: &()) -> bool {
                false
            }
        }
        let g = fig1();
        let cfg = EngineConfig::for_graph(&g).with_round_limit(25);
        let err = run_program(&g, &Chatter, &cfg).unwrap_err();
        assert_eq!(err, EngineError::RoundLimitExceeded { limit: 25 });
    }

    /// Node 0 sends a burst of three messages to node 1 in round 0.
    struct Burst;

    #[derive(Clone, Default)]
    struct BurstState {
        fired: bool,
        got: Vec<(u64, u64)>, // (round, payload)
    }

    impl NodeProgram for Burst {
        type State = BurstState;
        type Msg = Word;

        fn init(&self, _: &NodeView) -> BurstState {
            BurstState::default()
        }

        fn send(&self, state: &mut BurstState, _: u64, view: &NodeView) -> Vec<(NodeId, Word)> {
            if view.id == 0 && !state.fired {
                state.fired = true;
                return vec![(1, Word(5)), (1, Word(6)), (1, Word(7))];
            }
            state.fired = true;
            Vec::new()
        }

        fn receive(&self, state: &mut BurstState, round: u64, inbox: &[(NodeId, Word)], _: &NodeView) {
            for (_, w) in inbox {
                state.got.push((round, w.0));
            }
        }

        fn is_quiescent(&self, state: &BurstState) -> bool {
            state.fired
        }
    }

    #[test]
    fn fifo_mode_spreads_a_burst() {
        let g = WeightedGraph::new(
            2,
            true,
            WeightMode::Nonnegative,
            vec![Edge { from: 0, to: 1, weight: 1 }],
        )
        .unwrap();
        let cfg = EngineConfig::for_graph(&g).with_bandwidth(BandwidthMode::Fifo);
        let (states, m) = run_program(&g, &Burst, &cfg).unwrap();
        assert_eq!(m.rounds, 3);
        assert_eq!(m.per_round_totals, vec![1, 1, 1]);
        assert_eq!(states[1].got, vec![(0, 5), (1, 6), (2, 7)]);

        let cfg = EngineConfig::for_graph(&g);
        let (states, m) = run_program(&g, &Burst, &cfg).unwrap();
        assert_eq!(m.rounds, 1);
        assert_eq!(m.per_round_totals, vec![3]);
        assert_eq!(states[1].got, vec![(0, 5), (0, 6), (0, 7)]);
        assert_eq!(m.congestion(), 3);
        assert_eq!(m.max_receives_per_node_round, 3);
    }

    /// Relay along a directed path, forwarding the round after hearing.
    struct Relay;

    #[derive(Clone)]
    struct RelayState {
        heard_at: Option<u64>,
        sent: bool,
        is_head: bool,
    }

    impl NodeProgram for Relay {
        type State = RelayState;
        type Msg = Word;

        fn init(&self, view: &NodeView) -> RelayState {
            RelayState {
                heard_at: if view.id == 0 { Some(0) } else { None },
                sent: false,
                is_head: view.id == 0,
            }
        }

        fn send(&self, state: &mut RelayState, _: u64, view: &NodeView) -> Vec<(NodeId, Word)> {
            if state.heard_at.is_some() && !state.sent {
                state.sent = true;
                return view.out_edges.iter().map(|&(to, _)| (to, Word(1))).collect();
            }
            Vec::new()
        }

        fn receive(&self, state: &mut RelayState, round: u64, _: &[(NodeId, Word)], _: &NodeView) {
            if state.heard_at.is_none() && !state.is_head {
                state.heard_at = Some(round);
            }
        }

        fn is_quiescent(&self, state: &RelayState) -> bool {
            state.heard_at.is_none() || state.sent
        }
    }

    #[test]
    fn one_round_latency_per_hop() {
        let g = WeightedGraph::new(
            3,
            true,
            WeightMode::Nonnegative,
            vec![
                Edge { from: 0, to: 1, weight: 1 },
                Edge { from: 1, to: 2, weight: 1 },
            ],
        )
        .unwrap();
        let cfg = EngineConfig::for_graph(&g).directed_only();
        let (states, m) = run_program(&g, &Relay, &cfg).unwrap();
        // heard in round r, forwarded in round r+1
        assert_eq!(states[1].heard_at, Some(0));
        assert_eq!(states[2].heard_at, Some(1));
        assert_eq!(m.rounds, 3);
    }

    #[test]
    #[should_panic(expected = "not a legal target")]
    fn directed_scope_rejects_backward_send() {
        struct Backward;
        impl NodeProgram for Backward {
            type State = bool;
            type Msg = Word;
            fn init(&self, _: &NodeView) -> bool {
                false
            }
            fn send(&self, done: &mut bool, _: u64, view: &NodeView) -> Vec<(NodeId, Word)> {
                *done = true;
                if view.id == 1 {
                    return vec![(0, Word(1))];
                }
                Vec::new()
            }
            fn receive(&self, _: &mut bool, _: u64, _: &[(NodeId, Word)], _: &NodeView) {}
            fn is_quiescent(&self, done: &bool) -> bool {
                *done
            }
        }
        let g = WeightedGraph::new(
            2,
            true,
            WeightMode::Nonnegative,
            vec![Edge { from: 0, to: 1, weight: 1 }],
        )
        .unwrap();
        let cfg = EngineConfig::for_graph(&g).directed_only();
        let _ = run_program(&g, &Backward, &cfg);
    }

    #[test]
    fn bit_budget_formula() {
        assert_eq!(bit_budget_for(4, 8), 16); // max(4,10) -> ceil log2 = 4
        assert_eq!(bit_budget_for(60, 10), 24);
        assert_eq!(bit_budget_for(1, 0), 4); // max(1,2) -> 1 word of 1 bit
        assert_eq!(bit_budget_for(1024, 0), 40);
    }

    #[test]
    fn phased_metrics_compose() {
        let mut a = RoundMetrics::default();
        a.rounds = 3;
        a.per_edge_messages.insert((0, 1), 2);
        let mut b = RoundMetrics::default();
        b.rounds = 4;
        b.per_edge_messages.insert((0, 1), 1);
        b.per_edge_messages.insert((1, 0), 5);
        let mut phased = PhasedMetrics::default();
        phased.push("one", a);
        phased.push("two", b);
        assert_eq!(phased.total_rounds(), 7);
        let all = phased.combined();
        assert_eq!(all.per_edge_messages[&(0, 1)], 3);
        assert_eq!(all.congestion(), 5);
    }
}
