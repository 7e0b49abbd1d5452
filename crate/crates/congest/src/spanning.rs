//! Spanning-forest utilities shared by the composite algorithms: leader
//! election with BFS layering, a reduce-then-announce aggregate, and a
//! pipelined item flood. All of them run as engine programs so their round
//! and message costs land in the metrics like any other phase.

use std::collections::VecDeque;

use crate::engine::{
    run_program, EngineConfig, EngineError, NodeProgram, NodeView, Payload, RoundMetrics,
};
use crate::graph::{NodeId, WeightedGraph};
use crate::num::bitlen;

/// BFS forest of the communication graph. One tree per connected component,
/// rooted at the component's smallest node id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningForest {
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    leader: Vec<NodeId>,
    depth: Vec<u32>,
    roots: Vec<NodeId>,
}

impl SpanningForest {
    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v as usize]
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v as usize]
    }

    pub fn leader(&self, v: NodeId) -> NodeId {
        self.leader[v as usize]
    }

    pub fn depth(&self, v: NodeId) -> u32 {
        self.depth[v as usize]
    }

    /// Component roots, ascending.
    pub fn roots(&self) -> &[NodeId] {
        &self.roots
    }

    pub fn max_depth(&self) -> u32 {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Tree neighbors of `v`: its parent plus its children.
    pub fn tree_neighbors(&self, v: NodeId) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.children(v).len() + 1);
        if let Some(p) = self.parent(v) {
            out.push(p);
        }
        out.extend_from_slice(self.children(v));
        out
    }
}

#[derive(Clone, Debug)]
struct FloodMsg {
    leader: NodeId,
    depth: u32,
}

impl Payload for FloodMsg {
    fn bit_size(&self) -> u64 {
        bitlen(self.leader as u64) + bitlen(self.depth as u64)
    }
}

#[derive(Clone, Debug)]
struct FloodState {
    leader: NodeId,
    depth: u32,
    parent: Option<NodeId>,
    dirty: bool,
}

impl FloodState {
    /// Lexicographic claim key. A root carries its own id in the parent
    /// slot so the true leader's (L, 0, L) beats every echo of L's wave.
    fn key(&self, own: NodeId) -> (NodeId, u32, NodeId) {
        (self.leader, self.depth, self.parent.unwrap_or(own))
    }
}

struct LeaderFlood;

impl NodeProgram for LeaderFlood {
    type State = FloodState;
    type Msg = FloodMsg;

    fn init(&self, view: &NodeView) -> FloodState {
        FloodState {
            leader: view.id,
            depth: 0,
            parent: None,
            dirty: true,
        }
    }

    fn send(&self, state: &mut FloodState, _round: u64, view: &NodeView) -> Vec<(NodeId, FloodMsg)> {
        if !state.dirty {
            return Vec::new();
        }
        state.dirty = false;
        let msg = FloodMsg {
            leader: state.leader,
            depth: state.depth,
        };
        view.comm.iter().map(|&to| (to, msg.clone())).collect()
    }

    fn receive(&self, state: &mut FloodState, _round: u64, inbox: &[(NodeId, FloodMsg)], view: &NodeView) {
        for (from, msg) in inbox {
            let cand = (msg.leader, msg.depth + 1, *from);
            if cand < state.key(view.id) {
                state.leader = cand.0;
                state.depth = cand.1;
                state.parent = Some(cand.2);
                state.dirty = true;
            }
        }
    }

    fn is_quiescent(&self, state: &FloodState) -> bool {
        !state.dirty
    }
}

#[derive(Clone, Debug)]
struct NotifyMsg;

impl Payload for NotifyMsg {
    fn bit_size(&self) -> u64 {
        1
    }
}

/// One round: every non-root tells its parent who it is, which is how a
/// node learns its child set without reading anyone else's state.
struct ChildNotify<'a> {
    parent: &'a [Option<NodeId>],
}

#[derive(Clone, Debug, Default)]
struct NotifyState {
    sent: bool,
    children: Vec<NodeId>,
}

impl NodeProgram for ChildNotify<'_> {
    type State = NotifyState;
    type Msg = NotifyMsg;

    fn init(&self, _view: &NodeView) -> NotifyState {
        NotifyState::default()
    }

    fn send(&self, state: &mut NotifyState, _round: u64, view: &NodeView) -> Vec<(NodeId, NotifyMsg)> {
        if state.sent {
            return Vec::new();
        }
        state.sent = true;
        match self.parent[view.id as usize] {
            Some(p) => vec![(p, NotifyMsg)],
            None => Vec::new(),
        }
    }

    fn receive(&self, state: &mut NotifyState, _round: u64, inbox: &[(NodeId, NotifyMsg)], _view: &NodeView) {
        state.children.extend(inbox.iter().map(|(from, _)| *from));
    }

    fn is_quiescent(&self, state: &NotifyState) -> bool {
        state.sent
    }
}

/// Elect the smallest id in each component and layer a BFS tree under it.
/// Two executions: the claim flood, then the one-round child notification.
/// Ties on depth resolve to the smallest parent id, so the forest is a
/// deterministic function of the graph.
pub fn build_spanning_forest(
    graph: &WeightedGraph,
) -> Result<(SpanningForest, Vec<(String, RoundMetrics)>), EngineError> {
    let config = EngineConfig::for_graph(graph);
    let (states, flood_metrics) = run_program(graph, &LeaderFlood, &config)?;

    let parent: Vec<Option<NodeId>> = states.iter().map(|s| s.parent).collect();
    let leader: Vec<NodeId> = states.iter().map(|s| s.leader).collect();
    let depth: Vec<u32> = states.iter().map(|s| s.depth).collect();

    let notify = ChildNotify { parent: &parent };
    let (notify_states, notify_metrics) = run_program(graph, &notify, &config)?;
    let children: Vec<Vec<NodeId>> = notify_states
        .into_iter()
        .map(|s| {
            // Inboxes arrive sorted by sender and the wave is one round, so
            // each child list is already ascending.
            debug_assert!(s.children.windows(2).all(|w| w[0] < w[1]));
            s.children
        })
        .collect();

    let mut roots: Vec<NodeId> = parent
        .iter()
        .enumerate()
        .filter_map(|(v, p)| p.is_none().then_some(v as NodeId))
        .collect();
    roots.sort_unstable();

    let forest = SpanningForest {
        parent,
        children,
        leader,
        depth,
        roots,
    };
    Ok((
        forest,
        vec![
            ("forest-flood".into(), flood_metrics),
            ("forest-notify".into(), notify_metrics),
        ],
    ))
}

#[derive(Clone, Debug)]
enum ReduceMsg {
    Up { value: u64, node: NodeId },
    Down { value: u64, node: NodeId },
}

impl Payload for ReduceMsg {
    fn bit_size(&self) -> u64 {
        let (ReduceMsg::Up { value, node } | ReduceMsg::Down { value, node }) = self;
        1 + bitlen(*value) + bitlen(*node as u64)
    }
}

#[derive(Clone, Debug)]
struct ReduceState {
    /// Best (value, node) seen in this subtree; larger value wins, ties go
    /// to the smaller node id.
    best: (u64, NodeId),
    pending_children: usize,
    sent_up: bool,
    winner: Option<(u64, NodeId)>,
    announced: bool,
}

fn better(a: (u64, NodeId), b: (u64, NodeId)) -> (u64, NodeId) {
    if (b.0, std::cmp::Reverse(b.1)) > (a.0, std::cmp::Reverse(a.1)) {
        b
    } else {
        a
    }
}

struct ReduceMax<'a> {
    forest: &'a SpanningForest,
    values: &'a [u64],
}

impl NodeProgram for ReduceMax<'_> {
    type State = ReduceState;
    type Msg = ReduceMsg;

    fn init(&self, view: &NodeView) -> ReduceState {
        ReduceState {
            best: (self.values[view.id as usize], view.id),
            pending_children: self.forest.children(view.id).len(),
            sent_up: false,
            winner: None,
            announced: false,
        }
    }

    fn send(&self, state: &mut ReduceState, _round: u64, view: &NodeView) -> Vec<(NodeId, ReduceMsg)> {
        let mut out = Vec::new();
        if !state.sent_up && state.pending_children == 0 {
            state.sent_up = true;
            match self.forest.parent(view.id) {
                Some(p) => out.push((
                    p,
                    ReduceMsg::Up {
                        value: state.best.0,
                        node: state.best.1,
                    },
                )),
                // Component root: the subtree aggregate is the component
                // maximum, start the announcement wave.
                None => state.winner = Some(state.best),
            }
        }
        if let Some((value, node)) = state.winner {
            if !state.announced {
                state.announced = true;
                for &c in self.forest.children(view.id) {
                    out.push((c, ReduceMsg::Down { value, node }));
                }
            }
        }
        out
    }

    fn receive(&self, state: &mut ReduceState, _round: u64, inbox: &[(NodeId, ReduceMsg)], _view: &NodeView) {
        for (_, msg) in inbox {
            match msg {
                ReduceMsg::Up { value, node } => {
                    state.best = better(state.best, (*value, *node));
                    state.pending_children -= 1;
                }
                ReduceMsg::Down { value, node } => state.winner = Some((*value, *node)),
            }
        }
    }

    fn is_quiescent(&self, state: &ReduceState) -> bool {
        state.sent_up && (state.winner.is_none() || state.announced)
    }
}

/// Convergecast the per-node `values` to each component root and flood the
/// component maximum back down. Every node ends up knowing its component's
/// (value, node) winner; ties prefer the smaller node id. Costs at most
/// 2 * depth + 2 rounds with one message per tree edge per direction.
pub fn reduce_max_and_announce(
    graph: &WeightedGraph,
    forest: &SpanningForest,
    values: &[u64],
) -> Result<(Vec<(u64, NodeId)>, RoundMetrics), EngineError> {
    assert_eq!(values.len(), graph.n() as usize);
    let program = ReduceMax { forest, values };
    let config = EngineConfig::for_graph(graph);
    let (states, metrics) = run_program(graph, &program, &config)?;
    let winners = states
        .into_iter()
        .map(|s| s.winner.expect("announcement reaches every node"))
        .collect();
    Ok((winners, metrics))
}

#[derive(Clone, Debug)]
struct ItemMsg<T> {
    item: T,
}

impl<T: Payload> Payload for ItemMsg<T> {
    fn bit_size(&self) -> u64 {
        self.item.bit_size()
    }

    fn stream(&self) -> Option<u32> {
        self.item.stream()
    }
}

#[derive(Clone, Debug)]
struct FloodItemsState<T> {
    received: Vec<T>,
    /// (item, neighbor it came from); None marks items injected at the
    /// origin. One entry leaves per round.
    outbox: VecDeque<(T, Option<NodeId>)>,
}

struct ItemFlood<'a, T> {
    forest: &'a SpanningForest,
    origin: NodeId,
    items: &'a [T],
}

impl<T: Payload + std::fmt::Debug> NodeProgram for ItemFlood<'_, T> {
    type State = FloodItemsState<T>;
    type Msg = ItemMsg<T>;

    fn init(&self, view: &NodeView) -> FloodItemsState<T> {
        let outbox = if view.id == self.origin {
            self.items.iter().map(|i| (i.clone(), None)).collect()
        } else {
            VecDeque::new()
        };
        FloodItemsState {
            received: Vec::new(),
            outbox,
        }
    }

    fn send(&self, state: &mut FloodItemsState<T>, _round: u64, view: &NodeView) -> Vec<(NodeId, ItemMsg<T>)> {
        let Some((item, from)) = state.outbox.pop_front() else {
            return Vec::new();
        };
        self.forest
            .tree_neighbors(view.id)
            .into_iter()
            .filter(|&nb| Some(nb) != from)
            .map(|nb| (nb, ItemMsg { item: item.clone() }))
            .collect()
    }

    fn receive(&self, state: &mut FloodItemsState<T>, _round: u64, inbox: &[(NodeId, ItemMsg<T>)], _view: &NodeView) {
        // Tree edges carry one item per round in each direction and the
        // flood moves away from the origin, so at most one arrives.
        debug_assert!(inbox.len() <= 1);
        for (from, msg) in inbox {
            state.received.push(msg.item.clone());
            state.outbox.push_back((msg.item.clone(), Some(*from)));
        }
    }

    fn is_quiescent(&self, state: &FloodItemsState<T>) -> bool {
        state.outbox.is_empty()
    }
}

/// Pipeline `items` from `origin` across the spanning forest's tree edges,
/// one item per edge per round. Every node in the origin's component
/// receives all items in order; other components receive nothing. Costs at
/// most items + 2 * depth rounds.
pub fn flood_items<T: Payload + std::fmt::Debug>(
    graph: &WeightedGraph,
    forest: &SpanningForest,
    origin: NodeId,
    items: &[T],
) -> Result<(Vec<Vec<T>>, RoundMetrics), EngineError> {
    let program = ItemFlood {
        forest,
        origin,
        items,
    };
    let config = EngineConfig::for_graph(graph);
    let (states, metrics) = run_program(graph, &program, &config)?;
    let mut received: Vec<Vec<T>> = states.into_iter().map(|s| s.received).collect();
    // The origin keeps its own copy rather than hearing it echoed back.
    received[origin as usize] = items.to_vec();
    Ok((received, metrics))
}
