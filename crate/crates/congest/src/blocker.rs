//! Greedy blocker-set computation over a CSSSP collection. A blocker set
//! must hit every root-to-leaf path of hop length exactly h in every tree;
//! the greedy loop repeatedly takes the node lying on the most uncovered
//! paths, then repairs all affected scores with two pipelined tree waves.

use std::collections::{BTreeMap, VecDeque};

use crate::csssp::CsSspCollection;
use crate::engine::{
    run_program, EngineConfig, EngineError, NodeProgram, NodeView, Payload, RoundMetrics,
};
use crate::graph::{NodeId, WeightedGraph};
use crate::num::bitlen;
use crate::spanning::{build_spanning_forest, reduce_max_and_announce, SpanningForest};

/// Per-node, per-tree counts of uncovered depth-h leaves. Zero entries are
/// never stored, so two tables agree iff they compare equal.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScoreTable {
    by_node: Vec<BTreeMap<NodeId, u64>>,
    totals: Vec<u64>,
}

impl ScoreTable {
    pub fn new(n: usize) -> Self {
        ScoreTable {
            by_node: vec![BTreeMap::new(); n],
            totals: vec![0; n],
        }
    }

    pub fn score(&self, v: NodeId) -> u64 {
        self.totals[v as usize]
    }

    pub fn score_x(&self, v: NodeId, x: NodeId) -> u64 {
        self.by_node[v as usize].get(&x).copied().unwrap_or(0)
    }

    /// Nonzero per-tree scores of v, keyed by source.
    pub fn tree_scores(&self, v: NodeId) -> &BTreeMap<NodeId, u64> {
        &self.by_node[v as usize]
    }

    pub fn totals(&self) -> &[u64] {
        &self.totals
    }

    pub fn total_sum(&self) -> u64 {
        self.totals.iter().sum()
    }

    fn add(&mut self, v: NodeId, x: NodeId, amount: u64) {
        if amount == 0 {
            return;
        }
        *self.by_node[v as usize].entry(x).or_insert(0) += amount;
        self.totals[v as usize] += amount;
    }

    fn sub(&mut self, v: NodeId, x: NodeId, amount: u64) {
        if amount == 0 {
            return;
        }
        let slot = self.by_node[v as usize]
            .get_mut(&x)
            .expect("deduction targets a stored score");
        *slot = slot.checked_sub(amount).expect("score cannot go negative");
        if *slot == 0 {
            self.by_node[v as usize].remove(&x);
        }
        self.totals[v as usize] -= amount;
    }

    fn zero(&mut self, v: NodeId, x: NodeId) {
        if let Some(old) = self.by_node[v as usize].remove(&x) {
            self.totals[v as usize] -= old;
        }
    }
}

/// Blockers in selection order plus the greedy cover bound they are held to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockerSet {
    pub q: Vec<NodeId>,
    /// ceil((n/h) * ln(max(1, n*k))) + 1.
    pub target: u64,
}

impl BlockerSet {
    pub fn contains(&self, v: NodeId) -> bool {
        self.q.contains(&v)
    }
}

pub fn greedy_cover_bound(n: u32, k: u32, h: u32) -> u64 {
    let paths = (n as f64 * k as f64).max(1.0);
    ((n as f64 / h as f64) * paths.ln()).ceil() as u64 + 1
}

#[derive(Clone, Debug)]
struct CountMsg {
    tree: u32,
    count: u64,
}

impl Payload for CountMsg {
    fn bit_size(&self) -> u64 {
        bitlen(self.tree as u64) + bitlen(self.count)
    }

    fn stream(&self) -> Option<u32> {
        Some(self.tree)
    }
}

#[derive(Clone, Debug)]
struct InitState {
    /// Round -> (tree index, parent) convergecast sends still owed.
    schedule: BTreeMap<u64, Vec<(u32, NodeId)>>,
    counts: Vec<u64>,
}

/// Leaf-to-root subtree counting, one wave per tree, wave x delayed by x's
/// index so the per-edge load stays one message per tree.
struct InitScores<'a> {
    collection: &'a CsSspCollection,
    h: u32,
}

impl NodeProgram for InitScores<'_> {
    type State = InitState;
    type Msg = CountMsg;

    fn init(&self, view: &NodeView) -> InitState {
        let k = self.collection.sources.len();
        let mut state = InitState {
            schedule: BTreeMap::new(),
            counts: vec![0; k],
        };
        for (ix, &x) in self.collection.sources.iter().enumerate() {
            let Some(entry) = self.collection.tree(x).entry(view.id) else {
                continue;
            };
            if entry.hops > self.h {
                continue;
            }
            if entry.hops == self.h {
                state.counts[ix] = 1;
            }
            if let Some(parent) = entry.parent {
                let round = ix as u64 + (self.h - entry.hops) as u64;
                state
                    .schedule
                    .entry(round)
                    .or_default()
                    .push((ix as u32, parent));
            }
        }
        state
    }

    fn send(&self, state: &mut InitState, round: u64, _view: &NodeView) -> Vec<(NodeId, CountMsg)> {
        let Some(due) = state.schedule.remove(&round) else {
            return Vec::new();
        };
        due.into_iter()
            .filter(|&(ix, _)| state.counts[ix as usize] > 0)
            .map(|(ix, parent)| {
                (
                    parent,
                    CountMsg {
                        tree: ix,
                        count: state.counts[ix as usize],
                    },
                )
            })
            .collect()
    }

    fn receive(&self, state: &mut InitState, _round: u64, inbox: &[(NodeId, CountMsg)], _view: &NodeView) {
        for (_, msg) in inbox {
            state.counts[msg.tree as usize] += msg.count;
        }
    }

    fn is_quiescent(&self, state: &InitState) -> bool {
        state.schedule.is_empty()
    }
}

/// Count, per node and tree, the depth-h leaves sitting below the node.
/// Every node's final count is its subtree total because children fire one
/// round before their parent.
pub fn init_scores(
    graph: &WeightedGraph,
    collection: &CsSspCollection,
    h: u32,
) -> Result<(ScoreTable, RoundMetrics), EngineError> {
    assert!(h >= 1, "blocker sets cover paths of positive length");
    let program = InitScores { collection, h };
    let config = EngineConfig::for_graph(graph);
    let (states, metrics) = run_program(graph, &program, &config)?;

    let mut scores = ScoreTable::new(graph.n() as usize);
    for (v, state) in states.iter().enumerate() {
        for (ix, &count) in state.counts.iter().enumerate() {
            scores.add(v as NodeId, self_source(collection, ix), count);
        }
    }
    Ok((scores, metrics))
}

fn self_source(collection: &CsSspCollection, ix: usize) -> NodeId {
    collection.sources[ix]
}

/// Outcome of one selection round. AllZero terminates the greedy loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selection {
    Chosen { node: NodeId, score: u64 },
    AllZero,
}

/// Global argmax of the score table, ties to the smallest id, computed as
/// a convergecast over the spanning forest followed by a winner
/// announcement. Components cannot talk to each other, so the cross-
/// component maximum is taken where the results are collected.
pub fn select_blocker(
    graph: &WeightedGraph,
    forest: &SpanningForest,
    scores: &ScoreTable,
) -> Result<(Selection, RoundMetrics), EngineError> {
    let (winners, metrics) = reduce_max_and_announce(graph, forest, scores.totals())?;
    let best = forest
        .roots()
        .iter()
        .map(|&r| winners[r as usize])
        .filter(|&(value, _)| value > 0)
        .max_by_key(|&(value, node)| (value, std::cmp::Reverse(node)));
    let selection = match best {
        Some((score, node)) => Selection::Chosen { node, score },
        None => Selection::AllZero,
    };
    Ok((selection, metrics))
}

#[derive(Clone, Debug)]
struct DeductMsg {
    tree: u32,
    amount: u64,
}

impl Payload for DeductMsg {
    fn bit_size(&self) -> u64 {
        bitlen(self.tree as u64) + bitlen(self.amount)
    }

    fn stream(&self) -> Option<u32> {
        Some(self.tree)
    }
}

#[derive(Clone, Debug, Default)]
struct AncestorState {
    outbox: VecDeque<(u32, u64, NodeId)>,
    deducted: Vec<(u32, u64)>,
}

/// c streams (tree, score_x(c)) pairs toward the roots, one per round; each
/// ancestor applies the deduction and relays until the root is reached.
struct AncestorWave<'a> {
    collection: &'a CsSspCollection,
    c: NodeId,
    entries: &'a [(u32, u64)],
}

impl AncestorWave<'_> {
    fn parent_in(&self, ix: u32, v: NodeId) -> Option<NodeId> {
        let x = self.collection.sources[ix as usize];
        self.collection.tree(x).entry(v).and_then(|e| e.parent)
    }
}

impl NodeProgram for AncestorWave<'_> {
    type State = AncestorState;
    type Msg = DeductMsg;

    fn init(&self, view: &NodeView) -> AncestorState {
        let mut state = AncestorState::default();
        if view.id == self.c {
            for &(ix, amount) in self.entries {
                if let Some(parent) = self.parent_in(ix, self.c) {
                    state.outbox.push_back((ix, amount, parent));
                }
            }
        }
        state
    }

    fn send(&self, state: &mut AncestorState, _round: u64, _view: &NodeView) -> Vec<(NodeId, DeductMsg)> {
        match state.outbox.pop_front() {
            Some((tree, amount, to)) => vec![(to, DeductMsg { tree, amount })],
            None => Vec::new(),
        }
    }

    fn receive(&self, state: &mut AncestorState, _round: u64, inbox: &[(NodeId, DeductMsg)], view: &NodeView) {
        for (_, msg) in inbox {
            state.deducted.push((msg.tree, msg.amount));
            let x = self.collection.sources[msg.tree as usize];
            if view.id != x {
                if let Some(parent) = self.parent_in(msg.tree, view.id) {
                    state.outbox.push_back((msg.tree, msg.amount, parent));
                }
            }
        }
    }

    fn is_quiescent(&self, state: &AncestorState) -> bool {
        state.outbox.is_empty()
    }
}

/// Strict ancestors of c in every tree lose c's old per-tree score. c's own
/// row is untouched; update_descendants clears it.
pub fn update_ancestors(
    graph: &WeightedGraph,
    collection: &CsSspCollection,
    c: NodeId,
    scores: &mut ScoreTable,
) -> Result<RoundMetrics, EngineError> {
    let entries: Vec<(u32, u64)> = collection
        .sources
        .iter()
        .enumerate()
        .filter_map(|(ix, &x)| {
            let amount = scores.score_x(c, x);
            (amount > 0).then_some((ix as u32, amount))
        })
        .collect();

    let program = AncestorWave {
        collection,
        c,
        entries: &entries,
    };
    let config = EngineConfig::for_graph(graph);
    let (states, metrics) = run_program(graph, &program, &config)?;

    for (v, state) in states.iter().enumerate() {
        for &(ix, amount) in &state.deducted {
            scores.sub(v as NodeId, self_source(collection, ix as usize), amount);
        }
    }
    Ok(metrics)
}

#[derive(Clone, Debug)]
struct TreeIdMsg {
    tree: u32,
}

impl Payload for TreeIdMsg {
    fn bit_size(&self) -> u64 {
        bitlen(self.tree as u64)
    }

    fn stream(&self) -> Option<u32> {
        Some(self.tree)
    }
}

#[derive(Clone, Debug, Default)]
struct DescendantState {
    /// Tree waves to relay next round.
    outbox: VecDeque<u32>,
    zeroed: Vec<u32>,
}

/// c consumes one list_c entry per round, pushing tree id x to its T_x
/// children; receivers zero their score for that tree and relay to their
/// own T_x children. Blockers already chosen neither update nor relay.
struct DescendantWave<'a> {
    collection: &'a CsSspCollection,
    c: NodeId,
    list_c: &'a [u32],
    in_q: &'a [bool],
}

impl NodeProgram for DescendantWave<'_> {
    type State = DescendantState;
    type Msg = TreeIdMsg;

    fn init(&self, view: &NodeView) -> DescendantState {
        let mut state = DescendantState::default();
        if view.id == self.c {
            // One entry leaves per round, so entry i departs in round i.
            state.outbox.extend(self.list_c.iter().copied());
        }
        state
    }

    fn send(&self, state: &mut DescendantState, _round: u64, view: &NodeView) -> Vec<(NodeId, TreeIdMsg)> {
        let Some(ix) = state.outbox.pop_front() else {
            return Vec::new();
        };
        let x = self.collection.sources[ix as usize];
        self.collection
            .tree(x)
            .children_of(view.id)
            .into_iter()
            .map(|child| (child, TreeIdMsg { tree: ix }))
            .collect()
    }

    fn receive(&self, state: &mut DescendantState, _round: u64, inbox: &[(NodeId, TreeIdMsg)], view: &NodeView) {
        if self.in_q[view.id as usize] || view.id == self.c {
            return;
        }
        for (_, msg) in inbox {
            state.zeroed.push(msg.tree);
            let x = self.collection.sources[msg.tree as usize];
            if view.id != x && !self.collection.tree(x).children_of(view.id).is_empty() {
                state.outbox.push_back(msg.tree);
            }
        }
    }

    fn is_quiescent(&self, state: &DescendantState) -> bool {
        state.outbox.is_empty()
    }
}

/// Zero the scores of c and of every descendant of c in each tree where c
/// still scored. Completes within k + h - 1 rounds: list entry i leaves c
/// in round i and descends at one hop per round.
pub fn update_descendants(
    graph: &WeightedGraph,
    collection: &CsSspCollection,
    c: NodeId,
    q_so_far: &[NodeId],
    scores: &mut ScoreTable,
) -> Result<RoundMetrics, EngineError> {
    let list_c: Vec<u32> = collection
        .sources
        .iter()
        .enumerate()
        .filter_map(|(ix, &x)| (scores.score_x(c, x) > 0).then_some(ix as u32))
        .collect();

    let mut in_q = vec![false; graph.n() as usize];
    for &v in q_so_far {
        in_q[v as usize] = true;
    }

    let program = DescendantWave {
        collection,
        c,
        list_c: &list_c,
        in_q: &in_q,
    };
    let config = EngineConfig::for_graph(graph);
    let (states, metrics) = run_program(graph, &program, &config)?;

    for &ix in &list_c {
        scores.zero(c, self_source(collection, ix as usize));
    }
    for (v, state) in states.iter().enumerate() {
        for &ix in &state.zeroed {
            scores.zero(v as NodeId, self_source(collection, ix as usize));
        }
    }
    Ok(metrics)
}

/// Greedy cover loop: pick the highest-scoring node, repair ancestors and
/// descendants, repeat until every depth-h path is hit. Phase names repeat
/// per iteration so per-iteration round costs stay visible.
pub fn compute_blocker_set(
    graph: &WeightedGraph,
    collection: &CsSspCollection,
    h: u32,
) -> Result<(BlockerSet, ScoreTable, Vec<(String, RoundMetrics)>), EngineError> {
    let (forest, mut phases) = build_spanning_forest(graph)?;
    let (set, scores, loop_phases) =
        compute_blocker_set_with_forest(graph, &forest, collection, h)?;
    phases.extend(loop_phases);
    Ok((set, scores, phases))
}

/// Same loop over a forest the caller already built (and already metered).
pub fn compute_blocker_set_with_forest(
    graph: &WeightedGraph,
    forest: &SpanningForest,
    collection: &CsSspCollection,
    h: u32,
) -> Result<(BlockerSet, ScoreTable, Vec<(String, RoundMetrics)>), EngineError> {
    let mut phases = Vec::new();
    let (mut scores, init_metrics) = init_scores(graph, collection, h)?;
    phases.push(("init-scores".to_string(), init_metrics));

    let mut q = Vec::new();
    loop {
        let (selection, metrics) = select_blocker(graph, forest, &scores)?;
        phases.push(("select".to_string(), metrics));
        let c = match selection {
            Selection::Chosen { node, .. } => node,
            Selection::AllZero => break,
        };

        let before = scores.total_sum();
        let metrics = update_ancestors(graph, collection, c, &mut scores)?;
        phases.push(("ancestors".to_string(), metrics));
        let metrics = update_descendants(graph, collection, c, &q, &mut scores)?;
        phases.push(("descendants".to_string(), metrics));
        debug_assert!(scores.total_sum() < before);

        q.push(c);
    }

    let set = BlockerSet {
        q,
        target: greedy_cover_bound(graph.n(), collection.sources.len() as u32, h),
    };
    Ok((set, scores, phases))
}

/// Reference recount: for every tree, walk each depth-h leaf's root path;
/// paths hitting `q` are covered and score nothing, every node on an
/// uncovered path scores one for that tree.
pub fn recount_scores(
    n: u32,
    collection: &CsSspCollection,
    h: u32,
    q: &[NodeId],
) -> ScoreTable {
    let mut scores = ScoreTable::new(n as usize);
    for &x in &collection.sources {
        let tree = collection.tree(x);
        for leaf in tree.nodes_at_depth(h) {
            let path = tree.path_from_root(leaf).expect("leaf is in the tree");
            if path.iter().any(|v| q.contains(v)) {
                continue;
            }
            for &v in &path {
                scores.add(v, x, 1);
            }
        }
    }
    scores
}
