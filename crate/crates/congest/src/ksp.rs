//! k-source shortest paths, end to end: truncated tree collection, blocker
//! set over it, one exact tree per blocker, a broadcast of the blockers'
//! truncated distances, and a purely local combination step at every node.

use std::collections::BTreeMap;

use crate::blocker::{compute_blocker_set_with_forest, BlockerSet};
use crate::csssp::{build_csssp, CssspMethod};
use crate::engine::{Payload, PhasedMetrics};
use crate::graph::{NodeId, WeightedGraph};
use crate::num::{bitlen, bitlen_signed};
use crate::oracle::Dist;
use crate::short_range::{self, SsspError, NO_CAP};
use crate::spanning::{build_spanning_forest, flood_items};

/// How the hop parameter is picked for a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HopRule {
    /// Fixed by hand; still clamped into [1, n-1].
    Explicit(u32),
    /// h = n * (log2 n)^(1/2) / (lambda * k)^(1/4), balancing the truncated
    /// phase against the per-blocker work when only the largest edge weight
    /// is known.
    WeightBalanced,
    /// h = n^(4/3) * (log2 n)^(2/3) / (2 * k * cap)^(1/3), the sharper
    /// balance available once distances are capped.
    CapBalanced,
}

/// Evaluate `rule` and clamp the result into [1, n-1]. Zeroes in the
/// divisor positions are lifted to one so the formulas stay total; the
/// caller owns supplying meaningful values.
pub fn choose_h(n: u32, k: u32, delta_cap: u64, lambda: u64, rule: HopRule) -> u32 {
    let hi = n.saturating_sub(1).max(1);
    let raw = match rule {
        HopRule::Explicit(h) => return h.clamp(1, hi),
        HopRule::WeightBalanced => {
            let nf = f64::from(n);
            let lk = lambda.max(1) as f64 * f64::from(k.max(1));
            nf * nf.log2().max(0.0).sqrt() / lk.powf(0.25)
        }
        HopRule::CapBalanced => {
            let nf = f64::from(n);
            let kd = 2.0 * f64::from(k.max(1)) * delta_cap.max(1) as f64;
            nf.powf(4.0 / 3.0) * nf.log2().max(0.0).powf(2.0 / 3.0) / kd.cbrt()
        }
    };
    // Float-to-int casts saturate, so an overflowing formula lands on the
    // clamp rather than wrapping.
    (raw.ceil() as u32).clamp(1, hi)
}

#[derive(Clone, Debug)]
pub struct KspConfig {
    pub sources: Vec<NodeId>,
    pub rule: HopRule,
    /// Distance cap handed to the truncated construction; [`NO_CAP`]
    /// disables pruning.
    pub delta_cap: i64,
    pub method: CssspMethod,
}

impl KspConfig {
    pub fn new(sources: Vec<NodeId>, h: u32) -> Self {
        KspConfig {
            sources,
            rule: HopRule::Explicit(h),
            delta_cap: NO_CAP,
            method: CssspMethod::Pipelined,
        }
    }

    pub fn with_rule(mut self, rule: HopRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_cap(mut self, delta_cap: i64) -> Self {
        self.delta_cap = delta_cap;
        self
    }

    pub fn with_method(mut self, method: CssspMethod) -> Self {
        self.method = method;
        self
    }
}

/// One blocker's broadcast, as a node in its component hears it: the
/// blocker's identity, the node's own distance from it, and the truncated
/// distances from every source that reaches the blocker within h hops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CenterView {
    pub center: NodeId,
    pub dist_to_v: Dist,
    pub entries: Vec<(NodeId, i64)>,
}

/// The local step at one node. `own` maps each source x to the node's
/// truncated-tree distance when the node sits within h hops of x. Returns
/// min(own, min over centers of entry(x) + dist_to_v) per source, which
/// never undershoots the true distance and never exceeds the truncated one.
pub fn local_combine(
    sources: &[NodeId],
    own: &BTreeMap<NodeId, i64>,
    centers: &[CenterView],
) -> BTreeMap<NodeId, Dist> {
    let mut out = BTreeMap::new();
    for &x in sources {
        let mut best = own
            .get(&x)
            .copied()
            .map_or(Dist::Unreachable, Dist::Finite);
        for cv in centers {
            let Dist::Finite(cd) = cv.dist_to_v else {
                continue;
            };
            for &(ex, ed) in &cv.entries {
                if ex != x {
                    continue;
                }
                let cand = ed.saturating_add(cd);
                if !matches!(best, Dist::Finite(b) if b <= cand) {
                    best = Dist::Finite(cand);
                }
            }
        }
        out.insert(x, best);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum CenterItem {
    /// The blocker's identity opens its broadcast.
    Center(NodeId),
    /// One source's truncated distance to the blocker.
    Entry(NodeId, i64),
}

impl Payload for CenterItem {
    fn bit_size(&self) -> u64 {
        match *self {
            CenterItem::Center(c) => 1 + bitlen(u64::from(c)),
            CenterItem::Entry(x, d) => 1 + bitlen(u64::from(x)) + bitlen_signed(d),
        }
    }
}

#[derive(Debug)]
pub struct KspOutput {
    pub sources: Vec<NodeId>,
    /// The hop parameter actually used after rule evaluation.
    pub h: u32,
    /// Exact distance row per source, indexed by target.
    pub rows: BTreeMap<NodeId, Vec<Dist>>,
    pub blocker: BlockerSet,
    pub metrics: PhasedMetrics,
}

impl KspOutput {
    pub fn row(&self, source: NodeId) -> &[Dist] {
        &self.rows[&source]
    }
}

/// Truncated trees for the sources, a blocker set covering every h-hop
/// path, an exact tree grown from each blocker in sequence, blocker
/// broadcasts over the spanning forest, then the local combination.
/// Nonnegative weights only: the per-blocker trees stop at n-1 hops.
pub fn run_ksp(graph: &WeightedGraph, config: &KspConfig) -> Result<KspOutput, SsspError> {
    let n = graph.n();
    let k = config.sources.len() as u32;
    let lambda = graph.max_abs_weight();
    let cap_for_rule = if config.delta_cap == NO_CAP {
        // No cap supplied: n * lambda bounds every simple-path distance.
        u64::from(n).saturating_mul(lambda)
    } else {
        config.delta_cap.max(0) as u64
    };
    let h = choose_h(n, k, cap_for_rule, lambda, config.rule);

    let (collection, mut metrics) =
        build_csssp(graph, &config.sources, h, config.delta_cap, config.method)?;
    let (forest, forest_phases) = build_spanning_forest(graph)?;
    for (name, m) in forest_phases {
        metrics.push(name, m);
    }
    let (blocker, _, loop_phases) =
        compute_blocker_set_with_forest(graph, &forest, &collection, h)?;
    for (name, m) in loop_phases {
        metrics.push(name, m);
    }

    // One exact tree per blocker, in sequence. n-1 hops suffice without
    // negative weights.
    let mut center_rows: BTreeMap<NodeId, Vec<Dist>> = BTreeMap::new();
    for &c in &blocker.q {
        let outcome = short_range::distributed_bellman_ford(graph, &[c], n - 1, NO_CAP)?;
        metrics.push(format!("blocker-sssp-{c}"), outcome.metrics.clone());
        center_rows.insert(c, outcome.dist_row(c));
    }

    // Each blocker floods its identity and its truncated distances from
    // every source whose tree holds it, pipelined over the forest.
    let mut center_heard: BTreeMap<NodeId, Vec<Vec<(NodeId, i64)>>> = BTreeMap::new();
    for &c in &blocker.q {
        let mut items = vec![CenterItem::Center(c)];
        for &x in &config.sources {
            if let Some(entry) = collection.tree(x).entry(c) {
                items.push(CenterItem::Entry(x, entry.dist));
            }
        }
        let (received, m) = flood_items(graph, &forest, c, &items)?;
        metrics.push(format!("broadcast-{c}"), m);
        let heard = received
            .into_iter()
            .map(|items| {
                let mut entries = Vec::new();
                for item in items {
                    match item {
                        CenterItem::Center(id) => debug_assert_eq!(id, c),
                        CenterItem::Entry(x, d) => entries.push((x, d)),
                    }
                }
                entries
            })
            .collect();
        center_heard.insert(c, heard);
    }

    let mut rows: BTreeMap<NodeId, Vec<Dist>> = config
        .sources
        .iter()
        .map(|&x| (x, vec![Dist::Unreachable; n as usize]))
        .collect();
    for v in graph.node_ids() {
        let own: BTreeMap<NodeId, i64> = config
            .sources
            .iter()
            .filter_map(|&x| collection.tree(x).entry(v).map(|e| (x, e.dist)))
            .collect();
        let centers: Vec<CenterView> = blocker
            .q
            .iter()
            .map(|&c| CenterView {
                center: c,
                dist_to_v: center_rows[&c][v as usize],
                entries: center_heard[&c][v as usize].clone(),
            })
            .collect();
        for (x, d) in local_combine(&config.sources, &own, &centers) {
            rows.get_mut(&x).expect("combine stays on the sources")[v as usize] = d;
        }
    }

    Ok(KspOutput {
        sources: config.sources.clone(),
        h,
        rows,
        blocker,
        metrics,
    })
}
