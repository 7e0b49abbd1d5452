//! Randomized all-pairs shortest paths for arbitrary weights: a truncated
//! relaxation phase from the sources and a random center set, center row
//! broadcasts, then a local overlay closure stitches long paths together
//! from short segments. Exact whenever every shortest path breaks into
//! center-to-center pieces of at most h hops, which the center count makes
//! overwhelmingly likely.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::engine::{EngineError, Payload, PhasedMetrics};
use crate::graph::{NodeId, WeightedGraph};
use crate::num::{bitlen, bitlen_signed};
use crate::oracle::Dist;
use crate::short_range::{distributed_bellman_ford, SsspError, NO_CAP};
use crate::spanning::{build_spanning_forest, flood_items};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CenterSet {
    /// Sampled without replacement, sorted; exactly min(q, n) of them.
    pub centers: Vec<NodeId>,
    /// The target count before clamping to the node count.
    pub q: u32,
    pub seed: u64,
}

/// q = ceil(n^(1/3) * k^(1/3) * ln n), at least one; the draw keeps
/// min(q, n) distinct nodes and is deterministic in the seed.
pub fn sample_centers(n: u32, k: u32, seed: u64) -> CenterSet {
    let raw = f64::from(n).cbrt() * f64::from(k).cbrt() * f64::from(n).ln();
    let q = (raw.ceil() as u32).max(1);
    let take = q.min(n) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<NodeId> = rand::seq::index::sample(&mut rng, n as usize, take)
        .into_iter()
        .map(|i| i as NodeId)
        .collect();
    centers.sort_unstable();
    CenterSet { centers, q, seed }
}

#[derive(Debug, Error)]
pub enum RandApspError {
    #[error("negative cycle reachable from the sources or centers")]
    NegativeCycle,
    #[error(transparent)]
    Sssp(SsspError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum RowItem {
    /// Opens a center's broadcast.
    Center(NodeId),
    /// One stream's truncated distance to the broadcasting center.
    Entry(NodeId, i64),
}

impl Payload for RowItem {
    fn bit_size(&self) -> u64 {
        match *self {
            RowItem::Center(c) => 1 + bitlen(u64::from(c)),
            RowItem::Entry(s, d) => 1 + bitlen(u64::from(s)) + bitlen_signed(d),
        }
    }
}

#[derive(Debug)]
pub struct RandApspOutput {
    pub sources: Vec<NodeId>,
    pub centers: CenterSet,
    /// Hop budget of the truncated phase: ceil(n^(2/3) / k^(1/3)).
    pub h: u32,
    pub rows: BTreeMap<NodeId, Vec<Dist>>,
    pub metrics: PhasedMetrics,
}

impl RandApspOutput {
    pub fn row(&self, source: NodeId) -> &[Dist] {
        &self.rows[&source]
    }
}

fn min_dist(a: Dist, b: Dist) -> Dist {
    match (a, b) {
        (Dist::Finite(x), Dist::Finite(y)) => Dist::Finite(x.min(y)),
        (Dist::Finite(_), Dist::Unreachable) => a,
        _ => b,
    }
}

fn add(a: Dist, w: i64) -> Dist {
    match a {
        Dist::Finite(x) => Dist::Finite(x.saturating_add(w)),
        Dist::Unreachable => Dist::Unreachable,
    }
}

/// Truncated relaxation from sources and centers, center row broadcasts
/// over the spanning forest, then the purely local combination
/// min(delta_h(x,v), min over center pairs of delta_h(x,c1) + D(c1,c2) +
/// delta_h(c2,v)) with D the min-plus closure of the center overlay.
/// Estimates never undershoot true distances; a negative diagonal in the
/// closure or in a final self distance reports a negative cycle.
pub fn run_randomized_apsp(
    graph: &WeightedGraph,
    sources: &[NodeId],
    seed: u64,
) -> Result<RandApspOutput, RandApspError> {
    let n = graph.n();
    let k = sources.len().max(1) as u32;
    let center_set = sample_centers(n, k, seed);
    let h = (f64::from(n).powf(2.0 / 3.0) / f64::from(k).cbrt()).ceil() as u32;
    let h = h.clamp(1, n.max(1));

    let mut streams: Vec<NodeId> = sources.to_vec();
    streams.extend_from_slice(&center_set.centers);
    streams.sort_unstable();
    streams.dedup();

    let outcome =
        distributed_bellman_ford(graph, &streams, h, NO_CAP).map_err(|e| match e {
            SsspError::NegativeCycle => RandApspError::NegativeCycle,
            other => RandApspError::Sssp(other),
        })?;
    let mut metrics = PhasedMetrics::default();
    metrics.push("truncated-bf", outcome.metrics.clone());

    let (forest, forest_phases) = build_spanning_forest(graph)?;
    for (name, m) in forest_phases {
        metrics.push(name, m);
    }

    // Each center floods its own label row. Every node of its component
    // hears exactly these items; reading them back from the origin's copy
    // spares the simulation a per-node decode of identical data.
    let mut heard: BTreeMap<NodeId, BTreeMap<NodeId, i64>> = BTreeMap::new();
    for &c in &center_set.centers {
        let mut items = vec![RowItem::Center(c)];
        for &s in &streams {
            if let Some((dist, _, _)) = outcome.label(s, c) {
                items.push(RowItem::Entry(s, dist));
            }
        }
        let (_, m) = flood_items(graph, &forest, c, &items)?;
        metrics.push(format!("center-broadcast-{c}"), m);
        let row = items
            .into_iter()
            .filter_map(|item| match item {
                RowItem::Center(_) => None,
                RowItem::Entry(s, d) => Some((s, d)),
            })
            .collect();
        heard.insert(c, row);
    }

    // Min-plus closure of the center-to-center overlay. Every node owns the
    // same broadcast data, so the closure is one shared computation.
    let q = center_set.centers.len();
    let mut overlay = vec![vec![Dist::Unreachable; q]; q];
    for (i, &c1) in center_set.centers.iter().enumerate() {
        for (j, &c2) in center_set.centers.iter().enumerate() {
            if let Some(&d) = heard[&c2].get(&c1) {
                overlay[i][j] = Dist::Finite(d);
            }
        }
    }
    for m in 0..q {
        for i in 0..q {
            let Dist::Finite(im) = overlay[i][m] else {
                continue;
            };
            for j in 0..q {
                let via = add(overlay[m][j], im);
                overlay[i][j] = min_dist(overlay[i][j], via);
            }
        }
    }
    for (i, row) in overlay.iter().enumerate() {
        if matches!(row[i], Dist::Finite(d) if d < 0) {
            return Err(RandApspError::NegativeCycle);
        }
    }

    // best[x][j]: cheapest way from x into center j through the overlay.
    let mut best: BTreeMap<NodeId, Vec<Dist>> = BTreeMap::new();
    for &x in sources {
        let mut row = vec![Dist::Unreachable; q];
        for (i, &c1) in center_set.centers.iter().enumerate() {
            let Some(&xc) = heard[&c1].get(&x) else {
                continue;
            };
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = min_dist(*slot, add(overlay[i][j], xc));
            }
        }
        best.insert(x, row);
    }

    let mut rows: BTreeMap<NodeId, Vec<Dist>> = BTreeMap::new();
    for &x in sources {
        let mut row = Vec::with_capacity(n as usize);
        for v in graph.node_ids() {
            let mut est = outcome.dist(x, v);
            for (j, &c2) in center_set.centers.iter().enumerate() {
                if let (Dist::Finite(through), Dist::Finite(tail)) =
                    (best[&x][j], outcome.dist(c2, v))
                {
                    est = min_dist(est, Dist::Finite(through.saturating_add(tail)));
                }
            }
            row.push(est);
        }
        if matches!(row[x as usize], Dist::Finite(d) if d < 0) {
            return Err(RandApspError::NegativeCycle);
        }
        rows.insert(x, row);
    }

    Ok(RandApspOutput {
        sources: sources.to_vec(),
        centers: center_set,
        h,
        rows,
        metrics,
    })
}
