//! Deterministic random graph generators.
//!
//! All generators are pure functions of the spec: one ChaCha stream seeded
//! from `seed`, consumed in a fixed documented order (topology first,
//! weights inline per accepted edge), so equal specs give bit-identical
//! graphs across runs and platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Edge, NodeId, WeightedGraph, WeightMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKind {
    /// Every ordered pair (u, v), u != v, gets a directed edge with
    /// probability p.
    Gnp,
    /// Directed chain 0 -> 1 -> ... -> n-1.
    Path,
    /// Path plus the closing edge n-1 -> 0 (when n >= 2).
    Cycle,
    /// Near-square grid, edges rightward and downward.
    Grid,
    /// ceil(sqrt(n))-wide layers; each cross-layer pair gets an edge with
    /// probability p.
    Layered,
}

#[derive(Clone, Debug)]
pub struct GeneratorSpec {
    pub kind: GraphKind,
    pub n: u32,
    pub p: f64,
    pub weight_low: i64,
    /// Maximum edge weight; the lambda of round-limit formulas.
    pub weight_high: i64,
    pub zero_fraction: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    /// Weight mode is inferred: a negative lower bound selects arbitrary
    /// mode, otherwise nonnegative.
    pub fn weight_mode(&self) -> WeightMode {
        if self.weight_low < 0 {
            WeightMode::Arbitrary
        } else {
            WeightMode::Nonnegative
        }
    }

    pub fn validate(&self) -> Result<(), GenerateError> {
        if self.n == 0 {
            return Err(GenerateError::ZeroNodes);
        }
        if !(0.0..=1.0).contains(&self.p) || !self.p.is_finite() {
            return Err(GenerateError::InvalidProbability(self.p));
        }
        if self.weight_low > self.weight_high {
            return Err(GenerateError::InvalidWeightRange {
                low: self.weight_low,
                high: self.weight_high,
            });
        }
        if !(0.0..=1.0).contains(&self.zero_fraction) || !self.zero_fraction.is_finite() {
            return Err(GenerateError::InvalidZeroFraction(self.zero_fraction));
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GenerateError {
    #[error("generator needs at least one node")]
    ZeroNodes,
    #[error("edge probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("weight range [{low}, {high}] is empty")]
    InvalidWeightRange { low: i64, high: i64 },
    #[error("zero fraction {0} outside [0, 1]")]
    InvalidZeroFraction(f64),
}

pub fn generate(spec: &GeneratorSpec) -> Result<WeightedGraph, GenerateError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n;
    let mut edges = Vec::new();
    let push = |rng: &mut ChaCha8Rng, edges: &mut Vec<Edge>, from: NodeId, to: NodeId| {
        let weight = draw_weight(rng, spec);
        edges.push(Edge { from, to, weight });
    };

    match spec.kind {
        GraphKind::Gnp => {
            for u in 0..n {
                for v in 0..n {
                    if u != v && rng.gen_bool(spec.p) {
                        push(&mut rng, &mut edges, u, v);
                    }
                }
            }
        }
        GraphKind::Path => {
            for u in 0..n.saturating_sub(1) {
                push(&mut rng, &mut edges, u, u + 1);
            }
        }
        GraphKind::Cycle => {
            for u in 0..n.saturating_sub(1) {
                push(&mut rng, &mut edges, u, u + 1);
            }
            if n >= 2 {
                push(&mut rng, &mut edges, n - 1, 0);
            }
        }
        GraphKind::Grid => {
            let rows = ((n as u64).isqrt() as u32).max(1);
            let cols = n.div_ceil(rows);
            for r in 0..rows {
                for c in 0..cols {
                    let u = r * cols + c;
                    if u >= n {
                        continue;
                    }
                    if c + 1 < cols && u + 1 < n {
                        push(&mut rng, &mut edges, u, u + 1);
                    }
                    let down = u + cols;
                    if r + 1 < rows && down < n {
                        push(&mut rng, &mut edges, u, down);
                    }
                }
            }
        }
        GraphKind::Layered => {
            let width = ((n as u64).isqrt() as u32).max(1);
            let width = if width * width < n { width + 1 } else { width };
            let layer = |u: u32| u / width;
            for u in 0..n {
                for v in 0..n {
                    if layer(v) == layer(u) + 1 && rng.gen_bool(spec.p) {
                        push(&mut rng, &mut edges, u, v);
                    }
                }
            }
        }
    }

    let g = WeightedGraph::new(n, true, spec.weight_mode(), edges)
        .expect("generated edges violate graph invariants");
    Ok(g)
}

/// zero_fraction of edges get weight 0; the rest draw uniformly from
/// [max(1, low), high] in nonnegative mode and [low, high] in arbitrary
/// mode. An empty nonnegative range (high < 1) degenerates to 0.
fn draw_weight(rng: &mut ChaCha8Rng, spec: &GeneratorSpec) -> i64 {
    if spec.zero_fraction > 0.0 && rng.gen_bool(spec.zero_fraction) {
        return 0;
    }
    match spec.weight_mode() {
        WeightMode::Nonnegative => {
            let lo = spec.weight_low.max(1);
            if lo > spec.weight_high {
                0
            } else {
                rng.gen_range(lo..=spec.weight_high)
            }
        }
        WeightMode::Arbitrary => rng.gen_range(spec.weight_low..=spec.weight_high),
    }
}
