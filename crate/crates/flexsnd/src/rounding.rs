//! Oblivious randomized rounding on capacitated trees.
//!
//! Given a tree whose capacities support a flow of at least `f` between some
//! unknown leaf sets, repeated root-to-leaf dependent sampling connects those
//! sets with constant probability while keeping every edge's inclusion
//! probability within min(1, R * y_e / f). The sampler never sees the sets,
//! so one output can be checked against every cut of interest afterwards.

use std::collections::BTreeSet;

use rand::Rng;

use crate::embed::TreeEmbedding;
use crate::graph::EdgeId;
use crate::Cap;

/// Parameters of one rounding call.
#[derive(Debug, Clone, Copy)]
pub struct RoundingParams {
    /// Flow parameter: capacities are scaled by 1/f and capped at one.
    pub f: Cap,
    /// Height of the tree being rounded.
    pub height: usize,
    /// Number of independent repetitions whose union is returned.
    pub reps: usize,
}

impl RoundingParams {
    /// Repetitions from the height/size formula: ceil(c_r * h * log2(n)),
    /// clamped to `max_reps`.
    pub fn new(f: Cap, height: usize, n: usize, c_r: f64, max_reps: usize) -> Self {
        assert!(f > 0.0, "flow parameter must be positive");
        let reps = (c_r * height.max(1) as f64 * (n.max(2) as f64).log2()).ceil() as usize;
        RoundingParams {
            f,
            height,
            reps: reps.clamp(1, max_reps),
        }
    }

    pub fn with_reps(f: Cap, height: usize, reps: usize) -> Self {
        assert!(f > 0.0 && reps >= 1);
        RoundingParams { f, height, reps }
    }
}

/// Scaled inclusion probability of a tree edge.
fn scaled(emb: &TreeEmbedding, node: usize, f: Cap) -> Cap {
    (emb.y(node) / f).min(1.0)
}

/// Sample a tree edge set obliviously: per repetition, a root edge enters
/// with probability min(1, y/f) and a deeper edge enters, given its parent
/// edge entered, with probability min(1, y_e / y_parent) after scaling.
/// The union over `params.reps` repetitions is returned as node ids.
///
/// Draws happen in a fixed top-down, id-sorted order for every edge of every
/// repetition regardless of outcomes, so identical seeds give identical
/// output and per-edge draws stay aligned across coupled runs.
pub fn tree_round<R: Rng>(
    emb: &TreeEmbedding,
    params: &RoundingParams,
    rng: &mut R,
) -> BTreeSet<usize> {
    let count = emb.node_count();
    let mut included = vec![false; count];
    let mut out = BTreeSet::new();
    for _ in 0..params.reps {
        // nodes are already BFS/id ordered: parents precede children
        for node in 1..count {
            let u: Cap = rng.gen();
            let p = emb.parent_of(node).expect("non-root");
            let yhat = scaled(emb, node, params.f);
            let prob = if p == emb.root() {
                yhat
            } else if !included[p] {
                0.0
            } else {
                let parent_hat = scaled(emb, p, params.f);
                if parent_hat <= 0.0 {
                    0.0
                } else {
                    (yhat / parent_hat).min(1.0)
                }
            };
            included[node] = u < prob;
            if included[node] {
                out.insert(node);
            }
        }
        included.iter_mut().for_each(|b| *b = false);
    }
    out
}

/// Union of the graph paths of the chosen tree edges, as graph edge ids.
pub fn map_to_graph(emb: &TreeEmbedding, chosen: &BTreeSet<usize>) -> BTreeSet<EdgeId> {
    let mut out = BTreeSet::new();
    for &node in chosen {
        out.extend(emb.path(node).iter().copied());
    }
    out
}

/// True iff `chosen` minus `forbidden` contains a tree path from some leaf of
/// `a` to some leaf of `b` (vertex sets).
pub fn connects(
    emb: &TreeEmbedding,
    chosen: &BTreeSet<usize>,
    a: &BTreeSet<usize>,
    b: &BTreeSet<usize>,
    forbidden: &BTreeSet<usize>,
) -> bool {
    assert!(a.is_disjoint(b), "leaf sets overlap");
    // union-find over tree nodes joined by usable edges
    let count = emb.node_count();
    let mut uf: Vec<usize> = (0..count).collect();
    fn find(uf: &mut Vec<usize>, mut x: usize) -> usize {
        while uf[x] != x {
            uf[x] = uf[uf[x]];
            x = uf[x];
        }
        x
    }
    for &node in chosen {
        if forbidden.contains(&node) {
            continue;
        }
        let p = emb.parent_of(node).expect("non-root");
        let (ra, rb) = (find(&mut uf, node), find(&mut uf, p));
        uf[ra] = rb;
    }
    let roots_a: BTreeSet<usize> = a.iter().map(|&v| find(&mut uf, emb.leaf_of(v))).collect();
    b.iter()
        .any(|&v| roots_a.contains(&find(&mut uf, emb.leaf_of(v))))
}
