//! Brute-force ground truth for small instances: exact optima by
//! branch-and-bound over edge subsets, violated-cut detection by full cut
//! enumeration, and exhaustive violating-set extraction. These are the
//! reference answers the fast paths are tested against.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::graph::{Cut, EdgeId, FlexGraph};
use crate::lp::FractionalSolution;
use crate::verify::{is_flex_connected, is_violated_cut};
use crate::{Cap, EPS_SEP};

/// Default cap on the subset-enumeration width (2^22 leaves).
pub const SUBSET_GUARD: usize = 22;
/// Default cap on the all-cuts enumeration (2^13 bipartitions).
pub const CUT_GUARD: usize = 14;

/// Minimum-cost subset of `candidates` (decided in the given order) whose
/// union with `base` satisfies `feasible`. The candidate order only affects
/// speed; ties in cost resolve to the lexicographically smallest id set.
///
/// `feasible` must be monotone: adding edges never breaks it. That invariant
/// drives the pruning: a branch dies as soon as its full remainder fails.
fn min_cost_subset<F>(
    g: &FlexGraph,
    base: &BTreeSet<EdgeId>,
    candidates: &[EdgeId],
    feasible: &mut F,
) -> Option<(BTreeSet<EdgeId>, Cap)>
where
    F: FnMut(&BTreeSet<EdgeId>) -> bool,
{
    // suffix[i] = candidates[i..] as a set, for the monotone completion check
    let m = candidates.len();
    let mut suffix: Vec<BTreeSet<EdgeId>> = vec![BTreeSet::new(); m + 1];
    for i in (0..m).rev() {
        suffix[i] = suffix[i + 1].clone();
        suffix[i].insert(candidates[i]);
    }
    {
        let full: BTreeSet<EdgeId> = base.union(&suffix[0]).copied().collect();
        if !feasible(&full) {
            return None;
        }
    }

    struct State<'a, F> {
        g: &'a FlexGraph,
        base: &'a BTreeSet<EdgeId>,
        candidates: &'a [EdgeId],
        suffix: &'a [BTreeSet<EdgeId>],
        feasible: &'a mut F,
        best: Option<(BTreeSet<EdgeId>, Cap)>,
        memo: HashMap<u64, bool>,
    }

    fn mask_of(candidates: &[EdgeId], chosen: &BTreeSet<EdgeId>, upto: usize) -> u64 {
        let mut m = 0u64;
        for (i, id) in candidates.iter().enumerate().take(upto) {
            if chosen.contains(id) {
                m |= 1 << i;
            }
        }
        m | ((upto as u64) << 48)
    }

    fn rec<F: FnMut(&BTreeSet<EdgeId>) -> bool>(
        st: &mut State<'_, F>,
        idx: usize,
        chosen: &mut BTreeSet<EdgeId>,
        cost: Cap,
    ) {
        if let Some((best_set, best_cost)) = &st.best {
            if cost > best_cost + 1e-9 {
                return;
            }
            if idx == st.candidates.len() && cost >= best_cost - 1e-9 {
                // equal cost: keep the lexicographically smaller id set
                if chosen.iter().ge(best_set.iter()) {
                    return;
                }
            }
        }
        if idx == st.candidates.len() {
            st.best = Some((chosen.clone(), cost));
            return;
        }
        let id = st.candidates[idx];
        // include branch keeps the completion invariant for free
        chosen.insert(id);
        rec(st, idx + 1, chosen, cost + st.g.edge(id).cost);
        chosen.remove(&id);
        // exclude branch: the remainder must still complete feasibly
        let key = mask_of(st.candidates, chosen, idx) | (1 << 63);
        let ok = if let Some(&v) = st.memo.get(&key) {
            v
        } else {
            let mut trial: BTreeSet<EdgeId> = st.base.union(chosen).copied().collect();
            trial.extend(st.suffix[idx + 1].iter().copied());
            let v = (st.feasible)(&trial);
            st.memo.insert(key, v);
            v
        };
        if ok {
            rec(st, idx + 1, chosen, cost);
        }
    }

    let mut st = State {
        g,
        base,
        candidates,
        suffix: &suffix,
        feasible,
        best: None,
        memo: HashMap::new(),
    };
    let mut chosen = BTreeSet::new();
    rec(&mut st, 0, &mut chosen, 0.0);
    st.best
}

/// Exact minimum-cost flex-connected subgraph.
pub fn brute_force_optimum(
    g: &FlexGraph,
    p: u32,
    q: u32,
    guard: usize,
) -> Result<(BTreeSet<EdgeId>, Cap)> {
    if g.m() > guard {
        return Err(Error::GuardExceeded {
            what: "optimum subset enumeration".into(),
            needed: g.m() as u128,
            limit: guard as u128,
        });
    }
    let mut ids: Vec<EdgeId> = g.edge_ids().collect();
    ids.sort_by(|a, b| {
        g.edge(*b)
            .cost
            .partial_cmp(&g.edge(*a).cost)
            .unwrap()
            .then(a.cmp(b))
    });
    let base = BTreeSet::new();
    let mut feasible = |h: &BTreeSet<EdgeId>| is_flex_connected(g, h, p, q).0;
    match min_cost_subset(g, &base, &ids, &mut feasible) {
        Some(result) => Ok(result),
        None => {
            let (_, witness) = is_flex_connected(g, &g.all_ids(), p, q);
            Err(Error::Infeasible(witness.expect("witness on failure")))
        }
    }
}

/// Exact minimum-cost augmentation taking `h` from stage l to stage l+1.
pub fn brute_force_augmentation(
    g: &FlexGraph,
    h: &BTreeSet<EdgeId>,
    p: u32,
    l: u32,
    guard: usize,
) -> Result<(BTreeSet<EdgeId>, Cap)> {
    let mut candidates: Vec<EdgeId> = g.edge_ids().filter(|id| !h.contains(id)).collect();
    if candidates.len() > guard {
        return Err(Error::GuardExceeded {
            what: "augmentation subset enumeration".into(),
            needed: candidates.len() as u128,
            limit: guard as u128,
        });
    }
    candidates.sort_by(|a, b| {
        g.edge(*b)
            .cost
            .partial_cmp(&g.edge(*a).cost)
            .unwrap()
            .then(a.cmp(b))
    });
    let mut feasible = |s: &BTreeSet<EdgeId>| is_flex_connected(g, s, p, l + 1).0;
    match min_cost_subset(g, h, &candidates, &mut feasible) {
        Some(result) => Ok(result),
        None => {
            let (_, witness) = is_flex_connected(g, &g.all_ids(), p, l + 1);
            Err(Error::Infeasible(witness.expect("witness on failure")))
        }
    }
}

fn cut_from_mask(g: &FlexGraph, mask: u32) -> Cut {
    // vertex 0 stays outside; the mask picks the cut side among 1..n
    let side: BTreeSet<usize> = (1..g.n()).filter(|v| mask >> (v - 1) & 1 == 1).collect();
    Cut::new(side, g.n()).expect("mask nonzero and below 2^(n-1)")
}

/// Scan all bipartitions for a violated cut whose candidate coverage under `x`
/// is below 1 - EPS_SEP. Returns the first hit in mask order.
pub fn brute_force_separation(
    x: &FractionalSolution,
    g: &FlexGraph,
    h: &BTreeSet<EdgeId>,
    p: u32,
    l: u32,
) -> Result<Option<Cut>> {
    if g.n() > CUT_GUARD {
        return Err(Error::GuardExceeded {
            what: "cut enumeration".into(),
            needed: g.n() as u128,
            limit: CUT_GUARD as u128,
        });
    }
    let candidates: BTreeSet<EdgeId> = g.edge_ids().filter(|id| !h.contains(id)).collect();
    for mask in 1u32..(1 << (g.n() - 1)) {
        let cut = cut_from_mask(g, mask);
        if !is_violated_cut(g, h, p, l, &cut) {
            continue;
        }
        let coverage = x.coverage(&cut.boundary(g, &candidates));
        if coverage < 1.0 - EPS_SEP {
            return Ok(Some(cut));
        }
    }
    Ok(None)
}

/// All violated cuts of `h` at stage l, grouped by their boundary edge set F
/// (first witness cut per F, in mask order).
pub fn brute_force_violated_structure(
    g: &FlexGraph,
    h: &BTreeSet<EdgeId>,
    p: u32,
    l: u32,
) -> Result<Vec<(BTreeSet<EdgeId>, Cut)>> {
    if g.n() > CUT_GUARD {
        return Err(Error::GuardExceeded {
            what: "cut enumeration".into(),
            needed: g.n() as u128,
            limit: CUT_GUARD as u128,
        });
    }
    let mut out: Vec<(BTreeSet<EdgeId>, Cut)> = Vec::new();
    let mut seen: BTreeSet<BTreeSet<EdgeId>> = BTreeSet::new();
    for mask in 1u32..(1 << (g.n() - 1)) {
        let cut = cut_from_mask(g, mask);
        if is_violated_cut(g, h, p, l, &cut) {
            let f: BTreeSet<EdgeId> = cut.boundary(g, h).into_iter().collect();
            if seen.insert(f.clone()) {
                out.push((f, cut));
            }
        }
    }
    Ok(out)
}
