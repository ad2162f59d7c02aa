//! Exact decision procedures for flex-connectivity.
//!
//! A terminal pair is (p, q)-flex-connected in an edge set H when it stays
//! p-edge-connected after deleting any subset of at most q unsafe edges of H.
//! Verification enumerates the unsafe subsets directly, so it is exponential
//! in q but exact; at the instance sizes this library targets that is cheap.

use std::collections::BTreeSet;

use crate::error::{Error, InfeasibilityWitness, Result};
use crate::graph::{st_connectivity_cut, Cut, EdgeId, FlexGraph};

/// Set F of p+l solution edges that is the boundary of some violated cut at
/// stage l, together with one witness cut and a separated pair index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolatingEdgeSet {
    pub edges: BTreeSet<EdgeId>,
    pub witness: Cut,
    pub pair: usize,
    pub stage: u32,
}

/// Subset combinations in lexicographic order over a sorted slice.
fn for_each_subset<T: Copy, F: FnMut(&[T]) -> bool>(items: &[T], k: usize, f: &mut F) -> bool {
    fn rec<T: Copy, F: FnMut(&[T]) -> bool>(
        items: &[T],
        k: usize,
        start: usize,
        buf: &mut Vec<T>,
        f: &mut F,
    ) -> bool {
        if buf.len() == k {
            return f(buf);
        }
        let remaining = k - buf.len();
        let mut i = start;
        while i + remaining <= items.len() {
            buf.push(items[i]);
            if rec(items, k, i + 1, buf, f) {
                buf.pop();
                return true;
            }
            buf.pop();
            i += 1;
        }
        false
    }
    rec(items, k, 0, &mut Vec::with_capacity(k), f)
}

/// Decide whether every terminal pair is (p, q)-flex-connected in `h`.
/// On failure the lexicographically first witness (by deletion-set size,
/// then edge ids, then pair index) is returned.
pub fn is_flex_connected(
    g: &FlexGraph,
    h: &BTreeSet<EdgeId>,
    p: u32,
    q: u32,
) -> (bool, Option<InfeasibilityWitness>) {
    let unsafe_ids = g.unsafe_ids_in(h);
    let mut witness = None;
    for size in 0..=(q as usize).min(unsafe_ids.len()) {
        let found = for_each_subset(&unsafe_ids, size, &mut |b: &[EdgeId]| {
            let removed: BTreeSet<EdgeId> = b.iter().copied().collect();
            let live: BTreeSet<EdgeId> = h.difference(&removed).copied().collect();
            for (i, &(s, t)) in g.pairs().iter().enumerate() {
                let (conn, cut) = st_connectivity_cut(g, &live, s, t);
                if conn < p {
                    witness = Some(InfeasibilityWitness {
                        removed: b.to_vec(),
                        pair: i,
                        cut_side: cut.side().iter().copied().collect(),
                        crossing: conn as usize,
                    });
                    return true;
                }
            }
            false
        });
        if found {
            return (false, witness);
        }
    }
    (true, None)
}

/// Check the (p, l)-flex precondition, converting a witness into an error.
fn require_flex(g: &FlexGraph, h: &BTreeSet<EdgeId>, p: u32, l: u32) -> Result<()> {
    let (ok, witness) = is_flex_connected(g, h, p, l);
    if ok {
        Ok(())
    } else {
        Err(Error::Infeasible(witness.expect("witness on failure")))
    }
}

/// Is `cut` violated for `h` at stage `l`: it separates some pair, has exactly
/// p+l boundary edges in `h`, and at most p-1 of them are safe.
pub fn is_violated_cut(
    g: &FlexGraph,
    h: &BTreeSet<EdgeId>,
    p: u32,
    l: u32,
    cut: &Cut,
) -> bool {
    if cut.separated_pairs(g).is_empty() {
        return false;
    }
    let boundary = cut.boundary(g, h);
    if boundary.len() != (p + l) as usize {
        return false;
    }
    let safe = boundary.iter().filter(|id| g.edge(**id).safe).count();
    safe <= (p as usize).saturating_sub(1)
}

/// Find a violated cut of `h` at stage `l`, or `None` when `h` is already
/// (p, l+1)-flex-connected.
///
/// Searches all deletion sets B of exactly l+1 unsafe edges: under the
/// precondition every pair keeps p-1 connectivity after deleting B, and a
/// min cut that meets p-1 exactly is the boundary of a violated cut.
pub fn find_violated_cut(
    g: &FlexGraph,
    h: &BTreeSet<EdgeId>,
    p: u32,
    l: u32,
    check_precondition: bool,
) -> Result<Option<Cut>> {
    if check_precondition {
        require_flex(g, h, p, l)?;
    }
    let unsafe_ids = g.unsafe_ids_in(h);
    let k = (l + 1) as usize;
    if unsafe_ids.len() < k {
        return Ok(None);
    }
    let mut hit: Option<Cut> = None;
    for_each_subset(&unsafe_ids, k, &mut |b: &[EdgeId]| {
        let removed: BTreeSet<EdgeId> = b.iter().copied().collect();
        let live: BTreeSet<EdgeId> = h.difference(&removed).copied().collect();
        for &(s, t) in g.pairs() {
            let (conn, cut) = st_connectivity_cut(g, &live, s, t);
            if conn + 1 == p {
                debug_assert!(is_violated_cut(g, h, p, l, &cut));
                hit = Some(cut);
                return true;
            }
            debug_assert!(conn >= p - 1, "precondition violated: connectivity {conn}");
        }
        false
    });
    Ok(hit)
}

/// Enumerate every distinct violating edge set of `h` at stage `l`.
///
/// Walks all (p+l)-subsets F of `h` with at most p-1 safe edges and decides
/// whether F is the exact boundary of some pair-separating cut: the components
/// of H \ F must 2-color so that every F edge is bichromatic, with some pair
/// split. Intended for small H; `cap` guards the binomial blowup.
pub fn enumerate_violating_sets(
    g: &FlexGraph,
    h: &BTreeSet<EdgeId>,
    p: u32,
    l: u32,
    cap: u128,
) -> Result<Vec<ViolatingEdgeSet>> {
    require_flex(g, h, p, l)?;
    let k = (p + l) as usize;
    let need = binomial(h.len() as u128, k as u128);
    if need > cap {
        return Err(Error::GuardExceeded {
            what: format!("violating-set enumeration over |H|={} choose {}", h.len(), k),
            needed: need,
            limit: cap,
        });
    }
    let ids: Vec<EdgeId> = h.iter().copied().collect();
    let max_safe = (p as usize).saturating_sub(1);
    let mut out = Vec::new();
    for_each_subset(&ids, k, &mut |f: &[EdgeId]| {
        let safe = f.iter().filter(|id| g.edge(**id).safe).count();
        if safe <= max_safe {
            let fset: BTreeSet<EdgeId> = f.iter().copied().collect();
            if let Some((cut, pair)) = witness_cut_for(g, h, &fset) {
                out.push(ViolatingEdgeSet {
                    edges: fset,
                    witness: cut,
                    pair,
                    stage: l,
                });
            }
        }
        false
    });
    Ok(out)
}

/// If F is the exact h-boundary of some pair-separating cut, return one such
/// cut and a separated pair index.
fn witness_cut_for(
    g: &FlexGraph,
    h: &BTreeSet<EdgeId>,
    f: &BTreeSet<EdgeId>,
) -> Option<(Cut, usize)> {
    let live: BTreeSet<EdgeId> = h.difference(f).copied().collect();
    let comp = components(g, &live);
    let ncomp = 1 + *comp.iter().max().unwrap_or(&0);

    // Components joined by F edges must 2-color with every F edge bichromatic.
    // color[c]: 0/1 within its forced group; group[c] identifies the forced group.
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
    for id in f {
        let e = g.edge(*id);
        let (cu, cv) = (comp[e.u], comp[e.v]);
        if cu == cv {
            return None; // an F edge inside a component can never cross
        }
        adj[cu].push(cv);
        adj[cv].push(cu);
    }
    let mut color = vec![usize::MAX; ncomp];
    let mut group = vec![usize::MAX; ncomp];
    let mut gcount = 0usize;
    for start in 0..ncomp {
        if color[start] != usize::MAX {
            continue;
        }
        color[start] = 0;
        group[start] = gcount;
        let mut stack = vec![start];
        while let Some(c) = stack.pop() {
            for i in 0..adj[c].len() {
                let d = adj[c][i];
                if color[d] == usize::MAX {
                    color[d] = color[c] ^ 1;
                    group[d] = gcount;
                    stack.push(d);
                } else if color[d] == color[c] {
                    return None; // odd cycle: no consistent bipartition
                }
            }
        }
        gcount += 1;
    }

    // Need some pair whose endpoint components can land on opposite sides.
    for (i, &(s, t)) in g.pairs().iter().enumerate() {
        let (cs, ct) = (comp[s], comp[t]);
        if cs == ct {
            continue;
        }
        let flip = if group[cs] == group[ct] {
            if color[cs] == color[ct] {
                continue; // forced to the same side within their group
            }
            vec![false; gcount]
        } else {
            // flip t's group if needed so the pair lands on opposite sides
            let mut flip = vec![false; gcount];
            flip[group[ct]] = color[ct] == color[cs];
            flip
        };
        let side: BTreeSet<usize> = (0..g.n())
            .filter(|&v| {
                let c = comp[v];
                (color[c] ^ usize::from(flip[group[c]])) == color[cs]
            })
            .collect();
        let cut = Cut::new(side, g.n()).expect("proper cut: s and t split");
        debug_assert_eq!(
            cut.boundary(g, h).into_iter().collect::<BTreeSet<_>>(),
            *f
        );
        return Some((cut, i));
    }
    None
}

/// Connected components of the subgraph `live`, as a vertex -> component map.
fn components(g: &FlexGraph, live: &BTreeSet<EdgeId>) -> Vec<usize> {
    let mut comp = vec![usize::MAX; g.n()];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    for id in live {
        let e = g.edge(*id);
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    let mut c = 0;
    for start in 0..g.n() {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = c;
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for i in 0..adj[u].len() {
                let v = adj[u][i];
                if comp[v] == usize::MAX {
                    comp[v] = c;
                    stack.push(v);
                }
            }
        }
        c += 1;
    }
    comp
}

/// True iff every terminal pair is connected in (H u H') \ F.
pub fn is_feasible_augmentation(
    g: &FlexGraph,
    h: &BTreeSet<EdgeId>,
    f: &ViolatingEdgeSet,
    h_prime: &BTreeSet<EdgeId>,
) -> bool {
    debug_assert!(f.edges.is_subset(h));
    debug_assert!(h.is_disjoint(h_prime));
    let mut live: BTreeSet<EdgeId> = h.union(h_prime).copied().collect();
    for id in &f.edges {
        live.remove(id);
    }
    let comp = components(g, &live);
    g.pairs().iter().all(|&(s, t)| comp[s] == comp[t])
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn graph(
        n: usize,
        spec: &[(usize, usize, bool)],
        pairs: Vec<(usize, usize)>,
        p: u32,
        q: u32,
    ) -> FlexGraph {
        let edges = spec
            .iter()
            .enumerate()
            .map(|(i, &(u, v, safe))| Edge {
                id: EdgeId(i as u32),
                u,
                v,
                cost: 1.0,
                safe,
            })
            .collect();
        FlexGraph::new(n, edges, pairs, p, q).unwrap()
    }

    #[test]
    fn all_unsafe_matches_p_plus_q_connectivity() {
        // two parallel unsafe s-t edges, p=1, q=1: ok
        let g = graph(2, &[(0, 1, false), (0, 1, false)], vec![(0, 1)], 1, 1);
        let (ok, _) = is_flex_connected(&g, &g.all_ids(), 1, 1);
        assert!(ok);
    }

    #[test]
    fn all_safe_matches_p_connectivity() {
        let g = graph(2, &[(0, 1, true)], vec![(0, 1)], 1, 1);
        let (ok, _) = is_flex_connected(&g, &g.all_ids(), 1, 1);
        assert!(ok);
    }

    #[test]
    fn single_unsafe_edge_fails_with_witness() {
        let g = graph(2, &[(0, 1, false)], vec![(0, 1)], 1, 1);
        let (ok, w) = is_flex_connected(&g, &g.all_ids(), 1, 1);
        assert!(!ok);
        let w = w.unwrap();
        assert_eq!(w.removed, vec![EdgeId(0)]);
        assert_eq!(w.pair, 0);
    }

    #[test]
    fn violated_cut_on_parallel_unsafe() {
        let g = graph(2, &[(0, 1, false), (0, 1, false)], vec![(0, 1)], 1, 2);
        let cut = find_violated_cut(&g, &g.all_ids(), 1, 1, true)
            .unwrap()
            .unwrap();
        assert!(cut.separates(0, 1));
        assert_eq!(cut.boundary(&g, &g.all_ids()).len(), 2);
    }

    #[test]
    fn no_violated_cut_when_safe() {
        let g = graph(2, &[(0, 1, true), (0, 1, true)], vec![(0, 1)], 1, 2);
        assert!(find_violated_cut(&g, &g.all_ids(), 1, 1, true)
            .unwrap()
            .is_none());
    }

    #[test]
    fn violated_cut_on_unsafe_path() {
        let g = graph(3, &[(0, 1, false), (1, 2, false)], vec![(0, 2)], 1, 1);
        let cut = find_violated_cut(&g, &g.all_ids(), 1, 0, true)
            .unwrap()
            .unwrap();
        assert!(cut.separates(0, 2));
        assert_eq!(cut.boundary(&g, &g.all_ids()).len(), 1);
    }

    #[test]
    fn precondition_failure_is_reported() {
        let g = graph(2, &[(0, 1, false)], vec![(0, 1)], 1, 1);
        let err = find_violated_cut(&g, &g.all_ids(), 1, 1, true).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn enumerate_parallel_unsafe_pair() {
        let g = graph(2, &[(0, 1, false), (0, 1, false)], vec![(0, 1)], 1, 2);
        let sets = enumerate_violating_sets(&g, &g.all_ids(), 1, 1, 1 << 20).unwrap();
        assert_eq!(sets.len(), 1);
        assert_eq!(sets[0].edges, [EdgeId(0), EdgeId(1)].into());
        assert!(sets[0].witness.separates(0, 1));
    }

    #[test]
    fn enumerate_safe_pair_is_empty() {
        let g = graph(2, &[(0, 1, true), (0, 1, true)], vec![(0, 1)], 1, 2);
        let sets = enumerate_violating_sets(&g, &g.all_ids(), 1, 1, 1 << 20).unwrap();
        assert!(sets.is_empty());
    }

    #[test]
    fn feasible_augmentation_base_cases() {
        let g = graph(
            2,
            &[(0, 1, false), (0, 1, false), (0, 1, true)],
            vec![(0, 1)],
            1,
            2,
        );
        let h: BTreeSet<EdgeId> = [EdgeId(0), EdgeId(1)].into();
        let f = ViolatingEdgeSet {
            edges: h.clone(),
            witness: Cut::new([0].into(), 2).unwrap(),
            pair: 0,
            stage: 1,
        };
        assert!(is_feasible_augmentation(&g, &h, &f, &[EdgeId(2)].into()));
        assert!(!is_feasible_augmentation(&g, &h, &f, &BTreeSet::new()));
    }

    #[test]
    fn every_violating_set_has_enough_unsafe_edges() {
        use rand::Rng;
        let mut rng = crate::rng::substream(3, "test:violating-unsafe");
        for _ in 0..40 {
            let n = rng.gen_range(3..7);
            let m = rng.gen_range(3..10);
            let spec: Vec<(usize, usize, bool)> = (0..m)
                .map(|_| {
                    let u = rng.gen_range(0..n);
                    let mut v = rng.gen_range(0..n);
                    while v == u {
                        v = rng.gen_range(0..n);
                    }
                    (u, v, rng.gen_bool(0.4))
                })
                .collect();
            let p = rng.gen_range(1..3);
            let l = rng.gen_range(0..2);
            let g = graph(n, &spec, vec![(0, n - 1)], p, l + 1);
            let h = g.all_ids();
            if !is_flex_connected(&g, &h, p, l).0 {
                continue;
            }
            for f in enumerate_violating_sets(&g, &h, p, l, 1 << 20).unwrap() {
                let unsafe_count = f.edges.iter().filter(|id| !g.edge(**id).safe).count();
                assert!(unsafe_count >= (l + 1) as usize);
                assert!(is_violated_cut(&g, &h, p, l, &f.witness));
            }
        }
    }
}
