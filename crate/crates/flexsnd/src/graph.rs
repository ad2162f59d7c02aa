//! Costed multigraph with safe/unsafe edge labels, cut utilities, and
//! max-flow/min-cut on non-negative capacities.
//!
//! Edges carry stable integer ids so that solution sets, violating sets and
//! parallel-edge copies can be tracked as id sets across the pipeline.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::Cap;

/// Stable identifier of a multigraph edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u32);

impl std::fmt::Display for EdgeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: EdgeId,
    pub u: usize,
    pub v: usize,
    pub cost: Cap,
    pub safe: bool,
}

impl Edge {
    pub fn other(&self, w: usize) -> usize {
        if w == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn touches(&self, w: usize) -> bool {
        self.u == w || self.v == w
    }
}

/// Undirected costed multigraph with a safe/unsafe partition of the edges,
/// terminal pairs, and the connectivity requirement (p, q).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlexGraph {
    n: usize,
    edges: Vec<Edge>,
    pairs: Vec<(usize, usize)>,
    p: u32,
    q: u32,
    #[serde(skip)]
    by_id: HashMap<EdgeId, usize>,
}

impl FlexGraph {
    pub fn new(
        n: usize,
        edges: Vec<Edge>,
        pairs: Vec<(usize, usize)>,
        p: u32,
        q: u32,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph needs at least one vertex".into()));
        }
        if p == 0 {
            return Err(Error::InvalidGraph("p must be at least 1".into()));
        }
        let mut by_id = HashMap::with_capacity(edges.len());
        for (idx, e) in edges.iter().enumerate() {
            if e.u >= n || e.v >= n {
                return Err(Error::InvalidGraph(format!("{}: endpoint out of range", e.id)));
            }
            if e.u == e.v {
                return Err(Error::InvalidGraph(format!("{}: self-loop", e.id)));
            }
            if !(e.cost >= 0.0) || !e.cost.is_finite() {
                return Err(Error::InvalidGraph(format!("{}: bad cost {}", e.id, e.cost)));
            }
            if by_id.insert(e.id, idx).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate edge id {}", e.id)));
            }
        }
        for &(s, t) in &pairs {
            if s >= n || t >= n {
                return Err(Error::InvalidGraph(format!("pair ({s},{t}) out of range")));
            }
            if s == t {
                return Err(Error::InvalidGraph(format!("pair ({s},{t}) is degenerate")));
            }
        }
        Ok(FlexGraph {
            n,
            edges,
            pairs,
            p,
            q,
            by_id,
        })
    }

    /// Rebuild the id index after deserialization.
    pub fn reindex(&mut self) {
        self.by_id = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id, i))
            .collect();
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[self.by_id[&id]]
    }

    pub fn has_edge(&self, id: EdgeId) -> bool {
        self.by_id.contains_key(&id)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.iter().map(|e| e.id)
    }

    /// All edge ids as a set, the universe E.
    pub fn all_ids(&self) -> BTreeSet<EdgeId> {
        self.edge_ids().collect()
    }

    /// Ids of unsafe edges within `within`, sorted.
    pub fn unsafe_ids_in(&self, within: &BTreeSet<EdgeId>) -> Vec<EdgeId> {
        within
            .iter()
            .copied()
            .filter(|id| !self.edge(*id).safe)
            .collect()
    }

    pub fn cost_of(&self, ids: &BTreeSet<EdgeId>) -> Cap {
        ids.iter().map(|id| self.edge(*id).cost).sum()
    }
}

/// Vertex-side of a cut; the boundary is derived on demand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cut {
    side: BTreeSet<usize>,
}

impl Cut {
    /// `side` must be a proper nonempty subset of the vertices.
    pub fn new(side: BTreeSet<usize>, n: usize) -> Result<Self> {
        if side.is_empty() || side.len() >= n {
            return Err(Error::Precondition(format!(
                "cut side must be proper and nonempty (|S|={}, n={})",
                side.len(),
                n
            )));
        }
        if let Some(&max) = side.iter().next_back() {
            if max >= n {
                return Err(Error::Precondition(format!("cut vertex {max} out of range")));
            }
        }
        Ok(Cut { side })
    }

    pub fn side(&self) -> &BTreeSet<usize> {
        &self.side
    }

    pub fn contains(&self, v: usize) -> bool {
        self.side.contains(&v)
    }

    pub fn separates(&self, s: usize, t: usize) -> bool {
        self.contains(s) != self.contains(t)
    }

    /// Terminal pairs of `g` split by this cut.
    pub fn separated_pairs(&self, g: &FlexGraph) -> Vec<usize> {
        g.pairs()
            .iter()
            .enumerate()
            .filter(|(_, &(s, t))| self.separates(s, t))
            .map(|(i, _)| i)
            .collect()
    }

    /// Boundary edges restricted to `restrict`, sorted by id.
    pub fn boundary(&self, g: &FlexGraph, restrict: &BTreeSet<EdgeId>) -> Vec<EdgeId> {
        restrict
            .iter()
            .copied()
            .filter(|id| {
                let e = g.edge(*id);
                self.contains(e.u) != self.contains(e.v)
            })
            .collect()
    }
}

/// Edge capacities keyed by edge id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityMap<S = Cap>(BTreeMap<EdgeId, S>);

impl<S: Scalar> CapacityMap<S> {
    pub fn new(map: BTreeMap<EdgeId, S>) -> Self {
        CapacityMap(map)
    }

    /// Capacity `value` on every edge of `g`.
    pub fn uniform(g: &FlexGraph, value: S) -> Self {
        CapacityMap(g.edge_ids().map(|id| (id, value)).collect())
    }

    /// Capacity 1 on ids in `within`, 0 elsewhere (unit-capacity subgraph).
    pub fn indicator(g: &FlexGraph, within: &BTreeSet<EdgeId>) -> Self {
        CapacityMap(
            g.edge_ids()
                .map(|id| (id, if within.contains(&id) { S::one() } else { S::zero() }))
                .collect(),
        )
    }

    pub fn get(&self, id: EdgeId) -> S {
        self.0.get(&id).copied().unwrap_or_else(S::zero)
    }

    pub fn set(&mut self, id: EdgeId, value: S) {
        self.0.insert(id, value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (EdgeId, S)> + '_ {
        self.0.iter().map(|(k, v)| (*k, *v))
    }

    pub fn total(&self) -> S {
        self.0.values().copied().sum()
    }

    /// Check that the map is defined on exactly the edges of `g` with finite
    /// non-negative values.
    pub fn validate_for(&self, g: &FlexGraph) -> Result<()> {
        if self.0.len() != g.m() {
            return Err(Error::Precondition(format!(
                "capacity map covers {} edges, graph has {}",
                self.0.len(),
                g.m()
            )));
        }
        for (&id, &c) in &self.0 {
            if !g.has_edge(id) {
                return Err(Error::Precondition(format!("capacity on unknown edge {id}")));
            }
            if !(c >= S::zero()) || !c.is_finite() {
                return Err(Error::Precondition(format!("bad capacity on {id}")));
            }
        }
        Ok(())
    }
}

/// Exact max flow between vertex sets `a` and `b` under `cap`, with a
/// certifying minimum cut (`a` inside, `b` outside).
pub fn max_flow<S: Scalar>(
    g: &FlexGraph,
    cap: &CapacityMap<S>,
    a: &BTreeSet<usize>,
    b: &BTreeSet<usize>,
) -> Result<(S, Cut)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Precondition("terminal sets must be nonempty".into()));
    }
    if !a.is_disjoint(b) {
        return Err(Error::Precondition("terminal sets overlap".into()));
    }
    let eps = S::from_f64_lit(crate::EPS_FLOW);
    let arcs: Vec<(usize, usize, S)> = g
        .edges()
        .iter()
        .map(|e| (e.u, e.v, cap.get(e.id)))
        .collect();
    let (value, reach) = dinic(g.n(), &arcs, a, b, eps);
    let side: BTreeSet<usize> = (0..g.n()).filter(|v| reach[*v]).collect();
    let cut = Cut::new(side, g.n())?;
    #[cfg(debug_assertions)]
    {
        // max-flow/min-cut certificate
        let cut_cap: S = g
            .edges()
            .iter()
            .filter(|e| cut.contains(e.u) != cut.contains(e.v))
            .map(|e| cap.get(e.id))
            .sum();
        let scale = S::one() + cut_cap.abs() + value.abs();
        debug_assert!(
            (cut_cap - value).abs() <= eps * S::from_f64_lit(1e3) * scale,
            "flow {value} != cut {cut_cap}"
        );
    }
    Ok((value, cut))
}

/// Boundary of vertex set `side` restricted to the edge subset `restrict`.
pub fn cut_boundary(g: &FlexGraph, side: &BTreeSet<usize>, restrict: &BTreeSet<EdgeId>) -> Vec<EdgeId> {
    restrict
        .iter()
        .copied()
        .filter(|id| {
            let e = g.edge(*id);
            side.contains(&e.u) != side.contains(&e.v)
        })
        .collect()
}

/// Number of pairwise edge-disjoint s-t paths in the subgraph `edges`.
pub fn edge_connectivity(g: &FlexGraph, edges: &BTreeSet<EdgeId>, s: usize, t: usize) -> u32 {
    assert!(s != t, "edge_connectivity needs distinct endpoints");
    let (value, _) = st_connectivity_cut(g, edges, s, t);
    value
}

/// Like [`edge_connectivity`] but also returns the minimal s-side min cut.
pub fn st_connectivity_cut(
    g: &FlexGraph,
    edges: &BTreeSet<EdgeId>,
    s: usize,
    t: usize,
) -> (u32, Cut) {
    let arcs: Vec<(usize, usize, Cap)> = g
        .edges()
        .iter()
        .map(|e| {
            let c = if edges.contains(&e.id) { 1.0 } else { 0.0 };
            (e.u, e.v, c)
        })
        .collect();
    let a: BTreeSet<usize> = [s].into();
    let b: BTreeSet<usize> = [t].into();
    let (value, reach) = dinic(g.n(), &arcs, &a, &b, crate::EPS_FLOW);
    let side: BTreeSet<usize> = (0..g.n()).filter(|v| reach[*v]).collect();
    // unit capacities keep augmentations integral, so rounding is exact
    let cut = Cut::new(side, g.n()).expect("source side is proper: t unreachable");
    (value.round() as u32, cut)
}

/// Dinic max-flow on an undirected arc list with multi-source/multi-sink
/// contraction. Returns the flow value and the residual-reachable vertex mask
/// (the minimal source-side min cut).
pub fn dinic<S: Scalar>(
    n: usize,
    undirected: &[(usize, usize, S)],
    sources: &BTreeSet<usize>,
    sinks: &BTreeSet<usize>,
    eps: S,
) -> (S, Vec<bool>) {
    // nodes 0..n are real; n is super-source, n+1 super-sink
    let s = n;
    let t = n + 1;
    let mut net = FlowNet::new(n + 2);
    let mut total = S::zero();
    for &(u, v, c) in undirected {
        total += c;
        net.add_undirected(u, v, c);
    }
    let inf = total + S::one();
    for &v in sources {
        net.add_directed(s, v, inf);
    }
    for &v in sinks {
        net.add_directed(v, t, inf);
    }
    let value = net.run(s, t, eps);
    let reach_all = net.residual_reachable(s, eps);
    (value, reach_all[..n].to_vec())
}

struct FlowNet<S> {
    adj: Vec<Vec<usize>>,
    // arcs stored in residual pairs (i, i^1)
    to: Vec<usize>,
    cap: Vec<S>,
}

impl<S: Scalar> FlowNet<S> {
    fn new(n: usize) -> Self {
        FlowNet {
            adj: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add_pair(&mut self, u: usize, v: usize, cuv: S, cvu: S) {
        self.adj[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(cuv);
        self.adj[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(cvu);
    }

    fn add_undirected(&mut self, u: usize, v: usize, c: S) {
        self.add_pair(u, v, c, c);
    }

    fn add_directed(&mut self, u: usize, v: usize, c: S) {
        self.add_pair(u, v, c, S::zero());
    }

    fn bfs_levels(&self, s: usize, t: usize, eps: S) -> Option<Vec<i32>> {
        let mut level = vec![-1; self.adj.len()];
        let mut queue = std::collections::VecDeque::new();
        level[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let v = self.to[a];
                if level[v] < 0 && self.cap[a] > eps {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        if level[t] >= 0 {
            Some(level)
        } else {
            None
        }
    }

    fn dfs_push(
        &mut self,
        u: usize,
        t: usize,
        pushed: S,
        level: &[i32],
        iter: &mut [usize],
        eps: S,
    ) -> S {
        if u == t {
            return pushed;
        }
        while iter[u] < self.adj[u].len() {
            let a = self.adj[u][iter[u]];
            let v = self.to[a];
            if level[v] == level[u] + 1 && self.cap[a] > eps {
                let d = self.dfs_push(v, t, pushed.min(self.cap[a]), level, iter, eps);
                if d > eps {
                    self.cap[a] -= d;
                    self.cap[a ^ 1] += d;
                    return d;
                }
            }
            iter[u] += 1;
        }
        S::zero()
    }

    fn run(&mut self, s: usize, t: usize, eps: S) -> S {
        let mut flow = S::zero();
        let inf = S::max_value();
        while let Some(level) = self.bfs_levels(s, t, eps) {
            let mut iter = vec![0usize; self.adj.len()];
            loop {
                let pushed = self.dfs_push(s, t, inf, &level, &mut iter, eps);
                if pushed <= eps {
                    break;
                }
                flow += pushed;
            }
        }
        flow
    }

    fn residual_reachable(&self, s: usize, eps: S) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for &a in &self.adj[u] {
                let v = self.to[a];
                if !seen[v] && self.cap[a] > eps {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn simple_graph(
        n: usize,
        spec: &[(usize, usize, f64, bool)],
        pairs: Vec<(usize, usize)>,
        p: u32,
        q: u32,
    ) -> FlexGraph {
        let edges = spec
            .iter()
            .enumerate()
            .map(|(i, &(u, v, cost, safe))| Edge {
                id: EdgeId(i as u32),
                u,
                v,
                cost,
                safe,
            })
            .collect();
        FlexGraph::new(n, edges, pairs, p, q).unwrap()
    }

    #[test]
    fn rejects_self_loops_and_bad_pairs() {
        let e = vec![Edge {
            id: EdgeId(0),
            u: 1,
            v: 1,
            cost: 1.0,
            safe: true,
        }];
        assert!(FlexGraph::new(3, e, vec![], 1, 0).is_err());
        assert!(FlexGraph::new(3, vec![], vec![(2, 2)], 1, 0).is_err());
        assert!(FlexGraph::new(3, vec![], vec![(0, 5)], 1, 0).is_err());
    }

    #[test]
    fn max_flow_single_path() {
        // path a-b-c, unit capacities
        let g = simple_graph(3, &[(0, 1, 1.0, true), (1, 2, 1.0, true)], vec![], 1, 0);
        let cap: CapacityMap = CapacityMap::uniform(&g, 1.0);
        let (v, cut) = max_flow(&g, &cap, &[0].into(), &[2].into()).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
        assert!(cut.contains(0) && !cut.contains(2));
    }

    #[test]
    fn max_flow_parallel_edges_add() {
        let g = simple_graph(2, &[(0, 1, 1.0, true), (0, 1, 1.0, true)], vec![], 1, 0);
        let mut cap: CapacityMap = CapacityMap::uniform(&g, 0.0);
        cap.set(EdgeId(0), 0.3);
        cap.set(EdgeId(1), 0.4);
        let (v, _) = max_flow(&g, &cap, &[0].into(), &[1].into()).unwrap();
        assert!((v - 0.7).abs() < 1e-9);
    }

    #[test]
    fn max_flow_disconnected_is_zero() {
        let g = simple_graph(2, &[], vec![], 1, 0);
        let cap = CapacityMap::uniform(&g, 1.0);
        let (v, cut) = max_flow(&g, &cap, &[0].into(), &[1].into()).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(cut.side().len(), 1);
    }

    #[test]
    fn max_flow_rejects_overlap() {
        let g = simple_graph(2, &[(0, 1, 1.0, true)], vec![], 1, 0);
        let cap = CapacityMap::uniform(&g, 1.0);
        assert!(max_flow(&g, &cap, &[0].into(), &[0, 1].into()).is_err());
    }

    #[test]
    fn boundary_on_triangle() {
        let g = simple_graph(
            3,
            &[(0, 1, 1.0, true), (1, 2, 1.0, true), (2, 0, 1.0, true)],
            vec![],
            1,
            0,
        );
        let all = g.all_ids();
        assert_eq!(
            cut_boundary(&g, &[0].into(), &all),
            vec![EdgeId(0), EdgeId(2)]
        );
        assert_eq!(
            cut_boundary(&g, &[0, 1].into(), &all),
            vec![EdgeId(1), EdgeId(2)]
        );
        let only_ab: BTreeSet<EdgeId> = [EdgeId(0)].into();
        assert!(cut_boundary(&g, &[2].into(), &only_ab).is_empty());
    }

    #[test]
    fn connectivity_examples() {
        let g = simple_graph(
            2,
            &[(0, 1, 1.0, true), (0, 1, 1.0, true), (0, 1, 1.0, true)],
            vec![],
            1,
            0,
        );
        assert_eq!(edge_connectivity(&g, &g.all_ids(), 0, 1), 3);

        let path = simple_graph(3, &[(0, 1, 1.0, true), (1, 2, 1.0, true)], vec![], 1, 0);
        assert_eq!(edge_connectivity(&path, &path.all_ids(), 0, 2), 1);

        let split = simple_graph(4, &[(0, 1, 1.0, true), (2, 3, 1.0, true)], vec![], 1, 0);
        assert_eq!(edge_connectivity(&split, &split.all_ids(), 0, 2), 0);
    }

    #[test]
    fn flow_kernel_is_scalar_generic() {
        let arcs: Vec<(usize, usize, f32)> = vec![(0, 1, 0.5f32), (1, 2, 0.25f32)];
        let (v, _) = dinic(3, &arcs, &[0].into(), &[2].into(), 1e-6f32);
        assert!((v - 0.25).abs() < 1e-6);
    }

    #[test]
    fn flow_monotone_under_capacity_increase() {
        use rand::Rng;
        let mut rng = crate::rng::substream(11, "test:flow-monotone");
        for _ in 0..30 {
            let n = rng.gen_range(4..9);
            let m = rng.gen_range(4..14);
            let spec: Vec<(usize, usize, f64, bool)> = (0..m)
                .map(|_| {
                    let u = rng.gen_range(0..n);
                    let mut v = rng.gen_range(0..n);
                    while v == u {
                        v = rng.gen_range(0..n);
                    }
                    (u, v, 1.0, true)
                })
                .collect();
            let g = simple_graph(n, &spec, vec![], 1, 0);
            let mut cap = CapacityMap::uniform(&g, 0.0);
            for id in g.edge_ids() {
                cap.set(id, rng.gen_range(0.0..2.0));
            }
            let (v1, _) = max_flow(&g, &cap, &[0].into(), &[n - 1].into()).unwrap();
            let bump: u32 = rng.gen_range(0..m as u32);
            let mut cap2 = cap.clone();
            cap2.set(EdgeId(bump), cap.get(EdgeId(bump)) + rng.gen_range(0.0..1.0));
            let (v2, _) = max_flow(&g, &cap2, &[0].into(), &[n - 1].into()).unwrap();
            assert!(v2 >= v1 - 1e-9, "{v2} < {v1}");
        }
    }

    #[test]
    fn unit_connectivity_matches_generic_flow() {
        use rand::Rng;
        let mut rng = crate::rng::substream(12, "test:conn-vs-flow");
        for _ in 0..40 {
            let n = rng.gen_range(3..12);
            let m = rng.gen_range(2..20);
            let spec: Vec<(usize, usize, f64, bool)> = (0..m)
                .map(|_| {
                    let u = rng.gen_range(0..n);
                    let mut v = rng.gen_range(0..n);
                    while v == u {
                        v = rng.gen_range(0..n);
                    }
                    (u, v, 1.0, true)
                })
                .collect();
            let g = simple_graph(n, &spec, vec![], 1, 0);
            let cap = CapacityMap::uniform(&g, 1.0);
            let (v, _) = max_flow(&g, &cap, &[0].into(), &[n - 1].into()).unwrap();
            let k = edge_connectivity(&g, &g.all_ids(), 0, n - 1);
            assert!((v - k as f64).abs() < 1e-9);
        }
    }
}
