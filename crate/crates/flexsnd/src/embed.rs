//! Capacitated tree embeddings and distributions over them.
//!
//! An embedding is a rooted tree whose leaves are in bijection with the graph
//! vertices. Every tree edge carries the capacity of the graph cut induced by
//! its leaf partition, and maps to a path in the graph between the images of
//! its endpoints. A distribution of such trees with low maximum expected
//! congestion lets flow arguments transfer between the graph and its trees:
//! per sampled tree the tree supports at least the graph flow, and on average
//! the tree flow exceeds the graph flow by at most the congestion factor.
//!
//! The builder runs multiplicative weights over the graph edges: each round
//! embeds the length metric w_e / cap_e through [`crate::frt`], measures the
//! per-edge congestion of the resulting tree, and re-weights congested edges
//! so later trees avoid loading them again. Rounds stop as soon as the
//! weight-averaged congestion of every edge is within the target.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frt::{frt_embed, DecompTree};
use crate::graph::{dinic, CapacityMap, EdgeId, FlexGraph};
use crate::Cap;

/// Tunables for the distribution builder.
#[derive(Debug, Clone)]
pub struct EmbedParams {
    /// Congestion target factor: the builder must reach c_beta * log2(n).
    pub c_beta: f64,
    /// Height budget factor: trees must stay within c_h * log2(n * C).
    pub c_h: f64,
    /// Iteration cap factor: at most c_iter * n rounds.
    pub c_iter: usize,
    /// Multiplicative-weights learning rate.
    pub eta: f64,
}

impl Default for EmbedParams {
    fn default() -> Self {
        EmbedParams {
            c_beta: 4.0,
            c_h: 4.0,
            c_iter: 8,
            eta: 0.5,
        }
    }
}

/// Rooted capacitated tree embedding. Node 0 is the root; the tree edge above
/// node i is identified with i, so `y[i]` and `paths[i]` describe that edge.
#[derive(Debug, Clone, Serialize)]
pub struct TreeEmbedding {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    /// Graph vertex each tree node maps to (cluster centers internally).
    node_vertex: Vec<usize>,
    /// Leaf node of each graph vertex.
    leaf_node: Vec<usize>,
    /// Capacity of the graph cut induced by removing the edge above the node.
    y: Vec<Cap>,
    /// Graph path between the endpoint images of the edge above the node.
    /// Empty when both endpoints map to the same vertex or the cut is empty.
    paths: Vec<Vec<EdgeId>>,
    height: usize,
}

impl TreeEmbedding {
    pub fn from_parts(
        parent: Vec<Option<usize>>,
        node_vertex: Vec<usize>,
        leaf_node: Vec<usize>,
        y: Vec<Cap>,
        paths: Vec<Vec<EdgeId>>,
    ) -> Result<Self> {
        let count = parent.len();
        if node_vertex.len() != count || y.len() != count || paths.len() != count {
            return Err(Error::Internal("embedding part lengths disagree".into()));
        }
        if count == 0 || parent[0].is_some() {
            return Err(Error::Internal("node 0 must be the root".into()));
        }
        let mut children = vec![Vec::new(); count];
        for i in 1..count {
            let Some(p) = parent[i] else {
                return Err(Error::Internal(format!("node {i} has no parent")));
            };
            if p >= count {
                return Err(Error::Internal(format!("node {i} parent out of range")));
            }
            children[p].push(i);
        }
        let mut seen_leaf = vec![false; count];
        for (&leaf, v) in leaf_node.iter().zip(0..) {
            if leaf >= count || !children[leaf].is_empty() {
                return Err(Error::Internal(format!("vertex {v} mapped to non-leaf")));
            }
            if seen_leaf[leaf] {
                return Err(Error::Internal("leaf mapped twice".into()));
            }
            seen_leaf[leaf] = true;
        }
        let mut height = 0;
        for i in 0..count {
            if children[i].is_empty() {
                let mut d = 0;
                let mut x = i;
                while let Some(p) = parent[x] {
                    x = p;
                    d += 1;
                }
                height = height.max(d);
            }
        }
        Ok(TreeEmbedding {
            parent,
            children,
            node_vertex,
            leaf_node,
            y,
            paths,
            height,
        })
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn parent_of(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn children_of(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    pub fn vertex_of(&self, node: usize) -> usize {
        self.node_vertex[node]
    }

    pub fn leaf_of(&self, vertex: usize) -> usize {
        self.leaf_node[vertex]
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn y(&self, node: usize) -> Cap {
        self.y[node]
    }

    pub fn path(&self, node: usize) -> &[EdgeId] {
        &self.paths[node]
    }

    /// Non-root nodes, i.e. the tree edges.
    pub fn edge_nodes(&self) -> impl Iterator<Item = usize> {
        1..self.node_count()
    }

    /// Graph vertices whose leaves lie below `node` (the node's cluster).
    pub fn leaves_under(&self, node: usize) -> Vec<usize> {
        let mut verts = Vec::new();
        let mut stack = vec![node];
        while let Some(i) = stack.pop() {
            if self.children[i].is_empty() {
                if let Some(v) = self.leaf_node.iter().position(|&l| l == i) {
                    verts.push(v);
                }
            } else {
                stack.extend_from_slice(&self.children[i]);
            }
        }
        verts.sort_unstable();
        verts
    }

    /// Capacity of the induced cut of every tree edge, recomputed from the
    /// definition (sum of crossing capacities in edge order).
    pub fn recompute_y(&self, g: &FlexGraph, cap: &CapacityMap) -> Vec<Cap> {
        let mut side = vec![false; g.n()];
        let mut out = vec![0.0; self.node_count()];
        for node in self.edge_nodes() {
            side.iter_mut().for_each(|s| *s = false);
            for v in self.leaves_under(node) {
                side[v] = true;
            }
            out[node] = g
                .edges()
                .iter()
                .filter(|e| side[e.u] != side[e.v])
                .map(|e| cap.get(e.id))
                .sum();
        }
        out
    }

    /// Tree edges whose graph path uses any edge in `ids` (the preimage of an
    /// edge set under the path mapping).
    pub fn edges_mapping_over(&self, ids: &BTreeSet<EdgeId>) -> BTreeSet<usize> {
        self.edge_nodes()
            .filter(|&node| self.paths[node].iter().any(|e| ids.contains(e)))
            .collect()
    }

    /// Structural checks: path endpoints match the node images and paths are
    /// edge-connected walks in `g`.
    pub fn validate(&self, g: &FlexGraph) -> Result<()> {
        for node in self.edge_nodes() {
            let p = self.parent[node].unwrap();
            let path = &self.paths[node];
            if path.is_empty() {
                continue;
            }
            let mut at = self.node_vertex[p];
            for id in path {
                let e = g.edge(*id);
                if !e.touches(at) {
                    return Err(Error::Internal(format!(
                        "path above node {node} breaks at vertex {at}"
                    )));
                }
                at = e.other(at);
            }
            if at != self.node_vertex[node] {
                return Err(Error::Internal(format!(
                    "path above node {node} ends at {at}, expected {}",
                    self.node_vertex[node]
                )));
            }
        }
        Ok(())
    }
}

/// Per-edge load and relative load of one embedding.
#[derive(Debug, Clone)]
pub struct EdgeLoads {
    pub load: BTreeMap<EdgeId, Cap>,
    pub rload: BTreeMap<EdgeId, Cap>,
}

/// load(e) = sum of y over tree edges whose path uses e; rload = load / cap.
pub fn loads(emb: &TreeEmbedding, g: &FlexGraph, cap: &CapacityMap) -> EdgeLoads {
    let mut load: BTreeMap<EdgeId, Cap> = g.edge_ids().map(|id| (id, 0.0)).collect();
    for node in emb.edge_nodes() {
        for id in emb.path(node) {
            *load.get_mut(id).expect("path edge exists") += emb.y(node);
        }
    }
    let rload = load
        .iter()
        .map(|(&id, &l)| {
            let c = cap.get(id);
            (id, if c > 0.0 { l / c } else { 0.0 })
        })
        .collect();
    EdgeLoads { load, rload }
}

/// Weight-averaged rload per edge and its maximum over the edges.
pub fn distribution_loads(
    trees: &[(TreeEmbedding, Cap)],
    g: &FlexGraph,
    cap: &CapacityMap,
) -> (BTreeMap<EdgeId, Cap>, Cap) {
    let mut avg: BTreeMap<EdgeId, Cap> = g.edge_ids().map(|id| (id, 0.0)).collect();
    for (emb, w) in trees {
        let l = loads(emb, g, cap);
        for (id, r) in l.rload {
            *avg.get_mut(&id).unwrap() += w * r;
        }
    }
    let beta_hat = avg.values().copied().fold(0.0, Cap::max);
    (avg, beta_hat)
}

/// Weighted set of tree embeddings approximating a capacitated graph.
#[derive(Debug, Clone, Serialize)]
pub struct TreeDistribution {
    trees: Vec<TreeEmbedding>,
    weights: Vec<Cap>,
    avg_rload: BTreeMap<EdgeId, Cap>,
    beta_hat: Cap,
}

impl TreeDistribution {
    pub fn new(
        pairs: Vec<(TreeEmbedding, Cap)>,
        g: &FlexGraph,
        cap: &CapacityMap,
    ) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Precondition("empty tree distribution".into()));
        }
        let total: Cap = pairs.iter().map(|(_, w)| w).sum();
        if pairs.iter().any(|(_, w)| *w <= 0.0) || (total - 1.0).abs() > crate::EPS_LP {
            return Err(Error::Precondition(format!(
                "weights must be positive and sum to 1 (sum {total})"
            )));
        }
        let (avg_rload, beta_hat) = distribution_loads(&pairs, g, cap);
        let (trees, weights) = pairs.into_iter().unzip();
        Ok(TreeDistribution {
            trees,
            weights,
            avg_rload,
            beta_hat,
        })
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn trees(&self) -> impl Iterator<Item = (&TreeEmbedding, Cap)> {
        self.trees.iter().zip(self.weights.iter().copied())
    }

    pub fn beta_hat(&self) -> Cap {
        self.beta_hat
    }

    pub fn avg_rload(&self) -> &BTreeMap<EdgeId, Cap> {
        &self.avg_rload
    }

    /// Draw an embedding with probability proportional to its weight.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> &TreeEmbedding {
        let u: Cap = rng.gen();
        let mut acc = 0.0;
        for (t, w) in self.trees.iter().zip(&self.weights) {
            acc += w;
            if u < acc {
                return t;
            }
        }
        self.trees.last().expect("nonempty")
    }
}

/// All-pairs shortest paths with first-hop reconstruction.
struct PathTable {
    dist: Vec<Vec<f64>>,
    next: Vec<Vec<Option<usize>>>, // edge index of the first hop
}

fn shortest_paths(g: &FlexGraph, length: &[f64]) -> PathTable {
    let n = g.n();
    let mut dist = vec![vec![f64::INFINITY; n]; n];
    let mut next = vec![vec![None; n]; n];
    for (i, row) in dist.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for (idx, e) in g.edges().iter().enumerate() {
        if length[idx] < dist[e.u][e.v] {
            dist[e.u][e.v] = length[idx];
            dist[e.v][e.u] = length[idx];
            next[e.u][e.v] = Some(idx);
            next[e.v][e.u] = Some(idx);
        }
    }
    for k in 0..n {
        for i in 0..n {
            if dist[i][k].is_infinite() {
                continue;
            }
            for j in 0..n {
                let via = dist[i][k] + dist[k][j];
                if via < dist[i][j] {
                    dist[i][j] = via;
                    next[i][j] = next[i][k];
                }
            }
        }
    }
    PathTable { dist, next }
}

impl PathTable {
    fn edges(&self, g: &FlexGraph, mut u: usize, v: usize) -> Option<Vec<EdgeId>> {
        if u == v {
            return Some(Vec::new());
        }
        self.next[u][v]?;
        let mut out = Vec::new();
        while u != v {
            let idx = self.next[u][v]?;
            let e = &g.edges()[idx];
            out.push(e.id);
            u = e.other(u);
        }
        Some(out)
    }
}

/// Connected components over all edges of `g` (capacities are positive for
/// every edge by precondition). Returns vertex -> component, components
/// numbered by smallest contained vertex.
fn components(g: &FlexGraph) -> Vec<usize> {
    let mut comp = vec![usize::MAX; g.n()];
    let mut adj = vec![Vec::new(); g.n()];
    for e in g.edges() {
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    let mut c = 0;
    for s in 0..g.n() {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = c;
        let mut stack = vec![s];
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

/// Embed each connected component through FRT on `metric_len` lengths and
/// join the component trees under a zero-capacity super-root when needed.
fn build_embedding<R: Rng>(
    g: &FlexGraph,
    cap: &CapacityMap,
    metric_len: &[f64],
    route: &PathTable,
    rng: &mut R,
) -> Result<TreeEmbedding> {
    let comp = components(g);
    let ncomp = 1 + comp.iter().copied().max().unwrap_or(0);
    let table = shortest_paths(g, metric_len);

    let mut comp_verts: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
    for (v, &c) in comp.iter().enumerate() {
        comp_verts[c].push(v);
    }

    let mut decomps: Vec<(DecompTree, Vec<usize>)> = Vec::new();
    for verts in &comp_verts {
        let local: Vec<Vec<f64>> = verts
            .iter()
            .map(|&u| verts.iter().map(|&v| table.dist[u][v]).collect())
            .collect();
        let dt = frt_embed(&local, rng)?;
        decomps.push((dt, verts.clone()));
    }

    // Assemble: BFS ids, optional super-root joining the component roots.
    let single = decomps.len() == 1;
    let mut parent: Vec<Option<usize>> = Vec::new();
    let mut node_vertex: Vec<usize> = Vec::new();
    let mut clusters: Vec<Vec<usize>> = Vec::new(); // global vertex sets
    let mut leaf_node = vec![usize::MAX; g.n()];

    let mut queue: std::collections::VecDeque<(usize, usize, Option<usize>)> =
        Default::default(); // (component, decomp node, parent embedding id)
    if single {
        queue.push_back((0, 0, None));
    } else {
        parent.push(None);
        node_vertex.push(decomps[0].1[decomps[0].0.nodes[0].center]);
        clusters.push((0..g.n()).collect());
        for c in 0..decomps.len() {
            queue.push_back((c, 0, Some(0)));
        }
    }
    while let Some((c, dn, par)) = queue.pop_front() {
        let (dt, map) = &decomps[c];
        let id = parent.len();
        parent.push(par);
        node_vertex.push(map[dt.nodes[dn].center]);
        clusters.push(dt.nodes[dn].vertices.iter().map(|&lv| map[lv]).collect());
        if dt.nodes[dn].children.is_empty() {
            leaf_node[map[dt.nodes[dn].vertices[0]]] = id;
        }
        for &ch in &dt.nodes[dn].children {
            queue.push_back((c, ch, Some(id)));
        }
    }

    // y from the cut definition; paths along high-capacity routes.
    let count = parent.len();
    let mut y = vec![0.0; count];
    let mut paths: Vec<Vec<EdgeId>> = vec![Vec::new(); count];
    let mut side = vec![false; g.n()];
    for node in 1..count {
        side.iter_mut().for_each(|s| *s = false);
        for &v in &clusters[node] {
            side[v] = true;
        }
        y[node] = g
            .edges()
            .iter()
            .filter(|e| side[e.u] != side[e.v])
            .map(|e| cap.get(e.id))
            .sum();
        let from = node_vertex[parent[node].unwrap()];
        let to = node_vertex[node];
        match route.edges(g, from, to) {
            Some(p) => paths[node] = p,
            None => {
                // different components: the induced cut carries no capacity
                debug_assert!(y[node] == 0.0);
            }
        }
    }

    TreeEmbedding::from_parts(parent, node_vertex, leaf_node, y, paths)
}

/// Build a tree-embedding distribution for `(g, cap)` with measured maximum
/// expected congestion at most `c_beta * log2(n)`, or fail with the achieved
/// congestion after the iteration cap.
pub fn build_racke_distribution<R: Rng>(
    g: &FlexGraph,
    cap: &CapacityMap,
    rng: &mut R,
    params: &EmbedParams,
) -> Result<TreeDistribution> {
    cap.validate_for(g)?;
    for (id, c) in cap.iter() {
        if c <= 0.0 {
            return Err(Error::Precondition(format!(
                "capacity of {id} must be positive"
            )));
        }
    }
    let n = g.n();
    let m = g.m();
    let target = params.c_beta * (n.max(2) as f64).log2();

    let (cmin, cmax) = cap.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), (_, c)| {
        (lo.min(c), hi.max(c))
    });
    let ratio = if m > 0 { cmax / cmin } else { 1.0 };
    let height_budget = (params.c_h * ((n as f64) * ratio).log2()).max(1.0);
    let w_cap = (n as f64 * ratio).max(2.0);

    // fixed routing lengths: prefer high-capacity edges
    let route_len: Vec<f64> = g.edges().iter().map(|e| 1.0 / cap.get(e.id)).collect();
    let route = shortest_paths(g, &route_len);

    let mut w = vec![1.0; m.max(1)];
    let mut built: Vec<(TreeEmbedding, Cap)> = Vec::new();
    let mut sum_rload: BTreeMap<EdgeId, Cap> = g.edge_ids().map(|id| (id, 0.0)).collect();
    let iters = (params.c_iter * n).max(1);
    let mut achieved = f64::INFINITY;

    for _ in 0..iters {
        let metric_len: Vec<f64> = g
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| w[i] / cap.get(e.id))
            .collect();
        let emb = build_embedding(g, cap, &metric_len, &route, rng)?;
        debug_assert!(emb.validate(g).is_ok());
        debug_assert!(
            (emb.height() as f64) <= height_budget,
            "height {} over budget {height_budget}",
            emb.height()
        );
        let l = loads(&emb, g, cap);
        for (id, r) in &l.rload {
            *sum_rload.get_mut(id).unwrap() += r;
        }
        built.push((emb, 0.0));

        let t = built.len() as f64;
        achieved = sum_rload.values().map(|s| s / t).fold(0.0, f64::max);
        if achieved <= target {
            let w_each = 1.0 / t;
            let pairs: Vec<(TreeEmbedding, Cap)> =
                built.into_iter().map(|(e, _)| (e, w_each)).collect();
            return TreeDistribution::new(pairs, g, cap);
        }

        // re-weight congested edges, renormalize, clip
        let clip = 2.0 * target;
        for (i, e) in g.edges().iter().enumerate() {
            let r = l.rload[&e.id].min(clip) / clip;
            w[i] *= (params.eta * r).exp();
        }
        let wmin = w.iter().copied().fold(f64::INFINITY, f64::min);
        for wi in w.iter_mut() {
            *wi = (*wi / wmin).min(w_cap);
        }
    }
    Err(Error::EmbedCongestion {
        achieved,
        target,
    })
}

/// Max flow between the leaf sets of vertex sets `a` and `b` in the tree,
/// with the tree edges above `forbidden` nodes removed.
pub fn tree_maxflow(
    emb: &TreeEmbedding,
    a: &BTreeSet<usize>,
    b: &BTreeSet<usize>,
    forbidden: &BTreeSet<usize>,
) -> Cap {
    assert!(a.is_disjoint(b), "terminal vertex sets overlap");
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let arcs: Vec<(usize, usize, Cap)> = emb
        .edge_nodes()
        .filter(|node| !forbidden.contains(node))
        .map(|node| (emb.parent_of(node).unwrap(), node, emb.y(node)))
        .collect();
    let src: BTreeSet<usize> = a.iter().map(|&v| emb.leaf_of(v)).collect();
    let dst: BTreeSet<usize> = b.iter().map(|&v| emb.leaf_of(v)).collect();
    let (value, _) = dinic(emb.node_count(), &arcs, &src, &dst, crate::EPS_FLOW);
    value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn graph(n: usize, spec: &[(usize, usize)]) -> FlexGraph {
        let edges = spec
            .iter()
            .enumerate()
            .map(|(i, &(u, v))| Edge {
                id: EdgeId(i as u32),
                u,
                v,
                cost: 1.0,
                safe: true,
            })
            .collect();
        FlexGraph::new(n, edges, vec![], 1, 0).unwrap()
    }

    #[test]
    fn single_edge_graph_is_exact() {
        let g = graph(2, &[(0, 1)]);
        let cap: CapacityMap = CapacityMap::uniform(&g, 0.5);
        let mut rng = crate::rng::substream(1, "test:embed-single");
        let dist = build_racke_distribution(&g, &cap, &mut rng, &EmbedParams::default()).unwrap();
        assert_eq!(dist.len(), 1);
        let (emb, _) = dist.trees().next().unwrap();
        for node in emb.edge_nodes() {
            assert!((emb.y(node) - 0.5).abs() < 1e-12);
        }
        let l = loads(emb, &g, &cap);
        assert!((l.load[&EdgeId(0)] - 0.5).abs() < 1e-12);
        assert!((l.rload[&EdgeId(0)] - 1.0).abs() < 1e-12);
        assert!((dist.beta_hat() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn star_meets_congestion_target() {
        let n = 6;
        let spec: Vec<(usize, usize)> = (1..n).map(|v| (0, v)).collect();
        let g = graph(n, &spec);
        let cap: CapacityMap = CapacityMap::uniform(&g, 1.0);
        let mut rng = crate::rng::substream(2, "test:embed-star");
        let dist = build_racke_distribution(&g, &cap, &mut rng, &EmbedParams::default()).unwrap();
        assert!(dist.beta_hat() <= 4.0 * (n as f64).log2());
    }

    #[test]
    fn four_cycle_over_twenty_builds() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let cap: CapacityMap = CapacityMap::uniform(&g, 1.0);
        for seed in 0..20 {
            let mut rng = crate::rng::substream(seed, "test:embed-cycle");
            let dist =
                build_racke_distribution(&g, &cap, &mut rng, &EmbedParams::default()).unwrap();
            assert!(dist.beta_hat() <= 4.0 * 2.0, "beta {}", dist.beta_hat());
        }
    }

    #[test]
    fn y_matches_recomputation_exactly() {
        let g = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 3)]);
        let mut cap: CapacityMap = CapacityMap::uniform(&g, 1.0);
        cap.set(EdgeId(5), 0.25);
        let mut rng = crate::rng::substream(3, "test:embed-y");
        let dist = build_racke_distribution(&g, &cap, &mut rng, &EmbedParams::default()).unwrap();
        for (emb, _) in dist.trees() {
            let fresh = emb.recompute_y(&g, &cap);
            for node in emb.edge_nodes() {
                assert_eq!(emb.y(node), fresh[node], "y mismatch at {node}");
            }
        }
    }

    #[test]
    fn loads_of_unused_edge_are_zero() {
        // disconnected: the cross-component tree edge carries no capacity
        let g = graph(4, &[(0, 1), (2, 3)]);
        let cap: CapacityMap = CapacityMap::uniform(&g, 1.0);
        let mut rng = crate::rng::substream(4, "test:embed-disc");
        let dist = build_racke_distribution(&g, &cap, &mut rng, &EmbedParams::default()).unwrap();
        let (emb, _) = dist.trees().next().unwrap();
        // flows across components are zero in graph and tree
        let f = tree_maxflow(emb, &[0].into(), &[2].into(), &BTreeSet::new());
        assert_eq!(f, 0.0);
    }

    #[test]
    fn distribution_beta_recomputes_identically() {
        let g = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        let cap: CapacityMap = CapacityMap::uniform(&g, 1.0);
        let mut rng = crate::rng::substream(5, "test:embed-beta");
        let dist = build_racke_distribution(&g, &cap, &mut rng, &EmbedParams::default()).unwrap();
        let pairs: Vec<(TreeEmbedding, Cap)> = dist.trees().map(|(t, w)| (t.clone(), w)).collect();
        let (_, beta) = distribution_loads(&pairs, &g, &cap);
        assert_eq!(beta, dist.beta_hat());
    }

    #[test]
    fn sampling_respects_weights() {
        use rand::Rng as _;
        let g = graph(2, &[(0, 1)]);
        let cap: CapacityMap = CapacityMap::uniform(&g, 1.0);
        let mut rng = crate::rng::substream(6, "test:embed-sample");
        let d = build_racke_distribution(&g, &cap, &mut rng, &EmbedParams::default()).unwrap();
        let single = d.trees().next().unwrap().0.clone();
        // hand distribution with two copies at 0.5/0.5
        let dist = TreeDistribution::new(
            vec![(single.clone(), 0.5), (single, 0.5)],
            &g,
            &cap,
        )
        .unwrap();
        let mut counts = [0usize; 2];
        let mut rng2 = crate::rng::substream(7, "test:embed-sample2");
        for _ in 0..10_000 {
            let u: f64 = rng2.gen();
            counts[usize::from(u >= 0.5)] += 1;
        }
        // direct sampling determinism: same seed, same sequence
        let mut ra = crate::rng::substream(8, "s");
        let mut rb = crate::rng::substream(8, "s");
        for _ in 0..100 {
            let ta = dist.sample(&mut ra) as *const _;
            let tb = dist.sample(&mut rb) as *const _;
            assert_eq!(ta, tb);
        }
        let freq = counts[0] as f64 / 10_000.0;
        assert!((freq - 0.5).abs() < 0.05);
    }

    #[test]
    fn tree_maxflow_on_path_tree() {
        // a - r - b with y = 0.3 on both edges
        let emb = TreeEmbedding::from_parts(
            vec![None, Some(0), Some(0)],
            vec![0, 0, 1],
            vec![1, 2],
            vec![0.0, 0.3, 0.3],
            vec![vec![], vec![], vec![EdgeId(0)]],
        )
        .unwrap();
        let f = tree_maxflow(&emb, &[0].into(), &[1].into(), &BTreeSet::new());
        assert!((f - 0.3).abs() < 1e-9);
        let blocked = tree_maxflow(&emb, &[0].into(), &[1].into(), &[1].into());
        assert_eq!(blocked, 0.0);
    }

    #[test]
    fn tree_flow_dominates_graph_flow() {
        use crate::graph::max_flow;
        use rand::Rng as _;
        let mut rng = crate::rng::substream(9, "test:embed-cor1");
        for trial in 0..5 {
            let n = 5 + trial % 3;
            let mut spec = Vec::new();
            for i in 1..n {
                spec.push((i - 1, i));
            }
            for _ in 0..4 {
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n);
                if u != v {
                    spec.push((u.min(v), u.max(v)));
                }
            }
            let g = graph(n, &spec);
            let mut cap: CapacityMap = CapacityMap::uniform(&g, 1.0);
            for id in g.edge_ids() {
                cap.set(id, rng.gen_range(0.1..1.0));
            }
            let dist =
                build_racke_distribution(&g, &cap, &mut rng, &EmbedParams::default()).unwrap();
            for _ in 0..20 {
                let a_v = rng.gen_range(0..n);
                let mut b_v = rng.gen_range(0..n);
                while b_v == a_v {
                    b_v = rng.gen_range(0..n);
                }
                let a: BTreeSet<usize> = [a_v].into();
                let b: BTreeSet<usize> = [b_v].into();
                let (gf, _) = max_flow(&g, &cap, &a, &b).unwrap();
                for (emb, _) in dist.trees() {
                    let tf = tree_maxflow(emb, &a, &b, &BTreeSet::new());
                    assert!(
                        tf >= gf - 1e-9,
                        "tree flow {tf} below graph flow {gf}"
                    );
                }
            }
        }
    }
}
