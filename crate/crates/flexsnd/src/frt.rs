//! Probabilistic hierarchical decomposition of a finite metric into a tree
//! (FRT-style): random permutation, random radius scale in [1,2), and
//! geometrically shrinking cluster radii. Tree distances dominate the input
//! metric on every sample; the expected stretch is logarithmic.
//!
//! This is the inner oracle for the capacitated tree embeddings in
//! [`crate::embed`]; levels where no cluster splits are skipped, so unary
//! chains never appear in the output.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, serde::Serialize)]
pub struct DecompNode {
    pub vertices: Vec<usize>,
    pub center: usize,
    pub level: i32,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// Laminar cluster tree over points 0..n-1. Node 0 is the root cluster.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DecompTree {
    pub nodes: Vec<DecompNode>,
    pub beta: f64,
    leaf_of: Vec<usize>,
}

impl DecompTree {
    pub fn root(&self) -> usize {
        0
    }

    pub fn leaf_of(&self, v: usize) -> usize {
        self.leaf_of[v]
    }

    /// Cluster radius at a level.
    fn radius(&self, level: i32) -> f64 {
        self.beta * ((level - 1) as f64).exp2()
    }

    /// Length of the tree path from `node` up to `ancestor`: the sum of radii
    /// over every (possibly contracted) level in between.
    fn climb_length(&self, mut node: usize, ancestor: usize) -> f64 {
        let mut total = 0.0;
        while node != ancestor {
            let parent = self.nodes[node].parent.expect("ancestor above node");
            let lo = self.nodes[node].level;
            let hi = self.nodes[parent].level;
            for l in (lo + 1)..=hi {
                total += self.radius(l);
            }
            node = parent;
        }
        total
    }

    /// Tree metric induced by the decomposition; dominates the input metric.
    pub fn tree_distance(&self, u: usize, v: usize) -> f64 {
        if u == v {
            return 0.0;
        }
        let (la, lb) = (self.leaf_of(u), self.leaf_of(v));
        let depth = |mut x: usize| {
            let mut d = 0usize;
            while let Some(p) = self.nodes[x].parent {
                x = p;
                d += 1;
            }
            d
        };
        let (mut a, mut b) = (la, lb);
        let (mut da, mut db) = (depth(a), depth(b));
        while da > db {
            a = self.nodes[a].parent.unwrap();
            da -= 1;
        }
        while db > da {
            b = self.nodes[b].parent.unwrap();
            db -= 1;
        }
        while a != b {
            a = self.nodes[a].parent.unwrap();
            b = self.nodes[b].parent.unwrap();
        }
        self.climb_length(la, a) + self.climb_length(lb, a)
    }

    /// Maximum number of tree edges from the root to any leaf.
    pub fn height(&self) -> usize {
        let mut h = 0;
        for (i, n) in self.nodes.iter().enumerate() {
            if n.children.is_empty() {
                let mut d = 0;
                let mut x = i;
                while let Some(p) = self.nodes[x].parent {
                    x = p;
                    d += 1;
                }
                h = h.max(d);
            }
        }
        h
    }
}

/// Validate that `d` is a finite semimetric.
pub fn validate_metric(d: &[Vec<f64>]) -> Result<()> {
    let n = d.len();
    let mut scale: f64 = 0.0;
    for row in d {
        if row.len() != n {
            return Err(Error::NonMetric("matrix is not square".into()));
        }
        for &v in row {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::NonMetric(format!("entry {v} is not a finite distance")));
            }
            scale = scale.max(v);
        }
    }
    let tol = 1e-9 * (1.0 + scale);
    for i in 0..n {
        if d[i][i].abs() > tol {
            return Err(Error::NonMetric(format!("d[{i}][{i}] != 0")));
        }
        for j in 0..n {
            if (d[i][j] - d[j][i]).abs() > tol {
                return Err(Error::NonMetric(format!("asymmetry at ({i},{j})")));
            }
            for k in 0..n {
                if d[i][j] > d[i][k] + d[k][j] + tol {
                    return Err(Error::NonMetric(format!(
                        "triangle inequality fails at ({i},{k},{j})"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Sample one hierarchical decomposition tree of the metric `d`.
pub fn frt_embed<R: Rng>(d: &[Vec<f64>], rng: &mut R) -> Result<DecompTree> {
    validate_metric(d)?;
    let n = d.len();
    if n == 0 {
        return Err(Error::NonMetric("empty point set".into()));
    }

    let beta = 2f64.powf(rng.gen::<f64>()); // in [1,2)
    let mut pi: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        pi.swap(i, j);
    }
    let mut rank = vec![0usize; n];
    for (r, &v) in pi.iter().enumerate() {
        rank[v] = r;
    }

    let dmax = d
        .iter()
        .flat_map(|r| r.iter().copied())
        .fold(0.0f64, f64::max);
    let dmin = d
        .iter()
        .flat_map(|r| r.iter().copied())
        .filter(|&v| v > 0.0)
        .fold(f64::INFINITY, f64::min);

    // top level: radius beta * 2^(top-1) >= dmax
    let top = if dmax <= 0.0 {
        1
    } else {
        ((dmax / beta).log2().ceil() as i32) + 1
    };

    let mut nodes = vec![DecompNode {
        vertices: (0..n).collect(),
        center: pi[0],
        level: top,
        parent: None,
        children: Vec::new(),
    }];
    let mut leaf_of = vec![usize::MAX; n];

    let mut stack = vec![0usize];
    while let Some(ci) = stack.pop() {
        let verts = nodes[ci].vertices.clone();
        if verts.len() == 1 {
            leaf_of[verts[0]] = ci;
            continue;
        }
        // descend until the cluster actually splits
        let mut level = nodes[ci].level - 1;
        let singleton_floor = if dmin.is_finite() { dmin / 4.0 } else { 0.0 };
        loop {
            let r = beta * ((level - 1) as f64).exp2();
            let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
            if r < singleton_floor || level < nodes[ci].level - 200 {
                // coincident points would never separate; force singletons
                for &u in &verts {
                    groups.insert(rank[u], vec![u]);
                }
            } else {
                for &u in &verts {
                    let c = pi
                        .iter()
                        .copied()
                        .find(|&v| d[u][v] <= r)
                        .expect("u is within 0 of itself");
                    groups.entry(rank[c]).or_default().push(u);
                }
            }
            if groups.len() > 1 {
                for (crank, vs) in groups {
                    let idx = nodes.len();
                    nodes.push(DecompNode {
                        vertices: vs,
                        center: pi[crank],
                        level,
                        parent: Some(ci),
                        children: Vec::new(),
                    });
                    nodes[ci].children.push(idx);
                    stack.push(idx);
                }
                break;
            }
            level -= 1;
        }
    }

    if n == 1 {
        leaf_of[0] = 0;
    }
    Ok(DecompTree {
        nodes,
        beta,
        leaf_of,
    })
}
