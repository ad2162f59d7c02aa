//! Augment-LP: fractionally cover every violated cut of the current solution
//! with candidate edges, solved by constraint generation.
//!
//! The outer loop alternates an exact simplex solve over the pooled
//! constraints with a separation oracle. The oracle reduces violated-cut
//! detection to min cuts: for every deletion set B of exactly l+1 unsafe
//! solution edges and every terminal pair, solution edges outside B get a
//! weight K larger than the whole candidate mass, B gets 0, and candidates
//! get their fractional value; a min cut below (p-1)K + 1 then pins a cut
//! with exactly p-1 surviving solution edges, all of B crossing, and
//! candidate coverage below 1.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::{dinic, Cut, EdgeId, FlexGraph};
use crate::simplex::{solve_covering, CoverRow};
use crate::verify;
use crate::{Cap, EPS_LP, EPS_SEP};


/// Fractional values for candidate edges (everything outside the current
/// solution), plus the weighted objective.
#[derive(Debug, Clone)]
pub struct FractionalSolution {
    values: BTreeMap<EdgeId, Cap>,
    objective: Cap,
}

impl FractionalSolution {
    pub fn new(values: BTreeMap<EdgeId, Cap>, g: &FlexGraph) -> Self {
        let objective = values.iter().map(|(id, x)| g.edge(*id).cost * x).sum();
        FractionalSolution { values, objective }
    }

    pub fn zero(g: &FlexGraph, h: &BTreeSet<EdgeId>) -> Self {
        let values = g
            .edge_ids()
            .filter(|id| !h.contains(id))
            .map(|id| (id, 0.0))
            .collect();
        FractionalSolution {
            values,
            objective: 0.0,
        }
    }

    pub fn get(&self, id: EdgeId) -> Cap {
        self.values.get(&id).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (EdgeId, Cap)> + '_ {
        self.values.iter().map(|(k, v)| (*k, *v))
    }

    pub fn objective(&self) -> Cap {
        self.objective
    }

    /// Sum of values over `ids`.
    pub fn coverage(&self, ids: &[EdgeId]) -> Cap {
        ids.iter().map(|id| self.get(*id)).sum()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A generated cut constraint: candidate edges crossing a violated cut must
/// carry total fractional value at least 1.
#[derive(Debug, Clone)]
pub struct CutConstraint {
    pub support: Vec<EdgeId>,
    pub cut: Cut,
    pub pair: usize,
}

/// Inner exact solve of the pooled covering LP.
pub fn lp_solve(
    g: &FlexGraph,
    candidates: &[EdgeId],
    constraints: &[CutConstraint],
    bounds: &[Cap],
) -> Result<FractionalSolution> {
    let index: BTreeMap<EdgeId, usize> = candidates
        .iter()
        .enumerate()
        .map(|(i, id)| (*id, i))
        .collect();
    let costs: Vec<Cap> = candidates.iter().map(|id| g.edge(*id).cost).collect();
    let rows: Vec<CoverRow> = constraints
        .iter()
        .map(|c| CoverRow {
            support: c.support.iter().map(|id| index[id]).collect(),
            rhs: 1.0,
        })
        .collect();
    let sol = solve_covering(&costs, bounds, &rows)?;
    let values: BTreeMap<EdgeId, Cap> = candidates
        .iter()
        .enumerate()
        .map(|(i, id)| (*id, sol.x[i].clamp(0.0, 1.0)))
        .collect();
    Ok(FractionalSolution::new(values, g))
}

/// Find a violated cut whose candidate coverage under `x` is below
/// 1 - eps_sep, or `None` when every violated cut is covered.
///
/// Deletion sets B and pairs are scanned in lexicographic order and the first
/// hit is returned, so results are deterministic.
pub fn separation_oracle(
    x: &FractionalSolution,
    g: &FlexGraph,
    h: &BTreeSet<EdgeId>,
    p: u32,
    l: u32,
    eps_sep: Cap,
) -> Result<Option<CutConstraint>> {
    let unsafe_ids = g.unsafe_ids_in(h);
    let k_del = (l + 1) as usize;
    if unsafe_ids.len() < k_del {
        return Ok(None);
    }
    let candidate_mass: Cap = x.iter().map(|(_, v)| v).sum();
    let big = 1.0 + candidate_mass;
    let threshold = (p as Cap - 1.0) * big + 1.0 - eps_sep;

    let mut result: Option<CutConstraint> = None;
    let mut err: Option<Error> = None;
    for_each_combination(&unsafe_ids, k_del, &mut |b: &[EdgeId]| {
        let removed: BTreeSet<EdgeId> = b.iter().copied().collect();
        let arcs: Vec<(usize, usize, Cap)> = g
            .edges()
            .iter()
            .map(|e| {
                let c = if removed.contains(&e.id) {
                    0.0
                } else if h.contains(&e.id) {
                    big
                } else {
                    x.get(e.id)
                };
                (e.u, e.v, c)
            })
            .collect();
        for (i, &(s, t)) in g.pairs().iter().enumerate() {
            let (value, reach) = dinic(g.n(), &arcs, &[s].into(), &[t].into(), crate::EPS_FLOW);
            if value < threshold {
                let side: BTreeSet<usize> = (0..g.n()).filter(|v| reach[*v]).collect();
                let cut = match Cut::new(side, g.n()) {
                    Ok(c) => c,
                    Err(e) => {
                        err = Some(e);
                        return true;
                    }
                };
                // certify against the definition before returning
                if !verify::is_violated_cut(g, h, p, l, &cut) {
                    err = Some(Error::Internal(format!(
                        "separation produced a non-violated cut (pair {i}, B {b:?})"
                    )));
                    return true;
                }
                let candidates: BTreeSet<EdgeId> =
                    g.edge_ids().filter(|id| !h.contains(id)).collect();
                let support = cut.boundary(g, &candidates);
                let covered = x.coverage(&support);
                if covered >= 1.0 - eps_sep {
                    err = Some(Error::Internal(format!(
                        "separation cut already covered ({covered})"
                    )));
                    return true;
                }
                result = Some(CutConstraint {
                    support,
                    cut,
                    pair: i,
                });
                return true;
            }
        }
        false
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(result)
}

fn for_each_combination<T: Copy, F: FnMut(&[T]) -> bool>(items: &[T], k: usize, f: &mut F) {
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
    rec(items, k, 0, &mut Vec::with_capacity(k), f);
}

/// Solve Augment-LP for stage `l` by constraint generation, starting from the
/// given constraint pool (pass an empty vec on first use). Returns the optimum
/// and the final pool.
pub fn solve_augment_lp(
    g: &FlexGraph,
    h: &BTreeSet<EdgeId>,
    p: u32,
    l: u32,
    eps_lp: Cap,
    eps_sep: Cap,
    pool: &mut Vec<CutConstraint>,
) -> Result<FractionalSolution> {
    let (ok, witness) = verify::is_flex_connected(g, h, p, l);
    if !ok {
        return Err(Error::Infeasible(witness.expect("witness")));
    }
    let candidates: Vec<EdgeId> = g.edge_ids().filter(|id| !h.contains(id)).collect();
    let bounds = vec![1.0; candidates.len()];

    for c in pool.iter() {
        if c.support.is_empty() {
            return Err(Error::LpInfeasible {
                pair: c.pair,
                cut_side: c.cut.side().iter().copied().collect(),
            });
        }
    }

    let cap = 200 + 5 * candidates.len().max(1);
    let mut previous_obj = -1.0;
    for _ in 0..cap {
        let x = if pool.is_empty() {
            FractionalSolution::zero(g, h)
        } else {
            lp_solve(g, &candidates, pool, &bounds)?
        };
        debug_assert!(
            x.objective() >= previous_obj - eps_lp * (1.0 + x.objective().abs()),
            "objective decreased across constraint generation"
        );
        previous_obj = x.objective();
        match separation_oracle(&x, g, h, p, l, eps_sep)? {
            None => return Ok(x),
            Some(c) => {
                if c.support.is_empty() {
                    return Err(Error::LpInfeasible {
                        pair: c.pair,
                        cut_side: c.cut.side().iter().copied().collect(),
                    });
                }
                pool.push(c);
            }
        }
    }
    Err(Error::IterationCap(format!(
        "constraint generation (pool size {})",
        pool.len()
    )))
}
