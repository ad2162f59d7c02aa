//! Dense two-phase primal simplex with Bland's rule, built for small covering
//! LPs of the form  min c.x  s.t.  A x >= b,  0 <= x <= u.
//!
//! No external solver: the constraint pools this library generates stay tiny,
//! so a textbook tableau is exact enough and keeps the dependency surface flat.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One covering row: sum of x over `support` >= rhs.
#[derive(Debug, Clone)]
pub struct CoverRow {
    pub support: Vec<usize>,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct LpSolution<S> {
    pub x: Vec<S>,
    pub objective: S,
}

/// Solve  min c.x  s.t. rows, 0 <= x <= upper.
///
/// Returns `Error::LpInfeasible`-free errors: infeasibility here is reported as
/// `Error::Internal` because the callers guarantee every row has support; rows
/// with empty support are rejected up front.
pub fn solve_covering<S: Scalar>(
    costs: &[S],
    upper: &[S],
    rows: &[CoverRow],
) -> Result<LpSolution<S>> {
    let n = costs.len();
    assert_eq!(upper.len(), n);
    for (i, r) in rows.iter().enumerate() {
        if r.support.is_empty() && r.rhs > 0.0 {
            return Err(Error::Internal(format!("covering row {i} has empty support")));
        }
        if r.support.iter().any(|&j| j >= n) {
            return Err(Error::Internal(format!("covering row {i} references unknown var")));
        }
    }
    if n == 0 {
        return Ok(LpSolution {
            x: Vec::new(),
            objective: S::zero(),
        });
    }

    // Standard form:
    //   cover row i:  sum_{j in S_i} x_j - s_i + a_i = b_i     (surplus s, artificial a)
    //   bound row j:  x_j + w_j = u_j                          (slack w)
    // Variable layout: [x (n)] [s (m)] [w (n)] [a (m)]
    let m = rows.len();
    let cols = n + m + n + m;
    let nrows = m + n;
    let eps = S::from_f64_lit(1e-9);

    let mut tab = vec![vec![S::zero(); cols + 1]; nrows];
    let mut basis = vec![0usize; nrows];

    for (i, r) in rows.iter().enumerate() {
        for &j in &r.support {
            tab[i][j] = tab[i][j] + S::one(); // duplicate support entries accumulate
        }
        tab[i][n + i] = -S::one();
        tab[i][n + m + n + i] = S::one();
        tab[i][cols] = S::from_f64_lit(r.rhs);
        basis[i] = n + m + n + i;
    }
    for j in 0..n {
        tab[m + j][j] = S::one();
        tab[m + j][n + m + j] = S::one();
        tab[m + j][cols] = upper[j];
        basis[m + j] = n + m + j;
    }

    // Phase 1: minimize sum of artificials.
    let mut phase1 = vec![S::zero(); cols];
    for a in (n + m + n)..cols {
        phase1[a] = S::one();
    }
    simplex_loop(&mut tab, &mut basis, &phase1, cols, eps)?;
    let phase1_obj: S = basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= n + m + n)
        .map(|(i, _)| tab[i][cols])
        .sum();
    if phase1_obj > S::from_f64_lit(1e-7) {
        return Err(Error::Internal(format!(
            "covering LP infeasible (phase-1 residual {phase1_obj})"
        )));
    }

    // Drive leftover artificials out of the basis (degenerate pivots).
    for i in 0..nrows {
        if basis[i] >= n + m + n {
            if let Some(j) = (0..n + m + n).find(|&j| tab[i][j].abs() > eps) {
                pivot(&mut tab, &mut basis, i, j, cols);
            }
            // else: redundant row, harmless to leave with a zero artificial
        }
    }

    // Phase 2: original objective; artificial columns are frozen out.
    let mut phase2 = vec![S::zero(); cols];
    phase2[..n].copy_from_slice(costs);
    simplex_loop(&mut tab, &mut basis, &phase2, n + m + n, eps)?;

    let mut x = vec![S::zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] = tab[i][cols];
        }
    }
    let objective = x.iter().zip(costs).map(|(&xi, &ci)| xi * ci).sum();
    Ok(LpSolution { x, objective })
}

/// Bland-rule simplex over the first `active_cols` columns.
fn simplex_loop<S: Scalar>(
    tab: &mut [Vec<S>],
    basis: &mut [usize],
    costs: &[S],
    active_cols: usize,
    eps: S,
) -> Result<()> {
    let cols = tab[0].len() - 1;
    let nrows = tab.len();
    let cap = 50_000usize;
    for _ in 0..cap {
        // reduced costs: c_j - c_B . B^{-1} A_j, computed from the tableau
        let mut entering = None;
        for j in 0..active_cols {
            if basis.contains(&j) {
                continue;
            }
            let mut red = costs[j];
            for i in 0..nrows {
                red = red - costs[basis[i]] * tab[i][j];
            }
            if red < -eps {
                entering = Some(j); // Bland: lowest index
                break;
            }
        }
        let Some(j) = entering else {
            return Ok(());
        };
        let mut leave: Option<(usize, S)> = None;
        for i in 0..nrows {
            if tab[i][j] > eps {
                let ratio = tab[i][cols] / tab[i][j];
                let better = match leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < lr - eps || (ratio < lr + eps && basis[i] < basis[li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((i, _)) = leave else {
            return Err(Error::Internal("LP unbounded".into()));
        };
        pivot(tab, basis, i, j, cols);
    }
    Err(Error::IterationCap("simplex pivot loop".into()))
}

fn pivot<S: Scalar>(tab: &mut [Vec<S>], basis: &mut [usize], row: usize, col: usize, cols: usize) {
    let piv = tab[row][col];
    for v in tab[row].iter_mut() {
        *v = *v / piv;
    }
    for i in 0..tab.len() {
        if i == row {
            continue;
        }
        let factor = tab[i][col];
        if factor.abs() > S::zero() {
            for j in 0..=cols {
                let delta = factor * tab[row][j];
                tab[i][j] = tab[i][j] - delta;
            }
        }
    }
    basis[row] = col;
}
