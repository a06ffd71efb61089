//! Reformulation of a [`ConicProblem`] in the free variables left by
//! equality elimination, followed by facial reduction of every PSD block.
//!
//! Moment matrices under sphere equalities have a kernel shared by every
//! feasible point (the coefficient vectors of `x^α s_i`), so the block has no
//! positive definite point. If `K` spans the common kernel of the affine
//! family `F(z)` and the row set `J` makes `K_J` invertible, then
//! `F(z) ⪰ 0 ⟺ F(z)_II ⪰ 0` with `I` the complement of `J`, and the ranks
//! agree. Dropping `J` keeps the block sparse.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};

use super::elimination::{Elimination, VarMap};
use crate::moments::ConicProblem;

/// Upper-triangle entry `(block, row, col, value)` with `row ≤ col`.
pub(crate) type Entry = (usize, usize, usize, f64);

/// `min c·z + c0  s.t.  F0 + Σ z_s F_s ⪰ 0` (block diagonal).
#[derive(Debug, Clone)]
pub(crate) struct ReducedProblem {
    pub block_dims: Vec<usize>,
    pub c: Vec<f64>,
    pub c0: f64,
    pub f0: Vec<DMatrix<f64>>,
    pub fz: Vec<Vec<Entry>>,
}

/// Reduced problem plus the maps back to the original variables.
#[derive(Debug, Clone)]
pub(crate) struct Reformulation {
    pub elimination: Elimination,
    pub problem: ReducedProblem,
    /// Free variable of the elimination for each reduced variable.
    pub active: Vec<usize>,
    /// Free variables that appear in no block but carry objective weight.
    pub unbounded_direction: bool,
    /// Rows removed by facial reduction, per original block.
    pub dropped_rows: Vec<usize>,
}

impl Reformulation {
    pub fn build(problem: &ConicProblem, elimination: Elimination) -> Self {
        let nfree = elimination.num_free;
        let mut c = vec![0.0; nfree];
        let mut c0 = 0.0;
        for (v, &cv) in problem.objective.iter().enumerate() {
            if cv == 0.0 {
                continue;
            }
            match &elimination.vars[v] {
                VarMap::Free(i) => c[*i] += cv,
                VarMap::Dependent { constant, terms } => {
                    c0 += cv * constant;
                    for &(i, t) in terms {
                        c[i] += cv * t;
                    }
                }
            }
        }

        let dims: Vec<usize> = problem.blocks.iter().map(|b| b.dim).collect();
        let mut f0: Vec<DMatrix<f64>> = dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        let mut acc: Vec<HashMap<(usize, usize, usize), f64>> = vec![HashMap::new(); nfree];
        for (b, block) in problem.blocks.iter().enumerate() {
            for e in block.entries.iter().filter(|e| e.row <= e.col) {
                match &elimination.vars[e.var] {
                    VarMap::Free(i) => {
                        *acc[*i].entry((b, e.row, e.col)).or_insert(0.0) += e.coef;
                    }
                    VarMap::Dependent { constant, terms } => {
                        let v = e.coef * constant;
                        f0[b][(e.row, e.col)] += v;
                        if e.row != e.col {
                            f0[b][(e.col, e.row)] += v;
                        }
                        for &(i, t) in terms {
                            *acc[i].entry((b, e.row, e.col)).or_insert(0.0) += e.coef * t;
                        }
                    }
                }
            }
        }
        let fz: Vec<Vec<Entry>> = acc
            .into_iter()
            .map(|m| {
                let scale = m.values().fold(0.0f64, |a, v| a.max(v.abs()));
                let mut v: Vec<Entry> = m
                    .into_iter()
                    .filter(|(_, v)| v.abs() > 1e-13 * scale.max(1.0))
                    .map(|((b, r, c), v)| (b, r, c, v))
                    .collect();
                v.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
                v
            })
            .collect();

        let mut reduced = ReducedProblem {
            block_dims: dims,
            c,
            c0,
            f0,
            fz,
        };
        let dropped_rows = facial_reduction(&mut reduced);

        let cscale = reduced.c.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
        let mut active = Vec::with_capacity(nfree);
        let mut unbounded_direction = false;
        for i in 0..nfree {
            if reduced.fz[i].is_empty() {
                if reduced.c[i].abs() > 1e-12 * cscale {
                    unbounded_direction = true;
                }
            } else {
                active.push(i);
            }
        }
        reduced.c = active.iter().map(|&i| reduced.c[i]).collect();
        reduced.fz = active.iter().map(|&i| std::mem::take(&mut reduced.fz[i])).collect();

        // Blocks emptied by facial reduction carry no constraint.
        let keep: Vec<usize> = (0..reduced.block_dims.len())
            .filter(|&b| reduced.block_dims[b] > 0)
            .collect();
        if keep.len() != reduced.block_dims.len() {
            let remap: HashMap<usize, usize> = keep.iter().enumerate().map(|(n, &o)| (o, n)).collect();
            reduced.block_dims = keep.iter().map(|&b| reduced.block_dims[b]).collect();
            reduced.f0 = keep.iter().map(|&b| reduced.f0[b].clone()).collect();
            for entries in &mut reduced.fz {
                for e in entries.iter_mut() {
                    e.0 = remap[&e.0];
                }
            }
        }

        Self {
            elimination,
            problem: reduced,
            active,
            unbounded_direction,
            dropped_rows,
        }
    }

    /// Original variables `y` from reduced variables.
    pub fn recover_y(&self, z_active: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.elimination.num_free];
        for (k, &i) in self.active.iter().enumerate() {
            z[i] = z_active[k];
        }
        self.elimination.expand(&z)
    }
}

/// Restrict every block to a principal submatrix that excludes the common
/// kernel of the affine family. Returns how many rows each block lost.
fn facial_reduction(p: &mut ReducedProblem) -> Vec<usize> {
    let nb = p.block_dims.len();
    let mut grams: Vec<DMatrix<f64>> = p.f0.iter().map(|f| f * f).collect();
    for entries in &p.fz {
        // columns of the symmetric matrix F_s, per block
        let mut cols: HashMap<(usize, usize), Vec<(usize, f64)>> = HashMap::new();
        for &(b, r, c, v) in entries {
            cols.entry((b, c)).or_default().push((r, v));
            if r != c {
                cols.entry((b, r)).or_default().push((c, v));
            }
        }
        for ((b, _), col) in cols {
            let g = &mut grams[b];
            for &(i, vi) in &col {
                for &(l, vl) in &col {
                    g[(i, l)] += vi * vl;
                }
            }
        }
    }

    let mut dropped = vec![0; nb];
    for b in 0..nb {
        let n = p.block_dims[b];
        if n == 0 {
            continue;
        }
        let eig = SymmetricEigen::new(grams[b].clone());
        let top = eig.eigenvalues.max().max(0.0);
        let kernel: Vec<usize> = (0..n)
            .filter(|&i| eig.eigenvalues[i] <= 1e-9 * top.max(f64::MIN_POSITIVE))
            .collect();
        if kernel.is_empty() {
            continue;
        }
        let mut k = DMatrix::zeros(n, kernel.len());
        for (c, &i) in kernel.iter().enumerate() {
            k.set_column(c, &eig.eigenvectors.column(i));
        }
        let drop = pivot_rows(&k);
        let keep: Vec<usize> = (0..n).filter(|i| !drop.contains(i)).collect();
        let new_index: HashMap<usize, usize> = keep.iter().enumerate().map(|(a, &o)| (o, a)).collect();

        p.f0[b] = p.f0[b].select_rows(&keep).select_columns(&keep);
        for entries in &mut p.fz {
            entries.retain_mut(|e| {
                if e.0 != b {
                    return true;
                }
                match (new_index.get(&e.1), new_index.get(&e.2)) {
                    (Some(&r), Some(&c)) => {
                        e.1 = r.min(c);
                        e.2 = r.max(c);
                        true
                    }
                    _ => false,
                }
            });
        }
        p.block_dims[b] = keep.len();
        dropped[b] = drop.len();
    }
    dropped
}

/// Greedy row pivoting of the `n × d` kernel basis: returns `d` rows whose
/// restriction is well conditioned. Ties go to the later row, which on moment
/// matrices is the larger monomial.
fn pivot_rows(k: &DMatrix<f64>) -> Vec<usize> {
    let (n, d) = k.shape();
    let mut w = k.clone();
    let mut chosen = Vec::with_capacity(d);
    for _ in 0..d {
        let norms: Vec<f64> = (0..n)
            .map(|r| if chosen.contains(&r) { -1.0 } else { w.row(r).norm() })
            .collect();
        let best = norms.iter().cloned().fold(f64::MIN, f64::max);
        let r = (0..n)
            .rev()
            .find(|&r| norms[r] >= best * (1.0 - 1e-9))
            .expect("a candidate row exists");
        chosen.push(r);
        let q = w.row(r).transpose() / norms[r];
        let proj = &w * &q;
        w -= proj * q.transpose();
    }
    chosen
}
