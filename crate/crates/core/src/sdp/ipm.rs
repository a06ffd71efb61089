//! Primal-dual interior-point method (HKM direction, Mehrotra predictor-
//! corrector) for
//!
//! ```text
//! primal:  min ⟨C, X⟩  s.t. ⟨A_s, X⟩ = b_s,  X ⪰ 0
//! dual:    max b·w     s.t. Σ w_s A_s + Z = C,  Z ⪰ 0
//! ```
//!
//! The reduced moment problem `min c·z s.t. F0 + Σ z_s F_s ⪰ 0` is the dual
//! with `C = F0`, `A_s = F_s`, `b = c` and `w = −z`, so the moment matrix is
//! the dual slack `Z`.

use std::collections::HashMap;

use nalgebra::{Cholesky, DMatrix, DVector};

use super::reduce::ReducedProblem;

#[derive(Debug, Clone, Copy)]
pub(crate) struct IpmSettings {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub max_iter: usize,
    pub verbose: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum IpmStatus {
    Optimal,
    Inaccurate,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub(crate) struct IpmResult {
    pub status: IpmStatus,
    /// `z = −w`.
    pub z: Vec<f64>,
    /// `⟨C, X⟩`, an upper bound on `−c·z` at optimality.
    pub primal_objective: f64,
    pub pinf: f64,
    pub dinf: f64,
    pub relgap: f64,
    pub iterations: usize,
}

type Blocks = Vec<DMatrix<f64>>;

/// Sparse constraint matrices grouped by block.
struct Operator {
    dims: Vec<usize>,
    /// `by_var[s]` = list of (block, upper-triangle entries).
    by_var: Vec<Vec<(usize, Vec<(usize, usize, f64)>)>>,
    /// `by_block[b]` = list of (variable, position in `by_var[variable]`).
    by_block: Vec<Vec<(usize, usize)>>,
}

impl Operator {
    fn new(p: &ReducedProblem) -> Self {
        let nb = p.block_dims.len();
        let mut by_var = Vec::with_capacity(p.fz.len());
        let mut by_block = vec![Vec::new(); nb];
        for (s, entries) in p.fz.iter().enumerate() {
            let mut groups: Vec<(usize, Vec<(usize, usize, f64)>)> = Vec::new();
            for &(b, r, c, v) in entries {
                match groups.last_mut() {
                    Some((lb, list)) if *lb == b => list.push((r, c, v)),
                    _ => groups.push((b, vec![(r, c, v)])),
                }
            }
            for (k, (b, _)) in groups.iter().enumerate() {
                by_block[*b].push((s, k));
            }
            by_var.push(groups);
        }
        Self {
            dims: p.block_dims.clone(),
            by_var,
            by_block,
        }
    }

    fn m(&self) -> usize {
        self.by_var.len()
    }

    /// `⟨A_s, Y⟩` for general (possibly nonsymmetric) `Y`.
    fn apply(&self, y: &Blocks) -> DVector<f64> {
        DVector::from_iterator(
            self.m(),
            self.by_var.iter().map(|groups| {
                groups
                    .iter()
                    .map(|(b, list)| inner_sparse(list, &y[*b]))
                    .sum::<f64>()
            }),
        )
    }

    /// `Σ w_s A_s`.
    fn adjoint(&self, w: &DVector<f64>) -> Blocks {
        let mut out: Blocks = self.dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (s, groups) in self.by_var.iter().enumerate() {
            let ws = w[s];
            if ws == 0.0 {
                continue;
            }
            for (b, list) in groups {
                let m = &mut out[*b];
                for &(r, c, v) in list {
                    m[(r, c)] += ws * v;
                    if r != c {
                        m[(c, r)] += ws * v;
                    }
                }
            }
        }
        out
    }

    /// Gram matrix `⟨A_s, A_t⟩`.
    fn gram(&self) -> DMatrix<f64> {
        let m = self.m();
        let mut out = DMatrix::zeros(m, m);
        for vars in &self.by_block {
            let mut at: HashMap<(usize, usize), Vec<(usize, f64)>> = HashMap::new();
            for &(s, ks) in vars {
                for &(r, c, v) in &self.by_var[s][ks].1 {
                    at.entry((r, c)).or_default().push((s, v));
                }
            }
            for ((r, c), list) in at {
                let weight = if r == c { 1.0 } else { 2.0 };
                for &(s, vs) in &list {
                    for &(t, vt) in &list {
                        out[(s, t)] += weight * vs * vt;
                    }
                }
            }
        }
        out
    }

    /// Schur complement `M_st = ⟨A_s, X A_t Z⁻¹⟩`.
    fn schur(&self, x: &Blocks, zinv: &Blocks) -> DMatrix<f64> {
        let m = self.m();
        let mut out = DMatrix::zeros(m, m);
        for (b, vars) in self.by_block.iter().enumerate() {
            let n = self.dims[b];
            for (pos, &(t, kt)) in vars.iter().enumerate() {
                let list = &self.by_var[t][kt].1;
                let mut xa = DMatrix::zeros(n, n);
                for &(r, c, v) in list {
                    xa.column_mut(c).axpy(v, &x[b].column(r), 1.0);
                    if r != c {
                        xa.column_mut(r).axpy(v, &x[b].column(c), 1.0);
                    }
                }
                let w = xa * &zinv[b];
                for &(s, ks) in &vars[..=pos] {
                    let val = inner_sparse(&self.by_var[s][ks].1, &w);
                    out[(s, t)] += val;
                    if s != t {
                        out[(t, s)] += val;
                    }
                }
            }
        }
        out
    }
}

fn inner_sparse(list: &[(usize, usize, f64)], y: &DMatrix<f64>) -> f64 {
    list.iter()
        .map(|&(r, c, v)| {
            if r == c {
                v * y[(r, c)]
            } else {
                v * (y[(r, c)] + y[(c, r)])
            }
        })
        .sum()
}

fn inner(a: &Blocks, b: &Blocks) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn frob(a: &Blocks) -> f64 {
    a.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt()
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Largest `α` with `X + α ΔX ⪰ 0` (infinite when `ΔX ⪰ 0`).
fn max_step(x: &Blocks, dx: &Blocks) -> f64 {
    let mut alpha = f64::INFINITY;
    for (xb, dxb) in x.iter().zip(dx) {
        if xb.nrows() == 0 {
            continue;
        }
        let Some(chol) = Cholesky::new(xb.clone()) else {
            return 0.0;
        };
        let l = chol.l();
        let Some(half) = l.solve_lower_triangular(dxb) else {
            return 0.0;
        };
        let Some(full) = l.solve_lower_triangular(&half.transpose()) else {
            return 0.0;
        };
        let lo = sym(full).symmetric_eigenvalues().min();
        if lo < 0.0 {
            alpha = alpha.min(-1.0 / lo);
        }
    }
    alpha
}

fn inverse_spd(z: &Blocks) -> Option<Blocks> {
    z.iter()
        .map(|m| {
            if m.nrows() == 0 {
                return Some(m.clone());
            }
            Cholesky::new(m.clone()).map(|c| sym(c.inverse()))
        })
        .collect()
}

/// Cholesky of a symmetric positive semidefinite system with Jacobi scaling,
/// an escalating ridge when the matrix is numerically singular, and
/// iterative refinement against the unregularized matrix.
struct Factor {
    matrix: DMatrix<f64>,
    scale: DVector<f64>,
    chol: Option<Cholesky<f64, nalgebra::Dyn>>,
    regularized: bool,
}

impl Factor {
    fn new(matrix: DMatrix<f64>) -> Self {
        let n = matrix.nrows();
        let scale = DVector::from_iterator(
            n,
            (0..n).map(|i| {
                let d = matrix[(i, i)];
                if d > 0.0 {
                    1.0 / d.sqrt()
                } else {
                    1.0
                }
            }),
        );
        let mut scaled = matrix.clone();
        for j in 0..n {
            for i in 0..n {
                scaled[(i, j)] *= scale[i] * scale[j];
            }
        }
        let mut chol = Cholesky::new(scaled.clone());
        let mut regularized = false;
        let mut ridge = 1e-14;
        while chol.is_none() && ridge < 1.0 {
            regularized = true;
            let mut shifted = scaled.clone();
            for i in 0..n {
                shifted[(i, i)] += ridge;
            }
            chol = Cholesky::new(shifted);
            ridge *= 100.0;
        }
        Self {
            matrix,
            scale,
            chol,
            regularized,
        }
    }

    fn solve_once(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let Some(chol) = &self.chol else {
            return DVector::zeros(rhs.len());
        };
        let scaled = rhs.component_mul(&self.scale);
        chol.solve(&scaled).component_mul(&self.scale)
    }

    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut x = self.solve_once(rhs);
        let rounds = if self.regularized { 5 } else { 1 };
        for _ in 0..rounds {
            let r = rhs - &self.matrix * &x;
            x += self.solve_once(&r);
        }
        x
    }
}

const STEP_FRACTION: f64 = 0.98;

pub(crate) fn solve(p: &ReducedProblem, settings: &IpmSettings) -> IpmResult {
    let op = Operator::new(p);
    let m = op.m();
    let ntot: usize = p.block_dims.iter().sum::<usize>().max(1);
    let b = DVector::from_column_slice(&p.c);
    let cmat = &p.f0;
    let bnorm = b.norm();
    let cnorm = frob(cmat);

    // SDPT3-style scaled identity start.
    let anorms: Vec<f64> = p
        .fz
        .iter()
        .map(|e| {
            e.iter()
                .map(|&(_, r, c, v)| if r == c { v * v } else { 2.0 * v * v })
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let mut x: Blocks = Vec::new();
    let mut z: Blocks = Vec::new();
    for (bk, &n) in p.block_dims.iter().enumerate() {
        let nf = n as f64;
        let mut xi: f64 = 10f64.max(nf.sqrt());
        let mut eta: f64 = 10f64.max(nf.sqrt()).max(cmat[bk].norm());
        for s in 0..m {
            xi = xi.max(nf * (1.0 + b[s].abs()) / (1.0 + anorms[s]));
            eta = eta.max(anorms[s]);
        }
        x.push(DMatrix::identity(n, n) * xi);
        z.push(DMatrix::identity(n, n) * eta);
    }
    let mut w = DVector::zeros(m);
    let gram = Factor::new(op.gram());

    let mut best = IpmResult {
        status: IpmStatus::IterationLimit,
        z: Vec::new(),
        primal_objective: f64::NAN,
        pinf: f64::INFINITY,
        dinf: f64::INFINITY,
        relgap: f64::INFINITY,
        iterations: 0,
    };
    let mut best_score = f64::INFINITY;
    let mut since_best = 0;
    let mut stalls = 0;

    for iter in 0..=settings.max_iter {
        let rp = &b - op.apply(&x);
        let atw = op.adjoint(&w);
        let rd: Blocks = (0..cmat.len()).map(|k| &cmat[k] - &z[k] - &atw[k]).collect();
        let pobj = inner(cmat, &x);
        let dobj = b.dot(&w);
        let mu = inner(&x, &z) / ntot as f64;
        let pinf = rp.norm() / (1.0 + bnorm);
        let dinf = frob(&rd) / (1.0 + cnorm);
        let relgap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        if settings.verbose {
            eprintln!(
                "ipm {iter:3}  pobj {pobj:+.10e}  dobj {dobj:+.10e}  gap {relgap:.2e}  pinf {pinf:.2e}  dinf {dinf:.2e}  mu {mu:.2e}"
            );
        }
        let score = (pinf / settings.feas_tol)
            .max(dinf / settings.feas_tol)
            .max(relgap / settings.gap_tol);
        if score < best_score {
            best_score = score;
            since_best = 0;
            best.z = w.iter().map(|v| -v).collect();
            best.primal_objective = pobj;
            best.pinf = pinf;
            best.dinf = dinf;
            best.relgap = relgap;
            best.iterations = iter;
        } else {
            since_best += 1;
        }
        if score <= 1.0 {
            best.status = IpmStatus::Optimal;
            best.iterations = iter;
            return best;
        }
        let trace_x: f64 = x.iter().map(|m| m.trace()).sum();
        if dinf <= settings.feas_tol && dobj > 1e8 * (1.0 + bnorm) && w.amax() > 1e10 {
            best.status = IpmStatus::Unbounded;
            best.iterations = iter;
            return best;
        }
        if pinf <= settings.feas_tol && trace_x > 1e12 * (1.0 + cnorm) && pobj < -1e8 {
            best.status = IpmStatus::Infeasible;
            best.iterations = iter;
            return best;
        }
        if since_best >= 8 || mu < 1e-15 * (1.0 + pobj.abs()) {
            break;
        }
        if iter == settings.max_iter {
            break;
        }

        let Some(zinv) = inverse_spd(&z) else {
            break;
        };
        let factor = Factor::new(op.schur(&x, &zinv));
        let x_rd_zi: Blocks = (0..x.len()).map(|k| &x[k] * &rd[k] * &zinv[k]).collect();
        let h0 = op.apply(&x_rd_zi);

        let direction = |rhs: DVector<f64>, target: f64, corr: Option<&Blocks>| {
            let dw = factor.solve(&rhs);
            let atdw = op.adjoint(&dw);
            let dz: Blocks = (0..z.len()).map(|k| &rd[k] - &atdw[k]).collect();
            let dx: Blocks = (0..x.len())
                .map(|k| {
                    let mut d = &zinv[k] * target - &x[k] - sym(&x[k] * &dz[k] * &zinv[k]);
                    if let Some(c) = corr {
                        d -= sym(c[k].clone());
                    }
                    sym(d)
                })
                .collect();
            // Roundoff in `X ΔZ Z⁻¹` grows like cond(Z); restore `A(ΔX) = R_p`
            // with the minimum-norm correction.
            let miss = &rp - op.apply(&dx);
            let fix = op.adjoint(&gram.solve(&miss));
            let fixed: Blocks = dx.iter().zip(fix).map(|(d, f)| d + f).collect();
            // The correction can leave the cone when X is nearly singular.
            if max_step(&x, &fixed) >= 0.5 * max_step(&x, &dx).min(1.0) {
                (fixed, dw, dz)
            } else {
                (dx, dw, dz)
            }
        };

        // predictor
        let (dxa, _, dza) = direction(&b + &h0, 0.0, None);
        let ap = (STEP_FRACTION * max_step(&x, &dxa)).min(1.0);
        let ad = (STEP_FRACTION * max_step(&z, &dza)).min(1.0);
        let xa: Blocks = (0..x.len()).map(|k| &x[k] + &dxa[k] * ap).collect();
        let za: Blocks = (0..z.len()).map(|k| &z[k] + &dza[k] * ad).collect();
        let mu_aff = inner(&xa, &za) / ntot as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let corr: Blocks = (0..x.len()).map(|k| &dxa[k] * &dza[k] * &zinv[k]).collect();
        let rhs = &b - op.apply(&zinv) * (sigma * mu) + &h0 + op.apply(&corr);
        let (dx, dw, dz) = direction(rhs, sigma * mu, Some(&corr));
        let ap = (STEP_FRACTION * max_step(&x, &dx)).min(1.0);
        let ad = (STEP_FRACTION * max_step(&z, &dz)).min(1.0);
        if settings.verbose {
            eprintln!("    sigma {sigma:.2e} mu_aff {mu_aff:.2e} steps {ap:.3e} {ad:.3e}");
        }
        if ap < 1e-10 && ad < 1e-10 {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        } else {
            stalls = 0;
        }
        for k in 0..x.len() {
            x[k] = sym(&x[k] + &dx[k] * ap);
            z[k] = sym(&z[k] + &dz[k] * ad);
        }
        w += dw * ad;
    }

    if best_score <= 1e3 {
        best.status = IpmStatus::Inaccurate;
    }
    best
}
