use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyring::MultiPoly;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveSet {
    /// `j` with `|g_j(p)| ≤ act_tol`.
    pub indices: Vec<usize>,
    /// `j` with `g_j(p) < −act_tol`.
    pub violated: Vec<usize>,
}

pub fn active_set(g_list: &[MultiPoly], p: &[f64], act_tol: f64) -> Result<ActiveSet> {
    let mut indices = Vec::new();
    let mut violated = Vec::new();
    for (j, g) in g_list.iter().enumerate() {
        let v = g.eval(p)?;
        if v.abs() <= act_tol {
            indices.push(j);
        } else if v < -act_tol {
            violated.push(j);
        }
    }
    Ok(ActiveSet { indices, violated })
}

/// Active constraint gradients as rows: every `h_i`, then `g_j` for `j ∈ J`.
fn active_gradients(h_list: &[MultiPoly], g_list: &[MultiPoly], active: &[usize], p: &[f64]) -> Result<DMatrix<f64>> {
    let rows: Vec<DVector<f64>> = h_list
        .iter()
        .chain(active.iter().map(|&j| &g_list[j]))
        .map(|q| q.gradient(p))
        .collect::<Result<_>>()?;
    let mut g = DMatrix::zeros(rows.len(), p.len());
    for (i, r) in rows.iter().enumerate() {
        g.set_row(i, &r.transpose());
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LicReport {
    pub holds: bool,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

fn lic_of(g: &DMatrix<f64>) -> LicReport {
    if g.nrows() == 0 {
        return LicReport {
            holds: true,
            sigma_min: 0.0,
            sigma_max: 0.0,
        };
    }
    if g.nrows() > g.ncols() {
        let sv = g.singular_values();
        return LicReport {
            holds: false,
            sigma_min: 0.0,
            sigma_max: sv.max(),
        };
    }
    let sv = g.singular_values();
    let (lo, hi) = (sv.min(), sv.max());
    LicReport {
        holds: hi > 0.0 && lo > 1e-8 * hi,
        sigma_min: lo,
        sigma_max: hi,
    }
}

pub fn check_lic(h_list: &[MultiPoly], g_list: &[MultiPoly], active: &[usize], p: &[f64]) -> Result<LicReport> {
    Ok(lic_of(&active_gradients(h_list, g_list, active, p)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub lambda: Vec<f64>,
    /// One entry per inequality, zero off the active set.
    pub mu: Vec<f64>,
    /// `‖∇f − Σ λ ∇h − Σ μ ∇g‖`.
    pub residual: f64,
}

pub fn lagrange_multipliers(
    f: &MultiPoly,
    h_list: &[MultiPoly],
    g_list: &[MultiPoly],
    active: &[usize],
    p: &[f64],
) -> Result<Multipliers> {
    let g = active_gradients(h_list, g_list, active, p)?;
    if !lic_of(&g).holds {
        return Err(Error::MultipliersNotUnique);
    }
    let grad = f.gradient(p)?;
    let mut mu = vec![0.0; g_list.len()];
    if g.nrows() == 0 {
        return Ok(Multipliers {
            lambda: Vec::new(),
            mu,
            residual: grad.norm(),
        });
    }
    let gt = g.transpose();
    let sol = (&g * &gt)
        .cholesky()
        .map(|c| c.solve(&(&g * &grad)))
        .ok_or(Error::MultipliersNotUnique)?;
    let residual = (&grad - &gt * &sol).norm();
    let lambda = sol.rows(0, h_list.len()).iter().copied().collect();
    for (k, &j) in active.iter().enumerate() {
        mu[j] = sol[h_list.len() + k];
    }
    Ok(Multipliers { lambda, mu, residual })
}

/// `μ_j > strict_tol` on the active set; vacuous when `J = ∅`.
pub fn check_scc(mu: &[f64], active: &[usize], strict_tol: f64) -> bool {
    active.iter().all(|&j| mu[j] > strict_tol)
}

/// Orthonormal basis of the common null space of the active gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentBasis {
    pub point: Vec<f64>,
    pub basis: DMatrix<f64>,
}

impl TangentBasis {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

pub fn tangent_basis(h_list: &[MultiPoly], g_list: &[MultiPoly], active: &[usize], p: &[f64]) -> Result<TangentBasis> {
    let n = p.len();
    let g = active_gradients(h_list, g_list, active, p)?;
    if !lic_of(&g).holds {
        return Err(Error::MultipliersNotUnique);
    }
    let basis = if g.nrows() == 0 {
        DMatrix::identity(n, n)
    } else {
        let gram = (&g * g.transpose())
            .try_inverse()
            .ok_or(Error::MultipliersNotUnique)?;
        let proj = DMatrix::identity(n, n) - g.transpose() * gram * &g;
        let proj = (&proj + proj.transpose()) * 0.5;
        let eig = SymmetricEigen::new(proj);
        let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
        let mut b = DMatrix::zeros(n, keep.len());
        for (c, &i) in keep.iter().enumerate() {
            b.set_column(c, &eig.eigenvectors.column(i));
        }
        // re-orthogonalize against the gradients
        let mut b = &b - g.transpose() * (&g * g.transpose()).try_inverse().expect("checked above") * (&g * &b);
        if b.ncols() > 0 {
            b = b.qr().q();
        }
        b
    };
    Ok(TangentBasis {
        point: p.to_vec(),
        basis,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoscReport {
    pub holds: bool,
    /// Eigenvalues of `Vᵀ ∇²L V`, ascending.
    pub eigenvalues: Vec<f64>,
}

/// `∇²L = ∇²f − Σ μ_j ∇²g_j − Σ λ_i ∇²h_i`.
pub fn lagrangian_hessian(
    f: &MultiPoly,
    h_list: &[MultiPoly],
    g_list: &[MultiPoly],
    lambda: &[f64],
    mu: &[f64],
    p: &[f64],
) -> Result<DMatrix<f64>> {
    let mut h = f.hessian(p)?;
    for (hi, &l) in h_list.iter().zip(lambda) {
        if l != 0.0 {
            h -= hi.hessian(p)? * l;
        }
    }
    for (gj, &m) in g_list.iter().zip(mu) {
        if m != 0.0 {
            h -= gj.hessian(p)? * m;
        }
    }
    Ok(h)
}

#[allow(clippy::too_many_arguments)]
pub fn check_sosc(
    f: &MultiPoly,
    h_list: &[MultiPoly],
    g_list: &[MultiPoly],
    lambda: &[f64],
    mu: &[f64],
    p: &[f64],
    basis: &TangentBasis,
    eig_tol: f64,
) -> Result<SoscReport> {
    if basis.dim() == 0 {
        return Ok(SoscReport {
            holds: true,
            eigenvalues: Vec::new(),
        });
    }
    let h = lagrangian_hessian(f, h_list, g_list, lambda, mu, p)?;
    let v = &basis.basis;
    let proj = v.transpose() * h * v;
    let proj = (&proj + proj.transpose()) * 0.5;
    let mut eigenvalues: Vec<f64> = proj.symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let norm = eigenvalues.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    Ok(SoscReport {
        holds: eigenvalues[0] > eig_tol * norm.max(1.0),
        eigenvalues,
    })
}
