use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{moment_matrix, MomentSequence};
use crate::polyring::ProductSphereShape;
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractionSettings {
    pub seed: u64,
    /// Blocks within `10 · feas_tol` of unit norm are renormalized.
    pub feas_tol: f64,
    /// Fresh random combinations tried after the first one fails.
    pub retries: usize,
}

impl Default for ExtractionSettings {
    fn default() -> Self {
        Self {
            seed: 0,
            feas_tol: 1e-5,
            retries: 3,
        }
    }
}

/// `Σ c_j δ_{x(j)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    pub atoms: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// `max |y_α − Σ c_j x(j)^α|` over `|α| ≤ 2t`.
    pub moment_residual: f64,
}

impl AtomicMeasure {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// Rows of `v` chosen by greedy pivoting on the residual row norms.
/// Returns the rows and the smallest accepted pivot.
fn pivot_rows(v: &DMatrix<f64>, count: usize, candidates: usize) -> (Vec<usize>, f64) {
    let mut w = v.rows(0, candidates).into_owned();
    let mut chosen = Vec::with_capacity(count);
    let mut smallest = f64::INFINITY;
    for _ in 0..count {
        let mut best = (0, -1.0);
        for r in 0..candidates {
            if chosen.contains(&r) {
                continue;
            }
            let n = w.row(r).norm();
            if n > best.1 * (1.0 + 1e-12) {
                best = (r, n);
            }
        }
        let (r, n) = best;
        smallest = smallest.min(n);
        chosen.push(r);
        if n > 0.0 {
            let q = w.row(r).transpose() / n;
            let proj = &w * &q;
            w -= proj * q.transpose();
        }
    }
    (chosen, smallest)
}

/// Recover the atomic measure behind a flat `M_t(y)` of rank `r`.
pub fn extract_atoms(
    y: &MomentSequence,
    t: u32,
    r: usize,
    shape: Option<&ProductSphereShape>,
    settings: &ExtractionSettings,
) -> Result<AtomicMeasure> {
    if r == 0 || t == 0 {
        return Err(Error::Extraction("need rank ≥ 1 and order ≥ 1".into()));
    }
    let n = y.nvars();
    let mt = moment_matrix(y, t)?;
    let dim = mt.nrows();
    if r > dim {
        return Err(Error::Extraction(format!("rank {r} exceeds the moment matrix size {dim}")));
    }
    let eig = SymmetricEigen::new(mt);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    if eig.eigenvalues[order[r - 1]] <= 0.0 {
        return Err(Error::Extraction(format!("moment matrix has fewer than {r} positive eigenvalues")));
    }
    let mut v = DMatrix::zeros(dim, r);
    for (c, &i) in order[..r].iter().enumerate() {
        v.set_column(c, &(eig.eigenvectors.column(i) * eig.eigenvalues[i].sqrt()));
    }

    let basis = y.basis();
    let lower = basis.prefix_len(t - 1);
    if lower < r {
        return Err(Error::Extraction(format!(
            "rank {r} exceeds the {lower} monomials of degree ≤ {}",
            t - 1
        )));
    }
    let sigma_max = eig.eigenvalues[order[0]].sqrt();
    let threshold = 1e-8 * sigma_max;
    let (rows, pivot) = pivot_rows(&v, r, lower);
    if pivot < threshold {
        return Err(Error::ExtractionIllConditioned { pivot, threshold });
    }
    let vb = v.select_rows(&rows);
    let vb_inv = vb
        .try_inverse()
        .ok_or_else(|| Error::Extraction("singular pivot block".into()))?;
    let u = &v * vb_inv;

    let mult: Vec<DMatrix<f64>> = (0..n)
        .map(|i| {
            let mut m = DMatrix::zeros(r, r);
            for (bi, &row) in rows.iter().enumerate() {
                let shifted = basis.get(row).increment(i);
                let idx = basis.index_of(&shifted).expect("degree ≤ t");
                m.set_row(bi, &u.row(idx));
            }
            m
        })
        .collect();

    let mut rng = stream_rng(settings.seed, Stream::Extraction, u64::from(t) << 32 | r as u64);
    let mut last_err = Error::ComplexAtoms;
    for _ in 0..=settings.retries {
        let mut coefs: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = coefs.iter().sum();
        coefs.iter_mut().for_each(|c| *c /= total);
        let combo = mult
            .iter()
            .zip(&coefs)
            .fold(DMatrix::zeros(r, r), |acc, (m, &c)| acc + m * c);
        let scale = combo.norm().max(1e-300);
        let Some(schur) = Schur::try_new(combo, 1e-14, 10_000) else {
            last_err = Error::Extraction("Schur decomposition did not converge".into());
            continue;
        };
        let (q, tri) = schur.unpack();
        if (0..r.saturating_sub(1)).any(|j| tri[(j + 1, j)].abs() > 1e-8 * scale) {
            last_err = Error::ComplexAtoms;
            continue;
        }
        let diag: Vec<f64> = (0..r).map(|j| tri[(j, j)]).collect();
        let clustered = (0..r).any(|a| (a + 1..r).any(|b| (diag[a] - diag[b]).abs() < 1e-6 * scale));
        if clustered {
            last_err = Error::Extraction("eigenvalues of the random combination are clustered".into());
            continue;
        }
        let mut atoms: Vec<Vec<f64>> = (0..r)
            .map(|j| {
                let qj = q.column(j);
                mult.iter().map(|m| qj.dot(&(m * qj))).collect()
            })
            .collect();
        if let Some(shape) = shape {
            for atom in &mut atoms {
                let near = shape
                    .block_dims()
                    .iter()
                    .enumerate()
                    .all(|(i, _)| {
                        let norm: f64 = atom[shape.block_range(i)].iter().map(|v| v * v).sum::<f64>().sqrt();
                        (norm - 1.0).abs() <= 10.0 * settings.feas_tol
                    });
                if near {
                    shape.normalize_blocks(atom);
                }
            }
        }
        let weights = fit_weights(y, t, &atoms)?;
        let moment_residual = moment_residual(y, 2 * t, &atoms, &weights);
        return Ok(AtomicMeasure {
            atoms,
            weights,
            moment_residual,
        });
    }
    Err(last_err)
}

/// Least-squares fit of `Σ c_j x(j)^α = y_α` over `|α| ≤ t`.
fn fit_weights(y: &MomentSequence, t: u32, atoms: &[Vec<f64>]) -> Result<Vec<f64>> {
    let basis = y.basis();
    let rows = basis.prefix_len(t);
    let vander = DMatrix::from_fn(rows, atoms.len(), |a, j| basis.get(a).eval(&atoms[j]));
    let rhs = DVector::from_column_slice(&y.values()[..rows]);
    let c = vander
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Extraction(e.to_string()))?;
    if let Some(bad) = c.iter().find(|&&w| !(w > 0.0)) {
        return Err(Error::Extraction(format!("nonpositive weight {bad:e}")));
    }
    let total = c.sum();
    Ok(c.iter().map(|w| w / total).collect())
}

fn moment_residual(y: &MomentSequence, order: u32, atoms: &[Vec<f64>], weights: &[f64]) -> f64 {
    let basis = y.basis();
    (0..basis.prefix_len(order))
        .map(|a| {
            let e = basis.get(a);
            let model: f64 = atoms.iter().zip(weights).map(|(x, w)| w * e.eval(x)).sum();
            (model - y.values()[a]).abs()
        })
        .fold(0.0, f64::max)
}
