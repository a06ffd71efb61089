use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::moments::{moment_matrix, MomentSequence};

/// Rank as the number of singular values above
/// `rel_tol · σ_max · max(dim, 1)`. Singular values are returned descending.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> (usize, Vec<f64>) {
    if m.is_empty() {
        return (0, Vec::new());
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let top = sv[0];
    if top <= 0.0 {
        return (0, sv);
    }
    let dim = m.nrows().max(m.ncols()).max(1) as f64;
    let cutoff = rel_tol * top * dim;
    (sv.iter().filter(|&&s| s > cutoff).count(), sv)
}

/// One scanned order of the flat-truncation test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankCheck {
    pub t: u32,
    pub rank: usize,
    pub rank_lower: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatTruncationReport {
    pub found: bool,
    /// Smallest qualifying `t`, when found.
    pub t: Option<u32>,
    /// `rank M_t(y)` at the reported `t`.
    pub rank: Option<usize>,
    /// `rank M_{t−d_K}(y)` at the reported `t`.
    pub rank_lower: Option<usize>,
    pub singular_values: Vec<f64>,
    pub singular_values_lower: Vec<f64>,
    pub scanned: Vec<RankCheck>,
}

/// Scan `t = d̄, …, k` for `rank M_{t−d_K}(y) = rank M_t(y)`.
pub fn flat_truncation(
    y: &MomentSequence,
    k: u32,
    d_k: u32,
    d_bar: u32,
    rel_tol: f64,
) -> Result<FlatTruncationReport> {
    let mut report = FlatTruncationReport {
        found: false,
        t: None,
        rank: None,
        rank_lower: None,
        singular_values: Vec::new(),
        singular_values_lower: Vec::new(),
        scanned: Vec::new(),
    };
    for t in d_bar.max(d_k)..=k {
        let (rank, sv) = numerical_rank(&moment_matrix(y, t)?, rel_tol);
        let (rank_lower, sv_lower) = numerical_rank(&moment_matrix(y, t - d_k)?, rel_tol);
        report.scanned.push(RankCheck { t, rank, rank_lower });
        if rank == rank_lower && rank > 0 {
            report.found = true;
            report.t = Some(t);
            report.rank = Some(rank);
            report.rank_lower = Some(rank_lower);
            report.singular_values = sv;
            report.singular_values_lower = sv_lower;
            break;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::dirac_moments;

    #[test]
    fn rank_basics() {
        assert_eq!(numerical_rank(&DMatrix::identity(5, 5), 1e-6).0, 5);
        let v = DMatrix::from_column_slice(3, 1, &[1.0, -2.0, 0.5]);
        assert_eq!(numerical_rank(&(&v * v.transpose()), 1e-6).0, 1);
        assert_eq!(numerical_rank(&DMatrix::zeros(3, 3), 1e-6).0, 0);
    }

    #[test]
    fn two_atoms_flat_at_order_three() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p = vec![1.0, 0.0, s, s];
        let q = vec![0.0, -1.0, -s, s];
        let y = dirac_moments(&[p, q], &[0.5, 0.5], 6).unwrap();
        let r = flat_truncation(&y, 3, 1, 1, 1e-6).unwrap();
        assert!(r.found);
        assert_eq!(r.rank, Some(2));
    }
}
