//! Flat truncation, atom extraction and verification of the first- and
//! second-order optimality conditions at extracted points.

mod extract;
mod kkt;
mod rank;
mod refine;

pub use extract::{extract_atoms, AtomicMeasure, ExtractionSettings};
pub use kkt::{
    active_set, check_lic, check_scc, check_sosc, lagrange_multipliers, lagrangian_hessian, tangent_basis,
    ActiveSet, LicReport, Multipliers, SoscReport, TangentBasis,
};
pub use rank::{flat_truncation, numerical_rank, FlatTruncationReport, RankCheck};
pub use refine::{refine_critical_point, RefinedPoint};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::PolyProblem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertifySettings {
    /// Inequalities with `|g_j(p)| ≤ act_tol` are active.
    pub act_tol: f64,
    /// Margin for strict complementarity.
    pub strict_tol: f64,
    /// Relative margin for positive definiteness of the projected Hessian.
    pub eig_tol: f64,
    /// Largest equality residual and inequality violation accepted at an atom.
    pub feas_tol: f64,
    /// FOOC residual allowed, relative to `max(1, ‖∇f(p)‖)`.
    pub fooc_tol: f64,
    /// Agreement between `f(p)` and the relaxation bound, relative to `max(1, |f_mom|)`.
    pub value_tol: f64,
}

impl Default for CertifySettings {
    fn default() -> Self {
        Self {
            act_tol: 1e-6,
            strict_tol: 1e-6,
            eig_tol: 1e-6,
            feas_tol: 1e-4,
            fooc_tol: 1e-6,
            value_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifiedMinimizer {
    pub point: Vec<f64>,
    pub value: f64,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub active_set: Vec<usize>,
    pub violated: Vec<usize>,
    pub fooc_residual: f64,
    pub fooc: bool,
    pub lic: LicReport,
    pub scc: bool,
    pub sosc: SoscReport,
    /// `|h_i(p)|`.
    pub equality_residuals: Vec<f64>,
    /// `g_j(p)`.
    pub inequality_values: Vec<f64>,
    pub feasible: bool,
}

impl CertifiedMinimizer {
    /// Feasible, FOOC within tolerance, and LIC, SCC, SOSC all hold.
    pub fn passes(&self) -> bool {
        self.feasible && self.fooc && self.lic.holds && self.scc && self.sosc.holds
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationSummary {
    pub num_atoms: usize,
    pub all_conditions_hold: bool,
    /// Every atom value matches the relaxation bound; `None` without a bound.
    pub values_agree: Option<bool>,
    pub certified: bool,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub minimizers: Vec<CertifiedMinimizer>,
    pub summary: CertificationSummary,
}

/// Full verdict record at one point.
pub fn certify_point(problem: &PolyProblem, p: &[f64], settings: &CertifySettings) -> Result<CertifiedMinimizer> {
    if p.len() != problem.nvars() {
        return Err(Error::DimensionMismatch {
            expected: problem.nvars(),
            got: p.len(),
        });
    }
    let f = &problem.objective;
    let h = &problem.equalities;
    let g = &problem.inequalities;
    let value = f.eval(p)?;
    let equality_residuals: Vec<f64> = h.iter().map(|q| q.eval(p).map(f64::abs)).collect::<Result<_>>()?;
    let inequality_values: Vec<f64> = g.iter().map(|q| q.eval(p)).collect::<Result<_>>()?;
    let feasible = equality_residuals.iter().all(|&r| r <= settings.feas_tol)
        && inequality_values.iter().all(|&v| v >= -settings.feas_tol);
    let act = active_set(g, p, settings.act_tol)?;
    let lic = check_lic(h, g, &act.indices, p)?;
    let grad_norm = f.gradient(p)?.norm();

    let (lambda, mu, fooc_residual, scc, sosc) = if lic.holds {
        let m = lagrange_multipliers(f, h, g, &act.indices, p)?;
        let scc = check_scc(&m.mu, &act.indices, settings.strict_tol);
        let basis = tangent_basis(h, g, &act.indices, p)?;
        let sosc = check_sosc(f, h, g, &m.lambda, &m.mu, p, &basis, settings.eig_tol)?;
        (m.lambda, m.mu, m.residual, scc, sosc)
    } else {
        (
            vec![f64::NAN; h.len()],
            vec![f64::NAN; g.len()],
            f64::NAN,
            false,
            SoscReport {
                holds: false,
                eigenvalues: Vec::new(),
            },
        )
    };
    let fooc = fooc_residual <= settings.fooc_tol * grad_norm.max(1.0);
    Ok(CertifiedMinimizer {
        point: p.to_vec(),
        value,
        lambda,
        mu,
        active_set: act.indices,
        violated: act.violated,
        fooc_residual,
        fooc,
        lic,
        scc,
        sosc,
        equality_residuals,
        inequality_values,
        feasible,
    })
}

/// Certify every atom; `f_mom` is the relaxation bound the values should meet.
pub fn certify_minimizers(
    problem: &PolyProblem,
    atoms: &[Vec<f64>],
    f_mom: Option<f64>,
    settings: &CertifySettings,
) -> Result<CertificationReport> {
    let minimizers: Vec<CertifiedMinimizer> = atoms
        .iter()
        .map(|p| certify_point(problem, p, settings))
        .collect::<Result<_>>()?;
    let all_conditions_hold = !minimizers.is_empty() && minimizers.iter().all(CertifiedMinimizer::passes);
    let values_agree = f_mom.map(|bound| {
        let tol = settings.value_tol * bound.abs().max(1.0);
        minimizers.iter().all(|m| (m.value - bound).abs() <= tol)
    });
    let certified = all_conditions_hold && values_agree.unwrap_or(true);
    let message = if minimizers.is_empty() {
        "no certificate".to_string()
    } else {
        let mut failures = Vec::new();
        for (i, m) in minimizers.iter().enumerate() {
            let mut bad = Vec::new();
            if !m.feasible {
                bad.push("infeasible");
            }
            if !m.fooc {
                bad.push("FOOC");
            }
            if !m.lic.holds {
                bad.push("LIC");
            }
            if !m.scc {
                bad.push("SCC");
            }
            if !m.sosc.holds {
                bad.push("SOSC");
            }
            if !bad.is_empty() {
                failures.push(format!("atom {i}: {}", bad.join(", ")));
            }
        }
        if values_agree == Some(false) {
            failures.push("atom values differ from the relaxation bound".into());
        }
        if failures.is_empty() {
            format!("all {} atoms satisfy FOOC, LIC, SCC and SOSC", minimizers.len())
        } else {
            failures.join("; ")
        }
    };
    Ok(CertificationReport {
        summary: CertificationSummary {
            num_atoms: minimizers.len(),
            all_conditions_hold,
            values_agree,
            certified,
            message,
        },
        minimizers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::{Exponent, MultiPoly, ProductSphereShape};

    fn bilinear() -> PolyProblem {
        let s = ProductSphereShape::new(vec![2, 2]).unwrap();
        let f = MultiPoly::from_terms(&s, [(Exponent::new(vec![1, 0, 1, 0]), 1.0)]).unwrap();
        PolyProblem::on_product_of_spheres(f)
    }

    #[test]
    fn bilinear_optimum_passes() {
        let r = certify_minimizers(
            &bilinear(),
            &[vec![1.0, 0.0, -1.0, 0.0], vec![-1.0, 0.0, 1.0, 0.0]],
            Some(-1.0),
            &CertifySettings::default(),
        )
        .unwrap();
        assert!(r.summary.certified, "{}", r.summary.message);
        let m = &r.minimizers[0];
        assert!((m.lambda[0] - 0.5).abs() < 1e-14 && (m.lambda[1] - 0.5).abs() < 1e-14);
        for e in &m.sosc.eigenvalues {
            assert!((e - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn non_critical_point_fails() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = certify_minimizers(&bilinear(), &[vec![s, s, 1.0, 0.0]], None, &CertifySettings::default()).unwrap();
        assert!(r.minimizers[0].fooc_residual > 0.1);
        assert!(!r.summary.certified);
    }

    #[test]
    fn empty_atoms() {
        let r = certify_minimizers(&bilinear(), &[], None, &CertifySettings::default()).unwrap();
        assert_eq!(r.summary.message, "no certificate");
        assert!(!r.summary.certified);
    }
}
