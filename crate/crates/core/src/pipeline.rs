//! The order sweep: assemble, solve, test flat truncation, extract and
//! certify, stopping at the first order that yields atoms.

use serde::{Deserialize, Serialize};

use crate::certify::{
    certify_minimizers, extract_atoms, flat_truncation, refine_critical_point, AtomicMeasure, CertificationReport,
    CertifySettings, ExtractionSettings, FlatTruncationReport, RefinedPoint,
};
use crate::error::{Error, Result};
use crate::moments::{assemble, dirac_moments, ConicProblem, MomentSequence, RelaxationSpec};
use crate::problem::PolyProblem;
use crate::sdp::{solve, SolveStatus, SolverSettings};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HierarchySettings {
    pub k_max: u32,
    pub solver: SolverSettings,
    pub rank_rel_tol: f64,
    pub extraction: ExtractionSettings,
    pub certify: CertifySettings,
    /// Polish extracted atoms with Newton steps on the KKT system before certifying.
    pub refine: bool,
}

impl Default for HierarchySettings {
    fn default() -> Self {
        Self {
            k_max: 5,
            solver: SolverSettings::default(),
            rank_rel_tol: 1e-6,
            extraction: ExtractionSettings::default(),
            certify: CertifySettings::default(),
            refine: true,
        }
    }
}

/// Lower bound from one relaxation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderBound {
    pub k: u32,
    /// `f_mom^k`.
    pub objective: f64,
    pub dual_objective: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Flat truncation test at this order, when the solve produced a point.
    pub flat: Option<FlatTruncationReport>,
    /// Why this order did not produce atoms.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyOutcome {
    pub bounds: Vec<OrderBound>,
    /// Order whose flat truncation yielded atoms.
    pub certified_order: Option<u32>,
    pub flat: Option<FlatTruncationReport>,
    pub atoms: Option<AtomicMeasure>,
    /// Atoms after polishing, in the same order; these are the certified points.
    pub refined: Option<Vec<RefinedPoint>>,
    pub certification: Option<CertificationReport>,
}

impl HierarchyOutcome {
    /// Flat truncation found and atoms extracted.
    pub fn has_certificate(&self) -> bool {
        self.certified_order.is_some()
    }

    /// `f_mom^k` at the certified order.
    /// Certified points: polished atoms when available.
    pub fn minimizers(&self) -> Vec<Vec<f64>> {
        match (&self.refined, &self.atoms) {
            (Some(r), _) => r.iter().map(|p| p.point.clone()).collect(),
            (None, Some(a)) => a.atoms.clone(),
            _ => Vec::new(),
        }
    }

    pub fn f_min(&self) -> Option<f64> {
        let k = self.certified_order?;
        self.bounds.iter().find(|b| b.k == k).map(|b| b.objective)
    }

    /// Best lower bound over all solved orders.
    pub fn best_bound(&self) -> Option<f64> {
        self.bounds
            .iter()
            .filter(|b| b.status.has_solution())
            .map(|b| b.objective)
            .reduce(f64::max)
    }
}

/// Sweep `k = d̄, …, k_max`.
pub fn solve_pop(problem: &PolyProblem, settings: &HierarchySettings) -> Result<HierarchyOutcome> {
    let d_bar = problem.d_bar();
    let d_k = problem.d_k();
    if settings.k_max < d_bar {
        return Err(Error::OrderBelowMinimum {
            order: settings.k_max,
            minimum: d_bar,
        });
    }
    let mut outcome = HierarchyOutcome {
        bounds: Vec::new(),
        certified_order: None,
        flat: None,
        atoms: None,
        refined: None,
        certification: None,
    };
    for k in d_bar..=settings.k_max {
        let conic = assemble(&RelaxationSpec::new(problem.clone(), k)?)?;
        let sol = solve(&conic, &settings.solver)?;
        let mut bound = OrderBound {
            k,
            objective: sol.objective,
            dual_objective: sol.dual_objective,
            status: sol.status,
            iterations: sol.iterations,
            flat: None,
            note: None,
        };
        if !sol.status.has_solution() {
            bound.note = Some(format!("solver status {:?}", sol.status));
            outcome.bounds.push(bound);
            continue;
        }
        let mut y = sol.y;
        let mut flat = flat_truncation(&y, k, d_k, d_bar, settings.rank_rel_tol)?;
        if !flat.found {
            if let Some(point_mass) = constant_objective_point_mass(problem, &conic, k)? {
                y = point_mass;
                flat = flat_truncation(&y, k, d_k, d_bar, settings.rank_rel_tol)?;
                bound.note = Some("constant objective: point mass substituted for the central solution".into());
            }
        }
        bound.flat = Some(flat.clone());
        let (Some(t), Some(r)) = (flat.t, flat.rank) else {
            bound.note = Some("no flat truncation".into());
            outcome.bounds.push(bound);
            continue;
        };
        match extract_atoms(&y, t, r, Some(problem.shape()), &settings.extraction) {
            Ok(atoms) => {
                let refined: Vec<RefinedPoint> = atoms
                    .atoms
                    .iter()
                    .map(|p| {
                        if settings.refine {
                            refine_critical_point(problem, p, 1e-3, 1e-3)
                        } else {
                            Ok(RefinedPoint {
                                point: p.clone(),
                                residual_before: f64::NAN,
                                residual_after: f64::NAN,
                                iterations: 0,
                                displacement: 0.0,
                            })
                        }
                    })
                    .collect::<Result<_>>()?;
                let points: Vec<Vec<f64>> = refined.iter().map(|r| r.point.clone()).collect();
                let certification = certify_minimizers(problem, &points, Some(sol.objective), &settings.certify)?;
                outcome.bounds.push(bound);
                outcome.certified_order = Some(k);
                outcome.flat = Some(flat);
                outcome.atoms = Some(atoms);
                outcome.refined = Some(refined);
                outcome.certification = Some(certification);
                return Ok(outcome);
            }
            Err(e) => {
                bound.note = Some(e.to_string());
                outcome.bounds.push(bound);
            }
        }
    }
    Ok(outcome)
}

/// For a constant objective every feasible measure is optimal, so the
/// moments of a point mass at a feasible point are an optimal solution of
/// the relaxation. Returns them when `(e_1, …, e_1)` is feasible.
fn constant_objective_point_mass(problem: &PolyProblem, conic: &ConicProblem, k: u32) -> Result<Option<MomentSequence>> {
    if problem.objective.degree() > 0 {
        return Ok(None);
    }
    let shape = problem.shape();
    let mut p = vec![0.0; shape.total_dim()];
    for i in 0..shape.num_blocks() {
        p[shape.block_range(i).start] = 1.0;
    }
    for g in &problem.inequalities {
        if g.eval(&p)? < 0.0 {
            return Ok(None);
        }
    }
    for h in &problem.equalities {
        if h.eval(&p)?.abs() > 1e-12 {
            return Ok(None);
        }
    }
    let y = dirac_moments(&[p], &[1.0], 2 * k)?;
    let feasible = conic.equality_residuals(y.values()).iter().all(|r| r.abs() <= 1e-9)
        && conic.block_min_eigenvalues(y.values()).iter().all(|&e| e >= -1e-9);
    Ok(feasible.then_some(y))
}
