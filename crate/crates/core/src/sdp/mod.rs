//! Embedded conic solver for assembled moment relaxations.
//!
//! Linear equalities are eliminated exactly, every PSD block is restricted to
//! the face that its affine family can reach, and the remaining problem is
//! solved by a primal-dual interior-point method.

mod elimination;
mod ipm;
mod reduce;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{assemble, ConicProblem, MomentSequence, RelaxationSpec};
use crate::problem::PolyProblem;
use elimination::Elimination;
use reduce::Reformulation;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub max_iter: usize,
    pub verbose: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            gap_tol: 1e-8,
            max_iter: 200,
            verbose: false,
        }
    }
}

impl SolverSettings {
    fn validate(&self) -> Result<()> {
        if !(self.feas_tol > 0.0 && self.gap_tol > 0.0) {
            return Err(Error::MalformedProblem("solver tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Inaccurate,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl SolveStatus {
    /// Optimal or inaccurate: the returned `y` is usable.
    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::Inaccurate)
    }
}

/// Residuals of the returned point, measured on the original problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveResiduals {
    /// `‖B y − b‖_∞`.
    pub equality: f64,
    /// Smallest eigenvalue over all PSD blocks.
    pub min_eigenvalue: f64,
    pub relative_gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicSolution {
    pub y: MomentSequence,
    /// `f_mom^k = f·y`.
    pub objective: f64,
    /// SOS-side bound from the dual iterate.
    pub dual_objective: f64,
    pub status: SolveStatus,
    pub residuals: SolveResiduals,
    pub iterations: usize,
    /// Equalities found redundant during elimination.
    pub redundant_equalities: usize,
    /// Rows dropped from each block by facial reduction.
    pub dropped_rows: Vec<usize>,
}

fn empty_solution(problem: &ConicProblem, status: SolveStatus, objective: f64) -> Result<ConicSolution> {
    let y = MomentSequence::new(problem.variable_basis(), vec![0.0; problem.num_vars])?;
    Ok(ConicSolution {
        y,
        objective,
        dual_objective: objective,
        status,
        residuals: SolveResiduals {
            equality: f64::INFINITY,
            min_eigenvalue: f64::NEG_INFINITY,
            relative_gap: f64::INFINITY,
            primal_infeasibility: f64::INFINITY,
            dual_infeasibility: f64::INFINITY,
        },
        iterations: 0,
        redundant_equalities: 0,
        dropped_rows: vec![0; problem.blocks.len()],
    })
}

/// Solve one conic problem.
pub fn solve(problem: &ConicProblem, settings: &SolverSettings) -> Result<ConicSolution> {
    problem.validate()?;
    settings.validate()?;
    let elimination = match Elimination::eliminate(problem.num_vars, &problem.equalities) {
        Ok(e) => e,
        Err(_) => return empty_solution(problem, SolveStatus::Infeasible, f64::INFINITY),
    };
    let redundant = elimination.redundant;
    let reform = Reformulation::build(problem, elimination);
    if reform.unbounded_direction {
        return empty_solution(problem, SolveStatus::Unbounded, f64::NEG_INFINITY);
    }

    let reduced = &reform.problem;
    let (status, z, dual_objective, iterations, pinf, dinf, relgap) = if reduced.c.is_empty() {
        let feasible = reduced
            .f0
            .iter()
            .all(|f| f.nrows() == 0 || f.symmetric_eigenvalues().min() >= -settings.feas_tol);
        let status = if feasible {
            SolveStatus::Optimal
        } else {
            SolveStatus::Infeasible
        };
        (status, Vec::new(), reduced.c0, 0, 0.0, 0.0, 0.0)
    } else {
        let r = ipm::solve(
            reduced,
            &ipm::IpmSettings {
                feas_tol: settings.feas_tol,
                gap_tol: settings.gap_tol,
                max_iter: settings.max_iter,
                verbose: settings.verbose,
            },
        );
        let status = match r.status {
            ipm::IpmStatus::Optimal => SolveStatus::Optimal,
            ipm::IpmStatus::Inaccurate => SolveStatus::Inaccurate,
            ipm::IpmStatus::Infeasible => SolveStatus::Infeasible,
            ipm::IpmStatus::Unbounded => SolveStatus::Unbounded,
            ipm::IpmStatus::IterationLimit => SolveStatus::IterationLimit,
        };
        (status, r.z, -r.primal_objective + reduced.c0, r.iterations, r.pinf, r.dinf, r.relgap)
    };

    let values = reform.recover_y(&z);
    let equality = problem.equality_residuals(&values).into_iter().fold(0.0, f64::max);
    let min_eigenvalue = problem
        .block_min_eigenvalues(&values)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let objective = match status {
        SolveStatus::Infeasible => f64::INFINITY,
        SolveStatus::Unbounded => f64::NEG_INFINITY,
        _ => problem.objective_value(&values),
    };
    let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let status = if status == SolveStatus::Optimal
        && (equality > settings.feas_tol * scale || min_eigenvalue < -settings.feas_tol * scale)
    {
        SolveStatus::Inaccurate
    } else {
        status
    };
    Ok(ConicSolution {
        y: MomentSequence::new(problem.variable_basis(), values)?,
        objective,
        dual_objective,
        status,
        residuals: SolveResiduals {
            equality,
            min_eigenvalue,
            relative_gap: relgap,
            primal_infeasibility: pinf,
            dual_infeasibility: dinf,
        },
        iterations,
        redundant_equalities: redundant,
        dropped_rows: reform.dropped_rows,
    })
}

/// Assemble and solve `(mom, k)` for every `k` in `k_min..=k_max`. A failure
/// at one order is reported in place and does not stop the sweep.
pub fn solve_hierarchy(
    problem: &PolyProblem,
    k_min: u32,
    k_max: u32,
    settings: &SolverSettings,
) -> Result<Vec<(u32, Result<ConicSolution>)>> {
    let minimum = problem.d_bar();
    if k_min < minimum {
        return Err(Error::OrderBelowMinimum {
            order: k_min,
            minimum,
        });
    }
    Ok((k_min..=k_max)
        .map(|k| {
            let solved = RelaxationSpec::new(problem.clone(), k)
                .and_then(|spec| assemble(&spec))
                .and_then(|conic| solve(&conic, settings));
            (k, solved)
        })
        .collect())
}
