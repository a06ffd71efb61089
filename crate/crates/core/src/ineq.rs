//! Inequality constraints `g_j ≥ 0` on a product of spheres: strata
//! `K_J = {g_j = 0 for j ∈ J, g_l > 0 for l ∉ J}`, sampled checks of
//! linear independence on each stratum, and certification that reports the
//! stratum of every atom.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::certify::{certify_minimizers, check_lic, tangent_basis, CertificationReport, CertifySettings};
use crate::error::Result;
use crate::oracle::{multistart_min, random_sphere_point, OracleSettings};
use crate::polyring::MultiPoly;
use crate::problem::PolyProblem;
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StratumDescriptor {
    /// `J`, sorted.
    pub active: Vec<usize>,
    pub num_inequalities: usize,
}

impl StratumDescriptor {
    pub fn new(mut active: Vec<usize>, num_inequalities: usize) -> Self {
        active.sort_unstable();
        active.dedup();
        assert!(active.iter().all(|&j| j < num_inequalities), "index outside [m̄]");
        Self {
            active,
            num_inequalities,
        }
    }

    /// Stratum realized at `p`; `None` when some `g_j(p) < −act_tol`.
    pub fn of_point(g_list: &[MultiPoly], p: &[f64], act_tol: f64) -> Result<Option<Self>> {
        let mut active = Vec::new();
        for (j, g) in g_list.iter().enumerate() {
            let v = g.eval(p)?;
            if v < -act_tol {
                return Ok(None);
            }
            if v <= act_tol {
                active.push(j);
            }
        }
        Ok(Some(Self::new(active, g_list.len())))
    }

    pub fn contains(&self, g_list: &[MultiPoly], p: &[f64], act_tol: f64) -> Result<bool> {
        Ok(Self::of_point(g_list, p, act_tol)?.as_ref() == Some(self))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumCheck {
    pub stratum: StratumDescriptor,
    pub samples: usize,
    /// Points where the active gradients are dependent.
    pub witnesses: Vec<Vec<f64>>,
    /// Smallest `σ_min / σ_max` seen.
    pub worst_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub strata: Vec<StratumCheck>,
    pub total_samples: usize,
    /// Samples off the feasible set or off the spheres, ignored.
    pub discarded: usize,
    /// No witness found. Sampling is evidence, not proof.
    pub passed: bool,
    pub note: String,
}

/// Check linear independence of the active gradients at each sample,
/// grouped by the stratum the sample realizes.
pub fn check_constraint_qualification(
    h_list: &[MultiPoly],
    g_list: &[MultiPoly],
    samples: &[Vec<f64>],
    act_tol: f64,
) -> Result<AssumptionReport> {
    let mut strata: BTreeMap<StratumDescriptor, StratumCheck> = BTreeMap::new();
    let mut discarded = 0;
    for p in samples {
        let on_spheres = h_list
            .iter()
            .map(|h| h.eval(p).map(|v| v.abs() <= act_tol))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .all(|b| b);
        let stratum = if on_spheres {
            StratumDescriptor::of_point(g_list, p, act_tol)?
        } else {
            None
        };
        let Some(stratum) = stratum else {
            discarded += 1;
            continue;
        };
        let lic = check_lic(h_list, g_list, &stratum.active, p)?;
        let entry = strata.entry(stratum.clone()).or_insert_with(|| StratumCheck {
            stratum,
            samples: 0,
            witnesses: Vec::new(),
            worst_ratio: f64::INFINITY,
        });
        entry.samples += 1;
        let ratio = if lic.sigma_max > 0.0 {
            lic.sigma_min / lic.sigma_max
        } else {
            1.0
        };
        entry.worst_ratio = entry.worst_ratio.min(ratio);
        if !lic.holds {
            entry.witnesses.push(p.clone());
        }
    }
    let strata: Vec<StratumCheck> = strata.into_values().collect();
    let passed = strata.iter().all(|s| s.witnesses.is_empty());
    let total_samples = samples.len() - discarded;
    let note = if g_list.is_empty() {
        "no inequalities: vacuous".to_string()
    } else {
        format!(
            "{total_samples} samples over {} encountered strata; a pass is evidence, not proof",
            strata.len()
        )
    };
    Ok(AssumptionReport {
        strata,
        total_samples,
        discarded,
        passed,
        note,
    })
}

/// Feasible points spread over the strata: uniform points on the spheres
/// (open stratum) and minimizers of `g_j²` (boundary strata).
pub fn sample_strata(problem: &PolyProblem, per_constraint: usize, settings: &OracleSettings) -> Result<Vec<Vec<f64>>> {
    let shape = problem.shape().clone();
    let mut rng = stream_rng(settings.seed, Stream::StrataSamples, 0);
    let mut out: Vec<Vec<f64>> = (0..per_constraint)
        .map(|_| random_sphere_point(shape.block_dims(), &mut rng).concat())
        .collect();
    for (j, g) in problem.inequalities.iter().enumerate() {
        let sq = g_squared(g);
        for s in 0..per_constraint {
            let local = OracleSettings {
                starts: 1,
                seed: crate::rng::derive_seed(settings.seed, Stream::StrataSamples, ((j as u64) << 32) | s as u64 + 1),
                ..*settings
            };
            out.push(multistart_min(&sq, &local)?.point);
        }
    }
    Ok(out)
}

fn g_squared(g: &MultiPoly) -> MultiPoly {
    let mut out = MultiPoly::zero(g.shape());
    for (a, ca) in g.terms() {
        for (b, cb) in g.terms() {
            let e = crate::polyring::Exponent::new(a.powers().iter().zip(b.powers()).map(|(x, y)| x + y).collect());
            out.add_term(e, ca * cb);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCertification {
    pub report: CertificationReport,
    /// Stratum realized by each atom; `None` for infeasible atoms.
    pub strata: Vec<Option<StratumDescriptor>>,
    /// Dimension of the tangent space at each atom where LIC holds.
    pub tangent_dims: Vec<Option<usize>>,
    /// Atoms whose active multipliers fail strict complementarity.
    pub scc_failures: Vec<usize>,
}

/// `certify_minimizers` plus the stratum bookkeeping.
pub fn certify_with_inequalities(
    problem: &PolyProblem,
    atoms: &[Vec<f64>],
    f_mom: Option<f64>,
    settings: &CertifySettings,
) -> Result<InequalityCertification> {
    let mut report = certify_minimizers(problem, atoms, f_mom, settings)?;
    let mut strata = Vec::with_capacity(atoms.len());
    let mut tangent_dims = Vec::with_capacity(atoms.len());
    let mut scc_failures = Vec::new();
    for (i, (p, m)) in atoms.iter().zip(&report.minimizers).enumerate() {
        strata.push(StratumDescriptor::of_point(&problem.inequalities, p, settings.act_tol)?);
        tangent_dims.push(if m.lic.holds {
            Some(tangent_basis(&problem.equalities, &problem.inequalities, &m.active_set, p)?.dim())
        } else {
            None
        });
        if !m.scc {
            scc_failures.push(i);
        }
    }
    if !scc_failures.is_empty() {
        report.summary.message = format!(
            "{}; degenerate: strict complementarity fails at atoms {scc_failures:?}",
            report.summary.message
        );
    }
    Ok(InequalityCertification {
        report,
        strata,
        tangent_dims,
        scc_failures,
    })
}
