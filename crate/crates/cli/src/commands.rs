use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use spheropt::certify::CertificationReport;
use spheropt::ineq::{certify_with_inequalities, check_constraint_qualification, sample_strata};
use spheropt::oracle::{als_rank_one, multistart_min};
use spheropt::polyring::random_multihomogeneous;
use spheropt::rng::{derive_seed, Stream};
use spheropt::tensor::{best_rank_one, tensor_to_poly, DenseTensor, RankOneStatus};
use spheropt::{solve_pop, HierarchyOutcome, Multidegree, PolyProblem, ProductSphereShape};

use crate::config::{Command, RunConfig};
use crate::input::multihomogeneity_warnings;
use crate::report::{
    GenericSection, OracleComparison, PolynomialSection, RankOneSection, RunReport, RunStatus, TrialSummary,
};
use crate::CliError;

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// `max |λ_i + d_i f(p) / 2|` over the atoms; `None` unless the objective is
/// multihomogeneous and every atom has multipliers.
pub fn multiplier_identity_residual(problem: &PolyProblem, cert: &CertificationReport) -> Option<f64> {
    let deg = problem.objective.multidegree().ok().flatten()?;
    let mut worst: f64 = 0.0;
    for m in &cert.minimizers {
        for (l, &d) in m.lambda.iter().zip(&deg.0) {
            let r = (l + f64::from(d) * m.value / 2.0).abs();
            if !r.is_finite() {
                return None;
            }
            worst = worst.max(r);
        }
    }
    (!cert.minimizers.is_empty()).then_some(worst)
}

fn fill_from_outcome(report: &mut RunReport, outcome: HierarchyOutcome) {
    report.status = if outcome.has_certificate() {
        RunStatus::Certified
    } else {
        RunStatus::BoundsOnly
    };
    report.certified_order = outcome.certified_order;
    report.f_min = outcome.f_min();
    report.bounds = outcome.bounds;
    report.flat = outcome.flat;
    report.atoms = outcome.atoms;
    report.refined = outcome.refined;
    report.certification = outcome.certification;
}

/// Sweep the hierarchy on a polynomial problem.
pub fn cmd_solve(config: &RunConfig, problem: &PolyProblem) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let mut report = RunReport::new(Command::Solve, config.clone());
    report.warnings = multihomogeneity_warnings(problem);
    report.polynomial = Some(PolynomialSection::of(&problem.objective));
    report.inequalities = problem.inequalities.iter().map(PolynomialSection::of).collect();

    let outcome = solve_pop(problem, &config.hierarchy())?;
    report.timings.solve_ms = ms(start);
    fill_from_outcome(&mut report, outcome);

    if !problem.inequalities.is_empty() {
        let mut samples = sample_strata(problem, 8, &config.oracle_settings())?;
        if let Some(r) = &report.refined {
            samples.extend(r.iter().map(|p| p.point.clone()));
        }
        report.assumption = Some(check_constraint_qualification(
            &problem.equalities,
            &problem.inequalities,
            &samples,
            config.certify.act_tol,
        )?);
        if let Some(r) = &report.refined {
            let points: Vec<Vec<f64>> = r.iter().map(|p| p.point.clone()).collect();
            let ext = certify_with_inequalities(problem, &points, report.f_min, &config.certify)?;
            report.strata = Some(ext.strata);
            report.certification = Some(ext.report);
        }
    }

    if !config.no_oracle {
        if problem.inequalities.is_empty() {
            let t = Instant::now();
            let o = multistart_min(&problem.objective, &config.oracle_settings())?;
            report.timings.oracle_ms = ms(t);
            report.oracle = Some(OracleComparison::new(o.value, o.point, &report.bounds, report.f_min));
        } else {
            report
                .warnings
                .push("oracle comparison skipped: the multistart oracle ignores inequality constraints".into());
        }
    }
    report.timings.total_ms = ms(start);
    Ok(report)
}

/// Best rank-one approximation of a tensor.
pub fn cmd_rank1(config: &RunConfig, tensor: &DenseTensor) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let mut report = RunReport::new(Command::Rank1, config.clone());
    let poly = tensor_to_poly(tensor)?;
    report.polynomial = Some(PolynomialSection::of(&poly));
    let result = best_rank_one(tensor, &config.hierarchy())?;
    report.timings.solve_ms = ms(start);
    report.status = match result.status {
        RankOneStatus::Certified => RunStatus::Certified,
        RankOneStatus::BoundsOnly => RunStatus::BoundsOnly,
    };
    let (oracle_abs, oracle_gap) = if config.no_oracle {
        (None, None)
    } else {
        let t = Instant::now();
        let o = als_rank_one(tensor, &config.oracle_settings())?;
        report.timings.oracle_ms = ms(t);
        let best = o.best().value.abs();
        (Some(best), result.a_star.map(|a| (a.abs() - best).abs()))
    };
    report.rank1 = Some(RankOneSection {
        a_plus: result.a_plus,
        a_minus: result.a_minus,
        result,
        oracle_abs,
        oracle_gap,
    });
    report.timings.total_ms = ms(start);
    Ok(report)
}

/// KKT audit of user-supplied points; no relaxation is solved.
pub fn cmd_certify(config: &RunConfig, problem: &PolyProblem, points: &[Vec<f64>]) -> Result<RunReport, CliError> {
    let start = Instant::now();
    if points.is_empty() {
        return Err(CliError::Input("certify needs candidate points in the config's \"points\" field".into()));
    }
    let mut report = RunReport::new(Command::Certify, config.clone());
    report.warnings = multihomogeneity_warnings(problem);
    report.polynomial = Some(PolynomialSection::of(&problem.objective));
    report.inequalities = problem.inequalities.iter().map(PolynomialSection::of).collect();
    let ext = certify_with_inequalities(problem, points, None, &config.certify)?;
    for (i, m) in ext.report.minimizers.iter().enumerate() {
        if !m.feasible {
            report.warnings.push(format!("point {i} is infeasible"));
        }
    }
    report.status = if ext.report.summary.all_conditions_hold {
        RunStatus::Certified
    } else {
        RunStatus::BoundsOnly
    };
    report.strata = Some(ext.strata);
    report.certification = Some(ext.report);
    report.timings.total_ms = ms(start);
    Ok(report)
}

fn run_trial(config: &RunConfig, shape: &ProductSphereShape, deg: &Multidegree, index: usize) -> TrialSummary {
    let seed = derive_seed(config.seed, Stream::Objective, index as u64);
    let f = random_multihomogeneous(shape, deg, seed);
    let problem = PolyProblem::on_product_of_spheres(f);
    let mut summary = TrialSummary {
        index,
        seed,
        certified_order: None,
        f_min: None,
        best_bound: None,
        kkt_certified: false,
        oracle: None,
        multiplier_identity_residual: None,
        error: None,
    };
    let outcome = match solve_pop(&problem, &config.hierarchy()) {
        Ok(o) => o,
        Err(e) => {
            summary.error = Some(e.to_string());
            return summary;
        }
    };
    summary.certified_order = outcome.certified_order;
    summary.f_min = outcome.f_min();
    summary.best_bound = outcome.best_bound();
    if let Some(cert) = &outcome.certification {
        summary.kkt_certified = cert.summary.certified;
        summary.multiplier_identity_residual = multiplier_identity_residual(&problem, cert);
    }
    if !config.no_oracle {
        let oracle = spheropt::oracle::OracleSettings {
            seed,
            ..config.oracle
        };
        match multistart_min(&problem.objective, &oracle) {
            Ok(o) => summary.oracle = Some(OracleComparison::new(o.value, o.point, &outcome.bounds, summary.f_min)),
            Err(e) => summary.error = Some(e.to_string()),
        }
    }
    summary
}

/// Seeded random objectives of a fixed shape and multidegree.
pub fn cmd_generic(config: &RunConfig) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let g = &config.generic;
    let shape = ProductSphereShape::new(g.shape.clone())?;
    if g.multidegree.len() != shape.num_blocks() {
        return Err(CliError::Config(format!(
            "multidegree {:?} does not match shape {:?}",
            g.multidegree, g.shape
        )));
    }
    let deg = Multidegree(g.multidegree.clone());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(g.workers)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let per_trial: Vec<TrialSummary> =
        pool.install(|| (0..g.trials).into_par_iter().map(|i| run_trial(config, &shape, &deg, i)).collect());

    let mut order_histogram = BTreeMap::new();
    for t in &per_trial {
        if let Some(k) = t.certified_order {
            *order_histogram.entry(k).or_insert(0) += 1;
        }
    }
    let certified = per_trial.iter().filter(|t| t.certified_order.is_some()).count();
    let mut report = RunReport::new(Command::Generic, config.clone());
    report.status = if certified == g.trials {
        RunStatus::Certified
    } else {
        RunStatus::BoundsOnly
    };
    report.generic = Some(GenericSection {
        shape: g.shape.clone(),
        multidegree: g.multidegree.clone(),
        trials: g.trials,
        certified,
        certified_fraction: certified as f64 / g.trials as f64,
        order_histogram,
        oracle_confirmed: per_trial.iter().filter(|t| t.confirmed()).count(),
        per_trial,
    });
    report.timings.total_ms = ms(start);
    Ok(report)
}
