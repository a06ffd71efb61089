//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use spheropt::certify::{extract_atoms, flat_truncation, CertificationReport, ExtractionSettings};
use spheropt::moments::dirac_moments;
use spheropt::oracle::{multistart_min, random_sphere_point, OracleSettings};
use spheropt::polyring::random_multihomogeneous;
use spheropt::rng::{stream_rng, Stream};
use spheropt::sdp::solve_hierarchy;
use spheropt::tensor::{tensor_to_poly, DenseTensor};
use spheropt::{Exponent, MultiPoly, Multidegree, PolyProblem, ProductSphereShape};
use spheropt_cli::commands::multiplier_identity_residual;
use spheropt_cli::{cmd_certify, cmd_generic, cmd_rank1, cmd_solve, Command, GenericConfig, RunConfig, RunStatus};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn config(k_max: u32) -> RunConfig {
    RunConfig {
        k_max,
        ..Default::default()
    }
}

fn mono(shape: &ProductSphereShape, powers: &[u32], c: f64) -> MultiPoly {
    MultiPoly::from_terms(shape, [(Exponent::new(powers.to_vec()), c)]).unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn within_budget(elapsed: Duration, budget_s: f64) -> bool {
    elapsed.as_secs_f64() < budget_s
}

/// Certification reports whose multiplier identity is checked afterwards.
type Certified = Vec<(PolyProblem, CertificationReport)>;

fn matrix_exactness() -> Verdict {
    let start = Instant::now();
    let (mut worst_sigma, mut worst_err) = (0.0f64, 0.0f64);
    let mut failures = 0;
    for seed in 0..100u64 {
        let mut rng = stream_rng(seed, Stream::Test, 100);
        let rows = rng.random_range(2..=4usize);
        let cols = rng.random_range(2..=4usize);
        let values: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
        let sigma = DMatrix::from_row_slice(rows, cols, &values).singular_values().max();
        let tensor = DenseTensor::new(vec![rows, cols], values).unwrap();
        let cfg = RunConfig {
            no_oracle: true,
            ..config(3)
        };
        let report = cmd_rank1(&cfg, &tensor).unwrap();
        let r = &report.rank1.as_ref().unwrap().result;
        match (r.a_star, r.error) {
            (Some(a), Some(err)) => {
                worst_sigma = worst_sigma.max((a.abs() - sigma).abs());
                worst_err = worst_err.max((err - (r.norm_sq - a * a)).abs());
            }
            _ => failures += 1,
        }
    }
    let elapsed = start.elapsed();
    verdict(
        failures == 0 && worst_sigma <= 1e-5 && worst_err <= 1e-6 && within_budget(elapsed, 60.0),
        format!(
            "100 matrices: max ||a*|-σ_max| {worst_sigma:.2e}, max error-identity residual {worst_err:.2e}, \
             uncertified {failures}, {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn bilinear_certificate(certified: &mut Certified) -> Verdict {
    let start = Instant::now();
    let s = ProductSphereShape::new(vec![2, 2]).unwrap();
    let problem = PolyProblem::on_product_of_spheres(mono(&s, &[1, 0, 1, 0], 1.0));
    let report = cmd_solve(&config(3), &problem).unwrap();
    let elapsed = start.elapsed();
    let optimal = [[1.0, 0.0, -1.0, 0.0], [-1.0, 0.0, 1.0, 0.0]];
    let dist = |a: &[f64]| optimal.iter().map(|o| max_abs_diff(o, a)).fold(f64::INFINITY, f64::min);
    let points: Vec<Vec<f64>> = report.refined.iter().flatten().map(|r| r.point.clone()).collect();
    let atom_err = points.iter().map(|p| dist(p)).fold(0.0, f64::max);
    let raw_err = report.atoms.iter().flat_map(|m| &m.atoms).map(|p| dist(p)).fold(0.0, f64::max);
    let f_min = report.f_min.unwrap_or(f64::NAN);
    let order_ok = report.certified_order.is_some_and(|k| k <= 3);
    if let Some(c) = &report.certification {
        certified.push((problem, c.clone()));
    }
    verdict(
        report.status == RunStatus::Certified
            && order_ok
            && (f_min + 1.0).abs() <= 1e-6
            && !points.is_empty()
            && atom_err <= 1e-6
            && within_budget(elapsed, 5.0),
        format!(
            "order {:?}, f_min {f_min:.10}, {} atoms, max atom error {atom_err:.2e} (before polishing {raw_err:.2e}), {:.2}s",
            report.certified_order,
            points.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn worked_example_fidelity() -> Verdict {
    let values = [2.0, -8.0, 5.0, 4.0, 3.0, 1.0, -1.0, 7.0, 3.0, -6.0, 0.0, -2.0];
    let tensor = DenseTensor::new(vec![2, 3, 2], values.to_vec()).unwrap();
    let poly = tensor_to_poly(&tensor).unwrap();
    // (j1, j2, j3) of x_{1j1} x_{2j2} x_{3j3} with the printed coefficient
    let expected: [([usize; 3], f64); 11] = [
        ([1, 1, 1], 2.0),
        ([1, 1, 2], -8.0),
        ([1, 2, 1], 5.0),
        ([1, 2, 2], 4.0),
        ([1, 3, 1], 3.0),
        ([1, 3, 2], 1.0),
        ([2, 1, 1], -1.0),
        ([2, 1, 2], 7.0),
        ([2, 2, 1], 3.0),
        ([2, 2, 2], -6.0),
        ([2, 3, 2], -2.0),
    ];
    let mismatches = expected
        .iter()
        .filter(|(j, c)| {
            let mut powers = vec![0; 7];
            powers[j[0] - 1] = 1;
            powers[2 + j[1] - 1] = 1;
            powers[5 + j[2] - 1] = 1;
            poly.coeff(&Exponent::new(powers)).to_bits() != c.to_bits()
        })
        .count();
    verdict(
        poly.num_terms() == 11 && mismatches == 0,
        format!("{} terms, {mismatches} coefficient mismatches: {poly}", poly.num_terms()),
    )
}

fn atomic_round_trip() -> Verdict {
    let start = Instant::now();
    let shapes: [&[usize]; 7] = [&[2], &[3], &[2, 2], &[4], &[2, 3], &[3, 3], &[2, 2, 2]];
    let (mut worst_atom, mut worst_weight) = (0.0f64, 0.0f64);
    let mut rank_misses = 0;
    for seed in 0..50u64 {
        let mut rng = stream_rng(seed, Stream::Test, 400);
        let shape = ProductSphereShape::new(shapes[rng.random_range(0..shapes.len())].to_vec()).unwrap();
        let r = rng.random_range(1..=3usize);
        let mut atoms: Vec<Vec<f64>> = Vec::new();
        while atoms.len() < r {
            let p = random_sphere_point(shape.block_dims(), &mut rng).concat();
            if atoms.iter().all(|a| max_abs_diff(a, &p) > 0.2) {
                atoms.push(p);
            }
        }
        let raw: Vec<f64> = (0..r).map(|_| rng.random_range(0.2..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let y = dirac_moments(&atoms, &weights, 6).unwrap();
        let flat = flat_truncation(&y, 3, 1, 1, 1e-6).unwrap();
        if flat.rank != Some(r) {
            rank_misses += 1;
            continue;
        }
        let settings = ExtractionSettings {
            seed,
            ..Default::default()
        };
        let Ok(m) = extract_atoms(&y, flat.t.unwrap(), r, Some(&shape), &settings) else {
            rank_misses += 1;
            continue;
        };
        for (p, w) in atoms.iter().zip(&weights) {
            let (j, d) = m
                .atoms
                .iter()
                .enumerate()
                .map(|(j, q)| (j, max_abs_diff(p, q)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            worst_atom = worst_atom.max(d);
            worst_weight = worst_weight.max((m.weights[j] - w).abs());
        }
    }
    let elapsed = start.elapsed();
    verdict(
        rank_misses == 0 && worst_atom <= 1e-6 && worst_weight <= 1e-6 && within_budget(elapsed, 30.0),
        format!(
            "50 atom sets: rank/extraction misses {rank_misses}, max atom error {worst_atom:.2e}, \
             max weight error {worst_weight:.2e}, {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn sandwich(certified: &mut Certified) -> Verdict {
    let start = Instant::now();
    let shape = ProductSphereShape::new(vec![2, 2, 2]).unwrap();
    let cfg = config(3);
    let (mut above, mut drops, mut wide, mut n_certified) = (0, 0, 0, 0);
    let mut worst_gap = 0.0f64;
    for seed in 0..25u64 {
        let f = random_multihomogeneous(&shape, &Multidegree(vec![1, 1, 1]), seed);
        let problem = PolyProblem::on_product_of_spheres(f);
        let oracle = multistart_min(
            &problem.objective,
            &OracleSettings {
                seed,
                ..Default::default()
            },
        )
        .unwrap()
        .value;
        let sweep = solve_hierarchy(&problem, problem.d_bar(), cfg.k_max, &cfg.solver).unwrap();
        let bounds: Vec<f64> = sweep
            .iter()
            .filter_map(|(_, s)| s.as_ref().ok())
            .filter(|s| s.status.has_solution())
            .map(|s| s.objective)
            .collect();
        above += bounds.iter().filter(|&&b| b > oracle + 1e-6).count();
        drops += bounds.windows(2).filter(|w| w[1] < w[0] - 1e-7).count();
        let report = cmd_solve(&RunConfig { no_oracle: true, ..cfg.clone() }, &problem).unwrap();
        if let Some(f_min) = report.f_min {
            n_certified += 1;
            let gap = (f_min - oracle).abs();
            worst_gap = worst_gap.max(gap);
            if gap > 1e-5 {
                wide += 1;
            }
        }
        if let Some(c) = report.certification {
            certified.push((problem, c));
        }
    }
    let elapsed = start.elapsed();
    verdict(
        above == 0 && drops == 0 && wide == 0 && within_budget(elapsed, 300.0),
        format!(
            "25 objectives: bounds above oracle {above}, order-to-order drops {drops}, certified {n_certified}, \
             max certified gap {worst_gap:.2e}, {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn genericity_probe() -> Verdict {
    let start = Instant::now();
    let cfg = RunConfig {
        command: Some(Command::Generic),
        generic: GenericConfig {
            shape: vec![2, 2, 2],
            multidegree: vec![1, 1, 1],
            trials: 25,
            workers: 0,
        },
        ..config(3)
    };
    let report = match cmd_generic(&cfg) {
        Ok(r) => r,
        Err(e) => return verdict(false, format!("report not generated: {e}")),
    };
    let g = report.generic.as_ref().unwrap();
    let unconfirmed = g
        .per_trial
        .iter()
        .filter(|t| t.certified_order.is_some() && !t.confirmed())
        .count();
    let json_ok = serde_json::from_str::<serde_json::Value>(&report.to_json()).is_ok();
    verdict(
        json_ok && g.per_trial.len() == 25 && unconfirmed == 0,
        format!(
            "certified fraction {:.2}, order histogram {:?}, oracle-confirmed {}/{}, {:.1}s",
            g.certified_fraction,
            g.order_histogram,
            g.oracle_confirmed,
            g.certified,
            start.elapsed().as_secs_f64()
        ),
    )
}

fn degenerate_detection() -> Verdict {
    let s = ProductSphereShape::new(vec![2]).unwrap();
    let audit = |f: MultiPoly, g: Vec<MultiPoly>, points: Vec<Vec<f64>>| {
        let problem = PolyProblem::on_product_of_spheres(f).with_inequalities(g);
        cmd_certify(&config(3), &problem, &points).unwrap().certification.unwrap().minimizers
    };
    let cubic = audit(mono(&s, &[3, 0], 1.0), vec![], vec![vec![0.0, 1.0]]);
    let square = audit(mono(&s, &[2, 0], 1.0), vec![], vec![vec![0.0, 1.0], vec![0.0, -1.0]]);
    let flat_mu = audit(mono(&s, &[0, 1], 1.0), vec![mono(&s, &[1, 0], 1.0)], vec![vec![0.0, -1.0]]);
    let strict = audit(mono(&s, &[1, 0], -1.0), vec![mono(&s, &[1, 0], -1.0)], vec![vec![0.0, 1.0], vec![0.0, -1.0]]);
    let cubic_ok = !cubic[0].sosc.holds;
    let square_ok = square
        .iter()
        .all(|m| m.sosc.holds && (m.sosc.eigenvalues[0] - 2.0).abs() < 1e-9);
    let flat_mu_ok = !flat_mu[0].scc;
    let strict_ok = strict.iter().all(|m| m.scc);
    verdict(
        cubic_ok && square_ok && flat_mu_ok && strict_ok,
        format!(
            "x11^3 SOSC false: {cubic_ok}; x11^2 SOSC true with eigenvalue {:.3}: {square_ok}; \
             x12 with x11>=0 SCC false: {flat_mu_ok}; -x11 with -x11>=0 SCC true: {strict_ok}",
            square[0].sosc.eigenvalues.first().copied().unwrap_or(f64::NAN)
        ),
    )
}

fn multiplier_identity(certified: &Certified) -> Verdict {
    let mut worst = 0.0f64;
    let mut atoms = 0;
    let mut missing = 0;
    for (problem, cert) in certified {
        atoms += cert.minimizers.len();
        match multiplier_identity_residual(problem, cert) {
            Some(r) => worst = worst.max(r),
            None => missing += 1,
        }
    }
    verdict(
        atoms > 0 && missing == 0 && worst <= 1e-6,
        format!(
            "{atoms} atoms over {} runs: max |λ_i + d_i f(p)/2| {worst:.2e}, runs without multipliers {missing}",
            certified.len()
        ),
    )
}

fn derivative_correctness() -> Verdict {
    let mut worst_g = 0.0f64;
    let mut worst_h = 0.0f64;
    for seed in 0..200u64 {
        let mut rng = stream_rng(seed, Stream::Test, 900);
        let mut dims = Vec::new();
        let mut total = 0;
        loop {
            let n = rng.random_range(2..=4usize);
            if total + n > 8 {
                break;
            }
            dims.push(n);
            total += n;
            if rng.random_bool(0.4) {
                break;
            }
        }
        let shape = ProductSphereShape::new(dims).unwrap();
        let n = shape.total_dim();
        let mut p = MultiPoly::zero(&shape);
        for _ in 0..rng.random_range(1..12) {
            let mut powers = vec![0u32; n];
            for _ in 0..rng.random_range(0..=4) {
                powers[rng.random_range(0..n)] += 1;
            }
            p.add_term(Exponent::new(powers), rng.random_range(-2.0..2.0));
        }
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h = 1e-3;
        // five-point stencil, exact up to rounding for degree ≤ 4
        let diff = |f: &dyn Fn(&[f64]) -> f64, i: usize| {
            let at = |s: f64| {
                let mut y = x.clone();
                y[i] += s;
                f(&y)
            };
            (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h)
        };
        let grad = p.gradient(&x).unwrap();
        let hess = p.hessian(&x).unwrap();
        for i in 0..n {
            worst_g = worst_g.max((grad[i] - diff(&|y| p.eval(y).unwrap(), i)).abs());
            for j in 0..n {
                worst_h = worst_h.max((hess[(i, j)] - diff(&|y| p.gradient(y).unwrap()[j], i)).abs());
            }
        }
    }
    verdict(
        worst_g <= 1e-6 && worst_h <= 1e-6,
        format!("200 polynomials: max gradient error {worst_g:.2e}, max hessian error {worst_h:.2e}"),
    )
}

fn main() -> ExitCode {
    let mut certified: Certified = Vec::new();
    let results = [
        ("1 matrix exactness", matrix_exactness()),
        ("2 bilinear certificate", bilinear_certificate(&mut certified)),
        ("3 worked tensor expansion", worked_example_fidelity()),
        ("4 atomic round trip", atomic_round_trip()),
        ("5 sandwich property", sandwich(&mut certified)),
        ("6 genericity probe", genericity_probe()),
        ("7 degenerate detection", degenerate_detection()),
        ("8 multiplier identity", multiplier_identity(&certified)),
        ("9 derivative correctness", derivative_correctness()),
    ];
    let mut all = true;
    for (name, v) in &results {
        println!("{} criterion {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        all &= v.pass;
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
