use spheropt::certify::{certify_point, CertifySettings};
use spheropt::oracle::{multistart_min, OracleSettings};
use spheropt::polyring::random_multihomogeneous;
use spheropt::sdp::{solve_hierarchy, SolverSettings};
use spheropt::{solve_pop, Exponent, HierarchySettings, MultiPoly, Multidegree, PolyProblem, ProductSphereShape};

fn mono(shape: &ProductSphereShape, powers: &[u32], c: f64) -> MultiPoly {
    MultiPoly::from_terms(shape, [(Exponent::new(powers.to_vec()), c)]).unwrap()
}

fn bilinear() -> PolyProblem {
    let s = ProductSphereShape::new(vec![2, 2]).unwrap();
    PolyProblem::on_product_of_spheres(mono(&s, &[1, 0, 1, 0], 1.0))
}

fn settings(k_max: u32) -> HierarchySettings {
    HierarchySettings {
        k_max,
        ..Default::default()
    }
}

#[test]
fn bilinear_atoms_are_sign_patterns() {
    let out = solve_pop(&bilinear(), &settings(3)).unwrap();
    assert!(out.certified_order.unwrap() <= 3);
    assert!((out.f_min().unwrap() + 1.0).abs() < 1e-6);
    let optimal = [[1.0, 0.0, -1.0, 0.0], [-1.0, 0.0, 1.0, 0.0]];
    let atoms = out.minimizers();
    assert!(!atoms.is_empty());
    for a in &atoms {
        let d = optimal
            .iter()
            .map(|o| o.iter().zip(a).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min);
        assert!(d < 1e-6, "{a:?}");
    }
    let raw = &out.atoms.as_ref().unwrap().atoms;
    for a in raw {
        let d = optimal
            .iter()
            .map(|o| o.iter().zip(a).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min);
        assert!(d < 1e-4, "{a:?}");
    }
    let cert = out.certification.unwrap();
    assert!(cert.summary.certified, "{}", cert.summary.message);
    for m in &cert.minimizers {
        for l in &m.lambda {
            assert!((l - 0.5).abs() < 1e-6);
        }
    }
}

#[test]
fn constant_objective_certifies_at_the_first_order() {
    let s = ProductSphereShape::new(vec![2, 3]).unwrap();
    let p = PolyProblem::on_product_of_spheres(MultiPoly::constant(&s, 2.5));
    let out = solve_pop(&p, &settings(3)).unwrap();
    assert_eq!(out.certified_order, Some(p.d_bar()));
    assert!((out.f_min().unwrap() - 2.5).abs() < 1e-6);
}

#[test]
fn bounds_stay_below_the_oracle_and_increase() {
    let shape = ProductSphereShape::new(vec![2, 2, 2]).unwrap();
    for seed in 0..3 {
        let f = random_multihomogeneous(&shape, &Multidegree(vec![1, 1, 1]), seed);
        let oracle = multistart_min(&f, &OracleSettings { seed, ..Default::default() }).unwrap();
        let p = PolyProblem::on_product_of_spheres(f);
        let sweep = solve_hierarchy(&p, p.d_bar(), 3, &SolverSettings::default()).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for (k, sol) in sweep {
            let sol = sol.unwrap();
            assert!(sol.status.has_solution(), "k = {k}");
            assert!(sol.objective <= oracle.value + 1e-6);
            assert!(sol.objective >= prev - 1e-7);
            prev = sol.objective;
        }
        let out = solve_pop(&p, &settings(3)).unwrap();
        assert!((out.f_min().unwrap() - oracle.value).abs() <= 1e-5, "seed {seed}");
        let cert = out.certification.unwrap();
        assert!(cert.summary.certified, "{}", cert.summary.message);
        for m in &cert.minimizers {
            for l in &m.lambda {
                assert!((l + m.value / 2.0).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn cubic_at_a_flat_point_fails_sosc() {
    let s = ProductSphereShape::new(vec![2]).unwrap();
    let p = PolyProblem::on_product_of_spheres(mono(&s, &[3, 0], 1.0));
    let m = certify_point(&p, &[0.0, 1.0], &CertifySettings::default()).unwrap();
    assert!(m.fooc && m.lic.holds);
    assert!(!m.sosc.holds);
}

#[test]
fn square_has_projected_curvature_two() {
    let s = ProductSphereShape::new(vec![2]).unwrap();
    let p = PolyProblem::on_product_of_spheres(mono(&s, &[2, 0], 1.0));
    for y in [1.0, -1.0] {
        let m = certify_point(&p, &[0.0, y], &CertifySettings::default()).unwrap();
        assert!(m.sosc.holds);
        assert!((m.sosc.eigenvalues[0] - 2.0).abs() < 1e-12);
    }
}

#[test]
fn off_sphere_point_is_flagged() {
    let m = certify_point(&bilinear(), &[0.5, 0.0, -1.0, 0.0], &CertifySettings::default()).unwrap();
    assert!(!m.feasible);
}
