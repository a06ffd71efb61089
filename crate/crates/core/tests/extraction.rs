use proptest::prelude::*;
use rand::Rng;
use spheropt::certify::{extract_atoms, flat_truncation, ExtractionSettings};
use spheropt::moments::{dirac_moments, localizing_matrix};
use spheropt::oracle::random_sphere_point;
use spheropt::rng::{stream_rng, Stream};
use spheropt::{MultiPoly, ProductSphereShape};

const SHAPES: [&[usize]; 7] = [&[2], &[3], &[2, 2], &[4], &[2, 3], &[3, 3], &[2, 2, 2]];

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// `r` points on the spheres, pairwise at least 0.3 apart, with weights
/// bounded away from zero.
fn atom_set(seed: u64, shape: &ProductSphereShape, r: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = stream_rng(seed, Stream::Test, 7);
    let mut atoms: Vec<Vec<f64>> = Vec::new();
    while atoms.len() < r {
        let p = random_sphere_point(shape.block_dims(), &mut rng).concat();
        if atoms.iter().all(|a| dist(a, &p) > 0.3) {
            atoms.push(p);
        }
    }
    let raw: Vec<f64> = (0..r).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    (atoms, raw.iter().map(|w| w / total).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn dirac_round_trip(seed in any::<u64>(), shape_ix in 0usize..SHAPES.len(), r in 1usize..=3) {
        let shape = ProductSphereShape::new(SHAPES[shape_ix].to_vec()).unwrap();
        let (atoms, weights) = atom_set(seed, &shape, r);
        let k = 3;
        let y = dirac_moments(&atoms, &weights, 2 * k).unwrap();
        let flat = flat_truncation(&y, k, 1, 1, 1e-6).unwrap();
        prop_assert!(flat.found);
        prop_assert_eq!(flat.rank, Some(r));
        let m = extract_atoms(&y, flat.t.unwrap(), r, Some(&shape), &ExtractionSettings { seed, ..Default::default() }).unwrap();
        prop_assert_eq!(m.len(), r);
        for (p, w) in atoms.iter().zip(&weights) {
            let (j, d) = m.atoms.iter().enumerate()
                .map(|(j, q)| (j, dist(p, q)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            prop_assert!(d < 1e-6, "atom off by {}", d);
            prop_assert!((m.weights[j] - w).abs() < 1e-6);
        }
        prop_assert!(m.moment_residual < 1e-8);
    }

    #[test]
    fn localizing_matrices_of_feasible_measures_are_psd(seed in any::<u64>(), r in 1usize..=3) {
        let shape = ProductSphereShape::new(vec![2, 2]).unwrap();
        let g = MultiPoly::var(&shape, 0).scale(-1.0);
        let (mut atoms, weights) = atom_set(seed, &shape, r);
        for a in &mut atoms {
            a[0] = -a[0].abs();
        }
        let y = dirac_moments(&atoms, &weights, 4).unwrap();
        let l = localizing_matrix(&y, &g, 1).unwrap();
        let min = l.symmetric_eigenvalues().min();
        prop_assert!(min >= -1e-10);
    }
}
