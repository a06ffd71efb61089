use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;
use spheropt::oracle::{als_rank_one, svd_oracle, OracleSettings};
use spheropt::rng::{stream_rng, Stream};
use spheropt::tensor::{best_rank_one, hs_inner, hs_norm_sq, tensor_to_poly, Branch, DenseTensor, RankOneStatus};
use spheropt::{Exponent, HierarchySettings};

fn worked_example() -> DenseTensor {
    DenseTensor::from_fn(vec![2, 3, 2], |idx| {
        let slices = [[[2.0, 5.0, 3.0], [-1.0, 3.0, 0.0]], [[-8.0, 4.0, 1.0], [7.0, -6.0, -2.0]]];
        slices[idx[2]][idx[0]][idx[1]]
    })
    .unwrap()
}

fn random_tensor(dims: Vec<usize>, seed: u64) -> DenseTensor {
    let mut rng = stream_rng(seed, Stream::Test, 0);
    DenseTensor::from_fn(dims, |_| rng.sample(StandardNormal)).unwrap()
}

fn settings() -> HierarchySettings {
    HierarchySettings {
        k_max: 3,
        ..Default::default()
    }
}

#[test]
fn worked_example_norm() {
    let a = worked_example();
    assert_eq!(hs_norm_sq(&a), 218.0);
    assert_eq!(hs_inner(&a, &DenseTensor::zeros(vec![2, 3, 2]).unwrap()).unwrap(), 0.0);
}

#[test]
fn worked_example_polynomial() {
    let p = tensor_to_poly(&worked_example()).unwrap();
    // (x1 index, x2 index, x3 index) → coefficient, in the printed order
    let expected = [
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
    assert_eq!(p.num_terms(), expected.len());
    for (j, c) in expected {
        let mut powers = vec![0; 7];
        powers[j[0] - 1] = 1;
        powers[2 + j[1] - 1] = 1;
        powers[5 + j[2] - 1] = 1;
        assert_eq!(p.coeff(&Exponent::new(powers)), c);
    }
}

#[test]
fn diagonal_matrix() {
    let a = DenseTensor::from_matrix(&[vec![3.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let r = best_rank_one(&a, &settings()).unwrap();
    assert_eq!(r.status, RankOneStatus::Certified);
    let a_star = r.a_star.unwrap();
    assert!((a_star.abs() - 3.0).abs() < 1e-6);
    assert!((r.error.unwrap() - 1.0).abs() < 1e-6);
    let u = r.vectors.unwrap();
    assert!((u[0][0].abs() - 1.0).abs() < 1e-6 && (u[1][0].abs() - 1.0).abs() < 1e-6);
    assert!(a_star * u[0][0] * u[1][0] > 0.0);
}

#[test]
fn rank_one_input_has_zero_error() {
    let u = vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![1.0, 0.0]];
    let a = DenseTensor::rank_one(5.0, &u).unwrap();
    let r = best_rank_one(&a, &settings()).unwrap();
    assert_eq!(r.status, RankOneStatus::Certified);
    assert!((r.a_star.unwrap().abs() - 5.0).abs() < 1e-6);
    assert!(r.error.unwrap() < 1e-8);
}

#[test]
fn worked_example_matches_power_iteration() {
    let a = worked_example();
    let r = best_rank_one(&a, &settings()).unwrap();
    let o = als_rank_one(&a, &OracleSettings::default()).unwrap();
    assert_eq!(r.status, RankOneStatus::Certified);
    assert!((r.a_star.unwrap().abs() - o.best().value.abs()).abs() < 1e-5);
    assert!((r.a_plus - o.max.value).abs() < 1e-5);
    assert!((r.a_minus - o.min.value).abs() < 1e-5);
}

#[test]
fn random_cubes_match_power_iteration() {
    for seed in 0..3 {
        let a = random_tensor(vec![2, 2, 2], seed);
        let r = best_rank_one(&a, &settings()).unwrap();
        let o = als_rank_one(&a, &OracleSettings::default()).unwrap();
        assert!((r.a_star.unwrap().abs() - o.best().value.abs()).abs() < 1e-5, "seed {seed}");
    }
}

#[test]
fn branch_symmetry() {
    let a = random_tensor(vec![2, 2, 2], 11);
    let r = best_rank_one(&a, &settings()).unwrap();
    let s = best_rank_one(&a.scale(-1.0), &settings()).unwrap();
    assert!((r.a_star.unwrap().abs() - s.a_star.unwrap().abs()).abs() < 1e-6);
    assert!((r.error.unwrap() - s.error.unwrap()).abs() < 1e-6);
    assert!((r.a_plus + s.a_minus).abs() < 1e-6);
}

#[test]
fn sign_flip_tie_goes_to_max_branch() {
    let a = DenseTensor::from_matrix(&[vec![-4.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let r = best_rank_one(&a, &settings()).unwrap();
    assert!((r.a_plus - 4.0).abs() < 1e-6 && (r.a_minus + 4.0).abs() < 1e-6);
    assert_eq!(r.branch, Branch::Max);
    assert!((r.a_star.unwrap() - 4.0).abs() < 1e-6);
}

#[test]
fn orthogonal_invariance() {
    let a = random_tensor(vec![2, 2, 2], 5);
    let (c, s) = (0.6, 0.8);
    let rotated = DenseTensor::from_fn(vec![2, 2, 2], |idx| {
        let q = [[c, -s], [s, c]];
        (0..2).map(|k| q[idx[1]][k] * a.get(&[idx[0], k, idx[2]])).sum()
    })
    .unwrap();
    let r = best_rank_one(&a, &settings()).unwrap();
    let q = best_rank_one(&rotated, &settings()).unwrap();
    assert!((r.a_star.unwrap().abs() - q.a_star.unwrap().abs()).abs() < 1e-6);
    assert!((r.error.unwrap() - q.error.unwrap()).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn matrix_case_is_exact(rows in 2usize..=4, cols in 2usize..=4, seed in 0u64..1000) {
        let a = random_tensor(vec![rows, cols], seed);
        let r = best_rank_one(&a, &settings()).unwrap();
        let sigma = svd_oracle(&DMatrix::from_row_slice(rows, cols, a.values())).sigma_max;
        prop_assert_eq!(r.status, RankOneStatus::Certified);
        let a_star = r.a_star.unwrap();
        prop_assert!((a_star.abs() - sigma).abs() < 1e-6);
        let err = r.error.unwrap();
        prop_assert!((err - (r.norm_sq - a_star * a_star)).abs() < 1e-6);
        prop_assert!(err >= -1e-9 && err <= r.norm_sq + 1e-9);
        for u in r.vectors.unwrap() {
            prop_assert!((u.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn inner_product_is_symmetric(seed in 0u64..1000) {
        let a = random_tensor(vec![2, 3, 2], seed);
        let b = random_tensor(vec![2, 3, 2], seed + 1);
        prop_assert_eq!(hs_inner(&a, &b).unwrap(), hs_inner(&b, &a).unwrap());
        prop_assert_eq!(hs_inner(&a, &a).unwrap(), hs_norm_sq(&a));
    }

    #[test]
    fn power_iteration_matches_svd(seed in 0u64..1000) {
        let a = random_tensor(vec![3, 3], seed);
        let o = als_rank_one(&a, &OracleSettings { starts: 8, ..Default::default() }).unwrap();
        let sigma = svd_oracle(&DMatrix::from_row_slice(3, 3, a.values())).sigma_max;
        prop_assert!((o.best().value.abs() - sigma).abs() < 1e-8);
    }
}
