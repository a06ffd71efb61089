//! Blocked multivariate polynomial arithmetic.

mod exponent;
mod json;
mod poly;
mod shape;

pub use exponent::Exponent;
pub use json::{PolyDocument, Role, TermDocument};
pub use poly::{MultiPoly, Multidegree};
pub use shape::ProductSphereShape;

use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::rng::{stream_rng, Stream};

/// `n choose k` for the small arguments used here.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Size of the coefficient space of multihomogeneous polynomials, compared
/// against the dimension of the product of spheres.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoeffSpaceDim {
    /// `c = Π binom(n_i + d_i − 1, n_i − 1)`.
    pub dim: u64,
    /// `Σ (n_i − 1)`.
    pub manifold_dim: u64,
    /// `c ≥ Σ (n_i − 1) + 1`.
    pub exceeds_manifold_dim: bool,
}

pub fn coeff_space_dim(shape: &ProductSphereShape, deg: &Multidegree) -> CoeffSpaceDim {
    assert_eq!(deg.0.len(), shape.num_blocks(), "one degree per block");
    let dim = shape
        .block_dims()
        .iter()
        .zip(&deg.0)
        .map(|(&n, &d)| binomial(n as u64 + d as u64 - 1, n as u64 - 1))
        .product();
    let manifold_dim = shape.manifold_dim() as u64;
    CoeffSpaceDim {
        dim,
        manifold_dim,
        exceeds_manifold_dim: dim > manifold_dim,
    }
}

/// All exponent vectors of length `n` with entries summing to `d`, in
/// descending lexicographic order.
pub(crate) fn compositions(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 1 {
            prefix.push(d);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=d).rev() {
            prefix.push(first);
            rec(n - 1, d - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        if d == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(n, d, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Every monomial of multidegree `deg`, in graded order.
pub fn multihomogeneous_monomials(shape: &ProductSphereShape, deg: &Multidegree) -> Vec<Exponent> {
    let mut acc: Vec<Vec<u32>> = vec![Vec::new()];
    for (&n, &d) in shape.block_dims().iter().zip(&deg.0) {
        let parts = compositions(n, d);
        acc = acc
            .into_iter()
            .flat_map(|prefix| {
                parts.iter().map(move |p| {
                    let mut v = prefix.clone();
                    v.extend_from_slice(p);
                    v
                })
            })
            .collect();
    }
    let mut out: Vec<Exponent> = acc.into_iter().map(Exponent::new).collect();
    out.sort();
    out
}

/// Multihomogeneous polynomial with i.i.d. standard normal coefficients on
/// every monomial of multidegree `deg`.
pub fn random_multihomogeneous(shape: &ProductSphereShape, deg: &Multidegree, seed: u64) -> MultiPoly {
    let mut rng = stream_rng(seed, Stream::Objective, 0);
    let monos = multihomogeneous_monomials(shape, deg);
    let mut p = MultiPoly::zero(shape);
    for e in monos {
        let c: f64 = StandardNormal.sample(&mut rng);
        p.add_term(e, c);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coeff_dim_examples() {
        let s = ProductSphereShape::new(vec![2, 3, 2]).unwrap();
        let c = coeff_space_dim(&s, &Multidegree(vec![1, 1, 1]));
        assert_eq!(c.dim, 12);
        assert_eq!(c.manifold_dim, 4);
        assert!(c.exceeds_manifold_dim);

        let s = ProductSphereShape::new(vec![2]).unwrap();
        assert_eq!(coeff_space_dim(&s, &Multidegree(vec![3])).dim, 4);

        let s = ProductSphereShape::new(vec![3, 3]).unwrap();
        assert_eq!(coeff_space_dim(&s, &Multidegree(vec![2, 2])).dim, 36);
    }

    #[test]
    fn random_poly_is_deterministic_and_full() {
        let s = ProductSphereShape::new(vec![2, 2]).unwrap();
        let d = Multidegree(vec![1, 1]);
        let a = random_multihomogeneous(&s, &d, 11);
        let b = random_multihomogeneous(&s, &d, 11);
        assert_eq!(a, b);
        assert_eq!(a.num_terms(), 4);
        assert_ne!(a, random_multihomogeneous(&s, &d, 12));
    }

    #[test]
    fn compositions_count() {
        assert_eq!(compositions(3, 2).len(), 6);
        assert_eq!(compositions(3, 2)[0], vec![2, 0, 0]);
        assert_eq!(compositions(1, 4), vec![vec![4]]);
    }
}
