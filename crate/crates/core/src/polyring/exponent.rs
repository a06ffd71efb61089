use std::cmp::Ordering;
use std::ops::Add;

use super::shape::ProductSphereShape;

/// Exponent vector of a monomial, dense over the `N` variables.
///
/// Ordering is graded: total degree first, then lexicographically with
/// `x_11` the heaviest variable, so sorting ascending lists
/// `1, x_11, x_12, …, x_11², x_11 x_12, …`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Exponent {
    powers: Vec<u32>,
    degree: u32,
}

impl Exponent {
    pub fn new(powers: Vec<u32>) -> Self {
        let degree = powers.iter().sum();
        Self { powers, degree }
    }

    pub fn zero(nvars: usize) -> Self {
        Self {
            powers: vec![0; nvars],
            degree: 0,
        }
    }

    /// The exponent of the single variable `x_var`, raised to `power`.
    pub fn unit(nvars: usize, var: usize, power: u32) -> Self {
        let mut powers = vec![0; nvars];
        powers[var] = power;
        Self {
            powers,
            degree: power,
        }
    }

    pub fn powers(&self) -> &[u32] {
        &self.powers
    }

    pub fn nvars(&self) -> usize {
        self.powers.len()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.degree == 0
    }

    /// Per-block degrees `|α_i|`.
    pub fn block_degrees(&self, shape: &ProductSphereShape) -> Vec<u32> {
        (0..shape.num_blocks())
            .map(|i| self.powers[shape.block_range(i)].iter().sum())
            .collect()
    }

    /// `α − e_var`, if the power of `var` is positive.
    pub fn decrement(&self, var: usize) -> Option<Self> {
        if self.powers[var] == 0 {
            return None;
        }
        let mut powers = self.powers.clone();
        powers[var] -= 1;
        Some(Self {
            powers,
            degree: self.degree - 1,
        })
    }

    pub fn increment(&self, var: usize) -> Self {
        let mut powers = self.powers.clone();
        powers[var] += 1;
        Self {
            powers,
            degree: self.degree + 1,
        }
    }

    /// `x^α` evaluated at `x`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.powers
            .iter()
            .zip(x)
            .filter(|(&e, _)| e > 0)
            .map(|(&e, &xi)| xi.powi(e as i32))
            .product()
    }
}

impl Add for &Exponent {
    type Output = Exponent;

    fn add(self, rhs: &Exponent) -> Exponent {
        debug_assert_eq!(self.powers.len(), rhs.powers.len());
        Exponent {
            powers: self.powers.iter().zip(&rhs.powers).map(|(a, b)| a + b).collect(),
            degree: self.degree + rhs.degree,
        }
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| other.powers.cmp(&self.powers))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_order() {
        let one = Exponent::zero(2);
        let x1 = Exponent::unit(2, 0, 1);
        let x2 = Exponent::unit(2, 1, 1);
        let x1sq = Exponent::unit(2, 0, 2);
        let x1x2 = Exponent::new(vec![1, 1]);
        let mut v = vec![x1x2.clone(), x2.clone(), x1sq.clone(), one.clone(), x1.clone()];
        v.sort();
        assert_eq!(v, vec![one, x1, x2, x1sq, x1x2]);
    }

    #[test]
    fn block_degrees_split_by_block() {
        let shape = ProductSphereShape::new(vec![2, 3]).unwrap();
        let e = Exponent::new(vec![1, 2, 0, 1, 1]);
        assert_eq!(e.block_degrees(&shape), vec![3, 2]);
        assert_eq!(e.degree(), 5);
    }

    #[test]
    fn eval_and_shift() {
        let e = Exponent::new(vec![2, 1]);
        assert_eq!(e.eval(&[3.0, -2.0]), -18.0);
        assert_eq!(e.decrement(1).unwrap(), Exponent::new(vec![2, 0]));
        assert!(Exponent::new(vec![0, 1]).decrement(0).is_none());
    }
}
