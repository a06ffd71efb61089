use std::collections::HashMap;

use crate::polyring::{binomial, compositions, Exponent};

/// Monomials of total degree `≤ t` in graded order, with a reverse index.
///
/// The basis of degree `t − 1` is a prefix of the basis of degree `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialBasis {
    nvars: usize,
    degree: u32,
    exps: Vec<Exponent>,
    index: HashMap<Exponent, usize>,
}

impl MonomialBasis {
    pub fn new(nvars: usize, degree: u32) -> Self {
        assert!(nvars >= 1, "need at least one variable");
        let mut exps = Vec::with_capacity(basis_size(nvars, degree));
        for d in 0..=degree {
            exps.extend(compositions(nvars, d).into_iter().map(Exponent::new));
        }
        let index = exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        Self {
            nvars,
            degree,
            exps,
            index,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self) -> &[Exponent] {
        &self.exps
    }

    pub fn get(&self, i: usize) -> &Exponent {
        &self.exps[i]
    }

    pub fn index_of(&self, e: &Exponent) -> Option<usize> {
        self.index.get(e).copied()
    }

    /// Number of basis elements of degree `≤ t` (the prefix length).
    pub fn prefix_len(&self, t: u32) -> usize {
        basis_size(self.nvars, t.min(self.degree))
    }

    /// Monomial vector `(x^α)_α` at `x`.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.exps.iter().map(|e| e.eval(x)).collect()
    }
}

/// `binom(N + t, N)`.
pub fn basis_size(nvars: usize, t: u32) -> usize {
    binomial(nvars as u64 + t as u64, nvars as u64) as usize
}

/// Graded monomial basis of degree `≤ t` in `nvars` variables.
pub fn monomial_basis(nvars: usize, t: u32) -> MonomialBasis {
    MonomialBasis::new(nvars, t)
}
