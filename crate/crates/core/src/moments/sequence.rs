use nalgebra::DMatrix;

use super::basis::MonomialBasis;
use crate::error::{Error, Result};
use crate::polyring::{Exponent, MultiPoly};

/// Pseudo-moments `y_α` for every `|α| ≤ order`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    basis: MonomialBasis,
    values: Vec<f64>,
}

impl MomentSequence {
    /// `values[i]` is the moment of `basis.get(i)`.
    pub fn new(basis: MonomialBasis, values: Vec<f64>) -> Result<Self> {
        if values.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                got: values.len(),
            });
        }
        Ok(Self { basis, values })
    }

    /// Sequence with every moment computed by `f`.
    pub fn from_fn(nvars: usize, order: u32, f: impl Fn(&Exponent) -> f64) -> Self {
        let basis = MonomialBasis::new(nvars, order);
        let values = basis.exponents().iter().map(f).collect();
        Self { basis, values }
    }

    pub fn order(&self) -> u32 {
        self.basis.degree()
    }

    pub fn nvars(&self) -> usize {
        self.basis.nvars()
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, e: &Exponent) -> Option<f64> {
        self.basis.index_of(e).map(|i| self.values[i])
    }

    pub fn y0(&self) -> f64 {
        self.values[0]
    }

    /// The Riesz functional `L_y(p) = Σ p_α y_α`.
    pub fn riesz(&self, p: &MultiPoly) -> Result<f64> {
        p.terms()
            .map(|(e, c)| {
                self.get(e).map(|y| c * y).ok_or(Error::OrderTooSmall {
                    needed: e.degree(),
                    available: self.order(),
                })
            })
            .sum()
    }

    /// Truncation to moments of degree `≤ order`.
    pub fn truncate(&self, order: u32) -> Result<Self> {
        if order > self.order() {
            return Err(Error::OrderTooSmall {
                needed: order,
                available: self.order(),
            });
        }
        let basis = MonomialBasis::new(self.nvars(), order);
        let values = self.values[..basis.len()].to_vec();
        Ok(Self { basis, values })
    }
}

/// Moments of the atomic measure `Σ c_i δ_{x(i)}` up to degree `order`.
pub fn dirac_moments(points: &[Vec<f64>], weights: &[f64], order: u32) -> Result<MomentSequence> {
    if points.is_empty() || points.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            got: weights.len(),
        });
    }
    let nvars = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != nvars) {
        return Err(Error::DimensionMismatch {
            expected: nvars,
            got: p.len(),
        });
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-10 || weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::InvalidWeights(sum));
    }
    Ok(MomentSequence::from_fn(nvars, order, |e| {
        points.iter().zip(weights).map(|(p, w)| w * e.eval(p)).sum()
    }))
}

/// `M_t(y)`, entry `(α, β) = y_{α+β}` for `|α|, |β| ≤ t`.
pub fn moment_matrix(y: &MomentSequence, t: u32) -> Result<DMatrix<f64>> {
    if 2 * t > y.order() {
        return Err(Error::OrderTooSmall {
            needed: 2 * t,
            available: y.order(),
        });
    }
    let s = y.basis().prefix_len(t);
    let b = y.basis();
    let mut m = DMatrix::zeros(s, s);
    for i in 0..s {
        for j in i..s {
            let e = b.get(i) + b.get(j);
            let v = y.values[b.index_of(&e).expect("degree ≤ order")];
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// `M_t(g y)`, entry `(α, β) = Σ_δ g_δ y_{α+β+δ}`.
pub fn localizing_matrix(y: &MomentSequence, g: &MultiPoly, t: u32) -> Result<DMatrix<f64>> {
    let needed = 2 * t + g.degree();
    if needed > y.order() {
        return Err(Error::OrderTooSmall {
            needed,
            available: y.order(),
        });
    }
    if g.nvars() != y.nvars() {
        return Err(Error::DimensionMismatch {
            expected: y.nvars(),
            got: g.nvars(),
        });
    }
    let s = y.basis().prefix_len(t);
    let b = y.basis();
    let mut m = DMatrix::zeros(s, s);
    for i in 0..s {
        for j in i..s {
            let ab = b.get(i) + b.get(j);
            let v: f64 = g
                .terms()
                .map(|(d, c)| c * y.values[b.index_of(&(&ab + d)).expect("degree ≤ order")])
                .sum();
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}
