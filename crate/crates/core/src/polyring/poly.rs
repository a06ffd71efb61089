use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use super::exponent::Exponent;
use super::shape::ProductSphereShape;
use crate::error::{Error, Result};

/// Multidegree `(d_1, …, d_m)` of a multihomogeneous polynomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Multidegree(pub Vec<u32>);

impl Multidegree {
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

/// Sparse real polynomial over the blocked variables of a [`ProductSphereShape`].
///
/// Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPoly {
    shape: ProductSphereShape,
    terms: BTreeMap<Exponent, f64>,
}

impl MultiPoly {
    pub fn zero(shape: &ProductSphereShape) -> Self {
        Self {
            shape: shape.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(shape: &ProductSphereShape, c: f64) -> Self {
        let mut p = Self::zero(shape);
        p.add_term(Exponent::zero(shape.total_dim()), c);
        p
    }

    /// The coordinate polynomial `x_var`.
    pub fn var(shape: &ProductSphereShape, var: usize) -> Self {
        let mut p = Self::zero(shape);
        p.add_term(Exponent::unit(shape.total_dim(), var, 1), 1.0);
        p
    }

    /// Build from `(exponent, coefficient)` pairs; repeated exponents are summed.
    pub fn from_terms<I>(shape: &ProductSphereShape, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, f64)>,
    {
        let mut p = Self::zero(shape);
        for (e, c) in terms {
            if e.nvars() != shape.total_dim() {
                return Err(Error::DimensionMismatch {
                    expected: shape.total_dim(),
                    got: e.nvars(),
                });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    /// `s_i = 1 − ‖x_i‖²`, the equation of the `i`-th sphere.
    pub fn sphere_constraint(shape: &ProductSphereShape, block: usize) -> Self {
        let n = shape.total_dim();
        let mut p = Self::constant(shape, 1.0);
        for v in shape.block_range(block) {
            p.add_term(Exponent::unit(n, v, 2), -1.0);
        }
        p
    }

    pub fn add_term(&mut self, e: Exponent, c: f64) {
        debug_assert_eq!(e.nvars(), self.shape.total_dim());
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(e);
        match entry {
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let v = *o.get() + c;
                if v == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn shape(&self) -> &ProductSphereShape {
        &self.shape
    }

    pub fn nvars(&self) -> usize {
        self.shape.total_dim()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded order.
    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, f64)> + '_ {
        self.terms.iter().map(|(e, &c)| (e, c))
    }

    pub fn coeff(&self, e: &Exponent) -> f64 {
        self.terms.get(e).copied().unwrap_or(0.0)
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Exponent::degree).max().unwrap_or(0)
    }

    /// `⌈deg / 2⌉`.
    pub fn half_degree(&self) -> u32 {
        self.degree().div_ceil(2)
    }

    /// Returns `Ok(Some(d))` when every monomial has the same block degrees
    /// `d`, `Ok(None)` when the polynomial is not multihomogeneous.
    pub fn multidegree(&self) -> Result<Option<Multidegree>> {
        let mut it = self.terms.keys();
        let first = it.next().ok_or(Error::ZeroPolynomial)?;
        let d = first.block_degrees(&self.shape);
        for e in it {
            if e.block_degrees(&self.shape) != d {
                return Ok(None);
            }
        }
        Ok(Some(Multidegree(d)))
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.nvars() {
            return Err(Error::DimensionMismatch {
                expected: self.nvars(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.terms.iter().map(|(e, c)| c * e.eval(x)).sum())
    }

    /// `∂p/∂x_var` as a polynomial.
    pub fn derivative(&self, var: usize) -> Self {
        let mut d = Self::zero(&self.shape);
        for (e, &c) in &self.terms {
            let p = e.powers()[var];
            if let Some(lower) = e.decrement(var) {
                d.add_term(lower, c * p as f64);
            }
        }
        d
    }

    pub fn gradient(&self, x: &[f64]) -> Result<DVector<f64>> {
        self.check_point(x)?;
        let n = self.nvars();
        let mut g = DVector::zeros(n);
        for (e, &c) in &self.terms {
            for (j, &p) in e.powers().iter().enumerate() {
                if p == 0 {
                    continue;
                }
                g[j] += c * p as f64 * e.decrement(j).expect("positive power").eval(x);
            }
        }
        Ok(g)
    }

    pub fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        let n = self.nvars();
        let mut h = DMatrix::zeros(n, n);
        for (e, &c) in &self.terms {
            let pw = e.powers();
            for j in 0..n {
                if pw[j] == 0 {
                    continue;
                }
                let dj = e.decrement(j).expect("positive power");
                let cj = c * pw[j] as f64;
                for l in j..n {
                    let pl = dj.powers()[l];
                    if pl == 0 {
                        continue;
                    }
                    let v = cj * pl as f64 * dj.decrement(l).expect("positive power").eval(x);
                    h[(j, l)] += v;
                    if l != j {
                        h[(l, j)] += v;
                    }
                }
            }
        }
        Ok(h)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero(&self.shape);
        for (e, &c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    fn assert_same_shape(&self, other: &Self) {
        assert_eq!(
            self.shape, other.shape,
            "polynomials live on different variable blocks"
        );
    }

    /// Drop coefficients with magnitude at or below `tol`.
    pub fn prune(&self, tol: f64) -> Self {
        let mut out = Self::zero(&self.shape);
        for (e, &c) in &self.terms {
            if c.abs() > tol {
                out.add_term(e.clone(), c);
            }
        }
        out
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;

    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.assert_same_shape(rhs);
        let mut out = self.clone();
        for (e, &c) in &rhs.terms {
            out.add_term(e.clone(), c);
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;

    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self.assert_same_shape(rhs);
        let mut out = self.clone();
        for (e, &c) in &rhs.terms {
            out.add_term(e.clone(), -c);
        }
        out
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;

    /// Sparse convolution of the exponent maps.
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.assert_same_shape(rhs);
        let mut out = MultiPoly::zero(&self.shape);
        for (a, &ca) in &self.terms {
            for (b, &cb) in &rhs.terms {
                out.add_term(a + b, ca * cb);
            }
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;

    fn neg(self) -> MultiPoly {
        self.scale(-1.0)
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, &c)) in self.terms.iter().enumerate() {
            let mono: Vec<String> = e
                .powers()
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0)
                .map(|(v, &p)| {
                    let name = self.shape.var_name(v);
                    if p == 1 {
                        name
                    } else {
                        format!("{name}^{p}")
                    }
                })
                .collect();
            let sign = if c < 0.0 { "-" } else { "+" };
            if k == 0 {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let a = c.abs();
            if mono.is_empty() {
                write!(f, "{a}")?;
            } else if a == 1.0 {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{a}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}
