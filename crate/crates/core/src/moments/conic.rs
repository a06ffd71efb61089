use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::basis::MonomialBasis;
use crate::error::{Error, Result};

/// One coefficient of a PSD block: entry `(row, col)` receives `coef · y[var]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockEntry {
    pub row: usize,
    pub col: usize,
    pub var: usize,
    pub coef: f64,
}

/// Symmetric matrix `Σ_e coef_e · y[var_e] · E_(row_e, col_e)` constrained PSD.
/// Both triangles are listed explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdBlock {
    pub label: String,
    pub dim: usize,
    pub entries: Vec<BlockEntry>,
}

/// `Σ coef · y[var] = rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearEquality {
    pub terms: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// Linear objective over `y`, PSD blocks affine in `y`, and linear equalities.
///
/// Variable `i` is the moment of the `i`-th monomial of the graded basis of
/// degree `order` in `nvars` variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConicProblem {
    pub nvars: usize,
    pub order: u32,
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub blocks: Vec<PsdBlock>,
    pub equalities: Vec<LinearEquality>,
}

impl PsdBlock {
    /// Dense matrix at `y`.
    pub fn eval(&self, y: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for e in &self.entries {
            m[(e.row, e.col)] += e.coef * y[e.var];
        }
        m
    }

    fn entry_map(&self) -> BTreeMap<(usize, usize), BTreeMap<usize, f64>> {
        let mut map: BTreeMap<(usize, usize), BTreeMap<usize, f64>> = BTreeMap::new();
        for e in &self.entries {
            *map.entry((e.row, e.col)).or_default().entry(e.var).or_default() += e.coef;
        }
        map
    }
}

impl ConicProblem {
    pub fn variable_basis(&self) -> MonomialBasis {
        MonomialBasis::new(self.nvars, self.order)
    }

    /// Structural checks: index ranges and symmetric entry maps.
    pub fn validate(&self) -> Result<()> {
        if self.objective.len() != self.num_vars {
            return Err(Error::MalformedProblem(format!(
                "objective has {} coefficients for {} variables",
                self.objective.len(),
                self.num_vars
            )));
        }
        for (b, block) in self.blocks.iter().enumerate() {
            for e in &block.entries {
                if e.row >= block.dim || e.col >= block.dim || e.var >= self.num_vars {
                    return Err(Error::MalformedProblem(format!(
                        "block {b} entry ({}, {}) -> y[{}] out of range",
                        e.row, e.col, e.var
                    )));
                }
                if !e.coef.is_finite() {
                    return Err(Error::MalformedProblem(format!("block {b} has a non-finite coefficient")));
                }
            }
            let map = block.entry_map();
            for (&(r, c), combo) in &map {
                if r == c {
                    continue;
                }
                let mirror = map.get(&(c, r));
                let same = mirror.is_some_and(|m| {
                    m.len() == combo.len()
                        && m.iter().zip(combo).all(|((va, ca), (vb, cb))| va == vb && ca == cb)
                });
                if !same {
                    return Err(Error::MalformedProblem(format!(
                        "block {b} is not symmetric at ({r}, {c})"
                    )));
                }
            }
        }
        for (i, eq) in self.equalities.iter().enumerate() {
            if eq.terms.iter().any(|&(v, _)| v >= self.num_vars) {
                return Err(Error::MalformedProblem(format!("equality {i} references a missing variable")));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, y: &[f64]) -> f64 {
        self.objective.iter().zip(y).map(|(c, v)| c * v).sum()
    }

    /// `|Σ a y − b|` for every equality.
    pub fn equality_residuals(&self, y: &[f64]) -> Vec<f64> {
        self.equalities
            .iter()
            .map(|eq| (eq.terms.iter().map(|&(v, c)| c * y[v]).sum::<f64>() - eq.rhs).abs())
            .collect()
    }

    /// Smallest eigenvalue of every block at `y`.
    pub fn block_min_eigenvalues(&self, y: &[f64]) -> Vec<f64> {
        self.blocks
            .iter()
            .map(|b| {
                if b.dim == 0 {
                    return 0.0;
                }
                b.eval(y).symmetric_eigenvalues().min()
            })
            .collect()
    }

    pub fn to_debug_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("conic problems always serialize")
    }
}
