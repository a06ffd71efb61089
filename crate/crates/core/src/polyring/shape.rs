use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Block structure `(n_1, …, n_m)` of the variables `x = (x_1, …, x_m)`.
///
/// Variables are laid out in the fixed order `x_11, …, x_1n_1, x_21, …, x_mn_m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct ProductSphereShape {
    block_dims: Vec<usize>,
    offsets: Vec<usize>,
    total_dim: usize,
}

impl ProductSphereShape {
    /// Every block must have at least two variables.
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(Error::InvalidShape("at least one block is required".into()));
        }
        if let Some(bad) = block_dims.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidShape(format!(
                "block dimension {bad} < 2 (each sphere needs n_i ≥ 2)"
            )));
        }
        let mut offsets = Vec::with_capacity(block_dims.len());
        let mut acc = 0;
        for &n in &block_dims {
            offsets.push(acc);
            acc += n;
        }
        Ok(Self {
            block_dims,
            offsets,
            total_dim: acc,
        })
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    /// `N = Σ n_i`.
    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Dimension of the product of spheres as a manifold, `Σ (n_i − 1)`.
    pub fn manifold_dim(&self) -> usize {
        self.total_dim - self.num_blocks()
    }

    /// Variable indices belonging to block `i`.
    pub fn block_range(&self, i: usize) -> Range<usize> {
        self.offsets[i]..self.offsets[i] + self.block_dims[i]
    }

    pub fn block_of(&self, var: usize) -> usize {
        self.offsets.partition_point(|&o| o <= var) - 1
    }

    /// Name of variable `var` in the `x_ij` convention (1-based).
    pub fn var_name(&self, var: usize) -> String {
        let b = self.block_of(var);
        format!("x{}{}", b + 1, var - self.offsets[b] + 1)
    }

    /// Rescale each block of `x` to unit length. Zero blocks are left alone.
    pub fn normalize_blocks(&self, x: &mut [f64]) {
        for i in 0..self.num_blocks() {
            let r = self.block_range(i);
            let norm = x[r.clone()].iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                x[r].iter_mut().for_each(|v| *v /= norm);
            }
        }
    }

    /// `|1 − ‖x_i‖²|` for every block.
    pub fn sphere_residuals(&self, x: &[f64]) -> Vec<f64> {
        (0..self.num_blocks())
            .map(|i| (1.0 - x[self.block_range(i)].iter().map(|v| v * v).sum::<f64>()).abs())
            .collect()
    }
}

impl TryFrom<Vec<usize>> for ProductSphereShape {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Self::new(dims)
    }
}

impl From<ProductSphereShape> for Vec<usize> {
    fn from(shape: ProductSphereShape) -> Self {
        shape.block_dims
    }
}
