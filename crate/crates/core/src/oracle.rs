//! Heuristic reference values: the SVD for matrices, higher-order power
//! iteration for tensors, and multistart projected gradient descent for
//! polynomials on a product of spheres.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyring::{MultiPoly, ProductSphereShape};
use crate::rng::{stream_rng, Stream};
use crate::tensor::DenseTensor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleSettings {
    pub starts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            starts: 64,
            max_iter: 500,
            tol: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdOracle {
    pub sigma_max: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

/// Top singular triple of `a`.
pub fn svd_oracle(a: &DMatrix<f64>) -> SvdOracle {
    let svd = a.clone().svd(true, true);
    let k = svd.singular_values.imax();
    let u = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    SvdOracle {
        sigma_max: svd.singular_values[k],
        left: u.column(k).iter().copied().collect(),
        right: vt.row(k).iter().copied().collect(),
    }
}

/// Point drawn uniformly on each sphere.
pub fn random_sphere_point(dims: &[usize], rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    dims.iter()
        .map(|&n| loop {
            let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                break v.into_iter().map(|x| x / norm).collect();
            }
        })
        .collect()
}

fn normalized(v: Vec<f64>) -> Option<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm > 1e-300).then(|| v.into_iter().map(|x| x / norm).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerBranch {
    /// `⟨A, u_1 ⊗ … ⊗ u_m⟩` at the best start.
    pub value: f64,
    pub vectors: Vec<Vec<f64>>,
    /// Start that produced the value.
    pub start: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlsResult {
    /// Largest value of `A(x)` found.
    pub max: PowerBranch,
    /// Smallest value of `A(x)` found.
    pub min: PowerBranch,
}

impl AlsResult {
    /// Best `|a|` over both branches, ties to `max`.
    pub fn best(&self) -> &PowerBranch {
        if self.max.value.abs() >= self.min.value.abs() {
            &self.max
        } else {
            &self.min
        }
    }
}

/// One power-iteration trajectory maximizing `A(x)`. `None` when a
/// contraction vanishes.
fn power_trajectory(a: &DenseTensor, mut u: Vec<Vec<f64>>, settings: &OracleSettings) -> Result<Option<(f64, Vec<Vec<f64>>)>> {
    let m = a.order();
    let mut value = a.eval_multilinear(&u)?;
    for _ in 0..settings.max_iter {
        let prev = value;
        for i in 0..m {
            let Some(v) = normalized(a.contract_except(&u, i)?) else {
                return Ok(None);
            };
            u[i] = v;
        }
        value = a.eval_multilinear(&u)?;
        debug_assert!(value >= prev - 1e-12 * prev.abs().max(1.0));
        if (value - prev).abs() <= settings.tol * value.abs().max(1.0) {
            break;
        }
    }
    Ok(Some((value, u)))
}

fn power_branch(a: &DenseTensor, settings: &OracleSettings, sign: f64, index_base: u64) -> Result<PowerBranch> {
    let signed = a.scale(sign);
    let mut best: Option<PowerBranch> = None;
    for s in 0..settings.starts {
        let mut rng = stream_rng(settings.seed, Stream::OracleStarts, index_base + s as u64);
        // a vanishing contraction restarts the trajectory from a fresh point
        let mut found = None;
        for _ in 0..8 {
            let u0 = random_sphere_point(a.dims(), &mut rng);
            if let Some(r) = power_trajectory(&signed, u0, settings)? {
                found = Some(r);
                break;
            }
        }
        let Some((value, vectors)) = found else {
            continue;
        };
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(PowerBranch {
                value,
                vectors,
                start: s,
            });
        }
    }
    let mut b = best.ok_or_else(|| Error::InvalidTensor("every power iteration start collapsed".into()))?;
    b.value *= sign;
    Ok(b)
}

/// Multistart higher-order power iteration on both branches.
pub fn als_rank_one(a: &DenseTensor, settings: &OracleSettings) -> Result<AlsResult> {
    if a.is_zero() {
        return Err(Error::ZeroTensor);
    }
    Ok(AlsResult {
        max: power_branch(a, settings, 1.0, 0)?,
        min: power_branch(a, settings, -1.0, 1 << 32)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultistartResult {
    pub value: f64,
    pub point: Vec<f64>,
    pub start: usize,
}

fn riemannian_gradient(shape: &ProductSphereShape, x: &[f64], grad: &DVector<f64>) -> Vec<f64> {
    let mut g: Vec<f64> = grad.iter().copied().collect();
    for i in 0..shape.num_blocks() {
        let r = shape.block_range(i);
        let dot: f64 = r.clone().map(|k| x[k] * g[k]).sum();
        for k in r {
            g[k] -= dot * x[k];
        }
    }
    g
}

fn descend(f: &MultiPoly, shape: &ProductSphereShape, mut x: Vec<f64>, settings: &OracleSettings) -> Result<(f64, Vec<f64>)> {
    let mut fx = f.eval(&x)?;
    let mut step = 1.0_f64;
    for _ in 0..settings.max_iter {
        let g = riemannian_gradient(shape, &x, &f.gradient(&x)?);
        let gg: f64 = g.iter().map(|v| v * v).sum();
        if gg.sqrt() <= settings.tol {
            break;
        }
        let mut accepted = false;
        step = (step * 2.0).min(1e3);
        while step > 1e-16 {
            let mut trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - step * gi).collect();
            shape.normalize_blocks(&mut trial);
            let ft = f.eval(&trial)?;
            if ft <= fx - 0.3 * step * gg {
                x = trial;
                fx = ft;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok((fx, x))
}

/// Best value of `f` over projected gradient descents from random starts.
/// The returned point lies on the product of spheres.
pub fn multistart_min(f: &MultiPoly, settings: &OracleSettings) -> Result<MultistartResult> {
    let shape = f.shape().clone();
    let mut best: Option<MultistartResult> = None;
    for s in 0..settings.starts.max(1) {
        let mut rng = stream_rng(settings.seed, Stream::OracleStarts, (2 << 32) + s as u64);
        let x0 = random_sphere_point(shape.block_dims(), &mut rng).concat();
        let (_, mut point) = descend(f, &shape, x0, settings)?;
        shape.normalize_blocks(&mut point);
        let value = f.eval(&point)?;
        if best.as_ref().is_none_or(|b| value < b.value) {
            best = Some(MultistartResult { value, point, start: s });
        }
    }
    Ok(best.expect("at least one start"))
}
