//! Dense tensors and best rank-one approximation through the pair of
//! multilinear problems `max A(x)` and `min A(x)` on a product of spheres.

use serde::{Deserialize, Serialize};

use crate::certify::CertificationSummary;
use crate::error::{Error, Result};
use crate::pipeline::{solve_pop, HierarchyOutcome, HierarchySettings};
use crate::polyring::{Exponent, MultiPoly, ProductSphereShape};
use crate::problem::PolyProblem;

/// `A ∈ R^{n_1 × … × n_m}` stored row-major (last index fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TensorDocument", into = "TensorDocument")]
pub struct DenseTensor {
    dims: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TensorDocument {
    dims: Vec<usize>,
    values: Vec<f64>,
}

impl TryFrom<TensorDocument> for DenseTensor {
    type Error = Error;

    fn try_from(d: TensorDocument) -> Result<Self> {
        Self::new(d.dims, d.values)
    }
}

impl From<DenseTensor> for TensorDocument {
    fn from(t: DenseTensor) -> Self {
        Self {
            dims: t.dims,
            values: t.values,
        }
    }
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidTensor(format!("bad dims {dims:?}")));
        }
        let len: usize = dims.iter().product();
        if values.len() != len {
            return Err(Error::InvalidTensor(format!(
                "dims {dims:?} need {len} values, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidTensor(format!("non-finite entry {v}")));
        }
        Ok(Self { dims, values })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let len = dims.iter().product();
        Self::new(dims, vec![0.0; len])
    }

    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let mut t = Self::zeros(dims)?;
        let mut idx = vec![0; t.order()];
        for k in 0..t.values.len() {
            t.values[k] = f(&idx);
            t.advance(&mut idx);
        }
        Ok(t)
    }

    /// Square matrix or `rows × cols` from rows.
    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidTensor("ragged matrix".into()));
        }
        Self::new(vec![rows.len(), cols], rows.concat())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[self.offset(idx)]
    }

    fn advance(&self, idx: &mut [usize]) {
        for d in (0..idx.len()).rev() {
            idx[d] += 1;
            if idx[d] < self.dims[d] {
                return;
            }
            idx[d] = 0;
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dims: self.dims.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// `a · u_1 ⊗ … ⊗ u_m`.
    pub fn rank_one(a: f64, vectors: &[Vec<f64>]) -> Result<Self> {
        let dims = vectors.iter().map(Vec::len).collect();
        Self::from_fn(dims, |idx| a * idx.iter().zip(vectors).map(|(&i, u)| u[i]).product::<f64>())
    }

    /// `A(u_1, …, u_m)`.
    pub fn eval_multilinear(&self, vectors: &[Vec<f64>]) -> Result<f64> {
        self.check_vectors(vectors)?;
        let mut idx = vec![0; self.order()];
        let mut s = 0.0;
        for &v in &self.values {
            s += v * idx.iter().zip(vectors).map(|(&i, u)| u[i]).product::<f64>();
            self.advance(&mut idx);
        }
        Ok(s)
    }

    /// Contraction of `A` with every `u_l` except `l = mode`.
    pub fn contract_except(&self, vectors: &[Vec<f64>], mode: usize) -> Result<Vec<f64>> {
        self.check_vectors(vectors)?;
        let mut out = vec![0.0; self.dims[mode]];
        let mut idx = vec![0; self.order()];
        for &v in &self.values {
            let w: f64 = idx
                .iter()
                .zip(vectors)
                .enumerate()
                .filter(|&(l, _)| l != mode)
                .map(|(_, (&i, u))| u[i])
                .product();
            out[idx[mode]] += v * w;
            self.advance(&mut idx);
        }
        Ok(out)
    }

    fn check_vectors(&self, vectors: &[Vec<f64>]) -> Result<()> {
        if vectors.len() != self.order() {
            return Err(Error::DimensionMismatch {
                expected: self.order(),
                got: vectors.len(),
            });
        }
        for (u, &n) in vectors.iter().zip(&self.dims) {
            if u.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: u.len(),
                });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tensors always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// First non-empty line holds the dims, the remaining tokens are the
    /// row-major entries. Lines starting with `#` are skipped.
    pub fn from_text(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty tensor file".into()))?;
        let dims = header
            .split(|c: char| c.is_whitespace() || c == ',' || c == 'x')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("dims: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let values = lines
            .flat_map(|l| l.split(|c: char| c.is_whitespace() || c == ','))
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("entry {t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dims, values)
    }

    /// JSON when the input starts with `{`, text otherwise.
    pub fn parse(s: &str) -> Result<Self> {
        if s.trim_start().starts_with('{') {
            Self::from_json(s)
        } else {
            Self::from_text(s)
        }
    }
}

/// Hilbert–Schmidt inner product.
pub fn hs_inner(a: &DenseTensor, b: &DenseTensor) -> Result<f64> {
    if a.dims != b.dims {
        return Err(Error::InvalidTensor(format!("dims {:?} vs {:?}", a.dims, b.dims)));
    }
    Ok(a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum())
}

pub fn hs_norm_sq(a: &DenseTensor) -> f64 {
    a.values.iter().map(|v| v * v).sum()
}

/// `A(x) = Σ A_{j_1…j_m} x_{1j_1} ⋯ x_{mj_m}`; zero entries contribute no term.
pub fn tensor_to_poly(a: &DenseTensor) -> Result<MultiPoly> {
    let shape = ProductSphereShape::new(a.dims.clone())?;
    let n = shape.total_dim();
    let mut idx = vec![0; a.order()];
    let mut terms = Vec::new();
    for &v in &a.values {
        if v != 0.0 {
            let mut powers = vec![0; n];
            for (block, &j) in idx.iter().enumerate() {
                powers[shape.block_range(block).start + j] = 1;
            }
            terms.push((Exponent::new(powers), v));
        }
        a.advance(&mut idx);
    }
    MultiPoly::from_terms(&shape, terms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `max A(x)`, solved as `min −A(x)`.
    Max,
    /// `min A(x)`.
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankOneStatus {
    /// Both branches reached a flat truncation with extracted atoms.
    Certified,
    /// At least one branch stopped at `k_max` with bounds only.
    BoundsOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    pub branch: Branch,
    /// `a⁺` (upper bound on `max A`) or `a⁻` (lower bound on `min A`).
    pub bound: f64,
    pub certified_order: Option<u32>,
    /// Certified points of this branch.
    pub points: Vec<Vec<f64>>,
    pub certification: Option<CertificationSummary>,
    pub outcome: HierarchyOutcome,
}

impl BranchReport {
    pub fn certified(&self) -> bool {
        self.certified_order.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankOneResult {
    pub status: RankOneStatus,
    pub a_plus: f64,
    pub a_minus: f64,
    /// Winning branch, `max` when `|a⁺| ≥ |a⁻|`.
    pub branch: Branch,
    pub a_star: Option<f64>,
    pub vectors: Option<Vec<Vec<f64>>>,
    pub reconstruction: Option<DenseTensor>,
    /// `‖A − X*‖²`.
    pub error: Option<f64>,
    pub norm_sq: f64,
    pub max_branch: BranchReport,
    pub min_branch: BranchReport,
}

fn run_branch(problem: &PolyProblem, branch: Branch, settings: &HierarchySettings) -> Result<BranchReport> {
    let outcome = solve_pop(problem, settings)?;
    let raw = outcome.f_min().or_else(|| outcome.best_bound()).unwrap_or(f64::NAN);
    let bound = match branch {
        Branch::Max => -raw,
        Branch::Min => raw,
    };
    Ok(BranchReport {
        branch,
        bound,
        certified_order: outcome.certified_order,
        points: outcome.minimizers(),
        certification: outcome.certification.as_ref().map(|c| c.summary.clone()),
        outcome,
    })
}

/// Best rank-one approximation `a* u_1 ⊗ … ⊗ u_m` of a nonzero tensor.
pub fn best_rank_one(a: &DenseTensor, settings: &HierarchySettings) -> Result<RankOneResult> {
    if a.is_zero() {
        return Err(Error::ZeroTensor);
    }
    let poly = tensor_to_poly(a)?;
    let shape = poly.shape().clone();
    let max_problem = PolyProblem::on_product_of_spheres(poly.scale(-1.0));
    let min_problem = PolyProblem::on_product_of_spheres(poly);
    let (max_branch, min_branch) = std::thread::scope(|s| {
        let h = s.spawn(|| run_branch(&max_problem, Branch::Max, settings));
        let lo = run_branch(&min_problem, Branch::Min, settings);
        (h.join().expect("branch solve panicked"), lo)
    });
    let (max_branch, min_branch) = (max_branch?, min_branch?);
    // |a⁺| and |a⁻| agree up to solver accuracy whenever the sign of one
    // vector can be flipped, so near-ties count as ties
    let tie_tol = 1e-6 * max_branch.bound.abs().max(1.0);
    let branch = if max_branch.bound.abs() >= min_branch.bound.abs() - tie_tol || min_branch.bound.is_nan() {
        Branch::Max
    } else {
        Branch::Min
    };
    let status = if max_branch.certified() && min_branch.certified() {
        RankOneStatus::Certified
    } else {
        RankOneStatus::BoundsOnly
    };
    let norm_sq = hs_norm_sq(a);
    let winner = match branch {
        Branch::Max => &max_branch,
        Branch::Min => &min_branch,
    };
    let (a_star, vectors, reconstruction, error) = match (status, winner.points.first()) {
        (RankOneStatus::Certified, Some(p)) => {
            let mut p = p.clone();
            shape.normalize_blocks(&mut p);
            let vectors: Vec<Vec<f64>> = (0..shape.num_blocks()).map(|i| p[shape.block_range(i)].to_vec()).collect();
            let a_star = a.eval_multilinear(&vectors)?;
            let x = DenseTensor::rank_one(a_star, &vectors)?;
            let error = a.values.iter().zip(&x.values).map(|(u, v)| (u - v).powi(2)).sum();
            (Some(a_star), Some(vectors), Some(x), Some(error))
        }
        _ => (None, None, None, None),
    };
    Ok(RankOneResult {
        status,
        a_plus: max_branch.bound,
        a_minus: min_branch.bound,
        branch,
        a_star,
        vectors,
        reconstruction,
        error,
        norm_sq,
        max_branch,
        min_branch,
    })
}
