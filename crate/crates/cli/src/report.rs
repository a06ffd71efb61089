use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use spheropt::certify::{AtomicMeasure, CertificationReport, FlatTruncationReport, RefinedPoint};
use spheropt::ineq::{AssumptionReport, StratumDescriptor};
use spheropt::pipeline::OrderBound;
use spheropt::polyring::{PolyDocument, TermDocument};
use spheropt::tensor::RankOneResult;
use spheropt::MultiPoly;

use crate::config::{Command, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Certified,
    BoundsOnly,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Certified => 0,
            Self::BoundsOnly => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialSection {
    pub shape: Vec<usize>,
    pub text: String,
    pub terms: Vec<TermDocument>,
}

impl PolynomialSection {
    pub fn of(p: &MultiPoly) -> Self {
        let doc = PolyDocument::from_poly(p, None);
        Self {
            shape: doc.shape,
            text: p.to_string(),
            terms: doc.terms,
        }
    }
}

/// Heuristic upper bound set against the relaxation bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub value: f64,
    pub point: Vec<f64>,
    /// Relaxation value at the certified order.
    pub certified_bound: Option<f64>,
    pub gap: Option<f64>,
    /// Every solved order lies below the oracle value (slack 1e-6).
    pub sandwich_holds: bool,
    /// Bounds nondecreasing in `k` (slack 1e-7).
    pub monotone: bool,
    /// `gap ≤ 1e-5`.
    pub gap_within_tolerance: Option<bool>,
}

impl OracleComparison {
    pub fn new(value: f64, point: Vec<f64>, bounds: &[OrderBound], certified_bound: Option<f64>) -> Self {
        let solved: Vec<f64> = bounds.iter().filter(|b| b.status.has_solution()).map(|b| b.objective).collect();
        let sandwich_holds = solved.iter().all(|&b| b <= value + 1e-6);
        let monotone = solved.windows(2).all(|w| w[1] >= w[0] - 1e-7);
        let gap = certified_bound.map(|b| (b - value).abs());
        Self {
            value,
            point,
            certified_bound,
            gap,
            sandwich_holds,
            monotone,
            gap_within_tolerance: gap.map(|g| g <= 1e-5),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankOneSection {
    pub a_plus: f64,
    pub a_minus: f64,
    pub result: RankOneResult,
    /// Best `|a|` from multistart power iteration.
    pub oracle_abs: Option<f64>,
    pub oracle_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub index: usize,
    pub seed: u64,
    pub certified_order: Option<u32>,
    pub f_min: Option<f64>,
    pub best_bound: Option<f64>,
    /// Every atom passed the KKT and second-order checks.
    pub kkt_certified: bool,
    pub oracle: Option<OracleComparison>,
    /// `max |λ_i + d_i f(p) / 2|` over certified atoms.
    pub multiplier_identity_residual: Option<f64>,
    pub error: Option<String>,
}

impl TrialSummary {
    /// Certified and confirmed by the oracle sandwich.
    pub fn confirmed(&self) -> bool {
        self.certified_order.is_some()
            && self
                .oracle
                .as_ref()
                .is_some_and(|o| o.sandwich_holds && o.gap_within_tolerance == Some(true))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenericSection {
    pub shape: Vec<usize>,
    pub multidegree: Vec<u32>,
    pub trials: usize,
    pub certified: usize,
    pub certified_fraction: f64,
    /// Certifying order → number of trials.
    pub order_histogram: BTreeMap<u32, usize>,
    pub oracle_confirmed: usize,
    pub per_trial: Vec<TrialSummary>,
}

/// Wall-clock milliseconds; the only fields that vary between identical runs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: f64,
    pub solve_ms: f64,
    pub oracle_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub command: Command,
    pub config: RunConfig,
    pub status: RunStatus,
    pub warnings: Vec<String>,
    pub polynomial: Option<PolynomialSection>,
    pub inequalities: Vec<PolynomialSection>,
    pub bounds: Vec<OrderBound>,
    pub certified_order: Option<u32>,
    pub f_min: Option<f64>,
    pub flat: Option<FlatTruncationReport>,
    pub atoms: Option<AtomicMeasure>,
    pub refined: Option<Vec<RefinedPoint>>,
    pub certification: Option<CertificationReport>,
    pub strata: Option<Vec<Option<StratumDescriptor>>>,
    pub assumption: Option<AssumptionReport>,
    pub oracle: Option<OracleComparison>,
    pub rank1: Option<RankOneSection>,
    pub generic: Option<GenericSection>,
    pub timings: Timings,
}

impl RunReport {
    pub fn new(command: Command, config: RunConfig) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            config,
            status: RunStatus::BoundsOnly,
            warnings: Vec::new(),
            polynomial: None,
            inequalities: Vec::new(),
            bounds: Vec::new(),
            certified_order: None,
            f_min: None,
            flat: None,
            atoms: None,
            refined: None,
            certification: None,
            strata: None,
            assumption: None,
            oracle: None,
            rank1: None,
            generic: None,
            timings: Timings::default(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    /// The report with timings cleared, for reproducibility comparisons.
    pub fn without_timings(&self) -> Self {
        Self {
            timings: Timings::default(),
            ..self.clone()
        }
    }
}
