use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use spheropt::certify::{CertifySettings, ExtractionSettings};
use spheropt::oracle::OracleSettings;
use spheropt::sdp::SolverSettings;
use spheropt::HierarchySettings;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Solve,
    Rank1,
    Certify,
    Generic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenericConfig {
    pub shape: Vec<usize>,
    pub multidegree: Vec<u32>,
    pub trials: usize,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
}

impl Default for GenericConfig {
    fn default() -> Self {
        Self {
            shape: vec![2, 2, 2],
            multidegree: vec![1, 1, 1],
            trials: 25,
            workers: 0,
        }
    }
}

/// Everything a run depends on. Reports echo it back verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub command: Option<Command>,
    pub k_max: u32,
    pub rank_rel_tol: f64,
    pub solver: SolverSettings,
    pub certify: CertifySettings,
    pub extraction_retries: usize,
    /// Newton polishing of extracted atoms.
    pub refine: bool,
    pub oracle: OracleSettings,
    /// Skip the oracle comparison.
    pub no_oracle: bool,
    pub seed: u64,
    pub output: Option<PathBuf>,
    /// Candidate points for `certify`, inline.
    pub points: Vec<Vec<f64>>,
    pub generic: GenericConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let h = HierarchySettings::default();
        Self {
            input: None,
            command: None,
            k_max: h.k_max,
            rank_rel_tol: h.rank_rel_tol,
            solver: h.solver,
            certify: h.certify,
            extraction_retries: h.extraction.retries,
            refine: h.refine,
            oracle: OracleSettings::default(),
            no_oracle: false,
            seed: 0,
            output: None,
            points: Vec::new(),
            generic: GenericConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self, CliError> {
        serde_json::from_str(s).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.k_max < 1 {
            return Err(CliError::Config("k_max must be at least 1".into()));
        }
        let c = &self.certify;
        let tols = [
            ("rank_rel_tol", self.rank_rel_tol),
            ("solver.feas_tol", self.solver.feas_tol),
            ("solver.gap_tol", self.solver.gap_tol),
            ("certify.act_tol", c.act_tol),
            ("certify.strict_tol", c.strict_tol),
            ("certify.eig_tol", c.eig_tol),
            ("certify.feas_tol", c.feas_tol),
            ("certify.fooc_tol", c.fooc_tol),
            ("certify.value_tol", c.value_tol),
            ("oracle.tol", self.oracle.tol),
        ];
        if let Some((name, v)) = tols.iter().find(|(_, v)| !(*v > 0.0)) {
            return Err(CliError::Config(format!("{name} must be positive, got {v}")));
        }
        if self.oracle.starts == 0 || self.oracle.max_iter == 0 {
            return Err(CliError::Config("oracle counts must be positive".into()));
        }
        if self.command == Some(Command::Generic) && self.generic.trials == 0 {
            return Err(CliError::Config("generic.trials must be at least 1".into()));
        }
        Ok(())
    }

    pub fn hierarchy(&self) -> HierarchySettings {
        HierarchySettings {
            k_max: self.k_max,
            solver: self.solver,
            rank_rel_tol: self.rank_rel_tol,
            extraction: ExtractionSettings {
                seed: self.seed,
                retries: self.extraction_retries,
                ..Default::default()
            },
            certify: self.certify,
            refine: self.refine,
        }
    }

    pub fn oracle_settings(&self) -> OracleSettings {
        OracleSettings {
            seed: self.seed,
            ..self.oracle
        }
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("configs always serialize")
    }
}
