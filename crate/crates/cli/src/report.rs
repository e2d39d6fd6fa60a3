//! JSON documents written by `cluster` and `eval`.

use kindap::evaluation::{kind_objective, kmeans_objective, soft_indicator, sr_objective_of_labels};
use kindap::{make_indicator, validate_embedding, DMatrix, EmbeddedData, IndicatorValues, SolverTrace};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::methods::{Method, MethodRun, SolveOptions};

pub const SCHEMA: u32 = 1;

/// Objectives of a labeling, all recomputable from the labels and the basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objectives {
    /// `2k - 2‖ÛᵀH‖_*`, normalized indicator.
    pub kind: f64,
    /// Within-cluster sum of squares of the basis rows.
    pub kmeans: f64,
    /// `n + k - 2‖ÛᵀB‖_*`, binary indicator.
    pub sr: f64,
}

impl Objectives {
    pub fn of(basis: &EmbeddedData, labels: &[usize]) -> kindap::Result<Self> {
        let h = make_indicator(labels, basis.k(), IndicatorValues::Normalized)?;
        Ok(Self {
            kind: kind_objective(basis, &h)?,
            kmeans: kmeans_objective(basis, labels)?,
            sr: sr_objective_of_labels(basis, labels)?,
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        [self.kind - other.kind, self.kmeans - other.kmeans, self.sr - other.sr].iter().fold(0.0, |m, d| m.max(d.abs()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftReport {
    pub mean: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_time_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub schema: u32,
    pub method: Method,
    pub n: usize,
    pub k: usize,
    pub labels: Vec<usize>,
    pub objectives: Objectives,
    /// Present for the KindAP-based methods.
    pub soft_indicator: Option<SoftReport>,
    pub trace: SolverTrace,
    /// The KindAP stage of `kindap+l`.
    pub warm_start_trace: Option<SolverTrace>,
    pub params: SolveOptions,
    /// Whether the input had to be orthonormalized first.
    pub orthonormalized: bool,
    pub timing: Timing,
}

impl ClusterReport {
    pub fn new(basis: &EmbeddedData, run: &MethodRun, params: &SolveOptions, orthonormalized: bool) -> CliResult<Self> {
        let relaxed = run.warm_start.as_ref().unwrap_or(&run.result).relaxed.as_ref();
        let soft_indicator = match relaxed {
            Some(r) => {
                let s = soft_indicator(r)?;
                Some(SoftReport { mean: s.mean(), values: s.values().to_vec() })
            }
            None => None,
        };
        Ok(Self {
            schema: SCHEMA,
            method: run.method,
            n: basis.n(),
            k: basis.k(),
            labels: run.result.labels.clone(),
            objectives: Objectives::of(basis, &run.result.labels)?,
            soft_indicator,
            trace: run.result.trace.clone(),
            warm_start_trace: run.warm_start.as_ref().map(|w| w.trace.clone()),
            params: params.clone(),
            orthonormalized,
            timing: Timing { wall_time_seconds: run.wall_time_seconds },
        })
    }

    /// Parse and check the schema version and label shape.
    pub fn from_json(text: &str, source: &str) -> CliResult<Self> {
        let report: Self =
            serde_json::from_str(text).map_err(|e| CliError::Data(format!("{source}: invalid result JSON: {e}")))?;
        if report.schema != SCHEMA {
            return Err(CliError::Data(format!("{source}: unsupported schema {}", report.schema)));
        }
        if report.labels.len() != report.n {
            return Err(CliError::Data(format!("{source}: {} labels for n = {}", report.labels.len(), report.n)));
        }
        kindap::cluster_sizes(&report.labels, report.k)?;
        Ok(report)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema: u32,
    pub n: usize,
    pub accuracy: f64,
    /// Recomputed from the labels when an embedding is supplied.
    pub objectives: Option<Objectives>,
    /// The values stored in the evaluated result JSON, if any.
    pub stored_objectives: Option<Objectives>,
    /// Whether the recomputed objectives agree with the stored ones within 1e-9.
    pub consistent: Option<bool>,
}

/// Leading `k` columns of `m` (all of them when `k` is `None`), orthonormalized
/// if needed. Returns the basis and whether it was corrected.
pub fn prepare_embedding(m: DMatrix<f64>, k: Option<usize>) -> CliResult<(EmbeddedData, bool)> {
    let d = m.ncols();
    let k = k.unwrap_or(d);
    if k > d {
        return Err(CliError::Usage(format!("k = {k} exceeds the {d} columns of the embedding")));
    }
    if k < 2 {
        return Err(CliError::Usage(format!("k must be at least 2, got {k}")));
    }
    let m = if k < d { m.columns(0, k).into_owned() } else { m };
    let v = validate_embedding(m)?;
    Ok((v.data, v.corrected))
}
