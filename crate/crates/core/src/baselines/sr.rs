//! Spectral rotation: alternate a binary indicator `B` and an orthogonal `R`
//! to minimize `‖ÛR - B‖_F²`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation;
use crate::kindap::repair_empty_columns;
use crate::linalg::{self, random_orthogonal};
use crate::rng::stream_rng;
use crate::types::{BinaryIndicator, ClusterResult, EmbeddedData, SolverTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrParams {
    pub replications: usize,
    pub max_iters: usize,
    /// Relative objective improvement below which a replication stops.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SrParams {
    fn default() -> Self {
        Self { replications: 1, max_iters: 100, tol: 1e-6, seed: 0 }
    }
}

impl SrParams {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 || self.max_iters == 0 {
            return Err(Error::InvalidParameter("replications and max_iters must be at least 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidParameter("tol must be nonnegative".into()));
        }
        Ok(())
    }
}

/// `‖ÛR - B‖_F² = k + n - 2·tr(RᵀÛᵀB)`.
pub fn sr_objective(basis: &EmbeddedData, rotation: &DMatrix<f64>, b: &BinaryIndicator) -> f64 {
    let cross = b.gram_with(basis.matrix());
    let trace: f64 = rotation.component_mul(&cross).sum();
    (basis.k() + basis.n()) as f64 - 2.0 * trace
}

/// One spectral-rotation replication.
#[derive(Debug, Clone)]
pub struct SrRun {
    pub labels: Vec<usize>,
    pub rotation: DMatrix<f64>,
    pub objective: f64,
    pub trace: SolverTrace,
}

/// Run spectral rotation from a given initial rotation.
///
/// The `B` step puts each row on the largest entry of its row of `ÛR`, which
/// is the exact minimizer of `‖ÛR - B‖_F²` for fixed `R`. Empty columns are
/// then filled with the same rule as KindAP rounding; if that repair would
/// raise the objective above the previous `B`, the previous `B` is kept. The
/// `R` step is the Procrustes solution `R = PQᵀ` for `ÛᵀB = PΣQᵀ`.
pub fn sr_run_from(basis: &EmbeddedData, rotation: DMatrix<f64>, params: &SrParams) -> Result<SrRun> {
    let (n, k) = (basis.n(), basis.k());
    if n < k {
        return Err(Error::InfeasibleK { n, k });
    }
    let mut rotation = rotation;
    let mut current: Option<BinaryIndicator> = None;
    let mut objective = f64::INFINITY;
    let mut trace = SolverTrace::default();
    for _ in 0..params.max_iters {
        let rotated = basis.matrix() * &rotation;
        let mut labels: Vec<usize> = (0..n)
            .map(|i| {
                let row = rotated.row(i);
                (1..k).fold(0, |best, j| if row[j] > row[best] { j } else { best })
            })
            .collect();
        let mut sizes = vec![0usize; k];
        labels.iter().for_each(|&l| sizes[l] += 1);
        let repaired = sizes.contains(&0);
        repair_empty_columns(&mut labels, k, |i, j| rotated[(i, j)]);
        let mut b = BinaryIndicator::new(labels, k)?;
        if repaired {
            if let Some(prev) = &current {
                if sr_objective(basis, &rotation, &b) > sr_objective(basis, &rotation, prev) {
                    b = prev.clone();
                }
            }
        }

        let cross = b.gram_with(basis.matrix());
        let (p, sigma, q_t) = linalg::svd(&cross);
        rotation = p * q_t;
        let next = ((k + n) as f64 - 2.0 * sigma.sum()).max(0.0);
        trace.outer_iters += 1;
        trace.objective_history.push(next);
        current = Some(b);
        let previous = objective;
        objective = next;
        if previous.is_finite() && previous - next <= params.tol * previous {
            break;
        }
    }
    let labels = current.expect("max_iters >= 1").labels().to_vec();
    Ok(SrRun { labels, rotation, objective, trace })
}

/// Best of `params.replications` spectral-rotation runs, each started from a
/// Haar-random rotation drawn from stream `r` of `params.seed`.
pub fn sr_solve(basis: &EmbeddedData, params: &SrParams) -> Result<ClusterResult> {
    params.validate()?;
    let (n, k) = (basis.n(), basis.k());
    if n < k {
        return Err(Error::InfeasibleK { n, k });
    }
    let runs: Vec<Result<SrRun>> = (0..params.replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(params.seed, r as u64);
            sr_run_from(basis, random_orthogonal(k, &mut rng), params)
        })
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let objectives: Vec<f64> = runs.iter().map(|r| r.objective).collect();
    let histories = runs.iter().map(|r| r.trace.objective_history.clone()).collect();
    let best = objectives.iter().enumerate().fold(0, |b, (i, &o)| if o < objectives[b] { i } else { b });
    let run = runs.into_iter().nth(best).expect("replications >= 1");

    let mut trace = run.trace;
    trace.replication_index = Some(best);
    trace.replication_objectives = objectives;
    trace.replication_histories = histories;
    let h = crate::types::make_indicator(&run.labels, k, crate::types::IndicatorValues::Normalized)?;
    Ok(ClusterResult {
        kind_objective: Some(evaluation::kind_objective(basis, &h)?),
        kmeans_objective: evaluation::kmeans_objective(basis, &run.labels)?,
        labels: run.labels,
        k,
        relaxed: None,
        indicator: None,
        trace,
    })
}
