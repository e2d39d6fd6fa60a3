//! Baseline solvers: Lloyd's K-means and spectral rotation.

mod kmeans;
mod sr;

pub use kmeans::{kmeans_pp_indices, kmeans_pp_init, kmeans_solve, lloyd_solve, within_cluster_ss, KmeansParams};
pub use sr::{sr_objective, sr_run_from, sr_solve, SrParams, SrRun};

use nalgebra::DMatrix;

use crate::evaluation;
use crate::types::{make_indicator, EmbeddedData, IndicatorValues};

/// `2k - 2‖ÛᵀH‖_*` for the normalized indicator of `labels`, when `data` is
/// a `k`-column orthonormal basis.
fn kind_objective_if_embedded(data: &DMatrix<f64>, labels: &[usize], k: usize) -> Option<f64> {
    if data.ncols() != k {
        return None;
    }
    let basis = EmbeddedData::from_orthonormal(data.clone()).ok()?;
    let h = make_indicator(labels, k, IndicatorValues::Normalized).ok()?;
    evaluation::kind_objective(&basis, &h).ok()
}
