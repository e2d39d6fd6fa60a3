//! Accuracy under optimal label matching, model objectives, and the
//! soft-indicator confidence score derived from a relaxed assignment.

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::types::{
    make_indicator, BinaryIndicator, EmbeddedData, IndicatorMatrix, IndicatorValues, RelaxedAssignment,
};

/// Fraction of objects whose predicted cluster maps to their true cluster
/// under the best one-to-one matching of cluster ids.
///
/// The two labelings may use different numbers of clusters; unmatched
/// clusters count as errors.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch { left: pred.len(), right: truth.len() });
    }
    if pred.is_empty() {
        return Ok(1.0);
    }
    let kp = pred.iter().max().map_or(0, |m| m + 1);
    let kt = truth.iter().max().map_or(0, |m| m + 1);
    let size = kp.max(kt);
    let mut confusion = Matrix::new(size, size, 0i64);
    for (&p, &t) in pred.iter().zip(truth) {
        confusion[(p, t)] += 1;
    }
    let (matched, _) = kuhn_munkres(&confusion);
    Ok(matched as f64 / pred.len() as f64)
}

/// Per-row confidence `s_i = 1 - second_largest / largest`, in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftIndicator {
    values: Vec<f64>,
}

impl SoftIndicator {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

pub fn soft_indicator(n: &RelaxedAssignment) -> Result<SoftIndicator> {
    let m = n.matrix();
    let mut values = Vec::with_capacity(m.nrows());
    for i in 0..m.nrows() {
        let (mut first, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &v in m.row(i).iter() {
            if v > first {
                second = first;
                first = v;
            } else if v > second {
                second = v;
            }
        }
        if !(first > 0.0) {
            return Err(Error::ZeroRow(i));
        }
        let second = if second.is_finite() { second } else { 0.0 };
        values.push((1.0 - second / first).clamp(0.0, 1.0));
    }
    Ok(SoftIndicator { values })
}

/// Squared subspace distance `2k - 2‖ÛᵀH‖_*`, clamped at zero.
pub fn kind_objective(basis: &EmbeddedData, h: &IndicatorMatrix) -> Result<f64> {
    check_shapes(basis, h.n(), h.k())?;
    let nuc = linalg::nuclear_norm(&h.gram_with(basis.matrix()));
    Ok((2.0 * basis.k() as f64 - 2.0 * nuc).max(0.0))
}

/// K-means objective `‖Û - HHᵀÛ‖_F²` with the normalized indicator of
/// `labels`, evaluated as `k - ‖ÛᵀH‖_F²`.
pub fn kmeans_objective(basis: &EmbeddedData, labels: &[usize]) -> Result<f64> {
    let h = make_indicator(labels, basis.k(), IndicatorValues::Normalized)?;
    check_shapes(basis, h.n(), h.k())?;
    let fro2 = h.gram_with(basis.matrix()).norm_squared();
    Ok((basis.k() as f64 - fro2).max(0.0))
}

/// Spectral-rotation objective `min_R ‖ÛR - B‖_F² = n + k - 2‖ÛᵀB‖_*` with
/// `B` the binary indicator of `labels`.
pub fn sr_objective_of_labels(basis: &EmbeddedData, labels: &[usize]) -> Result<f64> {
    let b = BinaryIndicator::new(labels.to_vec(), basis.k())?;
    if basis.n() != labels.len() {
        return Err(Error::LengthMismatch { left: labels.len(), right: basis.n() });
    }
    let nuc = linalg::nuclear_norm(&b.gram_with(basis.matrix()));
    Ok(((basis.n() + basis.k()) as f64 - 2.0 * nuc).max(0.0))
}

fn check_shapes(basis: &EmbeddedData, n: usize, k: usize) -> Result<()> {
    if basis.n() != n || basis.k() != k {
        return Err(Error::DimensionMismatch(format!("basis is {}x{}, indicator is {n}x{k}", basis.n(), basis.k())));
    }
    Ok(())
}
