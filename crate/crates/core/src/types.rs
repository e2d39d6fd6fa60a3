//! Domain types shared by every solver, plus label/indicator conversions.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Entrywise tolerance on `ÛᵀÛ = I` for data accepted without correction.
pub const ORTHONORMAL_TOL: f64 = 1e-8;

/// Relative singular-value threshold below which input is rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// An `n×k` column-orthonormal feature matrix: the input to every solver.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedData {
    matrix: DMatrix<f64>,
}

impl EmbeddedData {
    /// Wrap a matrix that is already column-orthonormal within
    /// [`ORTHONORMAL_TOL`]. Use [`validate_embedding`] for arbitrary input.
    pub fn from_orthonormal(matrix: DMatrix<f64>) -> Result<Self> {
        check_shape(&matrix)?;
        let defect = linalg::orthonormality_defect(&matrix);
        if !(defect <= ORTHONORMAL_TOL) {
            return Err(Error::InvalidParameter(format!("columns are not orthonormal (max |UᵀU - I| = {defect:e})")));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn k(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    /// The same data with rows reordered: row `i` of the result is row
    /// `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        let m = DMatrix::from_fn(self.n(), self.k(), |i, j| self.matrix[(perm[i], j)]);
        Self { matrix: m }
    }
}

fn check_shape(matrix: &DMatrix<f64>) -> Result<()> {
    let (n, d) = matrix.shape();
    if d < 2 || n < d {
        return Err(Error::DimensionMismatch(format!("embedding must satisfy n >= d >= 2, got {n}x{d}")));
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("embedding contains non-finite values".into()));
    }
    Ok(())
}

/// Outcome of [`validate_embedding`].
#[derive(Debug, Clone)]
pub struct ValidatedEmbedding {
    pub data: EmbeddedData,
    /// Whether the columns had to be orthonormalized.
    pub corrected: bool,
}

/// Accept an `n×d` matrix as clustering input.
///
/// Orthonormal input passes through untouched. Anything else is replaced by
/// the `Q` factor of its thin QR factorization (with `diag(R) > 0`), which
/// spans the same column space.
pub fn validate_embedding(matrix: DMatrix<f64>) -> Result<ValidatedEmbedding> {
    check_shape(&matrix)?;
    if linalg::orthonormality_defect(&matrix) <= ORTHONORMAL_TOL {
        return Ok(ValidatedEmbedding { data: EmbeddedData { matrix }, corrected: false });
    }
    let (q, r) = linalg::thin_qr(&matrix);
    let sv = linalg::singular_values(&r);
    let largest = sv[0];
    let smallest = *sv.last().expect("d >= 2");
    if !(smallest >= RANK_TOL * largest) || largest == 0.0 {
        return Err(Error::RankDeficient { smallest, largest });
    }
    Ok(ValidatedEmbedding { data: EmbeddedData { matrix: q }, corrected: true })
}

/// How the positive entries of an indicator matrix are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndicatorValues {
    /// Equal weights with unit-norm columns; the same matrix as `Normalized`.
    Unit,
    /// `c_ij = 1/√n_j`.
    #[default]
    Normalized,
}

/// A nonnegative `n×k` matrix with orthonormal columns and exactly one
/// positive entry per row. Encodes a partition into `k` nonempty clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorMatrix {
    labels: Vec<usize>,
    values: Vec<f64>,
    sizes: Vec<usize>,
}

impl IndicatorMatrix {
    /// Indicator with per-row weights; each column is rescaled to unit norm
    /// so only the relative weights within a cluster matter.
    pub fn from_weights(labels: &[usize], k: usize, weights: &[f64]) -> Result<Self> {
        if labels.len() != weights.len() {
            return Err(Error::LengthMismatch { left: labels.len(), right: weights.len() });
        }
        let sizes = cluster_sizes(labels, k)?;
        let mut col_sq = vec![0.0; k];
        for (i, (&l, &w)) in labels.iter().zip(weights).enumerate() {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!("weight {w} at row {i} is not positive")));
            }
            col_sq[l] += w * w;
        }
        let values = labels.iter().zip(weights).map(|(&l, &w)| w / col_sq[l].sqrt()).collect();
        Ok(Self { labels: labels.to_vec(), values, sizes })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// The positive entry of each row.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cluster_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.n(), self.k());
        for (i, (&l, &v)) in self.labels.iter().zip(&self.values).enumerate() {
            h[(i, l)] = v;
        }
        h
    }

    /// `ÛᵀH` computed in `O(nk)` from the sparse structure.
    pub fn gram_with(&self, basis: &DMatrix<f64>) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(basis.ncols(), self.k());
        for (i, (&l, &v)) in self.labels.iter().zip(&self.values).enumerate() {
            for r in 0..basis.ncols() {
                g[(r, l)] += basis[(i, r)] * v;
            }
        }
        g
    }
}

/// Build an indicator matrix from 0-based labels.
pub fn make_indicator(labels: &[usize], k: usize, values: IndicatorValues) -> Result<IndicatorMatrix> {
    match values {
        IndicatorValues::Unit | IndicatorValues::Normalized => {
            IndicatorMatrix::from_weights(labels, k, &vec![1.0; labels.len()])
        }
    }
}

/// Count members per cluster, rejecting out-of-range labels and empty clusters.
pub fn cluster_sizes(labels: &[usize], k: usize) -> Result<Vec<usize>> {
    let mut sizes = vec![0usize; k];
    for (index, &label) in labels.iter().enumerate() {
        if label >= k {
            return Err(Error::BadLabel { index, label, k });
        }
        sizes[label] += 1;
    }
    if let Some(j) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::EmptyCluster(j));
    }
    Ok(sizes)
}

/// An `n×k` matrix with entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedAssignment {
    matrix: DMatrix<f64>,
}

impl RelaxedAssignment {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if let Some(v) = matrix.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!("entry {v} outside [0, 1]")));
        }
        Ok(Self { matrix })
    }

    /// Caller guarantees every entry lies in `[0, 1]`.
    pub(crate) fn new_unchecked(matrix: DMatrix<f64>) -> Self {
        debug_assert!(matrix.iter().all(|v| (0.0..=1.0).contains(v)));
        Self { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

/// A 0/1 matrix with exactly one 1 per row. Columns may be empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryIndicator {
    labels: Vec<usize>,
    k: usize,
}

impl BinaryIndicator {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if let Some((index, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= k) {
            return Err(Error::BadLabel { index, label, k });
        }
        Ok(Self { labels, k })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.labels.len(), self.k);
        for (i, &l) in self.labels.iter().enumerate() {
            b[(i, l)] = 1.0;
        }
        b
    }

    /// `ÛᵀB`, i.e. per-cluster column sums of the rows of `basis`.
    pub fn gram_with(&self, basis: &DMatrix<f64>) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(basis.ncols(), self.k);
        for (i, &l) in self.labels.iter().enumerate() {
            for r in 0..basis.ncols() {
                g[(r, l)] += basis[(i, r)];
            }
        }
        g
    }
}

/// Iteration accounting for a solver run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    /// Outer iterations (KindAP) or main iterations (Lloyd, SR).
    pub outer_iters: usize,
    /// KindAP only: inner alternating-projection count per outer iteration.
    pub inner_iters_per_outer: Vec<usize>,
    /// KindAP only: `‖U - N‖_F²` after every inner iteration, per outer iteration.
    pub inner_objectives: Vec<Vec<f64>>,
    /// Objective after each outer/main iteration: `f(H)` for KindAP, the
    /// within-cluster sum of squares for Lloyd, `‖ÛR - B‖_F²` for SR.
    pub objective_history: Vec<f64>,
    /// Which replication produced the returned result.
    pub replication_index: Option<usize>,
    /// Final objective of every replication, in replication order.
    pub replication_objectives: Vec<f64>,
    /// Per-iteration objective of every replication, in replication order.
    pub replication_histories: Vec<Vec<f64>>,
    /// Procrustes projections whose cross-Gram matrix was numerically singular.
    pub degenerate_projections: usize,
}

impl SolverTrace {
    pub fn inner_iters_total(&self) -> usize {
        self.inner_iters_per_outer.iter().sum()
    }

    /// Number of steps where a recorded sequence increased by more than
    /// `slack`. Covers the inner KindAP phases and, with `include_history`,
    /// the main history and every replication history (Lloyd, SR).
    pub fn monotonicity_violations(&self, slack: f64, include_history: bool) -> usize {
        let count = |seq: &[f64]| seq.windows(2).filter(|w| w[1] > w[0] + slack).count();
        let inner: usize = self.inner_objectives.iter().map(|s| count(s)).sum();
        if !include_history {
            return inner;
        }
        let replications: usize = self.replication_histories.iter().map(|s| count(s)).sum();
        inner + count(&self.objective_history) + replications
    }
}

/// The result of one clustering run.
#[derive(Debug, Clone)]
pub struct ClusterResult {
    pub labels: Vec<usize>,
    pub k: usize,
    /// `2k - 2‖ÛᵀH‖_*` for the returned indicator. Absent when the input
    /// is not a `k`-column orthonormal basis.
    pub kind_objective: Option<f64>,
    /// Within-cluster sum of squares of the returned labels.
    pub kmeans_objective: f64,
    /// The final relaxed assignment (KindAP only).
    pub relaxed: Option<RelaxedAssignment>,
    /// The indicator whose `kind_objective` is reported, when it carries
    /// non-uniform weights.
    pub indicator: Option<IndicatorMatrix>,
    pub trace: SolverTrace,
}
