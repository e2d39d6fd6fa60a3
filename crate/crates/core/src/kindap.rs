//! KindAP: double-layer alternating projections for the K-indicators model.
//!
//! The outer loop moves between the rotated data subspace `{ÛR}` and the
//! discrete set of indicator matrices. Each outer step first solves the
//! semi-convex relaxation (rotated subspace vs. the box `[0, 1]^{n×k}`) by
//! plain alternating projections, rounds the box point to an indicator, and
//! projects that indicator back onto the rotated subspace.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation;
use crate::projections::{procrustes_from_cross, procrustes_project, project_box, RotatedBasis};
use crate::types::{ClusterResult, EmbeddedData, IndicatorMatrix, RelaxedAssignment, SolverTrace};

/// Objective values at or below this are treated as an exact match.
const ZERO_OBJECTIVE: f64 = 1e-12;

/// Values given to the kept entries when rounding a relaxed assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rounding {
    /// `1/√n_j`: the rounded matrix is the normalized indicator of its labels.
    #[default]
    Normalized,
    /// Keep the relaxed magnitude, then rescale columns to unit norm.
    Magnitude,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindapParams {
    pub max_outer: usize,
    pub max_inner: usize,
    /// Relative decrease of `‖U - N‖_F²` below which the inner loop stops.
    pub tol_inner: f64,
    /// Relative decrease of the outer objective below which the outer loop stops.
    pub tol_outer: f64,
    pub rounding: Rounding,
}

impl Default for KindapParams {
    fn default() -> Self {
        Self { max_outer: 50, max_inner: 200, tol_inner: 1e-5, tol_outer: 1e-5, rounding: Rounding::Normalized }
    }
}

impl KindapParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::InvalidParameter("iteration caps must be at least 1".into()));
        }
        if !(self.tol_inner > 0.0) || !(self.tol_outer > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Output of one inner phase.
#[derive(Debug, Clone)]
pub struct InnerSolution {
    pub relaxed: RelaxedAssignment,
    pub point: RotatedBasis,
    pub iters: usize,
    /// `‖U - N‖_F²` at the start and after every iteration.
    pub objectives: Vec<f64>,
    pub degenerate_projections: usize,
}

/// Alternate `N ← clamp(U)`, `U ← Procrustes(N)` from `start` until the
/// relative decrease of `‖U - N‖_F²` drops below `tol_inner`.
pub fn inner_solve(start: &RotatedBasis, basis: &EmbeddedData, params: &KindapParams) -> InnerSolution {
    let mut point = start.clone();
    let mut relaxed = project_box(point.matrix());
    let mut objective = (point.matrix() - relaxed.matrix()).norm_squared();
    let mut objectives = vec![objective];
    let mut degenerate_projections = 0;
    let mut iters = 0;
    while iters < params.max_inner {
        iters += 1;
        let projection = procrustes_project(relaxed.matrix(), basis);
        degenerate_projections += usize::from(projection.degenerate);
        point = projection.point;
        relaxed = project_box(point.matrix());
        let next = (point.matrix() - relaxed.matrix()).norm_squared();
        objectives.push(next);
        let previous = objective;
        objective = next;
        if previous - next <= params.tol_inner * previous {
            break;
        }
    }
    InnerSolution { relaxed, point, iters, objectives, degenerate_projections }
}

/// Round a relaxed assignment to an indicator matrix.
///
/// Each row keeps its largest entry (ties go to the lowest column). Columns
/// left empty are then filled in ascending order: column `j` takes the row
/// with the largest `N_ij` among rows whose cluster still has at least two
/// members (ties go to the lowest row).
pub fn round_to_indicator(relaxed: &RelaxedAssignment, rounding: Rounding) -> Result<IndicatorMatrix> {
    let m = relaxed.matrix();
    let (n, k) = m.shape();
    if n < k {
        return Err(Error::InfeasibleK { n, k });
    }
    let mut labels: Vec<usize> = (0..n)
        .map(|i| {
            let row = m.row(i);
            let mut best = 0;
            for j in 1..k {
                if row[j] > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect();
    repair_empty_columns(&mut labels, k, |i, j| m[(i, j)]);

    let weights = match rounding {
        Rounding::Normalized => vec![1.0; n],
        Rounding::Magnitude => {
            let mut weights: Vec<f64> = labels.iter().enumerate().map(|(i, &l)| m[(i, l)]).collect();
            // A zero kept entry (all-zero row, or a repaired row with nothing
            // in its new column) borrows the smallest positive weight of its column.
            for j in 0..k {
                let floor = labels
                    .iter()
                    .zip(&weights)
                    .filter(|&(&l, &w)| l == j && w > 0.0)
                    .map(|(_, &w)| w)
                    .fold(f64::INFINITY, f64::min);
                let floor = if floor.is_finite() { floor } else { 1.0 };
                for (w, &l) in weights.iter_mut().zip(&labels) {
                    if l == j && !(*w > 0.0) {
                        *w = floor;
                    }
                }
            }
            weights
        }
    };
    IndicatorMatrix::from_weights(&labels, k, &weights)
}

/// Move rows into empty clusters so every cluster has a member. `score(i, j)`
/// ranks how well row `i` fits cluster `j`; higher is better.
pub(crate) fn repair_empty_columns(labels: &mut [usize], k: usize, score: impl Fn(usize, usize) -> f64) {
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    for j in 0..k {
        if sizes[j] > 0 {
            continue;
        }
        let mut pick: Option<(usize, f64)> = None;
        for (i, &l) in labels.iter().enumerate() {
            if sizes[l] < 2 {
                continue;
            }
            let s = score(i, j);
            if pick.is_none_or(|(_, best)| s > best) {
                pick = Some((i, s));
            }
        }
        // n >= k guarantees some cluster has two members while one is empty
        let (i, _) = pick.expect("a cluster with at least two members exists");
        sizes[labels[i]] -= 1;
        labels[i] = j;
        sizes[j] += 1;
    }
}

/// Solve the K-indicators model for `basis`.
///
/// Starts from `U = Û`, runs inner phases and rounding until the outer
/// objective `2k - 2‖ÛᵀH‖_*` stops improving by more than `tol_outer`
/// (relative), and returns the best indicator seen.
pub fn kindap_solve(basis: &EmbeddedData, params: &KindapParams) -> Result<ClusterResult> {
    params.validate()?;
    let (n, k) = (basis.n(), basis.k());
    if n < k {
        return Err(Error::InfeasibleK { n, k });
    }

    let mut trace = SolverTrace::default();
    let mut point = RotatedBasis::identity(basis);
    let mut best: Option<(IndicatorMatrix, f64, RelaxedAssignment)> = None;
    let mut previous: Option<f64> = None;

    for _ in 0..params.max_outer {
        let inner = inner_solve(&point, basis, params);
        trace.outer_iters += 1;
        trace.inner_iters_per_outer.push(inner.iters);
        trace.inner_objectives.push(inner.objectives);
        trace.degenerate_projections += inner.degenerate_projections;

        let h = round_to_indicator(&inner.relaxed, params.rounding)?;
        let f = evaluation::kind_objective(basis, &h)?;
        trace.objective_history.push(f);

        let cross = h.gram_with(basis.matrix());
        if best.as_ref().is_none_or(|(_, best_f, _)| f < *best_f) {
            best = Some((h, f, inner.relaxed));
        }
        if f <= ZERO_OBJECTIVE {
            break;
        }
        if let Some(prev) = previous {
            if prev - f < params.tol_outer * prev {
                break;
            }
        }
        previous = Some(f);

        let projection = procrustes_from_cross(&cross, basis);
        trace.degenerate_projections += usize::from(projection.degenerate);
        point = projection.point;
    }

    let (h, kind_objective, relaxed) = best.expect("at least one outer iteration runs");
    let labels = h.labels().to_vec();
    let kmeans_objective = evaluation::kmeans_objective(basis, &labels)?;
    Ok(ClusterResult {
        labels,
        k,
        kind_objective: Some(kind_objective),
        kmeans_objective,
        relaxed: Some(relaxed),
        indicator: Some(h),
        trace,
    })
}

/// Per-cluster means of the rows of `basis`, one center per row of the
/// returned `k×d` matrix.
pub fn warm_start_centers(basis: &EmbeddedData, result: &ClusterResult) -> Result<DMatrix<f64>> {
    cluster_means(basis.matrix(), &result.labels, result.k)
}

pub(crate) fn cluster_means(data: &DMatrix<f64>, labels: &[usize], k: usize) -> Result<DMatrix<f64>> {
    if labels.len() != data.nrows() {
        return Err(Error::LengthMismatch { left: labels.len(), right: data.nrows() });
    }
    let sizes = crate::types::cluster_sizes(labels, k)?;
    let mut centers = DMatrix::zeros(k, data.ncols());
    for (i, &l) in labels.iter().enumerate() {
        for c in 0..data.ncols() {
            centers[(l, c)] += data[(i, c)];
        }
    }
    for (j, &size) in sizes.iter().enumerate() {
        centers.row_mut(j).unscale_mut(size as f64);
    }
    Ok(centers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_orthonormal;
    use crate::types::{make_indicator, IndicatorValues};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn relaxed(rows: usize, cols: usize, data: &[f64]) -> RelaxedAssignment {
        RelaxedAssignment::new(DMatrix::from_row_slice(rows, cols, data)).unwrap()
    }

    #[test]
    fn rounds_singleton_columns() {
        let h = round_to_indicator(&relaxed(2, 2, &[0.9, 0.1, 0.2, 0.7]), Rounding::Magnitude).unwrap();
        assert_eq!(h.labels(), &[0, 1]);
        assert_eq!(h.values(), &[1.0, 1.0]);
    }

    #[test]
    fn rounding_is_idempotent_on_indicators() {
        let h = make_indicator(&[0, 1, 1, 2, 0], 3, IndicatorValues::Normalized).unwrap();
        let r = RelaxedAssignment::new(h.matrix()).unwrap();
        for mode in [Rounding::Normalized, Rounding::Magnitude] {
            let again = round_to_indicator(&r, mode).unwrap();
            assert_eq!(again.labels(), h.labels());
            assert!((again.matrix() - h.matrix()).abs().max() < 1e-15);
        }
    }

    #[test]
    fn repairs_empty_column() {
        // Every row prefers column 0; column 1 takes the row with the largest
        // column-1 entry among rows of a cluster with >= 2 members: row 0 (0.3).
        let h = round_to_indicator(&relaxed(3, 2, &[0.9, 0.3, 0.8, 0.2, 0.7, 0.1]), Rounding::Magnitude).unwrap();
        assert_eq!(h.labels(), &[1, 0, 0]);
        assert_eq!(h.cluster_sizes(), &[2, 1]);
        let norm0 = (0.8f64 * 0.8 + 0.7 * 0.7).sqrt();
        assert!((h.values()[1] - 0.8 / norm0).abs() < 1e-15);
        assert!((h.values()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn repair_skips_singleton_clusters() {
        // Column 2 is empty. Row 0 has the highest column-2 score but is the
        // only member of cluster 1, so row 1 moves instead.
        let h =
            round_to_indicator(&relaxed(3, 3, &[0.1, 0.9, 0.8, 0.9, 0.0, 0.5, 0.8, 0.0, 0.1]), Rounding::Normalized)
                .unwrap();
        assert_eq!(h.labels(), &[1, 2, 0]);
    }

    #[test]
    fn argmax_ties_go_low() {
        let h = round_to_indicator(&relaxed(3, 2, &[0.5, 0.5, 0.1, 0.9, 0.7, 0.2]), Rounding::Normalized).unwrap();
        assert_eq!(h.labels(), &[0, 1, 0]);
    }

    #[test]
    fn zero_rows_still_produce_indicator() {
        let h = round_to_indicator(&relaxed(3, 2, &[0.0, 0.0, 0.0, 0.6, 0.4, 0.0]), Rounding::Magnitude).unwrap();
        assert_eq!(h.labels(), &[0, 1, 0]);
        assert!(h.values().iter().all(|&v| v > 0.0));
        assert!(round_to_indicator(&relaxed(1, 2, &[0.5, 0.5]), Rounding::Normalized).is_err());
    }

    #[test]
    fn inner_fixed_point_on_indicator_basis() {
        let h = make_indicator(&[0, 0, 1, 1, 1, 2], 3, IndicatorValues::Normalized).unwrap();
        let basis = EmbeddedData::from_orthonormal(h.matrix()).unwrap();
        let sol = inner_solve(&RotatedBasis::identity(&basis), &basis, &KindapParams::default());
        assert!(sol.iters <= 2);
        assert!(*sol.objectives.last().unwrap() <= 1e-12);
    }

    #[test]
    fn inner_never_increases_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let basis = EmbeddedData::from_orthonormal(random_orthonormal(10, 2, &mut rng)).unwrap();
        let sol = inner_solve(&RotatedBasis::identity(&basis), &basis, &KindapParams::default());
        assert!(sol.objectives.last().unwrap() <= &sol.objectives[0]);
        for w in sol.objectives.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn solve_on_indicator_basis() {
        let labels = [0, 1, 1, 0, 2, 2, 2, 1];
        let h = make_indicator(&labels, 3, IndicatorValues::Normalized).unwrap();
        let basis = EmbeddedData::from_orthonormal(h.matrix()).unwrap();
        let result = kindap_solve(&basis, &KindapParams::default()).unwrap();
        assert!(result.kind_objective.unwrap() <= 1e-10);
        assert_eq!(result.trace.outer_iters, 1);
        assert_eq!(evaluation::accuracy(&result.labels, &labels).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_params() {
        let h = make_indicator(&[0, 1], 2, IndicatorValues::Normalized).unwrap();
        let basis = EmbeddedData::from_orthonormal(h.matrix()).unwrap();
        let params = KindapParams { tol_inner: 0.0, ..Default::default() };
        assert!(kindap_solve(&basis, &params).is_err());
    }

    #[test]
    fn centers_are_cluster_means() {
        let basis = EmbeddedData::from_orthonormal(DMatrix::identity(2, 2)).unwrap();
        let result = ClusterResult {
            labels: vec![0, 1],
            k: 2,
            kind_objective: None,
            kmeans_objective: 0.0,
            relaxed: None,
            indicator: None,
            trace: SolverTrace::default(),
        };
        assert_eq!(warm_start_centers(&basis, &result).unwrap(), DMatrix::identity(2, 2));
    }

    #[test]
    fn centers_match_scalar_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let data = random_orthonormal(12, 3, &mut rng);
        let labels = [0, 1, 2, 0, 1, 2, 2, 2, 0, 1, 1, 0];
        let centers = cluster_means(&data, &labels, 3).unwrap();
        for j in 0..3 {
            for c in 0..3 {
                let mut sum = 0.0;
                let mut count = 0.0;
                for i in 0..12 {
                    if labels[i] == j {
                        sum += data[(i, c)];
                        count += 1.0;
                    }
                }
                assert!((centers[(j, c)] - sum / count).abs() < 1e-15);
            }
        }
    }
}
