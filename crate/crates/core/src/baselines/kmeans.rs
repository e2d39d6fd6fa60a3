//! Lloyd's algorithm with k-means++ seeding and best-of-m replications.

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kindap::cluster_means;
use crate::linalg::sq_dist;
use crate::rng::stream_rng;
use crate::types::{ClusterResult, SolverTrace};

use super::kind_objective_if_embedded;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmeansParams {
    pub replications: usize,
    pub max_iters: usize,
    /// Stop once `‖C_new - C_old‖_F <= tol · ‖C_old‖_F`.
    pub tol: f64,
    pub seed: u64,
}

impl Default for KmeansParams {
    fn default() -> Self {
        Self { replications: 1, max_iters: 300, tol: 1e-6, seed: 0 }
    }
}

impl KmeansParams {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidParameter("replications must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidParameter("tol must be nonnegative".into()));
        }
        Ok(())
    }
}

fn row_dist2(data: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>, j: usize) -> f64 {
    sq_dist(data.row(i).iter(), centers.row(j).iter())
}

/// Row indices chosen by k-means++ seeding: the first uniformly, each
/// further one with probability proportional to its squared distance to the
/// nearest index already chosen. When every remaining row coincides with a
/// chosen one, the next index is uniform over the unchosen rows.
pub fn kmeans_pp_indices<R: Rng + ?Sized>(data: &DMatrix<f64>, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    let n = data.nrows();
    if k == 0 || k > n {
        return Err(Error::InfeasibleK { n, k });
    }
    let mut chosen = vec![rng.random_range(0..n)];
    let mut taken = vec![false; n];
    taken[chosen[0]] = true;
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(data.row(i).iter(), data.row(chosen[0]).iter())).collect();
    while chosen.len() < k {
        let weights: Vec<f64> = nearest.iter().zip(&taken).map(|(&d, &t)| if t { 0.0 } else { d }).collect();
        let next = match WeightedIndex::new(&weights) {
            Ok(dist) => dist.sample(rng),
            Err(_) => {
                let free: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
                free[rng.random_range(0..free.len())]
            }
        };
        taken[next] = true;
        chosen.push(next);
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(data.row(i).iter(), data.row(next).iter()));
        }
    }
    Ok(chosen)
}

/// k-means++ initial centers, one per row of the returned `k×d` matrix.
pub fn kmeans_pp_init<R: Rng + ?Sized>(data: &DMatrix<f64>, k: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    let idx = kmeans_pp_indices(data, k, rng)?;
    Ok(DMatrix::from_fn(k, data.ncols(), |j, c| data[(idx[j], c)]))
}

fn assign(data: &DMatrix<f64>, centers: &DMatrix<f64>, labels: &mut [usize]) {
    for (i, label) in labels.iter_mut().enumerate() {
        let mut best = 0;
        let mut best_d = row_dist2(data, i, centers, 0);
        for j in 1..centers.nrows() {
            let d = row_dist2(data, i, centers, j);
            if d < best_d {
                best = j;
                best_d = d;
            }
        }
        *label = best;
    }
}

/// Give every empty cluster the point farthest from its current center,
/// taken from clusters that keep at least one member.
fn seize_for_empty(data: &DMatrix<f64>, centers: &mut DMatrix<f64>, labels: &mut [usize]) {
    let k = centers.nrows();
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    if sizes.iter().all(|&s| s > 0) {
        return;
    }
    let mut dist: Vec<f64> = labels.iter().enumerate().map(|(i, &l)| row_dist2(data, i, centers, l)).collect();
    for j in 0..k {
        if sizes[j] > 0 {
            continue;
        }
        let mut pick: Option<usize> = None;
        for i in 0..labels.len() {
            if sizes[labels[i]] >= 2 && pick.is_none_or(|p| dist[i] > dist[p]) {
                pick = Some(i);
            }
        }
        let i = pick.expect("n >= k leaves a cluster with two members");
        sizes[labels[i]] -= 1;
        labels[i] = j;
        sizes[j] += 1;
        dist[i] = 0.0;
        centers.set_row(j, &data.row(i));
    }
}

/// Within-cluster sum of squared distances to the given centers.
pub fn within_cluster_ss(data: &DMatrix<f64>, labels: &[usize], centers: &DMatrix<f64>) -> f64 {
    labels.iter().enumerate().map(|(i, &l)| row_dist2(data, i, centers, l)).sum()
}

/// Lloyd iterations from `init_centers`.
///
/// Each iteration assigns rows to their nearest center (ties to the lowest
/// index), repairs empty clusters, and moves centers to cluster means. The
/// trace records the within-cluster sum of squares after every iteration.
pub fn lloyd_solve(
    data: &DMatrix<f64>,
    k: usize,
    init_centers: &DMatrix<f64>,
    params: &KmeansParams,
) -> Result<ClusterResult> {
    params.validate()?;
    let n = data.nrows();
    if k == 0 || k > n {
        return Err(Error::InfeasibleK { n, k });
    }
    if init_centers.shape() != (k, data.ncols()) {
        return Err(Error::DimensionMismatch(format!(
            "initial centers are {}x{}, expected {k}x{}",
            init_centers.nrows(),
            init_centers.ncols(),
            data.ncols()
        )));
    }

    let mut centers = init_centers.clone();
    let mut labels = vec![0usize; n];
    let mut trace = SolverTrace::default();
    for _ in 0..params.max_iters {
        let old = centers.clone();
        assign(data, &centers, &mut labels);
        seize_for_empty(data, &mut centers, &mut labels);
        centers = cluster_means(data, &labels, k)?;
        trace.outer_iters += 1;
        trace.objective_history.push(within_cluster_ss(data, &labels, &centers));
        if (&centers - &old).norm() <= params.tol * old.norm() {
            break;
        }
    }

    let kmeans_objective = *trace.objective_history.last().expect("max_iters >= 1");
    Ok(ClusterResult {
        kind_objective: kind_objective_if_embedded(data, &labels, k),
        labels,
        k,
        kmeans_objective,
        relaxed: None,
        indicator: None,
        trace,
    })
}

/// Best of `params.replications` k-means++ seeded Lloyd runs.
///
/// Replication `r` draws from stream `r` of `params.seed`, so the outcome is
/// independent of the order in which replications execute. Ties in the
/// final objective go to the lowest replication index.
pub fn kmeans_solve(data: &DMatrix<f64>, k: usize, params: &KmeansParams) -> Result<ClusterResult> {
    params.validate()?;
    let runs: Vec<Result<ClusterResult>> = (0..params.replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(params.seed, r as u64);
            let init = kmeans_pp_init(data, k, &mut rng)?;
            lloyd_solve(data, k, &init, params)
        })
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let objectives: Vec<f64> = runs.iter().map(|r| r.kmeans_objective).collect();
    let histories = runs.iter().map(|r| r.trace.objective_history.clone()).collect();
    let best = objectives.iter().enumerate().fold(0, |b, (i, &o)| if o < objectives[b] { i } else { b });
    let mut result = runs.into_iter().nth(best).expect("replications >= 1");
    result.trace.replication_index = Some(best);
    result.trace.replication_objectives = objectives;
    result.trace.replication_histories = histories;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::types::{make_indicator, IndicatorValues};

    #[test]
    fn pp_with_k_equal_n_is_a_permutation() {
        let data = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let mut idx = kmeans_pp_indices(&data, 4, &mut stream_rng(3, 0)).unwrap();
        idx.sort_unstable();
        assert_eq!(idx, vec![0, 1, 2, 3]);
    }

    #[test]
    fn pp_handles_duplicate_points() {
        let data = DMatrix::from_row_slice(3, 1, &[2.0, 2.0, 2.0]);
        let mut idx = kmeans_pp_indices(&data, 3, &mut stream_rng(1, 0)).unwrap();
        idx.sort_unstable();
        assert_eq!(idx, vec![0, 1, 2]);
    }

    #[test]
    fn pp_with_single_center_is_a_data_row() {
        let data = DMatrix::from_row_slice(3, 2, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let c = kmeans_pp_init(&data, 1, &mut stream_rng(9, 0)).unwrap();
        assert!((0..3).any(|i| data.row(i) == c.row(0)));
    }

    #[test]
    fn every_point_its_own_center() {
        let data = DMatrix::from_row_slice(3, 2, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let r = lloyd_solve(&data, 3, &data, &KmeansParams::default()).unwrap();
        assert_eq!(r.kmeans_objective, 0.0);
    }

    #[test]
    fn fixed_point_on_indicator_rows() {
        let truth = [0, 1, 1, 2, 0, 2, 2];
        let h = make_indicator(&truth, 3, IndicatorValues::Normalized).unwrap().matrix();
        let centers = DMatrix::from_fn(3, 3, |j, c| if j == c { 1.0 / [2.0f64, 2.0, 3.0][j].sqrt() } else { 0.0 });
        let r = lloyd_solve(&h, 3, &centers, &KmeansParams::default()).unwrap();
        assert_eq!(r.trace.outer_iters, 1);
        assert_eq!(r.labels, truth);
        assert!(r.kmeans_objective < 1e-15);
        assert!(r.kind_objective.unwrap() < 1e-12);
    }

    #[test]
    fn empty_cluster_is_repaired() {
        // the third center attracts nothing
        let data = DMatrix::from_row_slice(4, 1, &[0.0, 0.1, 5.0, 5.3]);
        let init = DMatrix::from_row_slice(3, 1, &[0.0, 5.0, 100.0]);
        let r = lloyd_solve(&data, 3, &init, &KmeansParams::default()).unwrap();
        let mut sizes = [0; 3];
        for &l in &r.labels {
            sizes[l] += 1;
        }
        assert!(sizes.iter().all(|&s| s > 0));
        for w in r.trace.objective_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn single_replication_matches_lloyd() {
        let mut rng = stream_rng(44, 0);
        let data = crate::linalg::gaussian_matrix(30, 3, &mut rng);
        let params = KmeansParams { replications: 1, seed: 5, ..Default::default() };
        let solved = kmeans_solve(&data, 4, &params).unwrap();
        let init = kmeans_pp_init(&data, 4, &mut stream_rng(5, 0)).unwrap();
        let direct = lloyd_solve(&data, 4, &init, &params).unwrap();
        assert_eq!(solved.labels, direct.labels);
        assert_eq!(solved.kmeans_objective, direct.kmeans_objective);
        assert_eq!(solved.trace.replication_objectives, vec![direct.kmeans_objective]);
    }

    #[test]
    fn replications_pick_minimum() {
        let mut rng = stream_rng(2, 0);
        let data = crate::linalg::gaussian_matrix(40, 2, &mut rng);
        let params = KmeansParams { replications: 8, seed: 3, ..Default::default() };
        let r = kmeans_solve(&data, 5, &params).unwrap();
        let min = r.trace.replication_objectives.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(r.kmeans_objective, min);
        assert_eq!(r.trace.replication_objectives[r.trace.replication_index.unwrap()], min);
        let again = kmeans_solve(&data, 5, &params).unwrap();
        assert_eq!(r.labels, again.labels);
        assert_eq!(r.trace, again.trace);
    }
}
