//! Spectral embedding: kNN similarity graph, symmetric normalized Laplacian,
//! and its eigenvectors for the smallest eigenvalues.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, sq_dist};
use crate::types::{validate_embedding, EmbeddedData};

pub const DEFAULT_KNN: usize = 5;

/// Edge weights of the kNN graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// 1 for every edge.
    #[default]
    Binary,
    /// `exp(-d²/(2σ²))` with `σ` the median neighbor distance.
    Gaussian,
}

/// A symmetric, nonnegative weight matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    weights: DMatrix<f64>,
    knn: usize,
}

impl SimilarityGraph {
    /// Wrap an explicit weight matrix after checking symmetry, sign and diagonal.
    pub fn from_weights(weights: DMatrix<f64>, knn: usize) -> Result<Self> {
        let n = weights.nrows();
        if weights.ncols() != n {
            return Err(Error::DimensionMismatch("weight matrix must be square".into()));
        }
        for i in 0..n {
            if weights[(i, i)] != 0.0 {
                return Err(Error::InvalidParameter(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let w = weights[(i, j)];
                if !(w >= 0.0) || w != weights[(j, i)] {
                    return Err(Error::InvalidParameter(format!("weight ({i}, {j}) is negative or asymmetric")));
                }
            }
        }
        Ok(Self { weights, knn })
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn knn(&self) -> usize {
        self.knn
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }
}

/// For each row, the indices of its `knn` nearest other rows (Euclidean),
/// closest first, distance ties broken toward the lower index.
pub fn nearest_neighbors(data: &DMatrix<f64>, knn: usize) -> Result<Vec<Vec<(usize, f64)>>> {
    let n = data.nrows();
    if knn == 0 || knn >= n {
        return Err(Error::InvalidParameter(format!("knn must satisfy 1 <= knn < n = {n}, got {knn}")));
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|i| data.row(i).iter().copied().collect()).collect();
    Ok((0..n)
        .map(|i| {
            let mut cand: Vec<(usize, f64)> =
                (0..n).filter(|&j| j != i).map(|j| (j, sq_dist(rows[i].iter(), rows[j].iter()))).collect();
            cand.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            cand.truncate(knn);
            cand.into_iter().map(|(j, d2)| (j, d2.sqrt())).collect()
        })
        .collect())
}

/// Symmetrized kNN graph: `i` and `j` are joined when either is among the
/// other's `knn` nearest neighbors.
pub fn knn_graph(data: &DMatrix<f64>, knn: usize, weighting: Weighting) -> Result<SimilarityGraph> {
    let n = data.nrows();
    let neighbors = nearest_neighbors(data, knn)?;
    let bandwidth = match weighting {
        Weighting::Binary => 0.0,
        Weighting::Gaussian => {
            let mut d: Vec<f64> = neighbors.iter().flatten().map(|&(_, d)| d).collect();
            d.sort_by(f64::total_cmp);
            d[d.len() / 2]
        }
    };
    let weight = |dist: f64| match weighting {
        Weighting::Gaussian if bandwidth > 0.0 => (-dist * dist / (2.0 * bandwidth * bandwidth)).exp(),
        _ => 1.0,
    };
    let mut w = DMatrix::zeros(n, n);
    for (i, list) in neighbors.iter().enumerate() {
        for &(j, dist) in list {
            let v = weight(dist);
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    Ok(SimilarityGraph { weights: w, knn })
}

/// `L = I - D^{-1/2} W D^{-1/2}`.
pub fn normalized_laplacian(graph: &SimilarityGraph) -> Result<DMatrix<f64>> {
    let n = graph.n();
    let w = graph.weights();
    let mut inv_sqrt = Vec::with_capacity(n);
    for i in 0..n {
        let degree = w.row(i).sum();
        if !(degree > 0.0) {
            return Err(Error::IsolatedVertex(i));
        }
        inv_sqrt.push(1.0 / degree.sqrt());
    }
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let off = -w[(i, j)] * inv_sqrt[i] * inv_sqrt[j];
        if i == j {
            1.0 + off
        } else {
            off
        }
    }))
}

/// Eigenvectors of the `k` smallest eigenvalues of the normalized Laplacian.
///
/// With `row_normalize`, rows are first scaled to unit length and the
/// columns are then re-orthonormalized.
pub fn spectral_embed(graph: &SimilarityGraph, k: usize, row_normalize: bool) -> Result<EmbeddedData> {
    let n = graph.n();
    if k < 2 || k > n {
        return Err(Error::InfeasibleK { n, k });
    }
    let laplacian = normalized_laplacian(graph)?;
    let (_, vectors) = linalg::symmetric_eigen_ascending(&laplacian)?;
    let mut u = vectors.columns(0, k).into_owned();
    if row_normalize {
        for i in 0..n {
            let norm = u.row(i).norm();
            if norm > 0.0 {
                u.row_mut(i).unscale_mut(norm);
            }
        }
    }
    Ok(validate_embedding(u)?.data)
}
