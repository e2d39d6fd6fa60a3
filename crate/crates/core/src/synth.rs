//! Separable synthetic clusters: points on spheres around mutually
//! equidistant centers, embedded through the leading singular vectors.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::stream_rng;
use crate::types::{validate_embedding, EmbeddedData};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub k: usize,
    pub per_cluster: usize,
    /// Sphere radius around each center.
    pub rho: f64,
    pub ambient_dim: usize,
    pub seed: u64,
}

impl SynthSpec {
    /// 40 points per cluster in 300 dimensions.
    pub fn new(k: usize, rho: f64, seed: u64) -> Self {
        Self { k, per_cluster: 40, rho, ambient_dim: 300, seed }
    }

    pub fn n(&self) -> usize {
        self.k * self.per_cluster
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidParameter(format!("k must be at least 2, got {}", self.k)));
        }
        if self.per_cluster == 0 {
            return Err(Error::InvalidParameter("per_cluster must be at least 1".into()));
        }
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::InvalidParameter(format!("rho must be positive, got {}", self.rho)));
        }
        if self.ambient_dim < self.k {
            return Err(Error::InvalidParameter(format!(
                "ambient_dim {} is smaller than k {}",
                self.ambient_dim, self.k
            )));
        }
        if self.n() < self.k {
            return Err(Error::InfeasibleK { n: self.n(), k: self.k });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthDataset {
    /// `n × ambient_dim`, clusters stored contiguously.
    pub raw: DMatrix<f64>,
    pub truth: Vec<usize>,
    /// `k × ambient_dim`.
    pub centers: DMatrix<f64>,
    /// The `k` leading left singular vectors of `raw`.
    pub embedded: EmbeddedData,
}

/// Center `j` is `√2·e_j`, so every pair of centers is exactly 2 apart.
pub fn centers(k: usize, ambient_dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(k, ambient_dim, |j, c| if j == c { std::f64::consts::SQRT_2 } else { 0.0 })
}

pub fn generate(spec: &SynthSpec) -> Result<SynthDataset> {
    spec.validate()?;
    let n = spec.n();
    let centers = centers(spec.k, spec.ambient_dim);
    let mut rng = stream_rng(spec.seed, 0);
    let mut raw = DMatrix::zeros(n, spec.ambient_dim);
    let mut truth = Vec::with_capacity(n);
    let mut direction = vec![0.0; spec.ambient_dim];
    for j in 0..spec.k {
        for p in 0..spec.per_cluster {
            let i = j * spec.per_cluster + p;
            let norm = loop {
                direction.iter_mut().for_each(|x| *x = rng.sample(StandardNormal));
                let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.0 {
                    break norm;
                }
            };
            for (c, x) in direction.iter().enumerate() {
                raw[(i, c)] = centers[(j, c)] + spec.rho * x / norm;
            }
            truth.push(j);
        }
    }
    let u = linalg::leading_left_singular_vectors(&raw, spec.k)?;
    let embedded = validate_embedding(u)?.data;
    Ok(SynthDataset { raw, truth, centers, embedded })
}
