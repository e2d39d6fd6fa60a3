//! Clustering in embedded spaces with the K-indicators model.
//!
//! The main entry point is [`kindap::kindap_solve`], which takes an `n×k`
//! column-orthonormal basis ([`EmbeddedData`]) and returns a partition
//! together with its model objectives and iteration trace. Lloyd's K-means
//! and spectral rotation live in [`baselines`]; [`embedding`] turns raw
//! feature matrices into spectral embeddings, and [`synth`] generates the
//! separable benchmark family.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod embedding;
pub mod error;
pub mod evaluation;
pub mod kindap;
pub mod linalg;
pub mod projections;
pub mod rng;
pub mod synth;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    cluster_sizes, make_indicator, validate_embedding, BinaryIndicator, ClusterResult, EmbeddedData, IndicatorMatrix,
    IndicatorValues, RelaxedAssignment, SolverTrace, ValidatedEmbedding,
};

pub use nalgebra::DMatrix;
