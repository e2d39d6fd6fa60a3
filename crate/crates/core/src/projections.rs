//! Closed-form projections onto the box and onto the rotated data subspace,
//! and the two subspace distances built on them.
//!
//! Distances are computed from `k×k` cross-Gram matrices only, so memory and
//! work stay linear in the number of rows.

use nalgebra::DMatrix;

use crate::linalg;
use crate::types::{EmbeddedData, RelaxedAssignment};

/// Singular values of `ÛᵀN` below this make the Procrustes projection non-unique.
pub const DEGENERATE_SIGMA: f64 = 1e-12;

/// A point `U = ÛR` of the rotated data subspace, with its rotation `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedBasis {
    matrix: DMatrix<f64>,
    rotation: DMatrix<f64>,
}

impl RotatedBasis {
    /// The basis itself, `R = I`.
    pub fn identity(basis: &EmbeddedData) -> Self {
        Self { matrix: basis.matrix().clone(), rotation: DMatrix::identity(basis.k(), basis.k()) }
    }

    /// `ÛR` for a given orthogonal `R`.
    pub fn rotate(basis: &EmbeddedData, rotation: DMatrix<f64>) -> Self {
        Self { matrix: basis.matrix() * &rotation, rotation }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }
}

/// Result of [`procrustes_project`].
#[derive(Debug, Clone)]
pub struct Procrustes {
    pub point: RotatedBasis,
    /// `‖ÛᵀN‖_*`, so that `‖ÛR - N‖_F² = k + ‖N‖_F² - 2·nuclear_norm`.
    pub nuclear_norm: f64,
    /// Smallest singular value of `ÛᵀN` fell below [`DEGENERATE_SIGMA`];
    /// the returned rotation is one of several minimizers.
    pub degenerate: bool,
}

/// Entrywise clamp to `[0, 1]`.
pub fn project_box(u: &DMatrix<f64>) -> RelaxedAssignment {
    RelaxedAssignment::new_unchecked(u.map(|v| v.clamp(0.0, 1.0)))
}

/// Nearest point to `n` among `{ÛR : RᵀR = I}`.
///
/// With `ÛᵀN = PΣQᵀ` the minimizer is `R = PQᵀ`.
pub fn procrustes_project(n: &DMatrix<f64>, basis: &EmbeddedData) -> Procrustes {
    let cross = basis.matrix().tr_mul(n);
    procrustes_from_cross(&cross, basis)
}

pub(crate) fn procrustes_from_cross(cross: &DMatrix<f64>, basis: &EmbeddedData) -> Procrustes {
    let (p, sigma, q_t) = linalg::svd(cross);
    let rotation = p * q_t;
    let smallest = sigma.iter().copied().fold(f64::INFINITY, f64::min);
    Procrustes {
        point: RotatedBasis::rotate(basis, rotation),
        nuclear_norm: sigma.sum(),
        degenerate: smallest < DEGENERATE_SIGMA,
    }
}

/// `min_R ‖AR - B‖_F` over orthogonal `R`, i.e. `√(2k - 2‖AᵀB‖_*)`.
///
/// Both inputs must have orthonormal columns.
pub fn subspace_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let k = a.ncols() as f64;
    let nuc = linalg::nuclear_norm(&a.tr_mul(b)).clamp(0.0, k);
    (2.0 * k - 2.0 * nuc).max(0.0).sqrt()
}

/// `‖AAᵀ - BBᵀ‖_F` without forming `n×n` matrices: `√(2k - 2‖AᵀB‖_F²)`.
pub fn projection_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let k = a.ncols() as f64;
    let fro2 = a.tr_mul(b).norm_squared();
    (2.0 * k - 2.0 * fro2).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gaussian_matrix, random_orthogonal, random_orthonormal};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn embedded(n: usize, k: usize, seed: u64) -> EmbeddedData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        EmbeddedData::from_orthonormal(random_orthonormal(n, k, &mut rng)).unwrap()
    }

    #[test]
    fn box_truncates_negatives() {
        let u = DMatrix::from_row_slice(2, 2, &[0.5, -0.2, 1.0, 0.0]);
        let n = project_box(&u);
        assert_eq!(n.matrix(), &DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 1.0, 0.0]));
    }

    #[test]
    fn box_is_idempotent_inside() {
        let m = DMatrix::from_row_slice(2, 3, &[0.0, 0.3, 1.0, 0.25, 0.5, 0.999]);
        assert_eq!(project_box(&m).matrix(), &m);
    }

    #[test]
    #[allow(clippy::manual_clamp)]
    fn box_matches_scalar_clamp() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = gaussian_matrix(6, 3, &mut rng);
        let n = project_box(&u);
        for i in 0..6 {
            for j in 0..3 {
                let v = u[(i, j)];
                let expected = if v < 0.0 {
                    0.0
                } else if v > 1.0 {
                    1.0
                } else {
                    v
                };
                assert_eq!(n.matrix()[(i, j)], expected);
            }
        }
    }

    #[test]
    fn procrustes_of_basis_is_identity() {
        let basis = embedded(10, 3, 1);
        let p = procrustes_project(basis.matrix(), &basis);
        assert!((p.point.rotation() - DMatrix::<f64>::identity(3, 3)).abs().max() < 1e-12);
        assert!((p.nuclear_norm - 3.0).abs() < 1e-12);
        assert!(!p.degenerate);
    }

    #[test]
    fn procrustes_recovers_rotation() {
        let basis = embedded(12, 4, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r0 = random_orthogonal(4, &mut rng);
        let target = basis.matrix() * &r0;
        let p = procrustes_project(&target, &basis);
        assert!((p.point.matrix() - &target).abs().max() < 1e-8);
        assert!((p.point.rotation() - r0).abs().max() < 1e-8);
    }

    #[test]
    fn degenerate_cross_gram_is_flagged() {
        let basis =
            EmbeddedData::from_orthonormal(DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0])).unwrap();
        let n = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let p = procrustes_project(&n, &basis);
        assert!(p.degenerate);
        assert!(linalg::orthonormality_defect(p.point.matrix()) < 1e-12);
    }

    #[test]
    fn distances_vanish_on_identical_input() {
        let basis = embedded(9, 3, 4);
        assert!(subspace_distance(basis.matrix(), basis.matrix()) < 1e-7);
        assert!(projection_distance(basis.matrix(), basis.matrix()) < 1e-7);
    }

    #[test]
    fn orthogonal_ranges() {
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let b = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        assert!((projection_distance(&a, &b) - 2.0).abs() < 1e-15);
        assert!((subspace_distance(&a, &b) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric() {
        for seed in 0..10 {
            let a = embedded(8, 3, seed);
            let b = embedded(8, 3, seed + 100);
            let d1 = subspace_distance(a.matrix(), b.matrix());
            let d2 = subspace_distance(b.matrix(), a.matrix());
            assert!((d1 - d2).abs() < 1e-12);
        }
    }
}
