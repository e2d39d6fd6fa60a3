//! Dense linear-algebra helpers shared by the solvers.
//!
//! Everything here works on small k×k factorizations or on thin n×k
//! matrices; no routine materializes an n×n product unless it is asked to
//! decompose an n×n matrix explicitly.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Thin QR factorization with the diagonal of `R` made nonnegative.
///
/// Householder QR determines each column of `Q` only up to sign; flipping
/// rows of `R` and columns of `Q` together so that `diag(R) >= 0` makes the
/// factorization unique for full-rank input.
pub fn thin_qr(a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let qr = a.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for j in 0..r.nrows().min(r.ncols()) {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
            r.row_mut(j).neg_mut();
        }
    }
    (q, r)
}

/// Largest entrywise deviation of `AᵀA` from the identity.
pub fn orthonormality_defect(a: &DMatrix<f64>) -> f64 {
    let gram = a.tr_mul(a);
    let mut worst = 0.0f64;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).abs());
        }
    }
    worst
}

/// Singular values in descending order.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Sum of singular values.
pub fn nuclear_norm(a: &DMatrix<f64>) -> f64 {
    a.clone().singular_values().iter().sum()
}

/// Full SVD `A = P diag(σ) Qᵀ` of a small square matrix; returns `(P, σ, Qᵀ)`.
pub fn svd(a: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    (u, svd.singular_values, v_t)
}

/// Flip each column so that its largest-magnitude entry is positive
/// (ties broken toward the lowest row index).
pub fn fix_column_signs(a: &mut DMatrix<f64>) {
    for j in 0..a.ncols() {
        let mut pivot = 0.0f64;
        for i in 0..a.nrows() {
            let v = a[(i, j)];
            if v.abs() > pivot.abs() {
                pivot = v;
            }
        }
        if pivot < 0.0 {
            a.column_mut(j).neg_mut();
        }
    }
}

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted
/// ascending and eigenvector signs fixed by [`fix_column_signs`].
pub fn symmetric_eigen_ascending(a: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let eig = nalgebra::SymmetricEigen::try_new(a.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::EigSolverFailure("symmetric QR iteration did not converge".into()))?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigSolverFailure("non-finite eigenvalue".into()));
    }
    let mut order: Vec<usize> = (0..a.nrows()).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]).then(x.cmp(&y)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(a.nrows(), a.ncols());
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    fix_column_signs(&mut vectors);
    Ok((values, vectors))
}

/// The `k` leading left singular vectors of `x`, signs fixed.
///
/// Works through the eigendecomposition of whichever Gram matrix (`XXᵀ` or
/// `XᵀX`) is smaller, then re-orthonormalizes the result. Suitable when the
/// leading `k` singular values are well separated from zero.
pub fn leading_left_singular_vectors(x: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    let (n, d) = x.shape();
    if k == 0 || k > n.min(d) {
        return Err(Error::InvalidParameter(format!("cannot take {k} singular vectors of a {n}x{d} matrix")));
    }
    let mut u = if n <= d {
        let gram = x * x.transpose();
        let (_, vecs) = symmetric_eigen_ascending(&gram)?;
        let mut u = DMatrix::zeros(n, k);
        for j in 0..k {
            u.set_column(j, &vecs.column(n - 1 - j));
        }
        u
    } else {
        let gram = x.tr_mul(x);
        let (vals, vecs) = symmetric_eigen_ascending(&gram)?;
        let mut v = DMatrix::zeros(d, k);
        let mut inv_sigma = Vec::with_capacity(k);
        for j in 0..k {
            let lambda = vals[d - 1 - j];
            if lambda <= 0.0 {
                return Err(Error::RankDeficient { smallest: lambda.max(0.0).sqrt(), largest: vals[d - 1].sqrt() });
            }
            v.set_column(j, &vecs.column(d - 1 - j));
            inv_sigma.push(1.0 / lambda.sqrt());
        }
        let mut u = x * v;
        for (j, s) in inv_sigma.into_iter().enumerate() {
            u.column_mut(j).scale_mut(s);
        }
        u
    };
    if orthonormality_defect(&u) > 1e-12 {
        let (q, r) = thin_qr(&u);
        let largest = (0..k).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
        let smallest = (0..k).map(|j| r[(j, j)].abs()).fold(f64::INFINITY, f64::min);
        if smallest < 1e-10 * largest {
            return Err(Error::RankDeficient { smallest, largest });
        }
        u = q;
    }
    fix_column_signs(&mut u);
    Ok(u)
}

/// A Haar-distributed `k×k` orthogonal matrix (reflections included).
pub fn random_orthogonal<R: Rng + ?Sized>(k: usize, rng: &mut R) -> DMatrix<f64> {
    random_orthonormal(k, k, rng)
}

/// A random `n×k` matrix with orthonormal columns, distributed uniformly on
/// the Stiefel manifold.
pub fn random_orthonormal<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> DMatrix<f64> {
    let g = gaussian_matrix(n, k, rng);
    thin_qr(&g).0
}

/// An `n×d` matrix of independent standard normal entries, filled row by row.
pub fn gaussian_matrix<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            g[(i, j)] = rng.sample(StandardNormal);
        }
    }
    g
}

/// Squared Euclidean distance between two equal-length slices.
pub(crate) fn sq_dist<'a>(a: impl Iterator<Item = &'a f64>, b: impl Iterator<Item = &'a f64>) -> f64 {
    a.zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
