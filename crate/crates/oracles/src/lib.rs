//! Brute-force reference implementations for checking the solvers on tiny
//! instances. Nothing here is fast; everything here is obviously correct.
//!
//! This crate is only ever a dev-dependency, so the exponential enumeration
//! never ends up in a release binary.

use kindap::EmbeddedData;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

pub const MAX_N: usize = 12;
pub const MAX_K: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("instance too large for enumeration: n = {n}, k = {k} (caps n <= {MAX_N}, k <= {MAX_K})")]
    TooLarge { n: usize, k: usize },
    #[error("no assignment with {k} nonempty clusters exists for n = {n}")]
    Empty { n: usize, k: usize },
}

/// Which model objective [`exhaustive_best`] minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// `min_R ‖ÛR - H‖_F²` with `H` the normalized indicator.
    Kind,
    /// Within-cluster sum of squares.
    Kmeans,
    /// `min_R ‖ÛR - B‖_F²` with `B` the binary indicator.
    Sr,
}

/// Every surjective map `{0..n} → {0..k}`, as label vectors.
pub fn surjections(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = (k as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
    (0..total).filter_map(move |mut code| {
        let mut labels = vec![0usize; n];
        let mut seen = vec![false; k];
        for l in labels.iter_mut() {
            *l = (code % k as u64) as usize;
            code /= k as u64;
            seen[*l] = true;
        }
        seen.iter().all(|&s| s).then_some(labels)
    })
}

/// Partitions of `{0..n}` into exactly `k` blocks, one labeling per
/// partition (restricted growth strings: block ids appear in first-use order).
pub fn set_partitions(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, used: usize, n: usize, k: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            if used == k {
                out.push(prefix.clone());
            }
            return;
        }
        // not enough rows left to open the remaining blocks
        if k - used > n - prefix.len() {
            return;
        }
        for l in 0..=used.min(k - 1) {
            prefix.push(l);
            grow(prefix, used.max(l + 1), n, k, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k == 0 || k > n {
        return out;
    }
    grow(&mut Vec::with_capacity(n), 0, n, k, &mut out);
    out
}

/// Number of surjections `{0..n} → {0..k}` by inclusion–exclusion.
pub fn surjection_count(n: usize, k: usize) -> u64 {
    let mut total: i128 = 0;
    let mut binom: i128 = 1;
    for i in 0..=k {
        let term = binom * ((k - i) as i128).pow(n as u32);
        total += if i % 2 == 0 { term } else { -term };
        binom = binom * (k - i) as i128 / (i + 1) as i128;
    }
    total as u64
}

fn dense_indicator(labels: &[usize], k: usize, normalized: bool) -> DMatrix<f64> {
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    DMatrix::from_fn(labels.len(), k, |i, j| {
        if labels[i] != j {
            0.0
        } else if normalized {
            1.0 / (sizes[j] as f64).sqrt()
        } else {
            1.0
        }
    })
}

fn nuclear(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.iter().sum()
}

/// The objective of one labeling, computed from dense matrices.
pub fn objective_of(basis: &DMatrix<f64>, labels: &[usize], k: usize, objective: Objective) -> f64 {
    let (n, d) = basis.shape();
    match objective {
        Objective::Kind => {
            let h = dense_indicator(labels, k, true);
            2.0 * k as f64 - 2.0 * nuclear(&(basis.transpose() * h))
        }
        Objective::Sr => {
            let b = dense_indicator(labels, k, false);
            (n + d) as f64 - 2.0 * nuclear(&(basis.transpose() * b))
        }
        Objective::Kmeans => {
            let mut total = 0.0;
            for j in 0..k {
                let members: Vec<usize> = (0..n).filter(|&i| labels[i] == j).collect();
                for c in 0..d {
                    let mean = members.iter().map(|&i| basis[(i, c)]).sum::<f64>() / members.len() as f64;
                    total += members.iter().map(|&i| (basis[(i, c)] - mean).powi(2)).sum::<f64>();
                }
            }
            total
        }
    }
}

/// Global minimizer of `objective` over all partitions into `k` nonempty
/// clusters, by enumeration. Returns the canonical labeling (blocks numbered
/// in order of first appearance) and the objective value.
pub fn exhaustive_best(basis: &EmbeddedData, k: usize, objective: Objective) -> Result<(Vec<usize>, f64), OracleError> {
    let n = basis.n();
    if n > MAX_N || k > MAX_K {
        return Err(OracleError::TooLarge { n, k });
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    for labels in set_partitions(n, k) {
        let value = objective_of(basis.matrix(), &labels, k, objective);
        if best.as_ref().is_none_or(|(_, b)| value < *b) {
            best = Some((labels, value));
        }
    }
    best.ok_or(OracleError::Empty { n, k })
}

/// Relabel so cluster ids appear in order of first use.
pub fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// A Haar-random orthogonal matrix via Gaussian QR with a sign fix.
pub fn haar_orthogonal<R: Rng + ?Sized>(k: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(k, k, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Smallest `‖ÛR - N‖_F` over `samples` Haar-random orthogonal `R`.
pub fn sampled_rotation_min<R: Rng + ?Sized>(
    basis: &DMatrix<f64>,
    target: &DMatrix<f64>,
    samples: usize,
    rng: &mut R,
) -> f64 {
    let k = basis.ncols();
    (0..samples.max(1)).map(|_| (basis * haar_orthogonal(k, rng) - target).norm()).fold(f64::INFINITY, f64::min)
}

/// `min_R ‖AR - B‖_F` for `k = 2` by scanning rotation angles (proper and
/// improper) on a grid and refining the best cell by ternary search.
pub fn rotation_scan_min_k2(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.ncols(), 2);
    let eval = |theta: f64, reflect: bool| {
        let (s, c) = theta.sin_cos();
        let r = if reflect {
            DMatrix::from_row_slice(2, 2, &[c, s, s, -c])
        } else {
            DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
        };
        (a * r - b).norm()
    };
    let steps = 20_000;
    let h = std::f64::consts::TAU / steps as f64;
    let mut best = f64::INFINITY;
    for reflect in [false, true] {
        let (mut arg, mut val) = (0.0, f64::INFINITY);
        for s in 0..steps {
            let t = s as f64 * h;
            let v = eval(t, reflect);
            if v < val {
                val = v;
                arg = t;
            }
        }
        let (mut lo, mut hi) = (arg - h, arg + h);
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if eval(m1, reflect) < eval(m2, reflect) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        best = best.min(val).min(eval(0.5 * (lo + hi), reflect));
    }
    best
}

/// `‖AAᵀ - BBᵀ‖_F` with the `n×n` projectors formed explicitly.
pub fn dense_projection_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a * a.transpose() - b * b.transpose()).norm()
}

/// Symmetrized 0/1 kNN adjacency by rank counting: `j` is a neighbor of `i`
/// when fewer than `knn` other points precede it in `(distance, index)` order.
pub fn knn_adjacency(data: &DMatrix<f64>, knn: usize) -> DMatrix<f64> {
    let n = data.nrows();
    let dist = |i: usize, j: usize| (data.row(i) - data.row(j)).norm_squared();
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let ahead = (0..n)
                .filter(|&l| l != i && l != j)
                .filter(|&l| dist(i, l) < dist(i, j) || (dist(i, l) == dist(i, j) && l < j))
                .count();
            if ahead < knn {
                w[(i, j)] = 1.0;
                w[(j, i)] = 1.0;
            }
        }
    }
    w
}

/// Fraction of matching labels maximized over every permutation of the
/// predicted ids (both labelings over `0..k`).
pub fn accuracy_by_permutation(pred: &[usize], truth: &[usize], k: usize) -> f64 {
    fn permutations(k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(k - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, k - 1);
                out.push(q);
            }
        }
        out
    }
    permutations(k)
        .into_iter()
        .map(|perm| pred.iter().zip(truth).filter(|&(&p, &t)| perm[p] == t).count())
        .max()
        .unwrap_or(0) as f64
        / pred.len() as f64
}
