use kindap::linalg::{random_orthogonal, random_orthonormal};
use kindap::projections::*;
use kindap::rng::stream_rng;
use kindap::{make_indicator, EmbeddedData, IndicatorValues};
use kindap_oracles::{dense_projection_distance, rotation_scan_min_k2, sampled_rotation_min};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn orthonormal(n: usize, k: usize, seed: u64) -> DMatrix<f64> {
    random_orthonormal(n, k, &mut stream_rng(seed, 0))
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=8).prop_flat_map(|k| (k..=40usize, Just(k)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn triangle_inequality((n, k) in dims(), seed in any::<u64>()) {
        let a = orthonormal(n, k, seed);
        let b = orthonormal(n, k, seed ^ 1);
        let c = orthonormal(n, k, seed ^ 2);
        let ac = subspace_distance(&a, &c);
        let ab = subspace_distance(&a, &b);
        let bc = subspace_distance(&b, &c);
        prop_assert!(ac <= ab + bc + 1e-9);
    }

    #[test]
    fn distance_chain((n, k) in dims(), seed in any::<u64>()) {
        let a = orthonormal(n, k, seed);
        let b = orthonormal(n, k, seed.wrapping_add(17));
        let sub = subspace_distance(&a, &b);
        let proj = projection_distance(&a, &b);
        prop_assert!(std::f64::consts::FRAC_1_SQRT_2 * proj <= sub + 1e-9);
        prop_assert!(sub <= proj + 1e-9);
    }

    #[test]
    fn chain_holds_for_indicators((n, k) in dims(), seed in any::<u64>()) {
        let basis = orthonormal(n, k, seed);
        let labels: Vec<usize> = (0..n).map(|i| (i + seed as usize) % k).collect();
        let h = make_indicator(&labels, k, IndicatorValues::Normalized).unwrap().matrix();
        let sub = subspace_distance(&basis, &h);
        let proj = projection_distance(&basis, &h);
        prop_assert!(std::f64::consts::FRAC_1_SQRT_2 * proj <= sub + 1e-9);
        prop_assert!(sub <= proj + 1e-9);
    }

    #[test]
    fn nuclear_norm_identity((n, k) in dims(), seed in any::<u64>()) {
        let a = orthonormal(n, k, seed);
        let b = orthonormal(n, k, seed ^ 0xff);
        let sigma = (a.transpose() * &b).svd(false, false).singular_values;
        let d = subspace_distance(&a, &b);
        prop_assert!((d * d - (2.0 * k as f64 - 2.0 * sigma.sum())).abs() <= 1e-9);
        for s in sigma.iter() {
            prop_assert!(*s >= 0.0 && *s <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn procrustes_is_idempotent((n, k) in dims(), seed in any::<u64>()) {
        let basis = EmbeddedData::from_orthonormal(orthonormal(n, k, seed)).unwrap();
        let target = DMatrix::from_fn(n, k, |i, j| ((i * 31 + j * 7) as f64 + seed as f64).sin().abs());
        let first = procrustes_project(&target, &basis);
        let again = procrustes_project(first.point.matrix(), &basis);
        prop_assert!((again.point.matrix() - first.point.matrix()).abs().max() <= 1e-8);
        prop_assert!((first.point.matrix() - basis.matrix() * first.point.rotation()).abs().max() <= 1e-12);
    }

    #[test]
    fn box_is_idempotent(seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 0);
        let u = kindap::linalg::gaussian_matrix(7, 3, &mut rng);
        let once = project_box(&u);
        let twice = project_box(once.matrix());
        prop_assert_eq!(once.matrix(), twice.matrix());
    }
}

#[test]
fn rotated_basis_stays_in_range() {
    let basis = EmbeddedData::from_orthonormal(orthonormal(30, 5, 4)).unwrap();
    let r = random_orthogonal(5, &mut stream_rng(4, 1));
    let u = RotatedBasis::rotate(&basis, r);
    assert!(kindap::linalg::orthonormality_defect(u.matrix()) <= 1e-10);
    let back = basis.matrix() * basis.matrix().transpose() * u.matrix();
    assert!((back - u.matrix()).norm() <= 1e-8);
}

#[test]
fn procrustes_beats_sampled_rotations() {
    // n = 8, k = 3, random nonnegative target
    let mut rng = stream_rng(2024, 0);
    let basis = EmbeddedData::from_orthonormal(random_orthonormal(8, 3, &mut rng)).unwrap();
    let target = DMatrix::from_fn(8, 3, |_, _| rand::Rng::random::<f64>(&mut rng));
    let closed = (procrustes_project(&target, &basis).point.matrix() - &target).norm();
    let sampled = sampled_rotation_min(basis.matrix(), &target, 10_000, &mut stream_rng(2024, 1));
    assert!(closed <= sampled + 1e-9, "closed {closed} vs sampled {sampled}");
    // the closed form should be strictly better than random search here
    assert!(closed < sampled);
}

#[test]
fn subspace_distance_matches_angle_scan() {
    for seed in 0..10 {
        let a = orthonormal(6, 2, 100 + seed);
        let b = orthonormal(6, 2, 200 + seed);
        let scanned = rotation_scan_min_k2(&a, &b);
        let closed = subspace_distance(&a, &b);
        assert!((scanned - closed).abs() <= 1e-7, "seed {seed}: {scanned} vs {closed}");
        assert!(closed <= scanned + 1e-12);
    }
}

#[test]
fn projection_distance_matches_dense() {
    for seed in 0..5 {
        let a = orthonormal(50, 4, 300 + seed);
        let b = orthonormal(50, 4, 400 + seed);
        let dense = dense_projection_distance(&a, &b);
        assert!((projection_distance(&a, &b) - dense).abs() <= 1e-8);
    }
}
