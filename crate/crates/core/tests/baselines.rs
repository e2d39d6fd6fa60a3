use kindap::baselines::*;
use kindap::evaluation::{accuracy, kmeans_objective};
use kindap::linalg::{gaussian_matrix, random_orthonormal};
use kindap::rng::stream_rng;
use kindap::synth::{generate, SynthSpec};
use kindap::{make_indicator, DMatrix, EmbeddedData, IndicatorValues};
use kindap_oracles::{canonical, exhaustive_best, objective_of, set_partitions, Objective};
use proptest::prelude::*;

fn two_blobs() -> DMatrix<f64> {
    let mut rng = stream_rng(77, 0);
    let noise = gaussian_matrix(40, 2, &mut rng);
    DMatrix::from_fn(40, 2, |i, c| {
        let center = if i < 20 { 0.0 } else { 50.0 };
        center + 0.5 * noise[(i, c)]
    })
}

#[test]
fn kmeans_pp_covers_both_blobs() {
    let data = two_blobs();
    let trials = 10_000u64;
    let hits = (0..trials)
        .filter(|&s| {
            let idx = kmeans_pp_indices(&data, 2, &mut stream_rng(s, 0)).unwrap();
            (idx[0] < 20) != (idx[1] < 20)
        })
        .count();
    assert!(hits as f64 >= 0.99 * trials as f64, "{hits} of {trials}");
}

#[test]
fn kmeans_pp_with_k_equal_n_takes_every_row() {
    let data = DMatrix::from_row_slice(4, 1, &[0.0, 1.0, 3.0, 7.0]);
    let mut idx = kmeans_pp_indices(&data, 4, &mut stream_rng(1, 0)).unwrap();
    idx.sort_unstable();
    assert_eq!(idx, vec![0, 1, 2, 3]);
    // duplicated points exhaust the D² mass; the uniform fallback still yields distinct rows
    let dup = DMatrix::from_row_slice(3, 1, &[1.0, 1.0, 1.0]);
    let mut idx = kmeans_pp_indices(&dup, 3, &mut stream_rng(5, 0)).unwrap();
    idx.sort_unstable();
    assert_eq!(idx, vec![0, 1, 2]);
}

fn kmeans_labels_oracle(data: &DMatrix<f64>, k: usize) -> (Vec<usize>, f64) {
    set_partitions(data.nrows(), k)
        .into_iter()
        .map(|labels| {
            let value = objective_of(data, &labels, k, Objective::Kmeans);
            (labels, value)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
}

#[test]
fn lloyd_against_exhaustive_partitions() {
    for seed in 0..10u64 {
        let data = gaussian_matrix(8, 2, &mut stream_rng(seed, 4));
        let (best_labels, best) = kmeans_labels_oracle(&data, 2);
        let params = KmeansParams { replications: 3, seed, ..KmeansParams::default() };
        let result = kmeans_solve(&data, 2, &params).unwrap();
        assert!(result.kmeans_objective >= best - 1e-9);

        let mut centers = DMatrix::zeros(2, 2);
        for j in 0..2 {
            let rows: Vec<usize> = (0..8).filter(|&i| best_labels[i] == j).collect();
            for c in 0..2 {
                centers[(j, c)] = rows.iter().map(|&i| data[(i, c)]).sum::<f64>() / rows.len() as f64;
            }
        }
        let warm = lloyd_solve(&data, 2, &centers, &KmeansParams::default()).unwrap();
        assert!((warm.kmeans_objective - best).abs() <= 1e-9, "seed {seed}");
        assert_eq!(canonical(&warm.labels), best_labels);
    }
}

#[test]
fn lloyd_objective_is_monotone_and_reported() {
    let data = gaussian_matrix(200, 3, &mut stream_rng(3, 0));
    let params = KmeansParams { replications: 4, seed: 3, ..KmeansParams::default() };
    let result = kmeans_solve(&data, 6, &params).unwrap();
    assert_eq!(result.trace.monotonicity_violations(1e-12, true), 0);
    let min = result.trace.replication_objectives.iter().copied().fold(f64::INFINITY, f64::min);
    assert_eq!(result.kmeans_objective, min);
    assert_eq!(result.trace.replication_objectives.len(), 4);
}

#[test]
fn single_replication_matches_manual_pipeline() {
    let data = gaussian_matrix(60, 2, &mut stream_rng(9, 0));
    let params = KmeansParams { replications: 1, seed: 9, ..KmeansParams::default() };
    let solved = kmeans_solve(&data, 3, &params).unwrap();
    let init = kmeans_pp_init(&data, 3, &mut stream_rng(9, 0)).unwrap();
    let manual = lloyd_solve(&data, 3, &init, &params).unwrap();
    assert_eq!(solved.labels, manual.labels);
    assert_eq!(solved.kmeans_objective, manual.kmeans_objective);
}

#[test]
fn seeded_baselines_are_reproducible() {
    let data = generate(&SynthSpec { k: 6, per_cluster: 10, rho: 0.9, ambient_dim: 20, seed: 5 }).unwrap();
    let km = KmeansParams { replications: 5, seed: 7, ..KmeansParams::default() };
    let a = kmeans_solve(data.embedded.matrix(), 6, &km).unwrap();
    let b = kmeans_solve(data.embedded.matrix(), 6, &km).unwrap();
    assert_eq!(a.labels, b.labels);
    assert_eq!(a.trace, b.trace);
    let sr = SrParams { replications: 5, seed: 7, ..SrParams::default() };
    let a = sr_solve(&data.embedded, &sr).unwrap();
    let b = sr_solve(&data.embedded, &sr).unwrap();
    assert_eq!(a.labels, b.labels);
    assert_eq!(a.trace, b.trace);
}

#[test]
fn sr_matches_exhaustive_on_separable_instances() {
    for seed in 0..8u64 {
        let data = generate(&SynthSpec { k: 2, per_cluster: 4, rho: 0.3, ambient_dim: 6, seed: 40 + seed }).unwrap();
        let (labels, best) = exhaustive_best(&data.embedded, 2, Objective::Sr).unwrap();
        let params = SrParams { replications: 10, seed, ..SrParams::default() };
        let result = sr_solve(&data.embedded, &params).unwrap();
        assert_eq!(canonical(&result.labels), labels, "seed {seed}");
        let min = result.trace.replication_objectives.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((min - best).abs() <= 1e-9);
    }
}

#[test]
fn sr_objective_is_monotone() {
    let data = generate(&SynthSpec { k: 8, per_cluster: 12, rho: 0.99, ambient_dim: 30, seed: 2 }).unwrap();
    for r in 0..5u64 {
        let rot = kindap::linalg::random_orthogonal(8, &mut stream_rng(r, 0));
        let run = sr_run_from(&data.embedded, rot, &SrParams::default()).unwrap();
        assert_eq!(run.trace.monotonicity_violations(1e-12, true), 0);
    }
}

#[test]
fn wcss_equals_indicator_identity() {
    for seed in 0..10u64 {
        let m = random_orthonormal(30, 4, &mut stream_rng(seed, 1));
        let basis = EmbeddedData::from_orthonormal(m).unwrap();
        let labels: Vec<usize> = (0..30).map(|i| (i * 7 + seed as usize) % 4).collect();
        let h = make_indicator(&labels, 4, IndicatorValues::Normalized).unwrap().matrix();
        let identity = 4.0 - (basis.matrix().transpose() * &h).norm_squared();
        let direct = (basis.matrix() - &h * h.transpose() * basis.matrix()).norm_squared();
        let wcss = objective_of(basis.matrix(), &labels, 4, Objective::Kmeans);
        assert!((identity - direct).abs() <= 1e-8);
        assert!((identity - wcss).abs() <= 1e-8);
        assert!((kmeans_objective(&basis, &labels).unwrap() - wcss).abs() <= 1e-8);
    }
}

#[test]
fn lloyd_from_true_centers_recovers_synth() {
    let data = generate(&SynthSpec::new(3, 0.33, 1)).unwrap();
    let mut centers = DMatrix::zeros(3, 3);
    for j in 0..3 {
        for c in 0..3 {
            centers[(j, c)] =
                (0..120).filter(|&i| data.truth[i] == j).map(|i| data.embedded.matrix()[(i, c)]).sum::<f64>() / 40.0;
        }
    }
    let result = lloyd_solve(data.embedded.matrix(), 3, &centers, &KmeansParams::default()).unwrap();
    assert_eq!(accuracy(&result.labels, &data.truth).unwrap(), 1.0);
    assert!(result.kind_objective.is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kmeans_returns_valid_partition(n in 4usize..40, k in 2usize..4, seed in any::<u64>()) {
        let data = gaussian_matrix(n, 2, &mut stream_rng(seed, 0));
        let params = KmeansParams { replications: 2, seed, ..KmeansParams::default() };
        let result = kmeans_solve(&data, k, &params).unwrap();
        prop_assert!(kindap::cluster_sizes(&result.labels, k).is_ok());
        prop_assert!(result.kmeans_objective >= 0.0);
    }
}
