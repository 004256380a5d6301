use proptest::prelude::*;
use smoothtsc::classifiers::*;
use smoothtsc::dataset::LabeledDataset;

mod common;
use common::{dtw_exhaustive, series};

fn pair(max_m: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=max_m).prop_flat_map(|m| {
        (
            prop::collection::vec(-10.0f64..10.0, m),
            prop::collection::vec(-10.0f64..10.0, m),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dtw_matches_path_enumeration((a, b) in pair(8), w in 0.0f64..=1.0) {
        let r = band_radius(w, a.len());
        let want = dtw_exhaustive(&a, &b, r);
        let got = dtw_distance(&a, &b, w).unwrap();
        prop_assert!((got - want).abs() < 1e-9, "{} vs {}", got, want);
    }

    #[test]
    fn dtw_symmetric_and_monotone((a, b) in pair(40), w1 in 0.0f64..=1.0, w2 in 0.0f64..=1.0) {
        let (lo, hi) = if w1 <= w2 { (w1, w2) } else { (w2, w1) };
        let d_lo = dtw_distance(&a, &b, lo).unwrap();
        let d_hi = dtw_distance(&a, &b, hi).unwrap();
        prop_assert!((d_lo - dtw_distance(&b, &a, lo).unwrap()).abs() < 1e-9);
        prop_assert!(d_lo >= d_hi - 1e-9);
        let ed = squared_euclidean(&a, &b).unwrap();
        prop_assert!((dtw_distance(&a, &b, 0.0).unwrap() - ed).abs() < 1e-9);
        prop_assert!(d_hi <= ed + 1e-9);
    }

    #[test]
    fn lb_keogh_is_admissible((a, b) in pair(32), w in 0.0f64..=1.0) {
        let env = Envelope::for_window(&b, w);
        let lb = lb_keogh(&a, &env).unwrap();
        prop_assert!(lb <= dtw_distance(&a, &b, w).unwrap() + 1e-9);
    }

    #[test]
    fn euclidean_is_a_squared_metric((a, b) in pair(20)) {
        let d = squared_euclidean(&a, &b).unwrap();
        prop_assert_eq!(d, squared_euclidean(&b, &a).unwrap());
        prop_assert_eq!(squared_euclidean(&a, &a).unwrap(), 0.0);
        prop_assert!(d > 0.0 || a == b);
    }
}

#[test]
fn pruned_search_equals_full_scan() {
    for draw in 0..100u64 {
        let train = common::random_dataset(50, 24, 3, draw);
        let queries = common::random_dataset(20, 24, 3, 10_000 + draw);
        for window in [0.0, 0.1, 1.0] {
            let d = DistanceSpec::Dtw { window };
            for q in queries.instances() {
                assert_eq!(
                    nn1_classify(&train, &q.series, &d).unwrap(),
                    nn1_classify_naive(&train, &q.series, &d).unwrap()
                );
            }
        }
    }
}

#[test]
fn equidistant_neighbours_take_lower_index() {
    let train = common::dataset(
        "tie",
        vec![("B".into(), vec![1.0, 0.0]), ("A".into(), vec![-1.0, 0.0])],
    );
    let q = series(vec![0.0, 0.0]);
    assert_eq!(nn1_classify(&train, &q, &DistanceSpec::SquaredEuclidean).unwrap(), "B");
    assert_eq!(nn1_classify(&train, &q, &DistanceSpec::Dtw { window: 1.0 }).unwrap(), "B");
}

fn blobs() -> LabeledDataset {
    use rand_distr::{Distribution, Normal};
    let mut rng = smoothtsc::seed::rng_from_seed(11);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let rows = (0..40)
        .map(|i| {
            let (label, centre) = if i % 2 == 0 { ("a", -2.0) } else { ("b", 2.0) };
            (label.to_string(), (0..8).map(|_| centre + noise.sample(&mut rng)).collect())
        })
        .collect();
    common::dataset("blobs", rows)
}

#[test]
fn forest_fits_separable_blobs() {
    let d = blobs();
    // a single unpruned tree separates the set, so it has no conflicting duplicates
    let rows: Vec<Vec<f64>> = d.instances().iter().map(|x| x.series.values().to_vec()).collect();
    let labels: Vec<usize> = d.instances().iter().map(|x| usize::from(x.label == "b")).collect();
    let tree = DecisionTree::fit(&rows, &labels, 2);
    assert!(rows.iter().zip(&labels).all(|(r, &l)| tree.predict_distribution(r)[l] == 1.0));

    let model = train_rotation_forest(&d, &RotationForestConfig { tree_count: 50, seed: 3, ..Default::default() }).unwrap();
    assert_eq!(model.correct(&d).unwrap(), d.len());
    let TrainedClassifier::RotationForest(f) = &model else { unreachable!() };
    for b in f.rotation_blocks() {
        let g = b.attributes.len();
        let gram = b.components.transpose() * &b.components;
        for i in 0..g {
            for j in 0..g {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - want).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn forest_is_deterministic_and_order_free() {
    let d = common::random_dataset(30, 10, 3, 5);
    let cfg = RotationForestConfig { tree_count: 15, seed: 9, ..Default::default() };
    let a = train_rotation_forest(&d, &cfg).unwrap();
    let b = train_rotation_forest(&d, &cfg).unwrap();
    let mut rev: Vec<_> = d.instances().to_vec();
    rev.reverse();
    rev.rotate_left(7);
    let shuffled = LabeledDataset::new(d.name(), rev).unwrap();
    let c = train_rotation_forest(&shuffled, &cfg).unwrap();
    let probes = common::random_dataset(40, 10, 3, 77);
    for p in probes.instances() {
        let pa = classify(&a, &p.series).unwrap();
        assert_eq!(pa, classify(&b, &p.series).unwrap());
        assert_eq!(pa, classify(&c, &p.series).unwrap());
        let total: f64 = pa.distribution.iter().map(|(_, v)| v).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(pa.distribution.iter().all(|(_, v)| *v >= 0.0));
    }
}

#[test]
fn forest_handles_few_attributes() {
    // fewer attributes than the group size: one smaller group
    let d = common::random_dataset(12, 2, 2, 4);
    let m = train_rotation_forest(&d, &RotationForestConfig { tree_count: 3, ..Default::default() }).unwrap();
    assert_eq!(m.correct(&d).unwrap(), d.len());
}

#[test]
fn window_tuning_is_repeatable() {
    let d = common::random_dataset(20, 16, 2, 8);
    assert_eq!(tune_dtw_window(&d).unwrap(), tune_dtw_window(&d).unwrap());
}
