use proptest::prelude::*;
use smoothtsc::classifiers::ClassifierSpec;
use smoothtsc::smoothing::{apply_smoother, SmootherKind, SmootherSpec};
use smoothtsc::tuning::*;

mod common;

fn family() -> impl Strategy<Value = FamilyChoice> {
    prop_oneof![
        prop::sample::select(SmootherKind::FAMILIES.to_vec())
            .prop_filter("smoothing family", |k| *k != SmootherKind::None)
            .prop_map(FamilyChoice::One),
        Just(FamilyChoice::All),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn selection_invariants(choice in family(), seed in 0u64..1000, n in 6usize..30, m in 4usize..40) {
        let d = common::random_dataset(n, m, 2, seed);
        let r = select_smoother(choice, &ClassifierSpec::Ed1nn, &d, seed).unwrap();
        let none = r.accuracy_of(&SmootherSpec::None).unwrap();
        prop_assert!(r.accuracy_of(&r.selected).unwrap() >= none);
        prop_assert!(choice.candidates(m).contains(&r.selected));
        prop_assert_eq!(r.folds, n.min(DEFAULT_FOLDS));
        let folds = tuning_folds(&d, DEFAULT_FOLDS, seed).unwrap();
        prop_assert_eq!(&r.fold_fingerprint, &folds.fingerprint());
        let again = select_smoother(choice, &ClassifierSpec::Ed1nn, &d, seed).unwrap();
        prop_assert_eq!(again.to_table(), r.to_table());
    }
}

#[test]
fn smoothing_wins_on_noisy_sines() {
    let (train, _) = common::signed_sine(60, 0, 128, 4.0, 5);
    let seed = folds_seed(train.name(), 0);
    for kind in [SmootherKind::MovingAverage, SmootherKind::Fourier] {
        let r = select_smoother(FamilyChoice::One(kind), &ClassifierSpec::Ed1nn, &train, seed).unwrap();
        let none = r.accuracy_of(&SmootherSpec::None).unwrap();
        assert_ne!(r.selected, SmootherSpec::None, "{kind}");
        assert!(r.accuracy_of(&r.selected).unwrap() > none);

        // direct recomputation of the selected entry: leave each fold out by hand
        let folds = tuning_folds(&train, DEFAULT_FOLDS, seed).unwrap();
        let smoothed = apply_smoother(&r.selected, &train).unwrap();
        let mut correct = 0;
        for (i, q) in smoothed.instances().iter().enumerate() {
            let mut best = (f64::INFINITY, usize::MAX);
            for (j, c) in smoothed.instances().iter().enumerate() {
                if folds.folds()[j] == folds.folds()[i] {
                    continue;
                }
                let d: f64 = q.series.values().iter().zip(c.series.values()).map(|(a, b)| (a - b).powi(2)).sum();
                if d < best.0 {
                    best = (d, j);
                }
            }
            correct += usize::from(smoothed.instances()[best.1].label == q.label);
        }
        assert_eq!(r.accuracy_of(&r.selected).unwrap(), correct as f64 / train.len() as f64);
    }
}

#[test]
fn chance_level_for_label_blind_data() {
    // labels independent of the series: CV accuracy hovers around one half
    let mut total = 0.0;
    let reps = 20;
    for s in 0..reps {
        let d = common::random_dataset(40, 16, 2, 500 + s);
        let folds = tuning_folds(&d, 10, s).unwrap();
        total += cv_accuracy(&SmootherSpec::None, &ClassifierSpec::Ed1nn, &d, &folds).unwrap().unwrap().mean;
    }
    let mean = total / reps as f64;
    // 800 predictions: binomial standard error about 0.018
    assert!((mean - 0.5).abs() < 0.08, "{mean}");
}

#[test]
fn dtw_and_forest_run_inside_cv() {
    let (train, _) = common::noisy_sine(20, 0, 32, 0.5, 1);
    let folds = tuning_folds(&train, 5, 3).unwrap();
    for c in ["dtw1nn", "dtw1nn:w=0.1", "rotf:trees=5"] {
        let spec: ClassifierSpec = c.parse().unwrap();
        let s = cv_accuracy(&SmootherSpec::MovingAverage { w: 3 }, &spec, &train, &folds).unwrap().unwrap();
        assert_eq!(s.per_fold.len(), 5);
        assert!(s.mean > 0.5, "{c}: {}", s.mean);
    }
}
