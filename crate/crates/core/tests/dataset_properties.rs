use proptest::prelude::*;
use smoothtsc::dataset::*;

mod common;

fn labelled_rows(max: usize) -> impl Strategy<Value = (Vec<(String, Vec<f64>)>, usize)> {
    (2usize..12).prop_flat_map(move |m| {
        (
            prop::collection::vec(
                (0u8..3, prop::collection::vec(-1e6f64..1e6, m)).prop_map(|(c, v)| (format!("k{c}"), v)),
                2..max,
            ),
            Just(m),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn znormalize_moments_and_idempotence(v in prop::collection::vec(-1e3f64..1e3, 2..200)) {
        let s = common::series(v);
        let z = znormalize(&s);
        let n = z.len() as f64;
        let mean = z.values().iter().sum::<f64>() / n;
        let sd = (z.values().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        if sd > 0.0 {
            prop_assert!(mean.abs() < 1e-9);
            prop_assert!((sd - 1.0).abs() < 1e-9);
        }
        let zz = znormalize(&z);
        for (a, b) in z.values().iter().zip(zz.values()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn archive_text_round_trips((rows, _m) in labelled_rows(20)) {
        let d = common::dataset("rt", rows);
        let text = to_archive_text(&d);
        let back = parse_archive_text(&text, "mem").unwrap();
        prop_assert_eq!(back.len(), d.len());
        for (a, b) in back.iter().zip(d.instances()) {
            prop_assert_eq!(&a.label, &b.label);
            for (x, y) in a.series.values().iter().zip(b.series.values()) {
                prop_assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
            }
        }
    }

    #[test]
    fn resamples_keep_class_counts_and_partition(
        (rows, _m) in labelled_rows(40),
        split in 0.2f64..0.8,
        id in 1u64..50,
    ) {
        let cut = ((rows.len() as f64 * split) as usize).clamp(1, rows.len() - 1);
        let train = common::dataset("rs", rows[..cut].to_vec());
        let test = common::dataset("rs", rows[cut..].to_vec());
        let plan = plan_resample(&train, &test, id).unwrap();
        let mut all: Vec<usize> = plan.train_indices.iter().chain(&plan.test_indices).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..rows.len()).collect::<Vec<_>>());
        let (tr, te) = make_resample(&train, &test, id).unwrap();
        prop_assert_eq!(tr.class_counts(), train.class_counts());
        prop_assert_eq!(tr.len() + te.len(), rows.len());
        let again = make_resample(&train, &test, id).unwrap();
        prop_assert_eq!(again.0, tr);
    }

    #[test]
    fn folds_are_stratified((rows, _m) in labelled_rows(60), k in 2usize..10, seed in 0u64..1000) {
        let d = common::dataset("f", rows);
        prop_assume!(k <= d.len());
        let f = stratified_folds(&d, k, seed).unwrap();
        let sizes = f.sizes();
        prop_assert_eq!(sizes.iter().sum::<usize>(), d.len());
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for (class, count) in d.class_counts() {
            for fold in 0..k {
                let in_fold = d
                    .instances()
                    .iter()
                    .zip(f.folds())
                    .filter(|(x, &g)| g == fold && x.label == class)
                    .count();
                // round-robin dealing keeps each class within one of its fair share
                prop_assert!(in_fold + 1 >= count / k && in_fold <= count.div_ceil(k) + 1);
            }
        }
        prop_assert_eq!(stratified_folds(&d, k, seed).unwrap().fingerprint(), f.fingerprint());
    }
}

#[test]
fn files_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let train = common::random_dataset(10, 7, 2, 1);
    let test = common::random_dataset(6, 7, 2, 2);
    write_archive(&train, &dir.path().join("Rand_TRAIN.txt")).unwrap();
    write_archive(&test, &dir.path().join("Rand_TEST.txt")).unwrap();
    let (a, b) = load_pair(dir.path(), "Rand").unwrap();
    assert_eq!(a.instances(), train.instances());
    assert_eq!(b.instances(), test.instances());
    assert!(load_pair(dir.path(), "Other").is_err());
}
