use hsikit::dimred::{fit_pca, fit_rpca};
use hsikit::eval::evaluate;
use hsikit::hsi_data::{stratified_split, SampleSet};
use hsikit::linalg::{exact_svd, randomized_svd, DenseMatrix, RandomizedSvdParams};
use proptest::prelude::*;

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = DenseMatrix> {
    (2..=max_rows, 2..=max_cols).prop_flat_map(|(m, n)| {
        proptest::collection::vec(-10.0f64..10.0, m * n)
            .prop_map(move |data| DenseMatrix::new(m, n, data).unwrap())
    })
}

fn non_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] >= w[1]) && v.iter().all(|&x| x >= 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn singular_values_ordered(a in matrix(12, 8), seed in any::<u64>()) {
        let r = a.rows().min(a.cols());
        prop_assert!(non_increasing(&exact_svd(&a, r).unwrap().s));
        let params = RandomizedSvdParams::new(1, seed).with_oversampling(r - 1);
        prop_assert!(non_increasing(&randomized_svd(&a, &params).unwrap().s));
    }

    #[test]
    fn explained_variance_ordered(a in matrix(14, 8), seed in any::<u64>()) {
        let k = (a.rows() - 1).min(a.cols());
        prop_assert!(non_increasing(&fit_pca(&a, k).unwrap().explained_variance));
        let params = RandomizedSvdParams::new(1, seed).with_oversampling(0);
        prop_assert!(non_increasing(&fit_rpca(&a, &params).unwrap().explained_variance));
    }

    #[test]
    fn confusion_totals(pairs in proptest::collection::vec((1u16..=5, 1u16..=5), 1..100)) {
        let (pred, truth): (Vec<u16>, Vec<u16>) = pairs.into_iter().unzip();
        let r = evaluate(&pred, &truth, 5).unwrap();
        prop_assert_eq!(r.confusion.iter().flatten().sum::<u64>(), r.n_test);
        prop_assert_eq!(r.n_test as usize, pred.len());
    }

    #[test]
    fn split_partitions_samples(
        labels in proptest::collection::vec(1u16..=4, 2..120),
        fraction in 0.05f64..0.95,
        seed in any::<u64>(),
    ) {
        let n = labels.len();
        let features = DenseMatrix::from_fn(n, 1, |i, _| i as f64).unwrap();
        let set = SampleSet::new(features, labels, (0..n).collect()).unwrap();
        let (train, test) = stratified_split(&set, fraction, seed).unwrap();
        let mut all: Vec<usize> = train.pixel_indices.iter().chain(&test.pixel_indices).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
    }
}
