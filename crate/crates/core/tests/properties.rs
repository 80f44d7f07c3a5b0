use proptest::prelude::*;
use vandalscore_core::gbm::{sigmoid, train, Dataset};
use vandalscore_core::split::{Partition, TimeSplit};
use vandalscore_core::{GbmParams, SilPostprocessor};

fn small_params(rounds: u32, depth: u32) -> GbmParams {
    GbmParams {
        rounds,
        max_depth: depth,
        ..GbmParams::default()
    }
}

fn labelled_rows() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<bool>)> {
    (1usize..4).prop_flat_map(|width| {
        prop::collection::vec(
            (prop::collection::vec(-5i8..5, width), any::<bool>()),
            2..40,
        )
        .prop_map(|rows| {
            let (x, mut y): (Vec<Vec<f64>>, Vec<bool>) = rows
                .into_iter()
                .map(|(r, y)| (r.into_iter().map(f64::from).collect(), y))
                .unzip();
            // Single-class label sets are rejected, so pin one of each.
            y[0] = true;
            y[1] = false;
            (x, y)
        })
    })
}

proptest! {
    #[test]
    fn training_is_deterministic_and_predictions_are_probabilities(
        (rows, y) in labelled_rows(),
        rounds in 1u32..8,
        depth in 1u32..5,
    ) {
        let data = Dataset::from_rows(&rows, 0).unwrap();
        let params = small_params(rounds, depth);
        let a = train(&data, &y, &params).unwrap();
        let b = train(&data, &y, &params).unwrap();
        prop_assert_eq!(&a, &b);
        for row in &rows {
            let p = a.predict_row(row).unwrap();
            prop_assert!(p > 0.0 && p < 1.0, "{}", p);
            prop_assert_eq!(p.to_bits(), b.predict_row(row).unwrap().to_bits());
        }
    }

    #[test]
    fn sigmoid_stays_open(m in prop::num::f64::ANY) {
        let p = sigmoid(m);
        prop_assert!(m.is_nan() || (p > 0.0 && p < 1.0));
    }

    #[test]
    fn sil_without_session_is_identity(values in prop::collection::vec(-1e3f64..1.0, 1..50)) {
        let mut sil = SilPostprocessor::default();
        for v in values {
            prop_assert_eq!(sil.adjust(None, v).to_bits(), v.to_bits());
        }
        prop_assert_eq!(sil.live_sessions(), 0);
    }

    #[test]
    fn sil_returns_the_running_mean(values in prop::collection::vec(0.0f64..1.0, 1..50)) {
        let mut sil = SilPostprocessor::default();
        let mut sum = 0.0;
        for (i, v) in values.iter().enumerate() {
            sum += v;
            let got = sil.adjust(Some(9), *v);
            prop_assert!((got - sum / (i + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn split_ranges_partition_time(ts in 1_400_000_000i64..1_500_000_000) {
        let split = TimeSplit::default();
        let hits: Vec<Partition> = Partition::ALL
            .into_iter()
            .filter(|&p| split.range(p).contains(ts))
            .collect();
        prop_assert!(hits.len() <= 1);
        prop_assert_eq!(split.assign(ts), hits.first().copied());
        if let Some(p) = split.assign(ts) {
            // Earlier partitions never contain later timestamps.
            for q in Partition::ALL.into_iter().filter(|&q| q > p) {
                prop_assert!(split.range(q).start >= split.range(p).end);
            }
        }
    }
}
