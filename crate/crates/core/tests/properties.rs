//! Property tests for the crate-wide invariants.

use proptest::prelude::*;

use lookahead_bai::countsketch::Sketch;
use lookahead_bai::dyadic::{
    enumerate_windows, max_scale, sample_window, t_prime, window_gap_expectation, AverageTree,
};
use lookahead_bai::harness::fmt_f64;
use lookahead_bai::instances::io::InstanceFile;
use lookahead_bai::instances::RewardSource;
use lookahead_bai::meter::{account, Descriptor, Quantity, StateClass};
use lookahead_bai::regret::{quantize_loss, SparseDistribution};
use lookahead_bai::rng::substream;

fn grid_weight() -> impl Strategy<Value = f64> {
    // Multiples of 2^-16 inside [0, 1].
    (0u32..=1 << 16).prop_map(|q| f64::from(q) / 65536.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampled_windows_are_dyadically_aligned(
        t in 4usize..100_000,
        lo_frac in 0.0f64..1.0,
        seed in 0u64..1000,
    ) {
        let hi = max_scale(t);
        let lo = ((f64::from(hi) * lo_frac) as u32).clamp(1, hi);
        let w = sample_window(t, lo, hi, &mut substream(seed, "prop", 0)).unwrap();
        prop_assert_eq!(w.w, 1usize << (w.m - 1));
        prop_assert!(w.t0 - w.w >= 1);
        prop_assert!(w.t0 + w.w - 1 <= t_prime(t));
        prop_assert_eq!((w.t0 - w.w - 1) % (1usize << w.m), 0);
    }

    #[test]
    fn enumerated_probabilities_sum_to_one(
        t in 4usize..10_000,
        lo_frac in 0.0f64..1.0,
    ) {
        let hi = max_scale(t);
        let lo = ((f64::from(hi) * lo_frac) as u32).clamp(1, hi);
        let windows = enumerate_windows(t, lo, hi).unwrap();
        let total: f64 = windows.iter().map(|(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        let expected: usize = (lo..=hi).map(|m| t_prime(t) >> m).sum();
        prop_assert_eq!(windows.len(), expected);
    }

    #[test]
    fn gap_expectation_respects_its_bound(
        values in prop::collection::vec(0.0f64..=1.0, 16..256),
        lo in 1u32..3,
    ) {
        let hi = max_scale(values.len());
        prop_assume!(lo < hi);
        let gap = window_gap_expectation(&values, lo, hi).unwrap();
        prop_assert!(gap.value <= gap.bound.unwrap() + 1e-12);
        prop_assert!(gap.value >= 0.0);
    }

    #[test]
    fn averages_tree_martingale_is_exact(
        values in prop::collection::vec(0.0f64..=1.0, 1usize..=6)
            .prop_map(|seed_vals| {
                let m = seed_vals.len();
                (0..1usize << m).map(|i| seed_vals[i % seed_vals.len()]).collect::<Vec<_>>()
            }),
    ) {
        let tree = AverageTree::from_values(&values).unwrap();
        for d in 0..tree.depth() {
            for idx in 0..1usize << d {
                let parent = tree.node_mean(d, idx);
                let kids = (tree.node_mean(d + 1, 2 * idx) + tree.node_mean(d + 1, 2 * idx + 1)) / 2.0;
                prop_assert_eq!(parent, kids);
            }
        }
    }

    #[test]
    fn instance_files_roundtrip_rewards(
        rows in prop::collection::vec(prop::collection::vec(0.0f64..=1.0, 8), 1..5),
    ) {
        let file = InstanceFile::dense(&rows, "prop").unwrap();
        let text = serde_json::to_string(&file).unwrap();
        let back: InstanceFile = serde_json::from_str(&text).unwrap();
        let inst = back.to_instance().unwrap();
        for (arm, row) in rows.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                prop_assert_eq!(inst.reward(arm, i + 1), v);
            }
        }
    }

    #[test]
    fn sketch_linearity_on_the_grid(
        stream in prop::collection::vec((0usize..8, grid_weight()), 0..40),
        item in 0usize..8,
        a in grid_weight(),
        b in grid_weight(),
    ) {
        prop_assume!(a + b <= 1.0);
        let mut one = Sketch::new(8, 1.0, 0.5, 0.25, 1000, 42).unwrap();
        for &(i, w) in &stream {
            one.update(i, w).unwrap();
        }
        let mut two = one.clone();
        one.update(item, a).unwrap();
        one.update(item, b).unwrap();
        two.update(item, a + b).unwrap();
        for probe in 0..8 {
            prop_assert_eq!(one.estimate(probe), two.estimate(probe));
        }
    }

    #[test]
    fn meter_total_is_monotone_in_descriptors(
        maxes in prop::collection::vec(0u64..1_000_000, 1..10),
    ) {
        let descriptors: Vec<Descriptor> = maxes
            .iter()
            .enumerate()
            .map(|(i, &max)| Descriptor::new(
                &format!("d{i}"),
                StateClass::Persistent,
                Quantity::IntCounter { max },
                1 + (i as u64 % 3),
            ))
            .collect();
        let mut last = 0;
        for n in 1..=descriptors.len() {
            let total = account(&descriptors[..n]).unwrap().total_bits();
            prop_assert!(total >= last);
            last = total;
        }
    }

    #[test]
    fn sparse_distribution_samples_stay_in_support(
        weights in prop::collection::vec(0.01f64..1.0, 1..6),
        seed in 0u64..500,
    ) {
        let total: f64 = weights.iter().sum();
        let support: Vec<(usize, f64)> = weights
            .iter()
            .enumerate()
            .map(|(i, w)| (i * 2, w / total))
            .collect();
        let d = SparseDistribution::new(support.clone(), 8).unwrap();
        let mut rng = substream(seed, "prop.dist", 0);
        for _ in 0..32 {
            let arm = d.sample(&mut rng);
            prop_assert!(support.iter().any(|&(a, _)| a == arm));
        }
    }

    #[test]
    fn loss_quantization_is_idempotent_and_close(
        v in 0.0f64..=1.0,
        t in 2usize..1_000_000,
    ) {
        let q = quantize_loss(v, t);
        prop_assert_eq!(quantize_loss(q, t), q);
        let bits = (t as f64).log2().ceil() as i32;
        prop_assert!((q - v).abs() <= 0.5 / 2f64.powi(bits) + 1e-15);
    }

    #[test]
    fn csv_float_format_is_a_fixed_point_of_reparse(
        v in prop::num::f64::NORMAL.prop_filter("finite", |x| x.is_finite() && x.abs() < 1e100),
    ) {
        let s = fmt_f64(v);
        let back: f64 = s.parse().unwrap();
        prop_assert_eq!(fmt_f64(back), s);
    }
}
