//! The acceptance suite: one test per criterion, each printing a PASS line
//! with its measured quantities. Every tolerance is pinned here, in code.
//!
//! Monte Carlo criteria run on frozen master seeds; determinism of the
//! whole pipeline is itself criterion 13.

use std::time::Instant;

use serde_json::json;

use lookahead_bai::dyadic::{self, AverageTree};
use lookahead_bai::harness::{
    misprediction_oracle, run_experiment, ExperimentConfig, ExperimentKind, OutputFormat,
};
use lookahead_bai::instances::io::{GeneratorSpec, InstanceFile};
use lookahead_bai::instances::{
    centered_hit, gen_polarized, gen_set_disjointness, local_sparsity, window_average,
    BanditInstance, PolarizedParams, RewardSource, SetDisjointnessSpec, DEFAULT_LAMBDA,
};
use lookahead_bai::lookahead::{observation_estimates, run_bai, run_sparse_bai_with_config, SparseParams};
use lookahead_bai::countsketch::{Sketch, SketchConfig};
use lookahead_bai::meter;
use lookahead_bai::regret::{
    run_block_reduction, HedgeLearner, Learner, LossMatrix, SparseDistribution,
};
use lookahead_bai::rng::substream;
use rand::Rng;

fn config(kind: ExperimentKind, trials: u64, seed: u64, params: serde_json::Value) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind, trials, seed);
    c.params = params;
    c
}

#[test]
fn criterion_01_window_gap_bound() {
    let start = Instant::now();
    let cfg = config(
        ExperimentKind::Lemma1,
        200,
        101,
        json!({"t": 1024, "lo": 3, "hi": 9}),
    );
    let outcome = run_experiment(&cfg).unwrap();
    assert_eq!(outcome.verification, Some(true));
    assert_eq!(outcome.completed_trials, 200);
    // The bound itself: 4 / (hi - lo) with (lo, hi) = (3, 9).
    let bound = 4.0 / 6.0;
    let mean = outcome.summaries[0].mean;
    assert!(mean <= bound + 1e-12);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "criterion 01 PASS: 200 sequences, every exact gap <= {bound:.6} + 1e-12 \
         (mean {mean:.6}), {elapsed:?}"
    );
}

#[test]
fn criterion_02_orthogonality_identity() {
    let start = Instant::now();
    // Hand-derivable case first.
    let (lhs, rhs) = dyadic::orthogonality_check(&[1.0, 0.0, 0.0, 0.0], 0, 2).unwrap();
    assert!((lhs - 3.0 / 16.0).abs() <= 1e-10);
    assert!((rhs - 3.0 / 16.0).abs() <= 1e-10);

    let cfg = config(ExperimentKind::Orthogonality, 100, 202, json!({"max_depth": 8}));
    let outcome = run_experiment(&cfg).unwrap();
    assert_eq!(outcome.verification, Some(true));
    assert_eq!(outcome.completed_trials, 100);
    let worst = outcome.summaries[0].mean + 10.0 * outcome.summaries[0].std;
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "criterion 02 PASS: 100 sequences x all (L,U), |lhs - rhs| <= 1e-10, \
         hand case 3/16 == 3/16 (spread scale {worst:.3e}), {elapsed:?}"
    );
}

#[test]
fn criterion_03_martingale_identity() {
    let mut rng = substream(303, "martingale", 0);
    let mut nodes_checked = 0u64;
    for trial in 0..20 {
        let m = 1 + (trial % 10) as u32;
        let seq: Vec<f64> = (0..1usize << m).map(|_| rng.gen()).collect();
        let tree = AverageTree::from_values(&seq).unwrap();
        for d in 0..m {
            for idx in 0..1usize << d {
                let parent = tree.node_mean(d, idx);
                let child_mean =
                    (tree.node_mean(d + 1, 2 * idx) + tree.node_mean(d + 1, 2 * idx + 1)) / 2.0;
                assert_eq!(parent, child_mean, "trial {trial}, node ({d},{idx})");
                nodes_checked += 1;
            }
        }
    }
    println!(
        "criterion 03 PASS: {nodes_checked} internal nodes equal their children's mean bitwise"
    );
}

#[test]
fn criterion_04_estimator_unbiasedness() {
    let reruns = 10_000u64;
    for inst_idx in 0..10u64 {
        let k = 2 + (inst_idx as usize % 7); // K in 2..=8
        let t = 256;
        let mut gen = substream(404, "instance", inst_idx);
        let rows: Vec<Vec<f64>> =
            (0..k).map(|_| (0..t).map(|_| gen.gen::<f64>()).collect()).collect();
        let inst = BanditInstance::dense(rows, "random").unwrap();
        let window =
            dyadic::sample_window(t, 4, 8, &mut substream(404, "window", inst_idx)).unwrap();

        let mut sums = vec![0.0f64; k];
        let mut squares = vec![0.0f64; k];
        for rerun in 0..reruns {
            let estimates = observation_estimates(
                &inst,
                &window,
                &mut substream(404, "rerun", inst_idx * reruns + rerun),
            );
            for arm in 0..k {
                let y_tilde = estimates[arm] * k as f64 / window.w as f64;
                sums[arm] += y_tilde;
                squares[arm] += y_tilde * y_tilde;
            }
        }
        for arm in 0..k {
            let n = reruns as f64;
            let mean = sums[arm] / n;
            let var = (squares[arm] / n - mean * mean).max(0.0);
            let se = (var / n).sqrt();
            let y =
                window_average(&inst, arm, window.observation_start(), window.w).unwrap();
            assert!(
                (mean - y).abs() <= 4.0 * se,
                "instance {inst_idx}, arm {arm}: mean {mean} vs {y}, se {se}"
            );
        }
    }
    println!("criterion 04 PASS: 10 instances x 10^4 reruns; |mean(y~) - y| <= 4*SE per arm");
}

#[test]
fn criterion_05_adversarial_error_floor() {
    let start = Instant::now();
    let m = 16u32;
    let cfg = config(ExperimentKind::LbError, 2000, 505, json!({"m": m}));
    let outcome = run_experiment(&cfg).unwrap();
    assert_eq!(outcome.completed_trials, 2000);
    let error = &outcome.summaries[0];
    let floor = 1.0 / (8.0 * f64::from(m)); // = 1/128
    assert!(
        error.mean >= floor - 3.0 * error.se,
        "mean {} below {} - 3*{}",
        error.mean,
        floor,
        error.se
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "criterion 05 PASS: full-information error mean {:.5} >= 1/128 - 3*SE ({:.5}), {elapsed:?}",
        error.mean,
        floor - 3.0 * error.se
    );
}

#[test]
fn criterion_06_misprediction_floor_exact() {
    use std::cmp::Ordering;
    for d in 1..=64u32 {
        let oracle = misprediction_oracle(d);
        assert_ne!(
            oracle.joint_min.cmp_ratio(1, 8 * i64::from(d)),
            Ordering::Less,
            "depth {d}: joint minimum under 1/(8d)"
        );
    }
    // Tightness at d = 1: the equal-parents branch that the bound chains
    // through is exactly 1/8 there (the full joint minimum is 1/4).
    let d1 = misprediction_oracle(1);
    assert_eq!(d1.equal_parents_branch.cmp_ratio(1, 8), Ordering::Equal);
    assert_eq!(d1.joint_min.cmp_ratio(1, 4), Ordering::Equal);
    println!(
        "criterion 06 PASS: exact joint minimum >= 1/(8d) for d in 1..=64; \
         d=1 equal-parents branch == 1/8 exactly (joint 1/4)"
    );
}

#[test]
fn criterion_07_sketch_approx_top() {
    let start = Instant::now();
    let (heavy_items, heavy_count, ratio) = (7u64, 1000u64, 100u64);
    let cfg = config(
        ExperimentKind::SketchBench,
        500,
        707,
        json!({
            "k": 64,
            "heavy_items": heavy_items,
            "heavy_count": heavy_count,
            "ratio": ratio,
            "eps": 0.3,
            "delta": 0.1,
        }),
    );
    let outcome = run_experiment(&cfg).unwrap();
    assert_eq!(outcome.completed_trials, 500);
    let success = &outcome.summaries[0];
    assert!(success.mean >= 0.88, "success rate {}", success.mean);

    // Metered bits must equal the closed-form accounting exactly.
    let light_count = heavy_count / ratio;
    let stream_len = heavy_items * heavy_count + (64 - heavy_items) * light_count;
    let phi = (heavy_items as f64)
        + (64 - heavy_items) as f64 * (light_count as f64 / heavy_count as f64).powi(2);
    let reference = Sketch::new(64, phi, 0.3, 0.1, stream_len, 0).unwrap();
    let p = reference.params();
    let ceil_log2 = |v: u64| if v <= 1 { 0 } else { u64::from(64 - (v - 1).leading_zeros()) };
    let counter_bits = ceil_log2(stream_len + 1) + 16 + 1;
    assert_eq!(
        reference.bits_used(),
        (p.depth * p.width) as u64 * counter_bits
            + p.candidate_capacity as u64 * (ceil_log2(64) + counter_bits)
            + ceil_log2(stream_len + 1)
            + 4 * p.depth as u64 * 61
    );
    let bits = &outcome.summaries[1];
    assert_eq!(bits.mean, reference.bits_used() as f64);
    assert_eq!(bits.std, 0.0);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "criterion 07 PASS: approx-top success {:.3} >= 0.88 over 500 trials; \
         bits == closed form ({}), {elapsed:?}",
        success.mean,
        reference.bits_used()
    );
}

#[test]
fn criterion_08_sparsity_bound_and_exactness() {
    let cfg = config(
        ExperimentKind::Sparsity,
        1,
        808,
        json!({"k": 64, "t": 1 << 16, "w": 1 << 8, "r_values": [1, 2, 4]}),
    );
    let outcome = run_experiment(&cfg).unwrap();
    assert_eq!(outcome.verification, Some(true));
    assert_eq!(outcome.completed_trials, 3);
    println!(
        "criterion 08 PASS: polarized r in {{1,2,4}} at K=64, T=2^16, w=2^8: \
         phi <= 4r + 4(K-r)/T^(3/4); sliding == naive on T=2^12 (mean phi {:.4})",
        outcome.summaries[0].mean
    );
}

#[test]
fn criterion_09_memory_separation() {
    let t = 1usize << 18;
    let scale = 18u32; // longest window: w = 2^17
    let mut dense_bits = Vec::new();
    for &k in &[64usize, 128, 256] {
        let params = PolarizedParams::new(k, t, 2);
        let inst = gen_polarized(&params, &mut substream(909, "memsep.gen", k as u64)).unwrap();
        let pred =
            run_bai(&inst, scale, scale, &mut substream(909, "memsep.run", k as u64)).unwrap();
        assert_eq!(pred.window.w, 1 << 17);
        dense_bits.push(pred.memory.total_bits());
    }
    // Exact linearity in K at fixed (w, T): 35 bits per arm accumulator.
    let per_arm = 18 + meter::DEFAULT_FRAC_BITS as u64 + 1;
    assert_eq!(dense_bits[1] - dense_bits[0], 64 * per_arm);
    assert_eq!(dense_bits[2] - dense_bits[1], 128 * per_arm);

    // Sketch-backed run at K = 256 under an explicitly coarse sketch
    // configuration (the sizing factors are config knobs; the guarantees
    // of the default factors are certified by criterion 7).
    let k = 256;
    let params = PolarizedParams::new(k, t, 2);
    let inst = gen_polarized(&params, &mut substream(909, "memsep.gen", k as u64)).unwrap();
    let declared_phi = 2.05;
    let profile = local_sparsity(&inst, 1 << 17).unwrap();
    assert!(profile.phi <= declared_phi, "measured phi {}", profile.phi);
    let sparse = SparseParams { phi: declared_phi, eps: 2.0 / 3.0, delta: 1.0 / 3.0 };
    let coarse = SketchConfig { width_factor: 1.5, depth_factor: 0.05, ..SketchConfig::default() };
    let pred = run_sparse_bai_with_config(
        &inst,
        sparse,
        scale,
        scale,
        coarse,
        &mut substream(909, "memsep.sparse", 0),
    )
    .unwrap();
    let sparse_bits = pred.memory.total_bits();
    assert!(
        10 * sparse_bits <= dense_bits[2],
        "sparse {sparse_bits} bits vs dense {} bits",
        dense_bits[2]
    );
    println!(
        "criterion 09 PASS: dense bits {:?} exactly linear in K; sketch-backed run {} bits \
         <= 10% of {}",
        dense_bits, sparse_bits, dense_bits[2]
    );
}

#[test]
fn criterion_10_set_disjointness_demo() {
    let t = 1usize << 14;
    let w = t / 2;
    // Margin check on one centered instance: with lambda*w fractional the
    // band is within one round of 2*lambda*w, so margins sit within 2/w of
    // 1/5 while the decision stays exactly correct.
    let spec = SetDisjointnessSpec::new(15, vec![3], vec![3], 3 * t / 4, t, w);
    let inst = gen_set_disjointness(&spec).unwrap();
    let t0 = w + 1;
    assert!(centered_hit(t0, w, spec.tau, DEFAULT_LAMBDA));
    let dummy = window_average(&inst, 0, t0, w).unwrap();
    let shared = window_average(&inst, 3, t0, w).unwrap();
    assert_eq!(shared, 1.0);
    assert!((dummy - 0.8).abs() <= 1.0 / w as f64);
    assert!(shared - dummy >= 0.2 - 2.0 / w as f64);
    let mut one_sided_max = 0.0f64;
    for arm in 1..inst.arms() {
        if arm != 3 {
            one_sided_max = one_sided_max.max(window_average(&inst, arm, t0, w).unwrap());
        }
    }
    assert!(dummy - one_sided_max >= 0.2 - 2.0 / w as f64);

    let check = |a: Vec<usize>, b: Vec<usize>, seed: u64| {
        let cfg = config(
            ExperimentKind::SdDemo,
            5000,
            seed,
            json!({"n": 15, "a": a, "b": b, "t": t, "c": 2}),
        );
        let outcome = run_experiment(&cfg).unwrap();
        assert_eq!(outcome.completed_trials, 5000);
        let find = |name: &str| {
            outcome.summaries.iter().find(|s| s.metric == name).expect("metric present").clone()
        };
        let hit = find("hit_rate");
        let conditional = find("conditional_accuracy");
        let sd = find("sd_answer_accuracy");
        assert_eq!(conditional.mean, 1.0, "conditional accuracy must be exact");
        let floor = 0.1 - 1.0 / (t as f64 - 1.0) - 3.0 * hit.se;
        assert!(hit.mean >= floor, "hit rate {} under {}", hit.mean, floor);
        assert!(sd.mean > 0.51, "overall accuracy {}", sd.mean);
        (hit.mean, sd.mean)
    };
    let (hit_i, sd_i) = check(vec![3], vec![3], 1010);
    let (hit_d, sd_d) = check(vec![3], vec![5], 1011);
    println!(
        "criterion 10 PASS: conditional accuracy 100% both cases; hit rates \
         {hit_i:.3}/{hit_d:.3} >= 0.1 - o(1); SD accuracy {sd_i:.3}/{sd_d:.3} > 0.51"
    );
}

/// Emits one frozen distribution every block.
struct FrozenLearner {
    p: SparseDistribution,
    awaiting: bool,
}

impl Learner for FrozenLearner {
    fn arms(&self) -> usize {
        6
    }
    fn max_support(&self) -> usize {
        4
    }
    fn next_distribution(&mut self) -> lookahead_bai::Result<SparseDistribution> {
        self.awaiting = true;
        Ok(self.p.clone())
    }
    fn observe(&mut self, _losses: &[(usize, f64)]) -> lookahead_bai::Result<()> {
        self.awaiting = false;
        Ok(())
    }
    fn memory_report(&self) -> meter::MemoryReport {
        meter::MemoryReport::default()
    }
    fn name(&self) -> &'static str {
        "frozen"
    }
}

#[test]
fn criterion_11_exploration_unbiasedness() {
    // One block, frozen distribution, grid-aligned losses (so the log(T)
    // quantization is the identity): the exploration estimate must be an
    // unbiased sample of each support arm's block average.
    let block_len = 50usize;
    let k = 6usize;
    let mut gen = substream(1111, "losses", 0);
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..block_len).map(|_| f64::from(gen.gen_range(0..=64u32)) / 64.0).collect())
        .collect();
    let losses = LossMatrix::new(rows.clone()).unwrap();
    let support = vec![(0usize, 0.1), (2, 0.2), (3, 0.3), (5, 0.4)];
    let p = SparseDistribution::new(support.clone(), 4).unwrap();

    let reruns = 10_000u64;
    let mut sums = vec![0.0f64; k];
    let mut squares = vec![0.0f64; k];
    let mut exploration_total = 0u64;
    for rerun in 0..reruns {
        let mut learner = FrozenLearner { p: p.clone(), awaiting: false };
        let trace = run_block_reduction(
            &losses,
            &mut learner,
            1,
            &mut substream(1111, "rerun", rerun),
        )
        .unwrap();
        exploration_total += trace.exploration_rounds;
        for &(arm, c) in &trace.blocks[0].c_hat {
            sums[arm] += c;
            squares[arm] += c * c;
        }
    }
    assert_eq!(exploration_total, reruns * support.len() as u64);
    for &(arm, _) in &support {
        let n = reruns as f64;
        let mean = sums[arm] / n;
        let var = (squares[arm] / n - mean * mean).max(0.0);
        let se = (var / n).sqrt();
        let block_avg: f64 = rows[arm].iter().sum::<f64>() / block_len as f64;
        assert!(
            (mean - block_avg).abs() <= 3.0 * se,
            "arm {arm}: mean {mean} vs block average {block_avg} (se {se})"
        );
    }
    println!(
        "criterion 11 PASS: frozen-distribution estimates unbiased on support \
         (3*SE over 10^4 reruns); exploration rounds == sum of support sizes"
    );
}

fn bernoulli_half_losses(k: usize, t: usize, seed: u64, index: u64) -> LossMatrix {
    let mut rng = substream(seed, "loss-matrix", index);
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..t).map(|_| f64::from(u8::from(rng.gen::<bool>()))).collect())
        .collect();
    LossMatrix::new(rows).unwrap()
}

fn hedge_reduction_mean_regret(k: usize, t: usize, q: usize, trials: u64, seed: u64) -> (f64, f64) {
    let eta = (8.0 * (k as f64).ln() / q as f64).sqrt();
    let mut regrets = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let losses = bernoulli_half_losses(k, t, seed, trial);
        let mut learner = HedgeLearner::new(k, eta);
        let trace = run_block_reduction(
            &losses,
            &mut learner,
            q,
            &mut substream(seed, "reduction", trial),
        )
        .unwrap();
        assert!(trace.exploration_rounds <= (q * k) as u64);
        regrets.push(trace.realized_regret());
    }
    let n = trials as f64;
    let mean = regrets.iter().sum::<f64>() / n;
    let var = regrets.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn criterion_12_reduction_regret() {
    let (k, t, q, s) = (10usize, 30_000usize, 300usize, 10usize);
    let trials = 100u64;
    let (mean, se) = hedge_reduction_mean_regret(k, t, q, trials, 1212);
    let bound =
        (q * s) as f64 + (t / q) as f64 * (q as f64 * (k as f64).ln() / 2.0).sqrt() + 3.0 * se;
    assert!(mean <= bound, "mean regret {mean} over bound {bound}");

    // Sublinearity: per-round regret shrinks as the horizon grows.
    let (mean_small, _) = hedge_reduction_mean_regret(k, 10_000, 100, trials, 1213);
    let rate_small = mean_small / 10_000.0;
    let rate_large = mean / 30_000.0;
    assert!(
        rate_large < rate_small,
        "regret/T did not shrink: {rate_small} -> {rate_large}"
    );
    println!(
        "criterion 12 PASS: mean realized regret {mean:.1} <= {bound:.1}; \
         regret/T {rate_small:.5} -> {rate_large:.5}"
    );
}

#[test]
fn criterion_13_byte_determinism() {
    let bernoulli = InstanceFile::generator(
        6,
        1 << 10,
        "bernoulli",
        GeneratorSpec {
            name: "bernoulli".into(),
            params: json!({"k": 6, "t": 1 << 10, "p": 0.4}),
            seed: 5,
        },
    );
    let with_instance = |mut cfg: ExperimentConfig| {
        cfg.instance = Some(bernoulli.clone());
        cfg
    };
    let configs: Vec<ExperimentConfig> = vec![
        with_instance(config(ExperimentKind::Bai, 20, 1, json!({}))),
        with_instance(config(ExperimentKind::SparseBai, 10, 2, json!({"phi": 2.0}))),
        with_instance(config(ExperimentKind::Regret, 5, 3, json!({"q": 64}))),
        config(ExperimentKind::Lemma1, 20, 4, json!({"t": 256, "lo": 2, "hi": 7})),
        config(ExperimentKind::Orthogonality, 10, 5, json!({"max_depth": 6})),
        config(ExperimentKind::LbError, 20, 6, json!({"m": 8})),
        config(ExperimentKind::LbClaim4, 1, 7, json!({"max_d": 8})),
        config(
            ExperimentKind::SdDemo,
            50,
            8,
            json!({"n": 7, "a": [1], "b": [1], "t": 1 << 10, "c": 2}),
        ),
        config(
            ExperimentKind::Sparsity,
            1,
            9,
            json!({"k": 8, "t": 1 << 8, "w": 16, "r_values": [1, 2], "naive_t": 256, "naive_w": 16}),
        ),
        config(ExperimentKind::SketchBench, 10, 10, json!({"heavy_count": 200})),
    ];
    for mut cfg in configs {
        for format in [OutputFormat::Csv, OutputFormat::Json] {
            cfg.format = format;
            let first = run_experiment(&cfg).unwrap();
            let second = run_experiment(&cfg).unwrap();
            assert_eq!(
                first.records_rendered, second.records_rendered,
                "records differ for {:?} ({:?})",
                cfg.kind, format
            );
            assert_eq!(
                first.summary_rendered, second.summary_rendered,
                "summary differs for {:?} ({:?})",
                cfg.kind, format
            );
        }
    }
    println!("criterion 13 PASS: byte-identical records and summaries across reruns, all kinds");
}
