//! Lookahead identification.
//!
//! The identifier samples one dyadic window, burns the rounds before it on
//! a fixed arm, then spends the observation half querying a uniformly
//! random arm per round and accumulating the observed reward per arm. At
//! the prediction boundary it commits to the arm with the largest
//! accumulator and never queries again. Scaled by `K / w`, each accumulator
//! is an unbiased estimate of that arm's observation-window average, and
//! the dyadic window law ties the observation average to the prediction
//! average. One query per round, bandit feedback only.
//!
//! The sparse variant replaces the `K` accumulators with a weighted
//! CountSketch over arm indices and commits to the sketch's approximate
//! top item; on locally sparse instances this trades `K` counters for a
//! sketch whose size is set by the sparsity bound alone.
//!
//! The full-information predictor computes exact observation averages with
//! no sampling noise. It dominates any bandit-feedback identifier with the
//! same window law, which is exactly what the adversarial lower-bound
//! experiments need.

use rand::Rng;

use crate::countsketch::{Sketch, SketchConfig};
use crate::dyadic::{sample_window, WindowChoice};
use crate::instances::{window_average, RewardSource};
use crate::meter::{self, Descriptor, MemoryReport, Quantity};
use crate::{Error, Result};

/// The committed output of one identifier run.
#[derive(Clone, Debug)]
pub struct Prediction {
    pub window: WindowChoice,
    /// Chosen arm, lowest index on accumulator ties.
    pub arm: usize,
    /// Dense per-arm accumulators; `None` for the sketch-backed variant.
    pub estimates: Option<Vec<f64>>,
    pub memory: MemoryReport,
    /// Rounds queried; exactly `t0 - 1`.
    pub queries: u64,
    /// Sketch updates performed (sketch-backed variant only). Zero-weight
    /// observations are no-ops, so on binary rewards this counts the
    /// reward-1 observations.
    pub sketch_updates: Option<u64>,
}

/// How a prediction fared on its prediction window.
#[derive(Clone, Copy, Debug)]
pub struct LookaheadScore {
    pub best_arm_avg: f64,
    pub chosen_avg: f64,
    /// `best - chosen`, in `[0, 1]`; zero iff the chosen arm attains the
    /// window maximum.
    pub error: f64,
}

/// Sketch parameters for the sparse variant; the defaults follow the
/// identifier's analysis at horizon `t`.
#[derive(Clone, Copy, Debug)]
pub struct SparseParams {
    pub phi: f64,
    pub eps: f64,
    pub delta: f64,
}

impl SparseParams {
    /// `eps = 1 / sqrt(floor(log2(t) / 2))` (half the window-gap term) and
    /// `delta' = delta * eps1 / 2` for overall failure budget `delta`.
    pub fn defaults(phi: f64, t: usize, delta: f64) -> Self {
        let m = (crate::util::floor_log2(t) / 2).max(1);
        let eps1 = 2.0 / f64::from(m).sqrt();
        Self { phi, eps: (eps1 / 2.0).min(0.99), delta: (delta * eps1 / 2.0).min(0.99) }
    }
}

fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn burn_prefix<S: RewardSource>(src: &S, window: &WindowChoice) -> u64 {
    // Rounds before the window are played on arm 0 and discarded.
    for round in 1..window.observation_start() {
        let _ = src.reward(0, round);
    }
    window.observation_start() as u64 - 1
}

/// The observation loop alone: query a uniform arm per round of the
/// window's observation half, accumulating observed rewards per arm.
pub fn observation_estimates<S: RewardSource, R: Rng>(
    src: &S,
    window: &WindowChoice,
    rng: &mut R,
) -> Vec<f64> {
    let k = src.arms();
    let mut estimates = vec![0.0; k];
    for round in window.observation_start()..window.t0 {
        let arm = rng.gen_range(0..k);
        estimates[arm] += src.reward(arm, round);
    }
    estimates
}

fn window_registers(t: usize) -> Descriptor {
    Descriptor::persistent("window", Quantity::RoundIndex { horizon: t as u64 }, 3)
}

/// Dense lookahead identification under bandit feedback.
pub fn run_bai<S: RewardSource, R: Rng>(src: &S, lo: u32, hi: u32, rng: &mut R) -> Result<Prediction> {
    let window = sample_window(src.horizon(), lo, hi, rng)?;
    let queries = burn_prefix(src, &window) + window.w as u64;
    let estimates = observation_estimates(src, &window, rng);
    let arm = argmax_lowest(&estimates);
    let memory = meter::account(&[
        Descriptor::persistent(
            "accumulators",
            Quantity::FixedPoint { magnitude: window.w as f64, frac_bits: meter::DEFAULT_FRAC_BITS },
            src.arms() as u64,
        ),
        window_registers(src.horizon()),
    ])?;
    Ok(Prediction { window, arm, estimates: Some(estimates), memory, queries, sketch_updates: None })
}

/// Sketch-backed lookahead identification.
pub fn run_sparse_bai<S: RewardSource, R: Rng>(
    src: &S,
    params: SparseParams,
    lo: u32,
    hi: u32,
    rng: &mut R,
) -> Result<Prediction> {
    run_sparse_bai_with_config(src, params, lo, hi, SketchConfig::default(), rng)
}

pub fn run_sparse_bai_with_config<S: RewardSource, R: Rng>(
    src: &S,
    params: SparseParams,
    lo: u32,
    hi: u32,
    config: SketchConfig,
    rng: &mut R,
) -> Result<Prediction> {
    if params.phi < 1.0 {
        return Err(Error::InvalidParameter(format!("phi={} must be >= 1", params.phi)));
    }
    let window = sample_window(src.horizon(), lo, hi, rng)?;
    let sketch_seed: u64 = rng.gen();
    let mut sketch = Sketch::with_config(
        src.arms(),
        params.phi,
        params.eps,
        params.delta,
        window.w as u64,
        sketch_seed,
        config,
    )?;
    let queries = burn_prefix(src, &window) + window.w as u64;
    let k = src.arms();
    for round in window.observation_start()..window.t0 {
        let arm = rng.gen_range(0..k);
        sketch.update(arm, src.reward(arm, round))?;
    }
    // An all-zero observation window leaves the sketch empty; commit to the
    // tie-break arm rather than failing the run.
    let arm = if sketch.total_updates() == 0 { 0 } else { sketch.approx_top()? };
    let memory = meter::account(&[window_registers(src.horizon())])?
        .merged(&sketch.memory_report());
    Ok(Prediction {
        window,
        arm,
        estimates: None,
        memory,
        queries,
        sketch_updates: Some(sketch.total_updates()),
    })
}

/// Exact observation averages for every arm, no sampling noise; the
/// reference predictor for the lower-bound experiments.
pub fn run_full_info_predictor<S: RewardSource, R: Rng>(
    src: &S,
    lo: u32,
    hi: u32,
    rng: &mut R,
) -> Result<Prediction> {
    let window = sample_window(src.horizon(), lo, hi, rng)?;
    full_info_prediction_for(src, window)
}

/// The full-information decision for a fixed window; deterministic, so
/// expectations over the window law can be enumerated exactly.
pub fn full_info_prediction_for<S: RewardSource>(src: &S, window: WindowChoice) -> Result<Prediction> {
    let k = src.arms();
    let mut averages = Vec::with_capacity(k);
    for arm in 0..k {
        averages.push(window_average(src, arm, window.observation_start(), window.w)?);
    }
    let arm = argmax_lowest(&averages);
    let memory = meter::account(&[
        Descriptor::persistent(
            "averages",
            Quantity::FixedPoint { magnitude: 1.0, frac_bits: meter::DEFAULT_FRAC_BITS },
            k as u64,
        ),
        window_registers(src.horizon()),
    ])?;
    Ok(Prediction {
        window,
        arm,
        estimates: Some(averages),
        memory,
        queries: (window.t0 as u64 - 1) * k as u64,
        sketch_updates: None,
    })
}

/// Score a prediction by exact averages over its prediction window.
pub fn score<S: RewardSource>(src: &S, prediction: &Prediction) -> Result<LookaheadScore> {
    let w = prediction.window;
    let mut best = f64::NEG_INFINITY;
    for arm in 0..src.arms() {
        best = best.max(window_average(src, arm, w.t0, w.w)?);
    }
    let chosen_avg = window_average(src, prediction.arm, w.t0, w.w)?;
    Ok(LookaheadScore { best_arm_avg: best, chosen_avg, error: best - chosen_avg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::enumerate_windows;
    use crate::instances::{sample_sign_tree, sign_tree_pair_to_instance, BanditInstance};
    use crate::rng::substream;
    use std::cell::RefCell;

    /// Counts queries per round and fails fast on a double query.
    struct AuditSource<'a> {
        inner: &'a BanditInstance,
        hits: RefCell<Vec<u32>>,
    }

    impl<'a> AuditSource<'a> {
        fn new(inner: &'a BanditInstance) -> Self {
            Self { inner, hits: RefCell::new(vec![0; inner.horizon() + 1]) }
        }
    }

    impl RewardSource for AuditSource<'_> {
        fn arms(&self) -> usize {
            self.inner.arms()
        }
        fn horizon(&self) -> usize {
            self.inner.horizon()
        }
        fn reward(&self, arm: usize, round: usize) -> f64 {
            self.hits.borrow_mut()[round] += 1;
            self.inner.reward(arm, round)
        }
    }

    fn two_constant_arms(t: usize) -> BanditInstance {
        BanditInstance::dense(vec![vec![1.0; t], vec![0.0; t]], "steps").unwrap()
    }

    #[test]
    fn single_arm_never_errs() {
        let inst = BanditInstance::dense(vec![vec![0.25; 32]], "solo").unwrap();
        let pred = run_bai(&inst, 1, 5, &mut substream(0, "bai", 0)).unwrap();
        assert_eq!(pred.arm, 0);
        assert_eq!(score(&inst, &pred).unwrap().error, 0.0);
    }

    #[test]
    fn dominant_arm_is_chosen() {
        // With one arm at 1 and one at 0, the dominated accumulator stays
        // at zero and ties break low, so the good arm wins every trial.
        let inst = two_constant_arms(1 << 14);
        let trials = 1000;
        let mut wins = 0;
        for trial in 0..trials {
            let pred = run_bai(&inst, 7, 14, &mut substream(3, "bai", trial)).unwrap();
            let est = pred.estimates.as_ref().unwrap();
            assert!(est.iter().all(|&e| (0.0..=pred.window.w as f64).contains(&e)));
            if pred.arm == 0 {
                wins += 1;
            }
            assert_eq!(score(&inst, &pred).unwrap().error, 0.0);
        }
        assert!(wins * 100 >= trials * 99, "won {wins}/{trials}");
        assert_eq!(wins, trials);
    }

    #[test]
    fn one_query_per_round_then_silence() {
        let inst = two_constant_arms(256);
        let audit = AuditSource::new(&inst);
        let pred = run_bai(&audit, 2, 8, &mut substream(9, "audit", 0)).unwrap();
        let hits = audit.hits.borrow();
        for round in 1..pred.window.t0 {
            assert_eq!(hits[round], 1, "round {round}");
        }
        for round in pred.window.t0..=256 {
            assert_eq!(hits[round], 0, "round {round}");
        }
        assert_eq!(pred.queries, pred.window.t0 as u64 - 1);
    }

    #[test]
    fn estimator_is_unbiased_for_fixed_window() {
        let mut gen_rng = substream(7, "inst", 0);
        let inst = BanditInstance::from_fn(4, 64, "rand", {
            use rand::Rng as _;
            let vals: Vec<f64> = (0..4 * 64).map(|_| gen_rng.gen()).collect();
            move |arm, round| vals[arm * 64 + round - 1]
        })
        .unwrap();
        let window = WindowChoice::new(5, 2, 64).unwrap(); // w = 16
        let k = inst.arms();
        let reruns = 20_000;
        let mut sums = vec![0.0; k];
        let mut sq = vec![0.0; k];
        for i in 0..reruns {
            let est = observation_estimates(&inst, &window, &mut substream(41, "est", i));
            for arm in 0..k {
                let y_tilde = est[arm] * k as f64 / window.w as f64;
                sums[arm] += y_tilde;
                sq[arm] += y_tilde * y_tilde;
            }
        }
        for arm in 0..k {
            let n = f64::from(reruns as u32);
            let mean = sums[arm] / n;
            let var = (sq[arm] / n - mean * mean).max(0.0);
            let se = (var / n).sqrt();
            let y = window_average(&inst, arm, window.observation_start(), window.w).unwrap();
            assert!((mean - y).abs() <= 4.0 * se, "arm {arm}: {mean} vs {y} (se {se})");
        }
    }

    #[test]
    fn scaling_preserves_the_argmax() {
        let est = vec![3.0, 7.0, 7.0, 1.0];
        let scaled: Vec<f64> = est.iter().map(|e| e * 4.0 / 16.0).collect();
        assert_eq!(argmax_lowest(&est), argmax_lowest(&scaled));
        assert_eq!(argmax_lowest(&est), 1); // lowest index wins the tie
    }

    #[test]
    fn score_extremes() {
        let inst = two_constant_arms(16);
        let window = WindowChoice::new(3, 1, 16).unwrap();
        let good = Prediction {
            window,
            arm: 0,
            estimates: None,
            memory: MemoryReport::default(),
            queries: 0,
            sketch_updates: None,
        };
        assert_eq!(score(&inst, &good).unwrap().error, 0.0);
        let bad = Prediction { arm: 1, ..good.clone() };
        let s = score(&inst, &bad).unwrap();
        assert_eq!(s.error, 1.0);
        assert_eq!((s.best_arm_avg, s.chosen_avg), (1.0, 0.0));
    }

    #[test]
    fn sign_tree_prediction_gaps_are_zero_or_the_node_gap() {
        let m = 6;
        let f1 = sample_sign_tree(m, &mut substream(15, "pair", 0)).unwrap();
        let f2 = sample_sign_tree(m, &mut substream(15, "pair", 1)).unwrap();
        let inst = sign_tree_pair_to_instance(&f1, &f2).unwrap();
        for (window, _) in enumerate_windows(inst.horizon(), 1, m).unwrap() {
            let ((_, _), (rd, ri)) = window.child_nodes(m);
            let gap = (f1.value(rd, ri) - f2.value(rd, ri)).abs();
            let expect = if f1.sign(rd, ri) == f2.sign(rd, ri) {
                0.0
            } else {
                (f64::from(rd) / f64::from(m)).sqrt()
            };
            assert!((gap - expect).abs() < 1e-12, "window {window:?}");
        }
    }

    #[test]
    fn full_info_on_constant_arms() {
        let inst = two_constant_arms(64);
        let pred = run_full_info_predictor(&inst, 1, 6, &mut substream(2, "fi", 0)).unwrap();
        assert_eq!(pred.arm, 0);
        assert_eq!(score(&inst, &pred).unwrap().error, 0.0);
    }

    #[test]
    fn full_info_exact_error_on_alternating_parity() {
        // Arms (1,0,1,0,...) and (0,1,0,1,...): every scale-1 window crowns
        // the wrong arm (error 1), every scale-2 window ties (error 0).
        let t = 16;
        let rows = vec![
            (1..=t).map(|r| f64::from(u8::from(r % 2 == 1))).collect::<Vec<_>>(),
            (1..=t).map(|r| f64::from(u8::from(r % 2 == 0))).collect::<Vec<_>>(),
        ];
        let inst = BanditInstance::dense(rows, "parity").unwrap();
        for (lo, hi, expect) in [(1, 1, 1.0), (1, 2, 0.5)] {
            let mut acc = 0.0;
            for (window, p) in enumerate_windows(t, lo, hi).unwrap() {
                let pred = full_info_prediction_for(&inst, window).unwrap();
                acc += p * score(&inst, &pred).unwrap().error;
            }
            assert!((acc - expect).abs() < 1e-12, "range ({lo},{hi}): {acc}");
        }
    }

    #[test]
    fn dense_memory_formula() {
        let inst = two_constant_arms(1 << 8);
        let pred = run_bai(&inst, 4, 4, &mut substream(0, "mem", 0)).unwrap();
        let w = pred.window.w as u64; // 8
        let expected = 2 * (crate::util::ceil_log2(w + 1) + 17) + 3 * 8;
        assert_eq!(pred.memory.total_bits(), expected);
    }

    #[test]
    fn sparse_run_picks_heavy_arm_and_meters_sketch_bits() {
        let t = 1 << 10;
        let mut rows = vec![vec![0.0; t]; 8];
        rows[5] = vec![1.0; t];
        let inst = BanditInstance::dense(rows, "one-heavy").unwrap();
        let params = SparseParams { phi: 1.0, eps: 0.3, delta: 0.1 };
        let mut hits = 0;
        for trial in 0..50 {
            let pred = run_sparse_bai(&inst, params, 6, 10, &mut substream(77, "sparse", trial))
                .unwrap();
            assert!(pred.estimates.is_none());
            assert!(pred.memory.seed_bits > 0);
            if pred.arm == 5 {
                hits += 1;
            }
        }
        assert!(hits >= 48, "heavy arm found in {hits}/50 runs");
    }

    #[test]
    fn sparse_run_on_all_zero_instance_falls_back() {
        let inst = BanditInstance::dense(vec![vec![0.0; 64]; 3], "dead").unwrap();
        let params = SparseParams::defaults(1.0, 64, 0.1);
        let pred = run_sparse_bai(&inst, params, 2, 6, &mut substream(0, "dead", 0)).unwrap();
        assert_eq!(pred.arm, 0);
    }

    #[test]
    fn sparse_defaults_follow_the_horizon() {
        let p = SparseParams::defaults(4.0, 1 << 18, 0.1);
        assert_eq!(p.phi, 4.0);
        assert!((p.eps - 1.0 / 3.0).abs() < 1e-12);
        assert!((p.delta - 0.1 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn sparse_updates_count_reward_one_observations() {
        // Binary rewards: zero-weight observations are no-ops, so the
        // sketch sees exactly the reward-1 rounds. Replaying the same
        // substream through the dense observation loop counts them.
        let inst = BanditInstance::bernoulli(6, 1 << 9, 0.35, 3, "bin").unwrap();
        let params = SparseParams { phi: 2.0, eps: 0.4, delta: 0.2 };
        for trial in 0..10 {
            let pred =
                run_sparse_bai(&inst, params, 3, 9, &mut substream(55, "count", trial)).unwrap();

            let mut replay = substream(55, "count", trial);
            let window = crate::dyadic::sample_window(1 << 9, 3, 9, &mut replay).unwrap();
            assert_eq!(window, pred.window);
            let _sketch_seed: u64 = rand::Rng::gen(&mut replay);
            let estimates = observation_estimates(&inst, &window, &mut replay);
            let ones: f64 = estimates.iter().sum();
            assert_eq!(pred.sketch_updates, Some(ones as u64), "trial {trial}");
        }
    }

    #[test]
    fn dense_and_sparse_agree_on_a_dominant_arm() {
        // One arm dominates every window by far more than the sketch's
        // relative error can blur, so the two variants agree except on
        // the sketch's failure budget.
        let t = 1 << 10;
        let mut rows = vec![vec![0.0; t]; 6];
        rows[4] = vec![1.0; t];
        rows[1] = (0..t).map(|i| f64::from(u8::from(i % 8 == 0))).collect();
        let inst = BanditInstance::dense(rows, "dominant").unwrap();
        let params = SparseParams { phi: 1.2, eps: 0.3, delta: 0.1 };
        let trials = 100;
        let mut agree = 0;
        for trial in 0..trials {
            let dense = run_bai(&inst, 6, 10, &mut substream(66, "agree", trial)).unwrap();
            let sparse =
                run_sparse_bai(&inst, params, 6, 10, &mut substream(66, "agree", trial)).unwrap();
            if dense.arm == sparse.arm {
                agree += 1;
            }
        }
        let threshold = ((1.0 - params.delta - 0.02) * trials as f64).floor() as u32;
        assert!(agree >= threshold, "agreement {agree}/{trials}");
    }
}
