//! The experiment runners behind [`super::run_experiment`].

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::countsketch::{Sketch, SketchConfig};
use crate::dyadic::{self, window_gap_expectation, WindowChoice};
use crate::harness::oracles::misprediction_oracle;
use crate::harness::output::*;
use crate::harness::summary::{summarize, Summary};
use crate::harness::{ExperimentConfig, OutputFormat, RunOutcome};
use crate::instances::{
    centered_hit, gen_polarized, gen_set_disjointness, local_sparsity, naive_local_sparsity,
    sample_sign_tree, sign_tree_pair_to_instance, window_average, PolarizedParams,
    RewardSource, SetDisjointnessSpec,
};
use crate::lookahead::{
    full_info_prediction_for, run_bai, run_sparse_bai_with_config, score, SparseParams,
};
use crate::regret::{
    default_block_count, default_hedge_eta, run_block_reduction, HedgeLearner, Learner,
    PoolHedgeLearner, RewardComplement,
};
use crate::rng::{substream, substream_id};
use crate::{Error, Result};

/// Run `trials` independent closures in parallel, reducing in trial order.
fn run_trials<R: Send>(
    trials: u64,
    run: impl Fn(u64) -> Result<R> + Sync,
) -> (Vec<R>, Vec<(u64, String)>) {
    let results: Vec<(u64, std::result::Result<R, String>)> = (0..trials)
        .into_par_iter()
        .map(|i| (i, run(i).map_err(|e| e.to_string())))
        .collect();
    let mut records = Vec::with_capacity(trials as usize);
    let mut failures = Vec::new();
    for (i, r) in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(msg) => failures.push((i, msg)),
        }
    }
    (records, failures)
}

/// Summaries are only computable over successful trials; with none, the
/// failure list still flows through to the outcome.
fn maybe_summarize(name: &str, values: Vec<f64>) -> Result<Vec<Summary>> {
    if values.is_empty() {
        Ok(Vec::new())
    } else {
        Ok(vec![summarize(name, &values)?])
    }
}

fn finish<R: Record>(
    config: &ExperimentConfig,
    mut output: ExperimentOutput<R>,
    summaries: Vec<Summary>,
    verification: Option<bool>,
) -> Result<RunOutcome> {
    output.kind = config.kind.as_str().to_string();
    output.summaries = summaries;
    let records_rendered = match config.format {
        OutputFormat::Csv => output.render_csv(),
        OutputFormat::Json => output.render_json()?,
    };
    Ok(RunOutcome {
        kind: config.kind,
        records_rendered,
        summary_rendered: output.render_summary(),
        summaries: output.summaries.clone(),
        requested_trials: output.requested_trials,
        completed_trials: output.records.len() as u64,
        failed_trials: output.failures.len() as u64,
        verification,
    })
}

fn scale_range(t: usize, lo: Option<u32>, hi: Option<u32>) -> (u32, u32) {
    let (dlo, dhi) = dyadic::default_scale_range(t);
    (lo.unwrap_or(dlo), hi.unwrap_or(dhi))
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BaiParams {
    #[serde(default)]
    lo: Option<u32>,
    #[serde(default)]
    hi: Option<u32>,
}

pub(super) fn bai(config: &ExperimentConfig) -> Result<RunOutcome> {
    let params: BaiParams = config.typed_params()?;
    let instance = config.resolve_instance()?;
    let (lo, hi) = scale_range(instance.horizon(), params.lo, params.hi);
    let seed = config.master_seed;
    let (records, failures) = run_trials(config.trials, |i| {
        let mut rng = substream(seed, "bai.trial", i);
        let pred = run_bai(&instance, lo, hi, &mut rng)?;
        let s = score(&instance, &pred)?;
        Ok(BaiRecord {
            seed: substream_id(seed, "bai.trial", i),
            m: pred.window.m,
            b: pred.window.b,
            t0: pred.window.t0,
            w: pred.window.w,
            arm: pred.arm,
            error: s.error,
            bits: pred.memory.total_bits(),
            queries: pred.queries,
        })
    });
    let mut output: ExperimentOutput<BaiRecord> = ExperimentOutput::new(seed, config.trials);
    output.records = records;
    output.failures = failures;
    let mut summaries = maybe_summarize("error", output.records.iter().map(|r| r.error).collect())?;
    summaries.extend(maybe_summarize("bits", output.records.iter().map(|r| r.bits as f64).collect())?);
    summaries.extend(maybe_summarize("queries", output.records.iter().map(|r| r.queries as f64).collect())?);
    finish(config, output, summaries, None)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SparseBaiParams {
    phi: f64,
    #[serde(default)]
    eps: Option<f64>,
    #[serde(default)]
    delta: Option<f64>,
    /// Overall failure budget feeding the derived defaults for `eps`/`delta`.
    #[serde(default)]
    delta_total: Option<f64>,
    #[serde(default)]
    lo: Option<u32>,
    #[serde(default)]
    hi: Option<u32>,
    #[serde(default)]
    width_factor: Option<f64>,
    #[serde(default)]
    depth_factor: Option<f64>,
}

pub(super) fn sparse_bai(config: &ExperimentConfig) -> Result<RunOutcome> {
    let params: SparseBaiParams = config.typed_params()?;
    let instance = config.resolve_instance()?;
    let t = instance.horizon();
    let (lo, hi) = scale_range(t, params.lo, params.hi);
    let defaults = SparseParams::defaults(params.phi, t, params.delta_total.unwrap_or(0.1));
    let sparse = SparseParams {
        phi: params.phi,
        eps: params.eps.unwrap_or(defaults.eps),
        delta: params.delta.unwrap_or(defaults.delta),
    };
    let mut sketch_config = SketchConfig::default();
    if let Some(wf) = params.width_factor {
        sketch_config.width_factor = wf;
    }
    if let Some(df) = params.depth_factor {
        sketch_config.depth_factor = df;
    }
    let seed = config.master_seed;
    let (records, failures) = run_trials(config.trials, |i| {
        let mut rng = substream(seed, "sparse-bai.trial", i);
        let pred = run_sparse_bai_with_config(&instance, sparse, lo, hi, sketch_config, &mut rng)?;
        let s = score(&instance, &pred)?;
        Ok(BaiRecord {
            seed: substream_id(seed, "sparse-bai.trial", i),
            m: pred.window.m,
            b: pred.window.b,
            t0: pred.window.t0,
            w: pred.window.w,
            arm: pred.arm,
            error: s.error,
            bits: pred.memory.total_bits(),
            queries: pred.queries,
        })
    });
    let mut output: ExperimentOutput<BaiRecord> = ExperimentOutput::new(seed, config.trials);
    output.records = records;
    output.failures = failures;
    let mut summaries = maybe_summarize("error", output.records.iter().map(|r| r.error).collect())?;
    summaries.extend(maybe_summarize("bits", output.records.iter().map(|r| r.bits as f64).collect())?);
    summaries.extend(maybe_summarize("queries", output.records.iter().map(|r| r.queries as f64).collect())?);
    finish(config, output, summaries, None)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegretParams {
    #[serde(default = "default_learner")]
    learner: String,
    #[serde(default)]
    q: Option<usize>,
    #[serde(default)]
    s: Option<usize>,
    #[serde(default)]
    eta: Option<f64>,
    #[serde(default)]
    epoch_len: Option<usize>,
}

fn default_learner() -> String {
    "hedge".to_string()
}

pub(super) fn regret(config: &ExperimentConfig) -> Result<RunOutcome> {
    let params: RegretParams = config.typed_params()?;
    let instance = config.resolve_instance()?;
    let losses = RewardComplement(&instance);
    let (k, t) = (instance.arms(), instance.horizon());
    let q = match params.q {
        Some(q) => q,
        None => default_block_count(t, k, 1),
    };
    let eta = params.eta.unwrap_or_else(|| default_hedge_eta(k, q));
    let seed = config.master_seed;
    let (records, failures) = run_trials(config.trials, |i| {
        let mut learner: Box<dyn Learner> = match params.learner.as_str() {
            "hedge" => Box::new(HedgeLearner::new(k, eta)),
            "pool-hedge" => {
                let s = params.s.ok_or_else(|| {
                    Error::Config("pool-hedge needs a pool size `s`".into())
                })?;
                Box::new(PoolHedgeLearner::new(
                    k,
                    s,
                    params.epoch_len.unwrap_or(4),
                    eta,
                    substream(seed, "regret.admission", i),
                )?)
            }
            other => return Err(Error::Config(format!("unknown learner `{other}`"))),
        };
        let mut rng = substream(seed, "regret.trial", i);
        let trace = run_block_reduction(&losses, learner.as_mut(), q, &mut rng)?;
        Ok(RegretRecord {
            seed: substream_id(seed, "regret.trial", i),
            learner: learner.name().to_string(),
            k,
            t,
            q,
            s: trace.s,
            regret: trace.realized_regret(),
            exploration_rounds: trace.exploration_rounds,
            learner_bits: learner.bits(),
        })
    });
    let mut output: ExperimentOutput<RegretRecord> = ExperimentOutput::new(seed, config.trials);
    output.records = records;
    output.failures = failures;
    let mut summaries =
        maybe_summarize("regret", output.records.iter().map(|r| r.regret).collect())?;
    summaries.extend(maybe_summarize(
        "exploration_rounds",
        output.records.iter().map(|r| r.exploration_rounds as f64).collect(),
    )?);
    summaries.extend(maybe_summarize(
        "learner_bits",
        output.records.iter().map(|r| r.learner_bits as f64).collect(),
    )?);
    finish(config, output, summaries, None)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowGapParams {
    #[serde(default = "default_gap_t")]
    t: usize,
    #[serde(default = "default_gap_lo")]
    lo: u32,
    #[serde(default = "default_gap_hi")]
    hi: u32,
}

fn default_gap_t() -> usize {
    1024
}
fn default_gap_lo() -> u32 {
    3
}
fn default_gap_hi() -> u32 {
    9
}

const GAP_TOLERANCE: f64 = 1e-12;

pub(super) fn window_gap(config: &ExperimentConfig) -> Result<RunOutcome> {
    let params: WindowGapParams = config.typed_params()?;
    let seed = config.master_seed;
    let (records, failures) = run_trials(config.trials, |i| {
        let mut rng = substream(seed, "lemma1.seq", i);
        let seq: Vec<f64> = (0..params.t).map(|_| rng.gen()).collect();
        let gap = window_gap_expectation(&seq, params.lo, params.hi)?;
        let bound = gap.bound.ok_or_else(|| {
            Error::Config("degenerate scale range: the gap bound needs hi > lo".into())
        })?;
        Ok(GapRecord { seed: substream_id(seed, "lemma1.seq", i), gap: gap.value, bound })
    });
    let mut output: ExperimentOutput<GapRecord> = ExperimentOutput::new(seed, config.trials);
    output.records = records;
    output.failures = failures;
    let pass = output.failures.is_empty()
        && output.records.iter().all(|r| r.gap <= r.bound + GAP_TOLERANCE);
    let summaries = maybe_summarize("gap", output.records.iter().map(|r| r.gap).collect())?;
    finish(config, output, summaries, Some(pass))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OrthogonalityParams {
    #[serde(default = "default_ortho_depth")]
    max_depth: u32,
}

fn default_ortho_depth() -> u32 {
    8
}

const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;

pub(super) fn orthogonality(config: &ExperimentConfig) -> Result<RunOutcome> {
    let params: OrthogonalityParams = config.typed_params()?;
    if params.max_depth < 2 {
        return Err(Error::Config("orthogonality needs max_depth >= 2".into()));
    }
    let seed = config.master_seed;
    let (records, failures) = run_trials(config.trials, |i| {
        let m = 2 + (i % u64::from(params.max_depth - 1)) as u32;
        let mut rng = substream(seed, "orthogonality.seq", i);
        let seq: Vec<f64> = (0..1usize << m).map(|_| rng.gen()).collect();
        let mut max_abs_diff = 0.0f64;
        for l in 0..m {
            for u in l + 1..=m {
                let (lhs, rhs) = crate::dyadic::orthogonality_check(&seq, l, u)?;
                max_abs_diff = max_abs_diff.max((lhs - rhs).abs());
            }
        }
        Ok(OrthogonalityRecord { seed: substream_id(seed, "orthogonality.seq", i), m, max_abs_diff })
    });
    let mut output: ExperimentOutput<OrthogonalityRecord> =
        ExperimentOutput::new(seed, config.trials);
    output.records = records;
    output.failures = failures;
    let pass = output.failures.is_empty()
        && output.records.iter().all(|r| r.max_abs_diff <= ORTHOGONALITY_TOLERANCE);
    let summaries = maybe_summarize(
        "max_abs_diff",
        output.records.iter().map(|r| r.max_abs_diff).collect(),
    )?;
    finish(config, output, summaries, Some(pass))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MispredictionParams {
    #[serde(default = "default_max_d")]
    max_d: u32,
}

fn default_max_d() -> u32 {
    64
}

pub(super) fn misprediction_floor(config: &ExperimentConfig) -> Result<RunOutcome> {
    let params: MispredictionParams = config.typed_params()?;
    if params.max_d < 1 {
        return Err(Error::Config("misprediction floor needs max_d >= 1".into()));
    }
    let records: Vec<MispredictionRecord> = (1..=params.max_d)
        .into_par_iter()
        .map(|d| {
            let oracle = misprediction_oracle(d);
            let pass = oracle.joint_min.cmp_ratio(1, 8 * i64::from(d)) != std::cmp::Ordering::Less
                && oracle.equal_parents_branch.cmp_ratio(1, 8 * i64::from(d))
                    == std::cmp::Ordering::Equal;
            MispredictionRecord {
                d,
                joint_min: oracle.joint_min.approx(),
                equal_parents_branch: oracle.equal_parents_branch.approx(),
                bound: 1.0 / (8.0 * f64::from(d)),
                pass,
            }
        })
        .collect();
    let mut output: ExperimentOutput<MispredictionRecord> =
        ExperimentOutput::new(config.master_seed, u64::from(params.max_d));
    output.records = records;
    let pass = output.records.iter().all(|r| r.pass);
    let summaries = maybe_summarize(
        "joint_min_minus_bound",
        output.records.iter().map(|r| r.joint_min - r.bound).collect(),
    )?;
    finish(config, output, summaries, Some(pass))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SparsityParams {
    #[serde(default = "default_sparsity_k")]
    k: usize,
    #[serde(default = "default_sparsity_t")]
    t: usize,
    #[serde(default = "default_sparsity_w")]
    w: usize,
    #[serde(default = "default_sparsity_r")]
    r_values: Vec<usize>,
    /// Horizon for the exact sliding-vs-naive cross-check.
    #[serde(default = "default_naive_t")]
    naive_t: usize,
    #[serde(default = "default_naive_w")]
    naive_w: usize,
}

fn default_sparsity_k() -> usize {
    64
}
fn default_sparsity_t() -> usize {
    1 << 16
}
fn default_sparsity_w() -> usize {
    1 << 8
}
fn default_sparsity_r() -> Vec<usize> {
    vec![1, 2, 4]
}
fn default_naive_t() -> usize {
    1 << 12
}
fn default_naive_w() -> usize {
    1 << 6
}

pub(super) fn sparsity(config: &ExperimentConfig) -> Result<RunOutcome> {
    let params: SparsityParams = config.typed_params()?;
    let seed = config.master_seed;
    let records: Vec<MaybeRecord<SparsityRecord>> = params
        .r_values
        .par_iter()
        .map(|&r| {
            let run = || -> Result<SparsityRecord> {
                let gen = PolarizedParams::new(params.k, params.t, r);
                let inst = gen_polarized(&gen, &mut substream(seed, "sparsity.gen", r as u64))?;
                let profile = local_sparsity(&inst, params.w)?;
                let bound = 4.0 * r as f64
                    + 4.0 * (params.k - r) as f64 / (params.t as f64).powf(0.75);

                let small_gen = PolarizedParams::new(params.k, params.naive_t, r);
                let small = gen_polarized(
                    &small_gen,
                    &mut substream(seed, "sparsity.naive", r as u64),
                )?;
                let fast = local_sparsity(&small, params.naive_w)?;
                let (naive_phi, naive_start) = naive_local_sparsity(&small, params.naive_w)?;
                let naive_matches =
                    fast.phi == naive_phi && fast.worst_window_start == naive_start;

                Ok(SparsityRecord {
                    r,
                    k: params.k,
                    t: params.t,
                    w: params.w,
                    phi: profile.phi,
                    bound,
                    worst_window_start: profile.worst_window_start,
                    naive_matches,
                    pass: profile.phi <= bound && naive_matches,
                })
            };
            MaybeRecord { index: r as u64, result: run().map_err(|e| e.to_string()) }
        })
        .collect();
    let mut output: ExperimentOutput<SparsityRecord> =
        ExperimentOutput::new(seed, params.r_values.len() as u64);
    for rec in records {
        match rec.result {
            Ok(r) => output.records.push(r),
            Err(msg) => output.failures.push((rec.index, msg)),
        }
    }
    let pass = output.failures.is_empty() && output.records.iter().all(|r| r.pass);
    let summaries = maybe_summarize("phi", output.records.iter().map(|r| r.phi).collect())?;
    finish(config, output, summaries, Some(pass))
}

struct MaybeRecord<R> {
    index: u64,
    result: std::result::Result<R, String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SdDemoParams {
    #[serde(default = "default_sd_n")]
    n: usize,
    a: Vec<usize>,
    b: Vec<usize>,
    #[serde(default = "default_sd_t")]
    t: usize,
    #[serde(default = "default_sd_c")]
    c: usize,
    #[serde(default)]
    lambda: Option<(u64, u64)>,
}

fn default_sd_n() -> usize {
    31
}
fn default_sd_t() -> usize {
    1 << 14
}
fn default_sd_c() -> usize {
    2
}

pub(super) fn sd_demo(config: &ExperimentConfig) -> Result<RunOutcome> {
    let params: SdDemoParams = config.typed_params()?;
    if params.c < 2 || !params.t.is_multiple_of(params.c) {
        return Err(Error::Config(format!(
            "need c >= 2 dividing t; got c={}, t={}",
            params.c, params.t
        )));
    }
    let w = params.t / params.c;
    if !w.is_power_of_two() {
        return Err(Error::Config(format!(
            "window length t/c = {w} must be a power of two to match the window law"
        )));
    }
    let lambda = params.lambda.unwrap_or(crate::instances::DEFAULT_LAMBDA);
    let m = crate::util::floor_log2(w) + 1;
    let seed = config.master_seed;
    let truth_intersect = {
        let probe = SetDisjointnessSpec {
            n: params.n,
            a: params.a.clone(),
            b: params.b.clone(),
            tau: 1,
            lambda,
            t: params.t,
            w,
        };
        probe.validate()?;
        probe.intersection().is_some()
    };

    let (records, failures) = run_trials(config.trials, |i| {
        let tau = substream(seed, "sd.pivot", i).gen_range(1..=params.t);
        let spec = SetDisjointnessSpec {
            n: params.n,
            a: params.a.clone(),
            b: params.b.clone(),
            tau,
            lambda,
            t: params.t,
            w,
        };
        let inst = gen_set_disjointness(&spec)?;
        let blocks = dyadic::t_prime(params.t) >> m;
        let b = substream(seed, "sd.window", i).gen_range(1..=blocks);
        let window = WindowChoice::new(m, b, params.t)?;
        debug_assert_eq!(window.w, w);

        // Full observation: the decision is the best arm in hindsight over
        // the committed window.
        let mut best_arm = 0;
        let mut best_avg = f64::NEG_INFINITY;
        for arm in 0..inst.arms() {
            let avg = window_average(&inst, arm, window.t0, window.w)?;
            if avg > best_avg {
                best_avg = avg;
                best_arm = arm;
            }
        }
        let decision_intersect = best_arm >= 1;
        let hit = centered_hit(window.t0, w, tau, lambda);
        let answer = if hit {
            decision_intersect
        } else {
            substream(seed, "sd.coin", i).gen::<bool>()
        };
        Ok(SdDemoRecord {
            seed: substream_id(seed, "sd.pivot", i),
            tau,
            t0: window.t0,
            w,
            hit,
            decision_correct: decision_intersect == truth_intersect,
            sd_correct: answer == truth_intersect,
        })
    });
    let mut output: ExperimentOutput<SdDemoRecord> = ExperimentOutput::new(seed, config.trials);
    output.records = records;
    output.failures = failures;
    let hits: Vec<f64> =
        output.records.iter().map(|r| if r.hit { 1.0 } else { 0.0 }).collect();
    let conditional: Vec<f64> = output
        .records
        .iter()
        .filter(|r| r.hit)
        .map(|r| if r.decision_correct { 1.0 } else { 0.0 })
        .collect();
    let sd_acc: Vec<f64> =
        output.records.iter().map(|r| if r.sd_correct { 1.0 } else { 0.0 }).collect();
    let mut summaries = maybe_summarize("hit_rate", hits)?;
    summaries.extend(maybe_summarize("conditional_accuracy", conditional)?);
    summaries.extend(maybe_summarize("sd_answer_accuracy", sd_acc)?);
    finish(config, output, summaries, None)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LbErrorParams {
    #[serde(default = "default_lb_m")]
    m: u32,
    /// Share one sign stream between the two assignments (degenerate
    /// identical-arms control).
    #[serde(default)]
    shared_signs: bool,
    #[serde(default)]
    lo: Option<u32>,
    #[serde(default)]
    hi: Option<u32>,
}

fn default_lb_m() -> u32 {
    16
}

pub(super) fn lb_error(config: &ExperimentConfig) -> Result<RunOutcome> {
    let params: LbErrorParams = config.typed_params()?;
    if params.m < 1 || params.m > 20 {
        return Err(Error::Config(format!("lb-error depth m={} outside [1, 20]", params.m)));
    }
    let t = 1usize << params.m;
    let (lo, hi) = scale_range(t, params.lo, params.hi);
    let seed = config.master_seed;
    let (records, failures) = run_trials(config.trials, |i| {
        let f1 = sample_sign_tree(params.m, &mut substream(seed, "lb.tree", 2 * i))?;
        let f2 = if params.shared_signs {
            f1.clone()
        } else {
            sample_sign_tree(params.m, &mut substream(seed, "lb.tree", 2 * i + 1))?
        };
        let inst = sign_tree_pair_to_instance(&f1, &f2)?;
        let window = dyadic::sample_window(t, lo, hi, &mut substream(seed, "lb.window", i))?;
        let pred = full_info_prediction_for(&inst, window)?;
        let s = score(&inst, &pred)?;
        Ok(LbErrorRecord {
            seed: substream_id(seed, "lb.window", i),
            m: window.m,
            b: window.b,
            t0: window.t0,
            w: window.w,
            d: params.m - window.m + 1,
            error: s.error,
        })
    });
    let mut output: ExperimentOutput<LbErrorRecord> = ExperimentOutput::new(seed, config.trials);
    output.records = records;
    output.failures = failures;
    let summaries = maybe_summarize("error", output.records.iter().map(|r| r.error).collect())?;
    finish(config, output, summaries, None)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SketchBenchParams {
    #[serde(default = "default_bench_k")]
    k: usize,
    #[serde(default = "default_bench_heavy_items")]
    heavy_items: usize,
    #[serde(default = "default_bench_heavy_count")]
    heavy_count: u64,
    /// Heavy-to-light count ratio.
    #[serde(default = "default_bench_ratio")]
    ratio: u64,
    #[serde(default = "default_bench_eps")]
    eps: f64,
    #[serde(default = "default_bench_delta")]
    delta: f64,
    #[serde(default)]
    phi: Option<f64>,
}

fn default_bench_k() -> usize {
    64
}
fn default_bench_heavy_items() -> usize {
    1
}
fn default_bench_heavy_count() -> u64 {
    1000
}
fn default_bench_ratio() -> u64 {
    100
}
fn default_bench_eps() -> f64 {
    0.3
}
fn default_bench_delta() -> f64 {
    0.1
}

pub(super) fn sketch_bench(config: &ExperimentConfig) -> Result<RunOutcome> {
    let params: SketchBenchParams = config.typed_params()?;
    if params.heavy_items == 0 || params.heavy_items > params.k {
        return Err(Error::Config("need 1 <= heavy_items <= k".into()));
    }
    if params.ratio == 0 || params.heavy_count == 0 {
        return Err(Error::Config("need positive heavy_count and ratio".into()));
    }
    let light_count = params.heavy_count / params.ratio;
    let counts: Vec<u64> = (0..params.k)
        .map(|item| if item < params.heavy_items { params.heavy_count } else { light_count })
        .collect();
    let stream_len: u64 = counts.iter().sum();
    let phi = params.phi.unwrap_or_else(|| {
        let top = params.heavy_count as f64;
        counts.iter().map(|&c| (c as f64 / top).powi(2)).sum()
    });
    let seed = config.master_seed;
    let (records, failures) = run_trials(config.trials, |i| {
        let mut stream: Vec<usize> = counts
            .iter()
            .enumerate()
            .flat_map(|(item, &c)| std::iter::repeat_n(item, c as usize))
            .collect();
        use rand::seq::SliceRandom;
        stream.shuffle(&mut substream(seed, "bench.stream", i));
        let sketch_seed: u64 = substream(seed, "bench.sketch", i).gen();
        let mut sketch =
            Sketch::new(params.k, phi, params.eps, params.delta, stream_len, sketch_seed)?;
        for &item in &stream {
            sketch.update(item, 1.0)?;
        }
        let returned = sketch.approx_top()?;
        let returned_count = counts[returned];
        Ok(SketchBenchRecord {
            seed: substream_id(seed, "bench.sketch", i),
            k: params.k,
            stream_len,
            top_count: params.heavy_count,
            returned,
            returned_count,
            success: returned_count as f64 >= (1.0 - params.eps) * params.heavy_count as f64,
            bits: sketch.bits_used(),
        })
    });
    let mut output: ExperimentOutput<SketchBenchRecord> =
        ExperimentOutput::new(seed, config.trials);
    output.records = records;
    output.failures = failures;
    let mut summaries = maybe_summarize(
        "success",
        output.records.iter().map(|r| if r.success { 1.0 } else { 0.0 }).collect(),
    )?;
    summaries.extend(maybe_summarize(
        "bits",
        output.records.iter().map(|r| r.bits as f64).collect(),
    )?);
    finish(config, output, summaries, None)
}
