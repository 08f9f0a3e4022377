//! Regret minimization under bandit feedback via block reduction.
//!
//! A sparse-support online learner emits a distribution `p` over arms; the
//! reduction freezes `p` for a block of rounds, plants one uniformly placed
//! exploration round per support arm, plays `p` everywhere else, and feeds
//! the learner a block-loss estimate built from the exploration
//! observations alone. Each estimate entry is an unbiased sample of the
//! arm's block-average loss, so the learner runs a full-information game
//! over block indices while the environment only ever reveals the played
//! arm's loss — one entry per round.
//!
//! The module works in losses; reward instances enter through the
//! complement adapter `loss = 1 - reward`.

mod hedge;
mod pool;

pub use hedge::{default_hedge_eta, HedgeLearner};
pub use pool::PoolHedgeLearner;

use rand::Rng;

use crate::instances::RewardSource;
use crate::meter::{self, Descriptor, MemoryReport, Quantity};
use crate::util::ceil_log2;
use crate::{Error, Result};

/// A probability vector with bounded support.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseDistribution {
    /// `(arm, probability)` sorted by arm, probabilities summing to one.
    support: Vec<(usize, f64)>,
}

impl SparseDistribution {
    /// Validates: distinct arms, probabilities nonnegative and summing to
    /// `1` within `1e-9`, support no larger than `max_support`.
    pub fn new(mut support: Vec<(usize, f64)>, max_support: usize) -> Result<Self> {
        if support.is_empty() || support.len() > max_support {
            return Err(Error::InvalidParameter(format!(
                "support size {} outside [1, {max_support}]",
                support.len()
            )));
        }
        support.sort_by_key(|&(arm, _)| arm);
        if support.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameter("duplicate arm in support".into()));
        }
        let mut total = 0.0;
        for &(arm, p) in &support {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidParameter(format!("probability {p} of arm {arm}")));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("probabilities sum to {total}")));
        }
        Ok(Self { support })
    }

    pub fn support(&self) -> &[(usize, f64)] {
        &self.support
    }

    pub fn arms(&self) -> impl Iterator<Item = usize> + '_ {
        self.support.iter().map(|&(arm, _)| arm)
    }

    pub fn probability(&self, arm: usize) -> f64 {
        self.support
            .binary_search_by_key(&arm, |&(a, _)| a)
            .map_or(0.0, |i| self.support[i].1)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for &(arm, p) in &self.support {
            acc += p;
            if u < acc {
                return arm;
            }
        }
        self.support.last().expect("nonempty support").0
    }
}

/// A bounded-memory online learner over `K` experts.
///
/// The protocol alternates strictly: one `next_distribution`, one `observe`
/// of losses restricted to the emitted support. Violations are errors, not
/// silent corrections.
pub trait Learner {
    fn arms(&self) -> usize;
    /// Largest support the learner may emit.
    fn max_support(&self) -> usize;
    fn next_distribution(&mut self) -> Result<SparseDistribution>;
    /// Feed back losses for the previously emitted support, sorted by arm.
    fn observe(&mut self, losses: &[(usize, f64)]) -> Result<()>;
    fn memory_report(&self) -> MemoryReport;
    fn bits(&self) -> u64 {
        self.memory_report().total_bits()
    }
    /// Short name for result records.
    fn name(&self) -> &'static str;
}

/// Anything that serves losses in `[0,1]`.
pub trait LossSource {
    fn arms(&self) -> usize;
    fn horizon(&self) -> usize;
    fn loss(&self, arm: usize, round: usize) -> f64;
}

/// A dense loss matrix.
pub struct LossMatrix {
    k: usize,
    t: usize,
    values: Vec<f64>,
}

impl LossMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        let t = rows.first().map_or(0, Vec::len);
        if k == 0 || t == 0 || rows.iter().any(|r| r.len() != t) {
            return Err(Error::BadDimensions { k, t });
        }
        for (arm, row) in rows.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::RewardOutOfRange { arm, round: i + 1, value: v });
                }
            }
        }
        Ok(Self { k, t, values: rows.into_iter().flatten().collect() })
    }
}

impl LossSource for LossMatrix {
    fn arms(&self) -> usize {
        self.k
    }
    fn horizon(&self) -> usize {
        self.t
    }
    fn loss(&self, arm: usize, round: usize) -> f64 {
        self.values[arm * self.t + (round - 1)]
    }
}

/// View a reward instance as losses via `loss = 1 - reward`.
pub struct RewardComplement<S>(pub S);

impl<S: RewardSource> LossSource for RewardComplement<S> {
    fn arms(&self) -> usize {
        self.0.arms()
    }
    fn horizon(&self) -> usize {
        self.0.horizon()
    }
    fn loss(&self, arm: usize, round: usize) -> f64 {
        1.0 - self.0.reward(arm, round)
    }
}

impl<S: LossSource + ?Sized> LossSource for &S {
    fn arms(&self) -> usize {
        (**self).arms()
    }
    fn horizon(&self) -> usize {
        (**self).horizon()
    }
    fn loss(&self, arm: usize, round: usize) -> f64 {
        (**self).loss(arm, round)
    }
}

/// Per-block record of the reduction.
#[derive(Clone, Debug)]
pub struct BlockRecord {
    pub distribution: SparseDistribution,
    /// `(arm, round)` exploration assignments, one per support arm.
    pub exploration: Vec<(usize, usize)>,
    /// The block-loss estimate fed to the learner: exploration
    /// observations on the support, zero off it, quantized to
    /// `ceil(log2 T)` fractional bits.
    pub c_hat: Vec<(usize, f64)>,
}

/// Everything one reduction run produced.
#[derive(Clone, Debug)]
pub struct RegretTrace {
    pub k: usize,
    pub t: usize,
    pub q: usize,
    pub s: usize,
    /// Per-round `(played arm, incurred loss)`.
    pub rounds: Vec<(usize, f64)>,
    pub blocks: Vec<BlockRecord>,
    pub algorithm_total: f64,
    /// Full per-arm totals, the benchmark oracle's view.
    pub per_arm_totals: Vec<f64>,
    pub exploration_rounds: u64,
    /// Learner state plus reduction registers.
    pub memory: MemoryReport,
}

impl RegretTrace {
    pub fn best_arm_total(&self) -> f64 {
        self.per_arm_totals.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `algorithm total - best fixed arm total`, exactly as recorded.
    pub fn realized_regret(&self) -> f64 {
        self.algorithm_total - self.best_arm_total()
    }
}

/// The regret decomposition used by the analysis.
#[derive(Clone, Copy, Debug)]
pub struct RegretReport {
    pub realized_regret: f64,
    pub exploration_rounds: u64,
    /// Hard cap on exploration rounds: `Q * s`.
    pub exploration_bound: u64,
    pub exploration_loss: f64,
    pub exploitation_loss: f64,
    pub best_arm_total: f64,
}

/// Quantize a loss in `[0,1]` to `ceil(log2 t)` fractional bits.
pub fn quantize_loss(value: f64, t: usize) -> f64 {
    let scale = 2f64.powi(ceil_log2(t as u64) as i32);
    (value * scale).round_ties_even() / scale
}

/// Largest divisor of `t` not exceeding `ceil(t^(2/3) * k^(1/3) / sigma)`.
pub fn default_block_count(t: usize, k: usize, sigma_bits: u64) -> usize {
    let cap = ((t as f64).powf(2.0 / 3.0) * (k as f64).powf(1.0 / 3.0)
        / (sigma_bits.max(1) as f64))
        .ceil() as usize;
    let cap = cap.clamp(1, t);
    (1..=cap).rev().find(|q| t.is_multiple_of(*q)).unwrap_or(1)
}

/// Run the block reduction of `learner` over `losses` with `q` blocks.
pub fn run_block_reduction<L: LossSource, R: Rng>(
    losses: &L,
    learner: &mut dyn Learner,
    q: usize,
    rng: &mut R,
) -> Result<RegretTrace> {
    let (k, t) = (losses.arms(), losses.horizon());
    if q == 0 || t % q != 0 {
        return Err(Error::BlockCount { q, t });
    }
    let block_len = t / q;
    let s = learner.max_support();

    let mut rounds = Vec::with_capacity(t);
    let mut blocks = Vec::with_capacity(q);
    let mut algorithm_total = crate::util::Kahan::new();
    let mut exploration_rounds = 0u64;
    let mut offsets: Vec<usize> = Vec::new();

    for block in 0..q {
        let distribution = learner.next_distribution()?;
        let support: Vec<usize> = distribution.arms().collect();
        if support.len() > block_len {
            return Err(Error::BlockTooShort { block_len, support: support.len() });
        }

        // Draw distinct offsets without replacement; the i-th draw is
        // marginally uniform over the block, and it is assigned to the
        // i-th support arm in ascending arm order.
        offsets.clear();
        offsets.extend(0..block_len);
        for i in 0..support.len() {
            let j = rng.gen_range(i..block_len);
            offsets.swap(i, j);
        }
        let base = block * block_len;
        let exploration: Vec<(usize, usize)> =
            support.iter().zip(&offsets).map(|(&arm, &off)| (arm, base + off + 1)).collect();

        let mut c_hat: Vec<(usize, f64)> = Vec::with_capacity(support.len());
        for rel in 0..block_len {
            let round = base + rel + 1;
            let explored = exploration.iter().find(|&&(_, r)| r == round).map(|&(a, _)| a);
            let arm = match explored {
                Some(arm) => arm,
                None => distribution.sample(rng),
            };
            let loss = losses.loss(arm, round);
            if let Some(explore_arm) = explored {
                c_hat.push((explore_arm, quantize_loss(loss, t)));
                exploration_rounds += 1;
            }
            rounds.push((arm, loss));
            algorithm_total.add(loss);
        }
        c_hat.sort_by_key(|&(arm, _)| arm);
        learner.observe(&c_hat)?;
        blocks.push(BlockRecord { distribution, exploration, c_hat });
    }

    // Benchmark oracle: full per-arm totals, computed after the run and
    // outside the bandit-feedback budget.
    let mut per_arm_totals = vec![0.0f64; k];
    for (arm, total) in per_arm_totals.iter_mut().enumerate() {
        let mut acc = crate::util::Kahan::new();
        for round in 1..=t {
            acc.add(losses.loss(arm, round));
        }
        *total = acc.value();
    }

    let memory = reduction_memory(k, t, q, s)?.merged(&learner.memory_report());
    Ok(RegretTrace {
        k,
        t,
        q,
        s,
        rounds,
        blocks,
        algorithm_total: algorithm_total.value(),
        per_arm_totals,
        exploration_rounds,
        memory,
    })
}

fn reduction_memory(k: usize, t: usize, q: usize, s: usize) -> Result<MemoryReport> {
    let s = s as u64;
    meter::account(&[
        Descriptor::persistent("block-support", Quantity::ArmIndex { arms: k as u64 }, s),
        Descriptor::persistent(
            "block-probabilities",
            Quantity::FixedPoint { magnitude: 1.0, frac_bits: meter::DEFAULT_FRAC_BITS },
            s,
        ),
        Descriptor::persistent("exploration-rounds", Quantity::RoundIndex { horizon: t as u64 }, s),
        Descriptor::persistent(
            "block-loss-estimate",
            Quantity::FixedPoint { magnitude: 1.0, frac_bits: ceil_log2(t as u64) as u32 },
            s,
        ),
        Descriptor::persistent("block-counter", Quantity::IntCounter { max: q as u64 }, 1),
    ])
}

/// Summarize a completed trace into the analysis decomposition.
pub fn regret_report(trace: &RegretTrace) -> RegretReport {
    let mut exploration_loss = 0.0;
    for block in &trace.blocks {
        for &(arm, round) in &block.exploration {
            debug_assert_eq!(trace.rounds[round - 1].0, arm);
            exploration_loss += trace.rounds[round - 1].1;
        }
    }
    RegretReport {
        realized_regret: trace.realized_regret(),
        exploration_rounds: trace.exploration_rounds,
        exploration_bound: (trace.q * trace.s) as u64,
        exploration_loss,
        exploitation_loss: trace.algorithm_total - exploration_loss,
        best_arm_total: trace.best_arm_total(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use std::cell::RefCell;

    #[test]
    fn sparse_distribution_validation() {
        assert!(SparseDistribution::new(vec![(0, 0.5), (1, 0.5)], 2).is_ok());
        assert!(SparseDistribution::new(vec![(0, 0.5), (1, 0.5)], 1).is_err());
        assert!(SparseDistribution::new(vec![(0, 0.5), (0, 0.5)], 2).is_err());
        assert!(SparseDistribution::new(vec![(0, 0.6), (1, 0.5)], 2).is_err());
        assert!(SparseDistribution::new(vec![(0, -0.1), (1, 1.1)], 2).is_err());
        assert!(SparseDistribution::new(vec![], 2).is_err());
    }

    #[test]
    fn distribution_sampling_respects_probabilities() {
        let d = SparseDistribution::new(vec![(2, 0.25), (5, 0.75)], 4).unwrap();
        let mut rng = substream(1, "dist", 0);
        let n = 40_000;
        let hits = (0..n).filter(|_| d.sample(&mut rng) == 5).count();
        let rate = hits as f64 / f64::from(n);
        assert!((rate - 0.75).abs() < 0.01, "rate {rate}");
        assert_eq!(d.probability(2), 0.25);
        assert_eq!(d.probability(3), 0.0);
    }

    #[test]
    fn quantization_grid() {
        assert_eq!(quantize_loss(0.5, 30_000), 0.5);
        let q = quantize_loss(0.1, 30_000);
        assert!((q - 0.1).abs() <= 0.5 / 32768.0);
        assert_eq!(quantize_loss(q, 30_000), q); // idempotent on the grid
    }

    #[test]
    fn default_block_count_divides() {
        let q = default_block_count(30_000, 10, 1);
        assert_eq!(30_000 % q, 0);
        assert!(q >= 1);
        assert_eq!(default_block_count(7, 2, 1 << 40), 1);
    }

    #[test]
    fn single_arm_reduction_has_zero_regret() {
        let losses = LossMatrix::new(vec![vec![0.25; 40]]).unwrap();
        let mut learner = HedgeLearner::new(1, 0.5);
        let trace =
            run_block_reduction(&losses, &mut learner, 8, &mut substream(2, "red", 0)).unwrap();
        assert!(trace.rounds.iter().all(|&(arm, _)| arm == 0));
        assert_eq!(trace.realized_regret(), 0.0);
    }

    #[test]
    fn constant_blocks_give_exact_estimates() {
        // Losses constant within each block and on the quantization grid:
        // any exploration round reads the exact block average.
        let t = 32;
        let q = 4;
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|arm| {
                (1..=t)
                    .map(|round| {
                        let block = (round - 1) / (t / q);
                        f64::from(u8::from((block + arm) % 2 == 0)) * 0.5
                    })
                    .collect()
            })
            .collect();
        let losses = LossMatrix::new(rows).unwrap();
        let mut learner = HedgeLearner::new(3, 0.2);
        let trace =
            run_block_reduction(&losses, &mut learner, q, &mut substream(3, "red", 1)).unwrap();
        for (block_idx, block) in trace.blocks.iter().enumerate() {
            for &(arm, c) in &block.c_hat {
                let expect = f64::from(u8::from((block_idx + arm) % 2 == 0)) * 0.5;
                assert_eq!(c, expect, "block {block_idx}, arm {arm}");
            }
        }
    }

    #[test]
    fn exploration_bookkeeping_is_exact() {
        let losses = LossMatrix::new(vec![vec![0.5; 60]; 4]).unwrap();
        let mut learner = HedgeLearner::new(4, 0.3);
        let trace =
            run_block_reduction(&losses, &mut learner, 6, &mut substream(4, "red", 2)).unwrap();
        let support_sum: u64 = trace.blocks.iter().map(|b| b.exploration.len() as u64).sum();
        assert_eq!(trace.exploration_rounds, support_sum);
        assert!(trace.exploration_rounds <= (trace.q * trace.s) as u64);
        let report = regret_report(&trace);
        assert_eq!(report.exploration_rounds, support_sum);
        assert_eq!(report.exploration_bound, 24);
        // All-equal losses: zero regret by symmetry.
        assert!((report.realized_regret - 0.0).abs() < 1e-9);
    }

    #[test]
    fn all_zero_losses_cost_nothing_but_still_count_exploration() {
        let losses = LossMatrix::new(vec![vec![0.0; 40]; 3]).unwrap();
        let mut learner = HedgeLearner::new(3, 0.3);
        let trace =
            run_block_reduction(&losses, &mut learner, 5, &mut substream(7, "red", 8)).unwrap();
        let report = regret_report(&trace);
        assert_eq!(report.realized_regret, 0.0);
        assert_eq!(report.exploration_loss, 0.0);
        assert_eq!(report.exploration_rounds, 15); // overhead counted, costless
    }

    #[test]
    fn estimates_are_zero_off_support_and_in_range() {
        let losses = LossMatrix::new(vec![vec![0.3; 40]; 5]).unwrap();
        let mut learner = PoolHedgeLearner::new(5, 2, 3, 0.4, substream(5, "pool", 0)).unwrap();
        let trace =
            run_block_reduction(&losses, &mut learner, 8, &mut substream(5, "red", 3)).unwrap();
        for block in &trace.blocks {
            let support: Vec<usize> = block.distribution.arms().collect();
            assert!(support.len() <= 2);
            for &(arm, c) in &block.c_hat {
                assert!(support.contains(&arm));
                assert!((0.0..=1.0).contains(&c));
            }
            // off-support entries are implicit zeros by construction
            assert_eq!(block.c_hat.len(), support.len());
        }
    }

    #[test]
    fn block_validation_errors() {
        let losses = LossMatrix::new(vec![vec![0.5; 10]; 2]).unwrap();
        let mut learner = HedgeLearner::new(2, 0.3);
        assert!(matches!(
            run_block_reduction(&losses, &mut learner, 3, &mut substream(0, "red", 4)),
            Err(Error::BlockCount { q: 3, t: 10 })
        ));
        let losses = LossMatrix::new(vec![vec![0.5; 10]; 20]).unwrap();
        let mut learner = HedgeLearner::new(20, 0.3);
        assert!(matches!(
            run_block_reduction(&losses, &mut learner, 10, &mut substream(0, "red", 5)),
            Err(Error::BlockTooShort { block_len: 1, support: 20 })
        ));
    }

    /// Records every read in order; the reduction's own reads must be
    /// exactly one per round, in round order, with the benchmark sweep
    /// strictly afterwards.
    struct AuditLosses {
        inner: LossMatrix,
        reads: RefCell<Vec<usize>>,
    }

    impl LossSource for AuditLosses {
        fn arms(&self) -> usize {
            self.inner.arms()
        }
        fn horizon(&self) -> usize {
            self.inner.horizon()
        }
        fn loss(&self, arm: usize, round: usize) -> f64 {
            self.reads.borrow_mut().push(round);
            self.inner.loss(arm, round)
        }
    }

    #[test]
    fn bandit_feedback_purity() {
        let t = 48;
        let inner = LossMatrix::new(vec![vec![0.5; t]; 3]).unwrap();
        let audit = AuditLosses { inner, reads: RefCell::new(Vec::new()) };
        let mut learner = HedgeLearner::new(3, 0.3);
        run_block_reduction(&audit, &mut learner, 6, &mut substream(6, "red", 6)).unwrap();
        let reads = audit.reads.borrow();
        let algorithm_reads = &reads[..t];
        let expected: Vec<usize> = (1..=t).collect();
        assert_eq!(algorithm_reads, &expected[..], "one read per round, in order");
        assert_eq!(reads.len(), t + 3 * t); // plus the benchmark sweep
    }

    #[test]
    fn reduction_equals_direct_hedge_on_realized_estimates() {
        // Hedge is deterministic given its loss sequence, so replaying the
        // realized block estimates must reproduce the emitted
        // distributions bit for bit.
        let mut gen = substream(8, "mat", 0);
        use rand::Rng as _;
        let rows: Vec<Vec<f64>> =
            (0..4).map(|_| (0..60).map(|_| gen.gen::<f64>()).collect()).collect();
        let losses = LossMatrix::new(rows).unwrap();
        let eta = 0.37;
        let mut learner = HedgeLearner::new(4, eta);
        let trace =
            run_block_reduction(&losses, &mut learner, 10, &mut substream(8, "red", 7)).unwrap();

        let mut replay = HedgeLearner::new(4, eta);
        for block in &trace.blocks {
            let p = replay.next_distribution().unwrap();
            assert_eq!(p, block.distribution);
            replay.observe(&block.c_hat).unwrap();
        }
    }
}
