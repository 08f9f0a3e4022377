//! A genuinely memory-bounded learner: Hedge over a rotating pool of `s`
//! arms.
//!
//! Weights live only for pool members. Every `epoch_len` blocks the
//! minimum-weight arm is evicted and a uniformly random non-pool arm is
//! admitted at the pool's median weight; with `s = K` no non-pool arm ever
//! exists and the learner degenerates to plain Hedge. This is a simple
//! stand-in with honest `O(s log K)`-scale accounting, not a
//! regret-optimal construction, and nothing here claims otherwise.

use rand::Rng;

use crate::meter::{self, Descriptor, MemoryReport, Quantity};
use crate::regret::{Learner, SparseDistribution};
use crate::rng::Stream;

use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct PoolHedgeLearner {
    arms: usize,
    s: usize,
    epoch_len: usize,
    eta: f64,
    /// Pool member arm indices, ascending.
    pool: Vec<usize>,
    /// Log-weights aligned with `pool`.
    log_weights: Vec<f64>,
    blocks_in_epoch: usize,
    admission_rng: Stream,
    awaiting_observe: bool,
}

impl PoolHedgeLearner {
    pub fn new(arms: usize, s: usize, epoch_len: usize, eta: f64, admission_rng: Stream) -> Result<Self> {
        if s < 2 || s > arms {
            return Err(Error::InvalidParameter(format!("pool size {s} outside [2, {arms}]")));
        }
        if epoch_len == 0 || eta <= 0.0 {
            return Err(Error::InvalidParameter("need epoch_len >= 1 and eta > 0".into()));
        }
        Ok(Self {
            arms,
            s,
            epoch_len,
            eta,
            pool: (0..s).collect(),
            log_weights: vec![0.0; s],
            blocks_in_epoch: 0,
            admission_rng,
            awaiting_observe: false,
        })
    }

    fn rotate(&mut self) {
        if self.s == self.arms {
            return; // every arm is pooled; nothing to admit
        }
        let evict = self
            .log_weights
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.total_cmp(b))
            .map(|(slot, _)| slot)
            .expect("nonempty pool");
        self.pool.remove(evict);
        let mut remaining = self.log_weights.clone();
        remaining.remove(evict);
        remaining.sort_by(f64::total_cmp);
        let median = remaining[remaining.len() / 2];
        self.log_weights.remove(evict);

        // Uniform over arms currently outside the pool.
        let outside = self.arms - self.pool.len();
        let pick = self.admission_rng.gen_range(0..outside);
        let mut seen = 0;
        let mut admitted = None;
        for arm in 0..self.arms {
            if self.pool.binary_search(&arm).is_err() {
                if seen == pick {
                    admitted = Some(arm);
                    break;
                }
                seen += 1;
            }
        }
        let admitted = admitted.expect("an outside arm exists");
        let slot = self.pool.partition_point(|&a| a < admitted);
        self.pool.insert(slot, admitted);
        self.log_weights.insert(slot, median);
    }

    #[cfg(test)]
    pub(crate) fn pool(&self) -> &[usize] {
        &self.pool
    }
}

impl Learner for PoolHedgeLearner {
    fn arms(&self) -> usize {
        self.arms
    }

    fn max_support(&self) -> usize {
        self.s
    }

    fn next_distribution(&mut self) -> Result<SparseDistribution> {
        if self.awaiting_observe {
            return Err(Error::LearnerProtocol("next_distribution before observing losses"));
        }
        self.awaiting_observe = true;
        let max = self.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = self.log_weights.iter().map(|lw| (lw - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        let support = self
            .pool
            .iter()
            .zip(&weights)
            .map(|(&arm, &w)| (arm, w / total))
            .collect();
        SparseDistribution::new(support, self.s)
    }

    fn observe(&mut self, losses: &[(usize, f64)]) -> Result<()> {
        if !self.awaiting_observe {
            return Err(Error::LearnerProtocol("observe without a pending distribution"));
        }
        for &(arm, loss) in losses {
            match self.pool.binary_search(&arm) {
                Ok(slot) => self.log_weights[slot] -= self.eta * loss,
                Err(_) => return Err(Error::LearnerProtocol("loss for an arm outside the pool")),
            }
        }
        self.awaiting_observe = false;
        self.blocks_in_epoch += 1;
        if self.blocks_in_epoch == self.epoch_len {
            self.blocks_in_epoch = 0;
            self.rotate();
        }
        Ok(())
    }

    fn memory_report(&self) -> MemoryReport {
        meter::account(&[
            Descriptor::persistent("pool-ids", Quantity::ArmIndex { arms: self.arms as u64 }, self.s as u64),
            Descriptor::persistent("pool-weights", Quantity::Word64, self.s as u64),
            Descriptor::persistent(
                "epoch-counter",
                Quantity::IntCounter { max: self.epoch_len as u64 },
                1,
            ),
            Descriptor::seed("admission-seed", 64, 1),
        ])
        .expect("static descriptors")
    }

    fn name(&self) -> &'static str {
        "pool-hedge"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regret::HedgeLearner;
    use crate::rng::substream;
    use crate::util::ceil_log2;

    #[test]
    fn full_pool_matches_plain_hedge() {
        let eta = 0.3;
        let mut pool = PoolHedgeLearner::new(4, 4, 2, eta, substream(0, "pool", 0)).unwrap();
        let mut hedge = HedgeLearner::new(4, eta);
        let losses: Vec<Vec<(usize, f64)>> = (0..12)
            .map(|i| (0..4).map(|arm| (arm, ((arm + i) % 3) as f64 / 2.0)).collect())
            .collect();
        for step in &losses {
            let p1 = pool.next_distribution().unwrap();
            let p2 = hedge.next_distribution().unwrap();
            for arm in 0..4 {
                assert!((p1.probability(arm) - p2.probability(arm)).abs() < 1e-12);
            }
            pool.observe(step).unwrap();
            hedge.observe(step).unwrap();
        }
        assert_eq!(pool.pool(), &[0, 1, 2, 3]);
    }

    #[test]
    fn good_arm_sticks_once_admitted() {
        // Arm 7 is the only zero-loss arm among 8, pool of 3. Once admitted
        // its weight only grows while others shrink, so it is never the
        // eviction minimum again.
        let mut learner = PoolHedgeLearner::new(8, 3, 2, 0.8, substream(40, "pool", 1)).unwrap();
        let mut admitted_at = None;
        for block in 0..200 {
            let p = learner.next_distribution().unwrap();
            let support: Vec<usize> = p.arms().collect();
            if support.contains(&7) && admitted_at.is_none() {
                admitted_at = Some(block);
            }
            if let Some(since) = admitted_at {
                assert!(support.contains(&7), "arm 7 evicted after block {since} at {block}");
            }
            let losses: Vec<(usize, f64)> =
                support.iter().map(|&arm| (arm, if arm == 7 { 0.0 } else { 1.0 })).collect();
            learner.observe(&losses).unwrap();
        }
        assert!(admitted_at.is_some(), "arm 7 never admitted in 200 blocks");
    }

    #[test]
    fn support_stays_within_bound() {
        let mut learner = PoolHedgeLearner::new(10, 4, 1, 0.5, substream(41, "pool", 2)).unwrap();
        for _ in 0..50 {
            let p = learner.next_distribution().unwrap();
            assert!(p.support().len() <= 4);
            let losses: Vec<(usize, f64)> = p.arms().map(|arm| (arm, 0.5)).collect();
            learner.observe(&losses).unwrap();
        }
    }

    #[test]
    fn bits_formula_exact() {
        let learner = PoolHedgeLearner::new(100, 5, 8, 0.5, substream(0, "pool", 3)).unwrap();
        let expected = 5 * (ceil_log2(100) + 64) + ceil_log2(9) + 64;
        assert_eq!(learner.bits(), expected);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PoolHedgeLearner::new(4, 1, 2, 0.5, substream(0, "p", 0)).is_err());
        assert!(PoolHedgeLearner::new(4, 5, 2, 0.5, substream(0, "p", 0)).is_err());
        assert!(PoolHedgeLearner::new(4, 2, 0, 0.5, substream(0, "p", 0)).is_err());
    }
}
