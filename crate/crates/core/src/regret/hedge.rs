//! Multiplicative-weights reference learner.
//!
//! Full support (`s = K`), so it is *not* memory-bounded; its report says
//! so honestly with `K` raw words. It exists as the correctness oracle for
//! the block reduction: deterministic given its loss sequence, with
//! closed-form weights.

use crate::meter::{self, Descriptor, MemoryReport, Quantity};
use crate::regret::{Learner, SparseDistribution};
use crate::{Error, Result};

/// `sqrt(8 ln K / Q)`, the standard tuning for `Q` rounds of `[0,1]`
/// losses.
pub fn default_hedge_eta(k: usize, q: usize) -> f64 {
    (8.0 * (k as f64).ln() / q as f64).sqrt().max(f64::MIN_POSITIVE)
}

#[derive(Clone, Debug)]
pub struct HedgeLearner {
    eta: f64,
    log_weights: Vec<f64>,
    awaiting_observe: bool,
}

impl HedgeLearner {
    pub fn new(arms: usize, eta: f64) -> Self {
        assert!(arms >= 1 && eta > 0.0, "need arms >= 1 and eta > 0");
        Self { eta, log_weights: vec![0.0; arms], awaiting_observe: false }
    }

    /// `p_i` proportional to `exp(log_weights_i)`.
    fn probabilities(&self) -> Vec<f64> {
        let max = self.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = self.log_weights.iter().map(|lw| (lw - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        weights.into_iter().map(|w| w / total).collect()
    }
}

impl Learner for HedgeLearner {
    fn arms(&self) -> usize {
        self.log_weights.len()
    }

    fn max_support(&self) -> usize {
        self.log_weights.len()
    }

    fn next_distribution(&mut self) -> Result<SparseDistribution> {
        if self.awaiting_observe {
            return Err(Error::LearnerProtocol("next_distribution before observing losses"));
        }
        self.awaiting_observe = true;
        let support = self.probabilities().into_iter().enumerate().collect();
        SparseDistribution::new(support, self.max_support())
    }

    fn observe(&mut self, losses: &[(usize, f64)]) -> Result<()> {
        if !self.awaiting_observe {
            return Err(Error::LearnerProtocol("observe without a pending distribution"));
        }
        for &(arm, loss) in losses {
            if arm >= self.log_weights.len() {
                return Err(Error::LearnerProtocol("loss for an arm outside the support"));
            }
            self.log_weights[arm] -= self.eta * loss;
        }
        self.awaiting_observe = false;
        Ok(())
    }

    fn memory_report(&self) -> MemoryReport {
        meter::account(&[
            Descriptor::persistent("weights", Quantity::Word64, self.log_weights.len() as u64),
            Descriptor::persistent("learning-rate", Quantity::Word64, 1),
            Descriptor::persistent("protocol-flag", Quantity::IntCounter { max: 1 }, 1),
        ])
        .expect("static descriptors")
    }

    fn name(&self) -> &'static str {
        "hedge"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_distribution_is_uniform() {
        let mut h = HedgeLearner::new(4, 0.5);
        let p = h.next_distribution().unwrap();
        for (_, prob) in p.support() {
            assert!((prob - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_losses_stay_uniform() {
        let mut h = HedgeLearner::new(3, 0.5);
        for _ in 0..10 {
            let p = h.next_distribution().unwrap();
            for (_, prob) in p.support() {
                assert!((prob - 1.0 / 3.0).abs() < 1e-12);
            }
            h.observe(&[(0, 0.0), (1, 0.0), (2, 0.0)]).unwrap();
        }
    }

    #[test]
    fn two_arm_closed_form() {
        // Losses always (0, 1): after q steps p(arm 0) = 1 / (1 + e^(-eta q)).
        let eta = 0.3;
        let mut h = HedgeLearner::new(2, eta);
        for q in 0..20 {
            let p = h.next_distribution().unwrap();
            let expect = 1.0 / (1.0 + (-eta * f64::from(q)).exp());
            assert!((p.probability(0) - expect).abs() < 1e-12, "q={q}");
            h.observe(&[(0, 0.0), (1, 1.0)]).unwrap();
        }
    }

    #[test]
    fn best_arm_probability_increases_on_constant_losses() {
        let mut h = HedgeLearner::new(3, 0.4);
        let mut last = 0.0;
        for _ in 0..30 {
            let p = h.next_distribution().unwrap();
            assert!(p.probability(1) >= last);
            last = p.probability(1);
            h.observe(&[(0, 0.9), (1, 0.1), (2, 0.5)]).unwrap();
        }
        assert!(last > 0.9);
    }

    #[test]
    fn protocol_violations_error() {
        let mut h = HedgeLearner::new(2, 0.5);
        assert!(matches!(h.observe(&[(0, 0.1)]), Err(Error::LearnerProtocol(_))));
        h.next_distribution().unwrap();
        assert!(matches!(h.next_distribution(), Err(Error::LearnerProtocol(_))));
        h.observe(&[(0, 0.1), (1, 0.2)]).unwrap();
        h.observe(&[(0, 0.1)]).map(|_| ()).unwrap_err();
    }

    #[test]
    fn single_arm_is_a_point_mass() {
        let mut h = HedgeLearner::new(1, 0.5);
        for _ in 0..5 {
            let p = h.next_distribution().unwrap();
            assert_eq!(p.support(), &[(0, 1.0)]);
            h.observe(&[(0, 1.0)]).unwrap();
        }
    }

    #[test]
    fn reports_theta_k_words() {
        let h = HedgeLearner::new(10, 0.5);
        assert_eq!(h.bits(), 10 * 64 + 64 + 1);
    }
}
