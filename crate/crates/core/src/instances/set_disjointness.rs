//! Set-disjointness embeddings.
//!
//! Two parties hold subsets `A, B` of `[n]` with the promise that they share
//! at most one element. The embedding turns the pair into a bandit instance
//! with a pivot round `tau`: index arm `i` pays 1 before the pivot iff
//! `i in A` and from the pivot on iff `i in B`, while a dummy arm pays 1
//! exactly on a band of half-width `lambda * w` around the pivot. On any
//! window that straddles the pivot with a `lambda` margin on both sides, the
//! best arm reveals whether the sets intersect, with a constant margin.

use crate::instances::BanditInstance;
use crate::{Error, Result};

/// Exact rational band half-width fraction, e.g. `(2, 5)` for 2/5.
pub type Lambda = (u64, u64);

pub const DEFAULT_LAMBDA: Lambda = (2, 5);

#[derive(Clone, Debug)]
pub struct SetDisjointnessSpec {
    /// Universe size; the instance has `n + 1` arms (dummy arm 0 plus one
    /// arm per element).
    pub n: usize,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    /// Pivot round in `[1, t]`.
    pub tau: usize,
    pub lambda: Lambda,
    pub t: usize,
    /// Window length of interest, sizing the dummy band.
    pub w: usize,
}

impl SetDisjointnessSpec {
    pub fn new(n: usize, a: Vec<usize>, b: Vec<usize>, tau: usize, t: usize, w: usize) -> Self {
        Self { n, a, b, tau, lambda: DEFAULT_LAMBDA, t, w }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.t == 0 {
            return Err(Error::BadDimensions { k: self.n + 1, t: self.t });
        }
        if self.tau < 1 || self.tau > self.t {
            return Err(Error::InvalidParameter(format!(
                "pivot tau={} outside [1, {}]",
                self.tau, self.t
            )));
        }
        let (num, den) = self.lambda;
        if num == 0 || den == 0 || 2 * num >= den {
            return Err(Error::InvalidParameter(format!(
                "lambda={num}/{den} outside (0, 1/2)"
            )));
        }
        if self.w < 1 || self.w > self.t {
            return Err(Error::InvalidParameter(format!(
                "window length w={} outside [1, {}]",
                self.w, self.t
            )));
        }
        for set in [&self.a, &self.b] {
            if set.iter().any(|&i| i < 1 || i > self.n) {
                return Err(Error::InvalidParameter("set element outside [1, n]".into()));
            }
        }
        if self.intersection_size() > 1 {
            return Err(Error::InvalidParameter(
                "promise violated: |A intersect B| must be 0 or 1".into(),
            ));
        }
        let (lo, hi) = self.band();
        if lo > hi {
            return Err(Error::InvalidParameter("dummy band falls outside the horizon".into()));
        }
        Ok(())
    }

    pub fn intersection_size(&self) -> usize {
        self.a.iter().filter(|i| self.b.contains(i)).count()
    }

    pub fn intersection(&self) -> Option<usize> {
        self.a.iter().copied().find(|i| self.b.contains(i))
    }

    /// Inclusive round range of the dummy band, already clipped to `[1, t]`:
    /// the integers in `[tau - lambda*w, tau + lambda*w)`.
    pub fn band(&self) -> (usize, usize) {
        let (num, den) = self.lambda;
        let floor_lw = (num * self.w as u64 / den) as usize;
        let ceil_lw = (num * self.w as u64).div_ceil(den) as usize;
        let lo = self.tau.saturating_sub(floor_lw).max(1);
        let hi = (self.tau + ceil_lw - 1).min(self.t);
        (lo, hi)
    }

    /// Band length before clipping; equals `2 * lambda * w` when that is an
    /// integer and is within one round of it otherwise.
    pub fn band_len_unclipped(&self) -> usize {
        let (num, den) = self.lambda;
        let floor_lw = (num * self.w as u64 / den) as usize;
        let ceil_lw = (num * self.w as u64).div_ceil(den) as usize;
        floor_lw + ceil_lw
    }
}

/// Does the window `[t0, t0 + w - 1]` contain `tau` with at least a
/// `lambda` fraction of its length on each side?
pub fn centered_hit(t0: usize, w: usize, tau: usize, lambda: Lambda) -> bool {
    let (num, den) = lambda;
    let ceil_lw = (num * w as u64).div_ceil(den) as usize;
    tau >= t0 + ceil_lw && tau + ceil_lw <= t0 + w
}

/// Materialize the embedding as a `(n+1) x t` instance.
pub fn gen_set_disjointness(spec: &SetDisjointnessSpec) -> Result<BanditInstance> {
    spec.validate()?;
    let mut in_a = vec![false; spec.n + 1];
    let mut in_b = vec![false; spec.n + 1];
    for &i in &spec.a {
        in_a[i] = true;
    }
    for &i in &spec.b {
        in_b[i] = true;
    }
    let tau = spec.tau;
    let (band_lo, band_hi) = spec.band();
    let label = format!("set-disjointness(n={},tau={},w={})", spec.n, tau, spec.w);
    BanditInstance::from_fn(spec.n + 1, spec.t, &label, move |arm, round| {
        if arm == 0 {
            return f64::from(u8::from(round >= band_lo && round <= band_hi));
        }
        let before = round < tau && in_a[arm];
        let after = round >= tau && in_b[arm];
        f64::from(u8::from(before || after))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{window_average, RewardSource};

    fn spec_10() -> SetDisjointnessSpec {
        // w = 10 makes lambda * w = 4 exact.
        SetDisjointnessSpec::new(5, vec![1, 3], vec![3, 4], 50, 100, 10)
    }

    #[test]
    fn intersection_arm_is_all_ones() {
        let spec = spec_10();
        assert_eq!(spec.intersection(), Some(3));
        let inst = gen_set_disjointness(&spec).unwrap();
        for round in 1..=100 {
            assert_eq!(inst.reward(3, round), 1.0);
        }
    }

    #[test]
    fn reward_formula_matches_indicators() {
        let spec = spec_10();
        let inst = gen_set_disjointness(&spec).unwrap();
        for arm in 1..=5 {
            for round in 1..=100 {
                let expect = f64::from(u8::from(
                    (round < 50 && spec.a.contains(&arm)) || (round >= 50 && spec.b.contains(&arm)),
                ));
                assert_eq!(inst.reward(arm, round), expect, "arm {arm} round {round}");
            }
        }
    }

    #[test]
    fn dummy_band_and_hit_window_averages() {
        let spec = spec_10();
        let inst = gen_set_disjointness(&spec).unwrap();
        // Band is [46, 53]: 8 = 2 * (2/5) * 10 rounds.
        assert_eq!(spec.band(), (46, 53));
        let total: f64 = (1..=100).map(|t| inst.reward(0, t)).sum();
        assert_eq!(total, 8.0);

        // t0 = 44 puts the pivot 6 rounds in: a centered hit.
        assert!(centered_hit(44, 10, 50, DEFAULT_LAMBDA));
        assert_eq!(window_average(&inst, 0, 44, 10).unwrap(), 0.8);
        // One-sided arms stay at or below 1 - lambda.
        assert!(window_average(&inst, 1, 44, 10).unwrap() <= 0.6);
        assert!(window_average(&inst, 4, 44, 10).unwrap() <= 0.6);
        // The shared element stays at 1.
        assert_eq!(window_average(&inst, 3, 44, 10).unwrap(), 1.0);
    }

    #[test]
    fn hit_margin_edges() {
        // ceil(lambda * w) = 4; hits need t0 + 4 <= tau <= t0 + 6.
        assert!(!centered_hit(47, 10, 50, DEFAULT_LAMBDA));
        assert!(centered_hit(46, 10, 50, DEFAULT_LAMBDA));
        assert!(centered_hit(44, 10, 50, DEFAULT_LAMBDA));
        assert!(!centered_hit(43, 10, 50, DEFAULT_LAMBDA));
    }

    #[test]
    fn band_clips_to_horizon() {
        let spec = SetDisjointnessSpec::new(3, vec![1], vec![2], 2, 100, 10);
        let inst = gen_set_disjointness(&spec).unwrap();
        assert_eq!(spec.band(), (1, 5));
        let total: f64 = (1..=100).map(|t| inst.reward(0, t)).sum();
        assert_eq!(total, 5.0);
    }

    #[test]
    fn validation_rejects_bad_specs() {
        let mut spec = spec_10();
        spec.tau = 0;
        assert!(spec.validate().is_err());
        let mut spec = spec_10();
        spec.lambda = (1, 2);
        assert!(spec.validate().is_err());
        let mut spec = spec_10();
        spec.b = vec![1, 3]; // |A ∩ B| = 2
        assert!(spec.validate().is_err());
        let mut spec = spec_10();
        spec.a = vec![9];
        assert!(spec.validate().is_err());
    }
}
