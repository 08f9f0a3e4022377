//! Bandit reward instances.
//!
//! An instance is a `K x T` table of rewards in `[0,1]`, fixed before any
//! algorithm runs and immutable afterwards (the oblivious-adversary model).
//! Small instances are materialized densely; large generated ones stay
//! backed by a pure function of `(arm, round)` so that horizons like
//! `T = 2^20` need no quadratic storage. The two representations are
//! observationally indistinguishable.
//!
//! Rounds are 1-based, arms 0-based.

mod polarized;
mod set_disjointness;
mod sign_tree;
mod sparsity;

pub mod io;

pub use polarized::{gen_polarized, PolarizedParams};
pub use set_disjointness::{
    centered_hit, gen_set_disjointness, Lambda, SetDisjointnessSpec, DEFAULT_LAMBDA,
};
pub use sign_tree::{
    copy_probability, sample_sign_tree, sign_tree_pair_to_instance, SignTreeAssignment,
};
pub use sparsity::{local_sparsity, naive_local_sparsity, SparsityProfile};

use std::sync::Arc;

use crate::{Error, Result};

/// Anything that serves rewards. Algorithms are generic over this so tests
/// can interpose auditing wrappers.
pub trait RewardSource {
    fn arms(&self) -> usize;
    fn horizon(&self) -> usize;
    /// Reward of `arm` at 1-based `round`. Panics outside `0..arms`,
    /// `1..=horizon`; staying in range is the caller's contract.
    fn reward(&self, arm: usize, round: usize) -> f64;
}

/// Instances larger than this many cells stay generator-backed.
pub const DENSE_CELL_LIMIT: usize = 1 << 24;

type Generator = Arc<dyn Fn(usize, usize) -> f64 + Send + Sync>;

enum Source {
    Dense(Vec<f64>),
    Generator(Generator),
}

/// A fixed `K x T` reward table.
pub struct BanditInstance {
    k: usize,
    t: usize,
    label: String,
    source: Source,
}

impl std::fmt::Debug for BanditInstance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BanditInstance")
            .field("k", &self.k)
            .field("t", &self.t)
            .field("label", &self.label)
            .field("dense", &self.is_dense())
            .finish()
    }
}

impl BanditInstance {
    /// Build a dense instance from per-arm rows. Rejects any entry outside
    /// `[0,1]`, naming the offending cell.
    pub fn dense(rows: Vec<Vec<f64>>, label: &str) -> Result<Self> {
        let k = rows.len();
        let t = rows.first().map_or(0, Vec::len);
        if k == 0 || t == 0 || rows.iter().any(|r| r.len() != t) {
            return Err(Error::BadDimensions { k, t });
        }
        let mut values = Vec::with_capacity(k * t);
        for (arm, row) in rows.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::RewardOutOfRange { arm, round: i + 1, value: v });
                }
                values.push(v);
            }
        }
        Ok(Self { k, t, label: label.to_string(), source: Source::Dense(values) })
    }

    /// Build from a pure function of `(arm, 1-based round)`. Materializes a
    /// dense table when `k * t` is small enough, per [`DENSE_CELL_LIMIT`].
    pub fn from_fn<F>(k: usize, t: usize, label: &str, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> f64 + Send + Sync + 'static,
    {
        if k == 0 || t == 0 {
            return Err(Error::BadDimensions { k, t });
        }
        let source = if k.saturating_mul(t) <= DENSE_CELL_LIMIT {
            let mut values = Vec::with_capacity(k * t);
            for arm in 0..k {
                for round in 1..=t {
                    let v = f(arm, round);
                    if !(0.0..=1.0).contains(&v) {
                        return Err(Error::RewardOutOfRange { arm, round, value: v });
                    }
                    values.push(v);
                }
            }
            Source::Dense(values)
        } else {
            Source::Generator(Arc::new(f))
        };
        Ok(Self { k, t, label: label.to_string(), source })
    }

    /// A Bernoulli(`p`) table derived statelessly from `seed`; the sanity
    /// baseline for stochastic comparisons.
    pub fn bernoulli(k: usize, t: usize, p: f64, seed: u64, label: &str) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("bernoulli p={p} outside [0,1]")));
        }
        Self::from_fn(k, t, label, move |arm, round| {
            let u = mix3(seed, arm as u64, round as u64);
            // 53-bit uniform in [0,1).
            let x = (u >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            if x < p {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.source, Source::Dense(_))
    }
}

impl RewardSource for BanditInstance {
    fn arms(&self) -> usize {
        self.k
    }

    fn horizon(&self) -> usize {
        self.t
    }

    fn reward(&self, arm: usize, round: usize) -> f64 {
        assert!(arm < self.k, "arm {arm} out of range (k={})", self.k);
        assert!(round >= 1 && round <= self.t, "round {round} out of range (t={})", self.t);
        match &self.source {
            Source::Dense(values) => values[arm * self.t + (round - 1)],
            Source::Generator(f) => f(arm, round),
        }
    }
}

impl<S: RewardSource + ?Sized> RewardSource for &S {
    fn arms(&self) -> usize {
        (**self).arms()
    }
    fn horizon(&self) -> usize {
        (**self).horizon()
    }
    fn reward(&self, arm: usize, round: usize) -> f64 {
        (**self).reward(arm, round)
    }
}

/// Exact average of the `w` rewards of `arm` starting at round `t0`.
pub fn window_average<S: RewardSource>(src: &S, arm: usize, t0: usize, w: usize) -> Result<f64> {
    let t = src.horizon();
    if t0 < 1 || w < 1 || t0 + w - 1 > t {
        return Err(Error::WindowOutOfRange { t0, w, t });
    }
    let mut acc = crate::util::Kahan::new();
    for round in t0..t0 + w {
        acc.add(src.reward(arm, round));
    }
    Ok(acc.value() / w as f64)
}

/// splitmix64-style stateless mixer over three words.
fn mix3(a: u64, b: u64, c: u64) -> u64 {
    let mut x = a ^ b.wrapping_mul(0x9e3779b97f4a7c15) ^ c.wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_constant_rows() {
        let inst =
            BanditInstance::dense(vec![vec![1.0; 4], vec![0.0; 4]], "constant").unwrap();
        for t0 in 1..=3 {
            for w in 1..=(4 - t0 + 1) {
                assert_eq!(window_average(&inst, 0, t0, w).unwrap(), 1.0);
                assert_eq!(window_average(&inst, 1, t0, w).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn dense_rejects_out_of_range_entry() {
        let err = BanditInstance::dense(vec![vec![0.5, 1.5]], "bad");
        match err {
            Err(Error::RewardOutOfRange { arm, round, value }) => {
                assert_eq!((arm, round), (0, 2));
                assert_eq!(value, 1.5);
            }
            other => panic!("expected range error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_one_by_one() {
        let inst = BanditInstance::dense(vec![vec![0.5]], "tiny").unwrap();
        assert_eq!(inst.arms(), 1);
        assert_eq!(inst.horizon(), 1);
        assert_eq!(inst.reward(0, 1), 0.5);
    }

    #[test]
    fn generator_and_dense_agree() {
        // Same (arm, round) map through both representations.
        let f = |arm: usize, round: usize| if (arm + round).is_multiple_of(2) { 1.0 } else { 0.0 };
        let gen = BanditInstance {
            k: 3,
            t: 8,
            label: "gen".into(),
            source: Source::Generator(Arc::new(f)),
        };
        let dense = BanditInstance::from_fn(3, 8, "dense", f).unwrap();
        assert!(dense.is_dense());
        for arm in 0..3 {
            for round in 1..=8 {
                assert_eq!(gen.reward(arm, round), dense.reward(arm, round));
            }
        }
    }

    #[test]
    fn alternating_window_average() {
        let inst = BanditInstance::dense(vec![vec![1.0, 0.0, 1.0, 0.0]], "alt").unwrap();
        assert_eq!(window_average(&inst, 0, 1, 2).unwrap(), 0.5);
        assert!(matches!(
            window_average(&inst, 0, 4, 2),
            Err(Error::WindowOutOfRange { .. })
        ));
    }

    #[test]
    fn bernoulli_is_deterministic_and_binary() {
        let a = BanditInstance::bernoulli(3, 100, 0.3, 11, "bern").unwrap();
        let b = BanditInstance::bernoulli(3, 100, 0.3, 11, "bern").unwrap();
        let mut ones = 0;
        for arm in 0..3 {
            for round in 1..=100 {
                let v = a.reward(arm, round);
                assert_eq!(v, b.reward(arm, round));
                assert!(v == 0.0 || v == 1.0);
                ones += v as u64;
            }
        }
        assert!(ones > 40 && ones < 140, "ones={ones}");
    }
}
