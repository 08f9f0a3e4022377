//! Polarized instances: a few heavy arms that are almost always on, and a
//! crowd of light arms with a tiny total budget.
//!
//! With `r` heavy arms missing at most `isqrt(T)/2` rounds each, every
//! window of length `w >= sqrt(T)` keeps each heavy count at `w/2` or more,
//! which caps the local sparsity at `O(r)` regardless of `K`. This is the
//! standard family on which the sketch-backed identifier earns its memory
//! bound.

use rand::Rng;

use crate::instances::BanditInstance;
use crate::util::isqrt;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct PolarizedParams {
    pub k: usize,
    pub t: usize,
    /// Number of heavy arms, occupying arm indices `0..r`.
    pub r: usize,
    /// Exact number of ones granted to each light arm.
    pub light_cap: usize,
    /// Zeros punched into each heavy arm, at most `isqrt(t)/2`.
    pub heavy_zeros: usize,
}

impl PolarizedParams {
    /// Defaults: `light_cap = ceil(4 * t^(1/4))`, `heavy_zeros = isqrt(t)/2`.
    pub fn new(k: usize, t: usize, r: usize) -> Self {
        let light_cap = (4.0 * (t as f64).powf(0.25)).ceil() as usize;
        Self { k, t, r, light_cap, heavy_zeros: isqrt(t) / 2 }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.t == 0 {
            return Err(Error::BadDimensions { k: self.k, t: self.t });
        }
        if self.r < 1 || self.r > self.k {
            return Err(Error::InvalidParameter(format!(
                "heavy-arm count r={} outside [1, {}]",
                self.r, self.k
            )));
        }
        if self.k * self.k > self.t {
            return Err(Error::InvalidParameter(format!(
                "polarized family needs K^2 <= T, got K={}, T={}",
                self.k, self.t
            )));
        }
        if self.light_cap > self.t {
            return Err(Error::InvalidParameter(format!(
                "light_cap={} exceeds horizon {}",
                self.light_cap, self.t
            )));
        }
        if self.heavy_zeros > isqrt(self.t) / 2 {
            return Err(Error::InvalidParameter(format!(
                "heavy_zeros={} exceeds isqrt(T)/2 = {}",
                self.heavy_zeros,
                isqrt(self.t) / 2
            )));
        }
        Ok(())
    }
}

/// Generate a polarized instance. Zero positions of heavy arms and one
/// positions of light arms are placed uniformly without replacement; the
/// draw order (heavy arms first, ascending) is part of the definition so
/// equal seeds give bit-identical instances.
pub fn gen_polarized<R: Rng>(params: &PolarizedParams, rng: &mut R) -> Result<BanditInstance> {
    params.validate()?;
    let &PolarizedParams { k, t, r, light_cap, heavy_zeros } = params;

    let mut exceptions: Vec<Vec<u32>> = Vec::with_capacity(k);
    for _ in 0..r {
        exceptions.push(sorted_rounds(rng, t, heavy_zeros));
    }
    for _ in r..k {
        exceptions.push(sorted_rounds(rng, t, light_cap));
    }

    let label = format!("polarized(r={r},light_cap={light_cap},zeros={heavy_zeros})");
    BanditInstance::from_fn(k, t, &label, move |arm, round| {
        let hit = exceptions[arm].binary_search(&(round as u32)).is_ok();
        let heavy = arm < r;
        if heavy != hit {
            1.0
        } else {
            0.0
        }
    })
}

fn sorted_rounds<R: Rng>(rng: &mut R, t: usize, amount: usize) -> Vec<u32> {
    let mut rounds: Vec<u32> =
        rand::seq::index::sample(rng, t, amount).iter().map(|i| i as u32 + 1).collect();
    rounds.sort_unstable();
    rounds
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::RewardSource;
    use crate::rng::substream;

    fn row_total(inst: &BanditInstance, arm: usize) -> usize {
        (1..=inst.horizon()).map(|t| inst.reward(arm, t) as usize).sum()
    }

    #[test]
    fn heavy_and_light_totals() {
        let params = PolarizedParams { k: 8, t: 256, r: 3, light_cap: 10, heavy_zeros: 5 };
        let inst = gen_polarized(&params, &mut substream(1, "pol", 0)).unwrap();
        for arm in 0..3 {
            assert_eq!(row_total(&inst, arm), 256 - 5);
        }
        for arm in 3..8 {
            assert_eq!(row_total(&inst, arm), 10);
        }
    }

    #[test]
    fn all_heavy_no_deletions_is_all_ones() {
        let params = PolarizedParams { k: 4, t: 64, r: 4, light_cap: 0, heavy_zeros: 0 };
        let inst = gen_polarized(&params, &mut substream(2, "pol", 0)).unwrap();
        for arm in 0..4 {
            for round in 1..=64 {
                assert_eq!(inst.reward(arm, round), 1.0);
            }
        }
    }

    #[test]
    fn same_seed_bit_identical() {
        let params = PolarizedParams::new(8, 1 << 10, 2);
        let a = gen_polarized(&params, &mut substream(9, "pol", 7)).unwrap();
        let b = gen_polarized(&params, &mut substream(9, "pol", 7)).unwrap();
        for arm in 0..8 {
            for round in 1..=1 << 10 {
                assert_eq!(a.reward(arm, round), b.reward(arm, round));
            }
        }
    }

    #[test]
    fn parameter_validation() {
        let mut rng = substream(0, "pol", 0);
        let bad_r = PolarizedParams { k: 4, t: 64, r: 5, light_cap: 0, heavy_zeros: 0 };
        assert!(gen_polarized(&bad_r, &mut rng).is_err());
        let bad_cap = PolarizedParams { k: 4, t: 64, r: 1, light_cap: 65, heavy_zeros: 0 };
        assert!(gen_polarized(&bad_cap, &mut rng).is_err());
        let bad_kt = PolarizedParams { k: 10, t: 64, r: 1, light_cap: 0, heavy_zeros: 0 };
        assert!(gen_polarized(&bad_kt, &mut rng).is_err());
        let bad_zeros = PolarizedParams { k: 4, t: 64, r: 1, light_cap: 0, heavy_zeros: 5 };
        assert!(gen_polarized(&bad_zeros, &mut rng).is_err());
    }

    #[test]
    fn large_instance_stays_generator_backed() {
        let params = PolarizedParams::new(256, 1 << 18, 2);
        let inst = gen_polarized(&params, &mut substream(3, "pol", 0)).unwrap();
        assert!(!inst.is_dense());
        assert_eq!(row_total(&inst, 0), (1 << 18) - 256);
    }
}
