//! Local sparsity analysis.
//!
//! A window's sparsity is the squared ratio of its per-arm count vector's
//! l2 norm to its largest entry; an instance is locally `phi`-sparse for
//! window length `w` when every contiguous `w`-window stays at or below
//! `phi`. The analyzer computes the exact maximum with one sliding pass,
//! re-ranking arms inside each window. On binary instances the incremental
//! sums are exact integers in `f64`, so the pass agrees bit-for-bit with a
//! naive per-window recount.

use crate::instances::RewardSource;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct SparsityProfile {
    pub window_w: usize,
    /// Maximum over all windows of `sum_i n_i(I)^2 / max_i n_i(I)^2`.
    pub phi: f64,
    /// 1-based start of the first window attaining the maximum.
    pub worst_window_start: usize,
    /// Per-arm totals over the full horizon.
    pub per_arm_totals: Vec<f64>,
}

/// Exact local sparsity of `src` at window length `w`.
///
/// Errors with the offending window if some window has no nonzero arm, in
/// which case the ratio is undefined.
pub fn local_sparsity<S: RewardSource>(src: &S, w: usize) -> Result<SparsityProfile> {
    let (k, t) = (src.arms(), src.horizon());
    if w < 1 || w > t {
        return Err(Error::WindowOutOfRange { t0: 1, w, t });
    }

    let mut counts = vec![0.0f64; k];
    for (arm, count) in counts.iter_mut().enumerate() {
        for round in 1..=w {
            *count += src.reward(arm, round);
        }
    }

    let mut best_phi = f64::NEG_INFINITY;
    let mut best_start = 1;
    for start in 1..=t - w + 1 {
        if start > 1 {
            for (arm, c) in counts.iter_mut().enumerate() {
                *c += src.reward(arm, start + w - 1) - src.reward(arm, start - 1);
            }
        }
        let phi = window_phi(&counts).ok_or(Error::PhiUndefined { start, len: w })?;
        if phi > best_phi {
            best_phi = phi;
            best_start = start;
        }
    }

    let mut per_arm_totals = vec![0.0f64; k];
    for (arm, total) in per_arm_totals.iter_mut().enumerate() {
        for round in 1..=t {
            *total += src.reward(arm, round);
        }
    }

    Ok(SparsityProfile { window_w: w, phi: best_phi, worst_window_start: best_start, per_arm_totals })
}

fn window_phi(counts: &[f64]) -> Option<f64> {
    let top = counts.iter().copied().fold(0.0f64, f64::max);
    if top <= 0.0 {
        return None;
    }
    let sum_sq: f64 = counts.iter().map(|c| c * c).sum();
    Some(sum_sq / (top * top))
}

/// Direct per-window recount: the analyzer's independent oracle. Quadratic
/// in the window count; meant for cross-checks on small horizons, where it
/// must agree with [`local_sparsity`] exactly on binary instances.
pub fn naive_local_sparsity<S: RewardSource>(src: &S, w: usize) -> Result<(f64, usize)> {
    let (k, t) = (src.arms(), src.horizon());
    if w < 1 || w > t {
        return Err(Error::WindowOutOfRange { t0: 1, w, t });
    }
    let mut best = f64::NEG_INFINITY;
    let mut best_start = 1;
    for start in 1..=t - w + 1 {
        let counts: Vec<f64> = (0..k)
            .map(|arm| (start..start + w).map(|round| src.reward(arm, round)).sum())
            .collect();
        let phi = window_phi(&counts).ok_or(Error::PhiUndefined { start, len: w })?;
        if phi > best {
            best = phi;
            best_start = start;
        }
    }
    Ok((best, best_start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_polarized, BanditInstance, PolarizedParams};
    use crate::rng::substream;

    #[test]
    fn all_ones_gives_phi_k() {
        let inst = BanditInstance::dense(vec![vec![1.0; 32]; 5], "ones").unwrap();
        for w in [1, 4, 32] {
            let p = local_sparsity(&inst, w).unwrap();
            assert_eq!(p.phi, 5.0);
        }
    }

    #[test]
    fn single_live_arm_gives_phi_one() {
        let rows = vec![vec![1.0; 16], vec![0.0; 16], vec![0.0; 16]];
        let inst = BanditInstance::dense(rows, "solo").unwrap();
        let p = local_sparsity(&inst, 4).unwrap();
        assert_eq!(p.phi, 1.0);
        assert_eq!(p.per_arm_totals, vec![16.0, 0.0, 0.0]);
    }

    #[test]
    fn dead_window_is_undefined() {
        let rows = vec![vec![1.0, 1.0, 0.0, 0.0, 1.0, 1.0]];
        let inst = BanditInstance::dense(rows, "gap").unwrap();
        match local_sparsity(&inst, 2) {
            Err(Error::PhiUndefined { start, len }) => {
                assert_eq!((start, len), (3, 2));
            }
            other => panic!("expected undefined phi, got {other:?}"),
        }
    }

    #[test]
    fn worst_window_is_reported() {
        // Two arms overlap only in the middle, spiking the ratio there.
        let rows = vec![
            vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 1.0, 1.0, 1.0],
        ];
        let inst = BanditInstance::dense(rows, "overlap").unwrap();
        let p = local_sparsity(&inst, 2).unwrap();
        assert_eq!(p.phi, 2.0);
        assert_eq!(p.worst_window_start, 3);
    }

    #[test]
    fn polarized_extremes() {
        let all_heavy = PolarizedParams { k: 6, t: 64, r: 6, light_cap: 0, heavy_zeros: 0 };
        let inst = gen_polarized(&all_heavy, &mut substream(4, "sparse", 0)).unwrap();
        for w in [8, 64] {
            assert_eq!(local_sparsity(&inst, w).unwrap().phi, 6.0);
        }

        let solo = PolarizedParams { k: 6, t: 64, r: 1, light_cap: 0, heavy_zeros: 0 };
        let inst = gen_polarized(&solo, &mut substream(4, "sparse", 1)).unwrap();
        assert_eq!(local_sparsity(&inst, 8).unwrap().phi, 1.0);
    }

    #[test]
    fn sliding_equals_naive_on_binary_instances() {
        for seed in 0..5 {
            let inst = BanditInstance::bernoulli(6, 200, 0.4, seed, "bin").unwrap();
            for w in [3, 17, 64] {
                let fast = local_sparsity(&inst, w).unwrap();
                let (naive_phi, naive_start) = naive_local_sparsity(&inst, w).unwrap();
                assert_eq!(fast.phi, naive_phi, "seed {seed} w {w}");
                assert_eq!(fast.worst_window_start, naive_start);
            }
        }
    }
}
