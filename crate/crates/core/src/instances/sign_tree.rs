//! The sign-tree adversarial construction.
//!
//! A perfect binary tree of depth `M` carries a sign at every node. The root
//! sign is `+1` and each node at depth `d` copies its parent's sign with the
//! depth-dependent probability `alpha(d) = (1 + sqrt(1 - 1/d)) / 2`, flipping
//! it otherwise. A node's value is `(1 + sign * sqrt(d/M)) / 2`, so the root
//! sits at `1/2` and the leaves are driven all the way to `{0, 1}`. Two
//! independent assignments, read off at the leaves, form a two-armed
//! instance on which any window-committed predictor provably errs; the
//! experiment lives in [`crate::harness`].
//!
//! Key distributional facts used by the tests: every non-root sign is
//! marginally uniform, and the expected leaf-block average below a node
//! equals that node's value conditionally on its sign (the flip rates
//! telescope). The *realized* block average fluctuates around the node value
//! at scale `1/sqrt(M)`; it is not pinned to it.

use rand::Rng;

use crate::instances::BanditInstance;
use crate::{Error, Result};

/// Copy probability at depth `d >= 1`.
pub fn copy_probability(d: u32) -> f64 {
    0.5 * (1.0 + (1.0 - 1.0 / f64::from(d)).sqrt())
}

/// A full sign/value assignment of a depth-`M` perfect binary tree.
#[derive(Clone, Debug, PartialEq)]
pub struct SignTreeAssignment {
    depth: u32,
    /// Heap layout: node `(d, i)` lives at `(1 << d) - 1 + i`.
    signs: Vec<i8>,
}

impl SignTreeAssignment {
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Number of leaves, `2^M`.
    pub fn leaves(&self) -> usize {
        1 << self.depth
    }

    fn pos(&self, d: u32, idx: usize) -> usize {
        assert!(d <= self.depth && idx < (1usize << d), "node ({d},{idx}) out of tree");
        (1usize << d) - 1 + idx
    }

    /// Sign of node `(d, idx)`; the root is always `+1`.
    pub fn sign(&self, d: u32, idx: usize) -> i8 {
        self.signs[self.pos(d, idx)]
    }

    /// Value of node `(d, idx)`: `1/2` at the root, else
    /// `(1 + sign * sqrt(d/M)) / 2`.
    pub fn value(&self, d: u32, idx: usize) -> f64 {
        if d == 0 {
            return 0.5;
        }
        let s = f64::from(self.sign(d, idx));
        0.5 * (1.0 + s * (f64::from(d) / f64::from(self.depth)).sqrt())
    }

    /// The `2^M` leaf values, left to right. These are exactly `{0, 1}`.
    pub fn leaf_row(&self) -> Vec<f64> {
        (0..self.leaves()).map(|i| self.value(self.depth, i)).collect()
    }

    /// Average of the leaf values under node `(d, idx)`.
    pub fn leaf_block_average(&self, d: u32, idx: usize) -> f64 {
        let span = 1usize << (self.depth - d);
        let start = idx * span;
        let ones: usize = (start..start + span)
            .filter(|&leaf| self.sign(self.depth, leaf) > 0)
            .count();
        ones as f64 / span as f64
    }
}

/// Sample a full assignment top-down.
pub fn sample_sign_tree<R: Rng>(depth: u32, rng: &mut R) -> Result<SignTreeAssignment> {
    if depth == 0 {
        return Err(Error::InvalidParameter("sign tree depth must be >= 1".into()));
    }
    let nodes = (1usize << (depth + 1)) - 1;
    let mut signs = vec![0i8; nodes];
    signs[0] = 1;
    for d in 1..=depth {
        let alpha = copy_probability(d);
        let level = (1usize << d) - 1;
        let parent_level = (1usize << (d - 1)) - 1;
        for idx in 0..1usize << d {
            let parent = signs[parent_level + idx / 2];
            let keep = rng.gen::<f64>() < alpha;
            signs[level + idx] = if keep { parent } else { -parent };
        }
    }
    Ok(SignTreeAssignment { depth, signs })
}

/// Two assignments of equal depth, read at the leaves, as a `2 x 2^M`
/// instance.
pub fn sign_tree_pair_to_instance(
    f1: &SignTreeAssignment,
    f2: &SignTreeAssignment,
) -> Result<BanditInstance> {
    if f1.depth() != f2.depth() {
        return Err(Error::DepthMismatch { left: f1.depth(), right: f2.depth() });
    }
    BanditInstance::dense(vec![f1.leaf_row(), f2.leaf_row()], "sign-tree-pair")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::RewardSource;
    use crate::rng::substream;

    #[test]
    fn root_is_half_with_plus_sign() {
        for seed in 0..4 {
            let tree = sample_sign_tree(5, &mut substream(seed, "tree", 0)).unwrap();
            assert_eq!(tree.sign(0, 0), 1);
            assert_eq!(tree.value(0, 0), 0.5);
        }
    }

    #[test]
    fn depth_one_signs_are_unbiased_coin_flips() {
        // alpha(1) = (1 + sqrt(0)) / 2 = 1/2 exactly.
        assert_eq!(copy_probability(1), 0.5);
        let n = 20_000u32;
        let mut plus = 0u32;
        for i in 0..n {
            let tree = sample_sign_tree(1, &mut substream(42, "m1", u64::from(i))).unwrap();
            if tree.sign(1, 0) > 0 {
                plus += 1;
            }
            for leaf in tree.leaf_row() {
                assert!(leaf == 0.0 || leaf == 1.0);
            }
        }
        let se = 0.5 / (f64::from(n)).sqrt();
        assert!((f64::from(plus) / f64::from(n) - 0.5).abs() <= 3.0 * se);
    }

    #[test]
    fn value_law_reconstruction_is_exact() {
        let m = 7;
        let tree = sample_sign_tree(m, &mut substream(3, "law", 0)).unwrap();
        for d in 0..=m {
            for idx in 0..1usize << d {
                let expect = if d == 0 {
                    0.5
                } else {
                    0.5 * (1.0 + f64::from(tree.sign(d, idx)) * (f64::from(d) / f64::from(m)).sqrt())
                };
                assert_eq!(tree.value(d, idx), expect);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_per_stream() {
        let a = sample_sign_tree(9, &mut substream(5, "det", 1)).unwrap();
        let b = sample_sign_tree(9, &mut substream(5, "det", 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn marginal_sign_is_uniform() {
        // Spot nodes at the per-node 3*SE budget; the all-node sweep gets a
        // Bonferroni-scale threshold since there are 2^(M+1) - 2 of them.
        let m = 10u32;
        let n = 20_000usize;
        let nodes = (1usize << (m + 1)) - 1;
        let mut plus = vec![0u32; nodes];
        for i in 0..n {
            let tree = sample_sign_tree(m, &mut substream(1009, "marginal", i as u64)).unwrap();
            for (p, s) in plus.iter_mut().zip(&tree.signs) {
                if *s > 0 {
                    *p += 1;
                }
            }
        }
        let se = 0.5 / (n as f64).sqrt();
        let rate = |d: u32, idx: usize| {
            f64::from(plus[(1usize << d) - 1 + idx]) / n as f64
        };
        for (d, idx) in [(1, 1), (5, 17), (10, 1023)] {
            assert!((rate(d, idx) - 0.5).abs() <= 3.0 * se, "node ({d},{idx}): {}", rate(d, idx));
        }
        for d in 1..=m {
            for idx in 0..1usize << d {
                assert!(
                    (rate(d, idx) - 0.5).abs() <= 4.75 * se,
                    "node ({d},{idx}): {}",
                    rate(d, idx)
                );
            }
        }
    }

    #[test]
    fn block_average_matches_node_value_in_conditional_mean() {
        // E[leaf-block average | node sign] equals the node value; the
        // realized average only concentrates around it.
        let m = 8u32;
        let n = 20_000usize;
        let (d, idx) = (2u32, 1usize);
        let mut sums = [0.0f64; 2];
        let mut counts = [0usize; 2];
        let mut sq = [0.0f64; 2];
        for i in 0..n {
            let tree = sample_sign_tree(m, &mut substream(2024, "cond", i as u64)).unwrap();
            let side = usize::from(tree.sign(d, idx) > 0);
            let avg = tree.leaf_block_average(d, idx);
            sums[side] += avg;
            sq[side] += avg * avg;
            counts[side] += 1;
        }
        for side in 0..2 {
            let cnt = counts[side] as f64;
            let mean = sums[side] / cnt;
            let var = (sq[side] / cnt - mean * mean).max(0.0);
            let se = (var / cnt).sqrt();
            let sign = if side == 1 { 1.0 } else { -1.0 };
            let value = 0.5 * (1.0 + sign * (f64::from(d) / f64::from(m)).sqrt());
            assert!(
                (mean - value).abs() <= 4.0 * se,
                "side {side}: mean {mean} vs value {value} (se {se})"
            );
        }
    }

    #[test]
    fn window_averages_equal_leaf_block_averages() {
        // A dyadic window of the pair instance is a leaf block of each
        // tree; the instance-side average must reproduce the tree-side
        // recount exactly.
        use crate::dyadic::enumerate_windows;
        use crate::instances::window_average;
        let m = 5;
        let f1 = sample_sign_tree(m, &mut substream(60, "xava", 0)).unwrap();
        let f2 = sample_sign_tree(m, &mut substream(60, "xava", 1)).unwrap();
        let inst = sign_tree_pair_to_instance(&f1, &f2).unwrap();
        for (window, _) in enumerate_windows(inst.horizon(), 1, m).unwrap() {
            let ((od, oi), (rd, ri)) = window.child_nodes(m);
            for (arm, tree) in [(0, &f1), (1, &f2)] {
                let obs =
                    window_average(&inst, arm, window.observation_start(), window.w).unwrap();
                let pred = window_average(&inst, arm, window.t0, window.w).unwrap();
                assert!((obs - tree.leaf_block_average(od, oi)).abs() < 1e-12);
                assert!((pred - tree.leaf_block_average(rd, ri)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identical_assignments_give_identical_arms() {
        let tree = sample_sign_tree(4, &mut substream(8, "pair", 0)).unwrap();
        let inst = sign_tree_pair_to_instance(&tree, &tree).unwrap();
        for round in 1..=inst.horizon() {
            assert_eq!(inst.reward(0, round), inst.reward(1, round));
        }
    }

    #[test]
    fn pair_instance_shape_and_extremes() {
        let f1 = sample_sign_tree(3, &mut substream(8, "pair", 1)).unwrap();
        let f2 = sample_sign_tree(3, &mut substream(8, "pair", 2)).unwrap();
        let inst = sign_tree_pair_to_instance(&f1, &f2).unwrap();
        assert_eq!(inst.arms(), 2);
        assert_eq!(inst.horizon(), 8);
        for arm in 0..2 {
            for round in 1..=8 {
                let v = inst.reward(arm, round);
                assert!(v == 0.0 || v == 1.0);
            }
        }
    }

    #[test]
    fn depth_mismatch_rejected() {
        let f1 = sample_sign_tree(3, &mut substream(8, "pair", 3)).unwrap();
        let f2 = sample_sign_tree(4, &mut substream(8, "pair", 4)).unwrap();
        assert!(matches!(
            sign_tree_pair_to_instance(&f1, &f2),
            Err(Error::DepthMismatch { left: 3, right: 4 })
        ));
    }
}
