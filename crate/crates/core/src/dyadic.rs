//! Dyadic windows and the averages tree.
//!
//! All identifiers in this crate commit to windows of the same shape: pick a
//! scale `m`, split the dyadically aligned block of length `2^m` into an
//! observation half and a prediction half of `w = 2^(m-1)` rounds each.
//! Overlay a perfect binary tree whose internal nodes store block averages
//! and the two halves become the children of one node, which is what makes
//! the prediction gap analyzable: a uniformly random scale turns the squared
//! observation/prediction gap into one increment of a random walk down the
//! tree, and walk increments at different depths are orthogonal. Summing the
//! telescope bounds the expected squared gap by `4 / (hi - lo)` for scales
//! drawn uniformly from `{lo, ..., hi}`.
//!
//! Horizons that are not powers of two are handled by operating on the
//! prefix of length `T' = 2^floor(log2 T)`; later rounds are playable but
//! never selected as windows.
//!
//! Everything here is exact enumeration or a seeded sample; the expectation
//! oracles use compensated summation and refuse inputs too large to
//! enumerate rather than silently approximating.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::util::{floor_log2, Kahan};
use crate::{Error, Result};

/// Walk enumeration refuses deeper trees (4096 walks at the cutoff).
pub const WALK_ENUMERATION_MAX_DEPTH: u32 = 12;

/// Largest usable scale for horizon `t`: `floor(log2 t)`.
pub fn max_scale(t: usize) -> u32 {
    floor_log2(t)
}

/// The dyadic prefix length `T' = 2^floor(log2 t)`.
pub fn t_prime(t: usize) -> usize {
    1 << max_scale(t)
}

/// Default scale range `{ceil(M'/2), ..., M'}` with `M' = floor(log2 t)`:
/// windows from about `sqrt(T)/2` up to `T'/2` rounds.
pub fn default_scale_range(t: usize) -> (u32, u32) {
    let hi = max_scale(t);
    (hi.div_ceil(2).max(1), hi.max(1))
}

/// One sampled window geometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowChoice {
    /// Scale exponent; the full block has `2^m` rounds.
    pub m: u32,
    /// 1-based block index within the dyadic prefix.
    pub b: usize,
    /// Half-block length `2^(m-1)`.
    pub w: usize,
    /// First round of the prediction window: `(b-1) * 2^m + w + 1`.
    pub t0: usize,
}

impl WindowChoice {
    pub fn new(m: u32, b: usize, t: usize) -> Result<Self> {
        let max = max_scale(t);
        if m < 1 || m > max {
            return Err(Error::ScaleRange { lo: m, hi: m, max });
        }
        let blocks = t_prime(t) >> m;
        if b < 1 || b > blocks {
            return Err(Error::InvalidParameter(format!(
                "block index {b} outside [1, {blocks}] at scale {m}"
            )));
        }
        let w = 1usize << (m - 1);
        Ok(Self { m, b, w, t0: (b - 1) * (1 << m) + w + 1 })
    }

    /// First round of the observation window.
    pub fn observation_start(&self) -> usize {
        self.t0 - self.w
    }

    /// Inclusive bounds of the full `2^m` block.
    pub fn block(&self) -> (usize, usize) {
        (self.t0 - self.w, self.t0 + self.w - 1)
    }

    /// The tree node whose leaf block is this window's full block, as
    /// `(depth, index)` in a depth-`tree_depth` averages tree.
    pub fn parent_node(&self, tree_depth: u32) -> (u32, usize) {
        (tree_depth - self.m, self.b - 1)
    }

    /// Children of [`Self::parent_node`]: `(observation, prediction)`.
    pub fn child_nodes(&self, tree_depth: u32) -> ((u32, usize), (u32, usize)) {
        let d = tree_depth - self.m + 1;
        ((d, 2 * (self.b - 1)), (d, 2 * (self.b - 1) + 1))
    }
}

fn validate_scales(t: usize, lo: u32, hi: u32) -> Result<()> {
    let max = max_scale(t);
    if lo < 1 || lo > hi || hi > max {
        return Err(Error::ScaleRange { lo, hi, max });
    }
    Ok(())
}

/// Sample `m` uniformly from `{lo, ..., hi}` and `b` uniformly over the
/// blocks at that scale.
pub fn sample_window<R: Rng>(t: usize, lo: u32, hi: u32, rng: &mut R) -> Result<WindowChoice> {
    validate_scales(t, lo, hi)?;
    let m = rng.gen_range(lo..=hi);
    let blocks = t_prime(t) >> m;
    let b = rng.gen_range(1..=blocks);
    WindowChoice::new(m, b, t)
}

/// Every `(m, b)` window with its exact probability under [`sample_window`].
pub fn enumerate_windows(t: usize, lo: u32, hi: u32) -> Result<Vec<(WindowChoice, f64)>> {
    validate_scales(t, lo, hi)?;
    let tp = t_prime(t);
    let scales = f64::from(hi - lo + 1);
    let mut out = Vec::new();
    for m in lo..=hi {
        let blocks = tp >> m;
        let p = 1.0 / (scales * blocks as f64);
        for b in 1..=blocks {
            out.push((WindowChoice::new(m, b, t)?, p));
        }
    }
    Ok(out)
}

/// A perfect binary tree over a power-of-two sequence whose internal nodes
/// store block sums; means divide by the (power-of-two) block length, so
/// every node's mean is exactly the average of its children's means even in
/// floating point.
pub struct AverageTree {
    depth: u32,
    /// Heap layout: node `(d, i)` at `(1 << d) - 1 + i`.
    sums: Vec<f64>,
}

impl AverageTree {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo { len: n });
        }
        let depth = floor_log2(n);
        let mut sums = vec![0.0; 2 * n - 1];
        sums[n - 1..].copy_from_slice(values);
        for pos in (0..n - 1).rev() {
            sums[pos] = sums[2 * pos + 1] + sums[2 * pos + 2];
        }
        Ok(Self { depth, sums })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn leaves(&self) -> usize {
        1 << self.depth
    }

    fn pos(&self, d: u32, idx: usize) -> usize {
        assert!(d <= self.depth && idx < (1usize << d), "node ({d},{idx}) out of tree");
        (1usize << d) - 1 + idx
    }

    pub fn node_sum(&self, d: u32, idx: usize) -> f64 {
        self.sums[self.pos(d, idx)]
    }

    /// Mean of the leaf block under `(d, idx)`; the division is by a power
    /// of two and therefore exact.
    pub fn node_mean(&self, d: u32, idx: usize) -> f64 {
        self.node_sum(d, idx) / (1u64 << (self.depth - d)) as f64
    }
}

/// The exact expected squared observation/prediction gap, with the
/// applicable upper bound.
#[derive(Clone, Copy, Debug)]
pub struct GapExpectation {
    /// `E[(y - y*)^2]` over the enumerated window law.
    pub value: f64,
    /// `4 / (hi - lo)`; `None` when `hi == lo` makes the bound vacuous.
    pub bound: Option<f64>,
}

/// Exact `E[(y - y*)^2]` for one reward sequence under the window law with
/// scales `{lo, ..., hi}`, where `y` and `y*` are the observation- and
/// prediction-window means. Enumerates every window; no sampling.
pub fn window_gap_expectation(sequence: &[f64], lo: u32, hi: u32) -> Result<GapExpectation> {
    for (i, &v) in sequence.iter().enumerate() {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::RewardOutOfRange { arm: 0, round: i + 1, value: v });
        }
    }
    let t = sequence.len();
    if t == 0 {
        return Err(Error::BadDimensions { k: 1, t });
    }
    validate_scales(t, lo, hi)?;
    let tp = t_prime(t);
    let tree = AverageTree::from_values(&sequence[..tp])?;
    let scales = f64::from(hi - lo + 1);
    let mut acc = Kahan::new();
    for m in lo..=hi {
        let blocks = tp >> m;
        let p = 1.0 / (scales * blocks as f64);
        let d = tree.depth() - m + 1;
        for b in 0..blocks {
            let y = tree.node_mean(d, 2 * b);
            let y_star = tree.node_mean(d, 2 * b + 1);
            let gap = y - y_star;
            acc.add(p * gap * gap);
        }
    }
    let bound = (hi > lo).then(|| 4.0 / f64::from(hi - lo));
    Ok(GapExpectation { value: acc.value(), bound })
}

/// The values visited by one root-to-leaf walk.
#[derive(Clone, Debug)]
pub struct WalkTrace {
    pub depth: u32,
    pub choices: Vec<bool>,
    /// `node_values[j]` is the mean of the depth-`j` block on the walk;
    /// index 0 is the full-sequence mean, index `depth` a single leaf.
    pub node_values: Vec<f64>,
}

/// Walk down the averages tree following `choices` (`false` = left), of
/// length exactly the tree depth.
pub fn walk_values(sequence: &[f64], choices: &[bool]) -> Result<WalkTrace> {
    let tree = AverageTree::from_values(sequence)?;
    if choices.len() != tree.depth() as usize {
        return Err(Error::InvalidParameter(format!(
            "walk of {} choices in a depth-{} tree",
            choices.len(),
            tree.depth()
        )));
    }
    let mut idx = 0usize;
    let mut node_values = Vec::with_capacity(choices.len() + 1);
    node_values.push(tree.node_mean(0, 0));
    for (j, &c) in choices.iter().enumerate() {
        idx = 2 * idx + usize::from(c);
        node_values.push(tree.node_mean(j as u32 + 1, idx));
    }
    Ok(WalkTrace { depth: tree.depth(), choices: choices.to_vec(), node_values })
}

/// Both sides of the walk-increment orthogonality identity,
/// `E[(Z(U) - Z(L))^2]` and `E[sum_j (Z(j+1) - Z(j))^2]`, by exact
/// enumeration over all `2^M` walks. The caller asserts equality.
pub fn orthogonality_check(sequence: &[f64], l: u32, u: u32) -> Result<(f64, f64)> {
    let tree = AverageTree::from_values(sequence)?;
    let m = tree.depth();
    if m > WALK_ENUMERATION_MAX_DEPTH {
        return Err(Error::EnumerationTooLarge { depth: m, max: WALK_ENUMERATION_MAX_DEPTH });
    }
    if l >= u || u > m {
        return Err(Error::InvalidParameter(format!("need 0 <= L < U <= {m}, got ({l}, {u})")));
    }
    let leaves = tree.leaves();
    let mut lhs = Kahan::new();
    let mut rhs = Kahan::new();
    for leaf in 0..leaves {
        let value_at = |d: u32| tree.node_mean(d, leaf >> (m - d));
        let diff = value_at(u) - value_at(l);
        lhs.add(diff * diff);
        for j in l..u {
            let step = value_at(j + 1) - value_at(j);
            rhs.add(step * step);
        }
    }
    Ok((lhs.value() / leaves as f64, rhs.value() / leaves as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use rand::Rng;

    #[test]
    fn window_formulas() {
        let w = WindowChoice::new(2, 1, 8).unwrap();
        assert_eq!((w.w, w.t0), (2, 3));
        assert_eq!(w.observation_start(), 1);
        assert_eq!(w.block(), (1, 4));

        let w = WindowChoice::new(3, 1, 8).unwrap();
        assert_eq!((w.w, w.t0), (4, 5));
        assert_eq!(w.block(), (1, 8));
    }

    #[test]
    fn alignment_invariant_holds_for_all_samples() {
        let mut rng = substream(11, "dyadic", 0);
        for _ in 0..500 {
            let t = rng.gen_range(8..=4096);
            let hi = max_scale(t);
            let lo = rng.gen_range(1..=hi);
            let w = sample_window(t, lo, hi, &mut rng).unwrap();
            assert_eq!(w.w, 1 << (w.m - 1));
            assert!(w.t0 - w.w >= 1);
            assert!(w.t0 + w.w - 1 <= t_prime(t));
            assert_eq!((w.t0 - w.w - 1) % (1 << w.m), 0, "block misaligned: {w:?}");
        }
    }

    #[test]
    fn enumeration_counts_and_probabilities() {
        let windows = enumerate_windows(8, 1, 3).unwrap();
        assert_eq!(windows.len(), 4 + 2 + 1);
        let total: f64 = windows.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);

        let windows = enumerate_windows(4, 1, 2).unwrap();
        let got: Vec<(u32, usize, f64)> = windows.iter().map(|(w, p)| (w.m, w.b, *p)).collect();
        assert_eq!(got, vec![(1, 1, 0.25), (1, 2, 0.25), (2, 1, 0.5)]);
    }

    #[test]
    fn scale_range_validation() {
        assert!(matches!(sample_window(8, 2, 1, &mut substream(0, "x", 0)), Err(Error::ScaleRange { .. })));
        assert!(matches!(enumerate_windows(8, 1, 4), Err(Error::ScaleRange { .. })));
        // Non-power-of-two horizons clamp to the dyadic prefix.
        assert_eq!(max_scale(1000), 9);
        assert_eq!(t_prime(1000), 512);
        assert_eq!(default_scale_range(1 << 14), (7, 14));
    }

    #[test]
    fn sampled_frequencies_match_enumerated_law() {
        let t = 1 << 10;
        let (lo, hi) = (3, 9);
        let windows = enumerate_windows(t, lo, hi).unwrap();
        let mut counts = vec![0u32; windows.len()];
        let index = |w: &WindowChoice| {
            windows.iter().position(|(x, _)| x == w).expect("sampled window not enumerated")
        };
        let n = 100_000;
        let mut rng = substream(17, "freq", 0);
        for _ in 0..n {
            counts[index(&sample_window(t, lo, hi, &mut rng).unwrap())] += 1;
        }
        // One sound chi-square test plus a per-cell sweep at a
        // multiple-comparison-scale threshold.
        let mut chi_sq = 0.0;
        for ((_, p), &c) in windows.iter().zip(&counts) {
            let expect = p * f64::from(n);
            chi_sq += (f64::from(c) - expect).powi(2) / expect;
            let se = (p * (1.0 - p) * f64::from(n)).sqrt();
            assert!((f64::from(c) - expect).abs() <= 4.5 * se);
        }
        // 253 degrees of freedom; 99.9th percentile is about 322.
        assert!(chi_sq < 322.0, "chi_sq = {chi_sq}");
    }

    #[test]
    fn constant_sequence_has_zero_gap() {
        let gap = window_gap_expectation(&[0.7; 64], 2, 5).unwrap();
        assert_eq!(gap.value, 0.0);
        assert_eq!(gap.bound, Some(4.0 / 3.0));
    }

    #[test]
    fn alternating_sequence_gap_is_exactly_half() {
        // Scale 1 windows each see (1) vs (0): squared gap 1. Scale 2
        // windows average both halves to 1/2: gap 0. Scales are uniform,
        // so the expectation is 1/2 over all six windows.
        let seq = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        let gap = window_gap_expectation(&seq, 1, 2).unwrap();
        assert_eq!(gap.value, 0.5);
    }

    #[test]
    fn gap_bound_holds_on_random_sequences() {
        let mut rng = substream(5, "gap", 0);
        for _ in 0..20 {
            let seq: Vec<f64> = (0..256).map(|_| rng.gen::<f64>()).collect();
            let gap = window_gap_expectation(&seq, 2, 7).unwrap();
            assert!(gap.value <= gap.bound.unwrap() + 1e-12);
        }
    }

    #[test]
    fn degenerate_scale_range_has_no_bound() {
        let seq: Vec<f64> = (0..32).map(|i| f64::from(u8::from(i % 3 == 0))).collect();
        let gap = window_gap_expectation(&seq, 3, 3).unwrap();
        assert!(gap.bound.is_none());
        assert!(gap.value.is_finite());
    }

    #[test]
    fn walk_block_means() {
        let trace = walk_values(&[1.0, 0.0, 0.0, 0.0], &[false, false]).unwrap();
        assert_eq!(trace.node_values, vec![0.25, 0.5, 1.0]);
        for second in [false, true] {
            let trace = walk_values(&[1.0, 0.0, 0.0, 0.0], &[true, second]).unwrap();
            assert_eq!(trace.node_values[1], 0.0);
            assert_eq!(trace.node_values[2], 0.0);
        }
        assert!(matches!(
            walk_values(&[1.0, 0.0, 0.0], &[false, false]),
            Err(Error::NotPowerOfTwo { len: 3 })
        ));
    }

    #[test]
    fn walk_depth_matches_window_halves() {
        // At depth M - m the walk value is the block mean, i.e. the average
        // of the observation and prediction means of the matching window.
        let mut rng = substream(23, "walk", 0);
        let seq: Vec<f64> = (0..64).map(|_| rng.gen::<f64>()).collect();
        let tree = AverageTree::from_values(&seq).unwrap();
        for (window, _) in enumerate_windows(64, 1, 6).unwrap() {
            let (pd, pi) = window.parent_node(tree.depth());
            let ((od, oi), (rd, ri)) = window.child_nodes(tree.depth());
            let y = tree.node_mean(od, oi);
            let y_star = tree.node_mean(rd, ri);
            assert_eq!(tree.node_mean(pd, pi), (y + y_star) / 2.0);
            assert_eq!((od, rd), (pd + 1, pd + 1));
            assert_eq!((oi, ri), (2 * pi, 2 * pi + 1));
        }
    }

    #[test]
    fn martingale_identity_is_bitwise_exact() {
        let mut rng = substream(29, "mart", 0);
        for _ in 0..10 {
            let m = rng.gen_range(1..=10u32);
            let seq: Vec<f64> = (0..1usize << m).map(|_| rng.gen::<f64>()).collect();
            let tree = AverageTree::from_values(&seq).unwrap();
            for d in 0..m {
                for idx in 0..1usize << d {
                    let parent = tree.node_mean(d, idx);
                    let kids =
                        (tree.node_mean(d + 1, 2 * idx) + tree.node_mean(d + 1, 2 * idx + 1)) / 2.0;
                    assert_eq!(parent, kids, "node ({d},{idx})");
                }
            }
        }
    }

    #[test]
    fn orthogonality_hand_case() {
        let (lhs, rhs) = orthogonality_check(&[1.0, 0.0, 0.0, 0.0], 0, 2).unwrap();
        assert!((lhs - 3.0 / 16.0).abs() < 1e-15);
        assert!((rhs - 3.0 / 16.0).abs() < 1e-15);

        let (lhs, rhs) = orthogonality_check(&[0.4; 8], 0, 3).unwrap();
        assert_eq!((lhs, rhs), (0.0, 0.0));
    }

    #[test]
    fn orthogonality_on_random_sequences() {
        let mut rng = substream(31, "orth", 0);
        for _ in 0..10 {
            let m = rng.gen_range(2..=8u32);
            let seq: Vec<f64> = (0..1usize << m).map(|_| rng.gen::<f64>()).collect();
            for l in 0..m {
                for u in l + 1..=m {
                    let (lhs, rhs) = orthogonality_check(&seq, l, u).unwrap();
                    assert!((lhs - rhs).abs() <= 1e-10, "M={m} L={l} U={u}: {lhs} vs {rhs}");
                }
            }
        }
    }

    #[test]
    fn enumeration_refuses_deep_trees() {
        let seq = vec![0.5; 1 << 13];
        assert!(matches!(
            orthogonality_check(&seq, 0, 2),
            Err(Error::EnumerationTooLarge { depth: 13, .. })
        ));
    }

    #[test]
    fn window_average_matches_tree_node_means() {
        // The instance-level window average and the tree's node mean are
        // two summation routes to the same quantity.
        use crate::instances::{window_average, BanditInstance};
        let mut rng = substream(37, "xcheck", 0);
        let seq: Vec<f64> = (0..128).map(|_| rng.gen::<f64>()).collect();
        let inst = BanditInstance::dense(vec![seq.clone()], "seq").unwrap();
        let tree = AverageTree::from_values(&seq).unwrap();
        for (window, _) in enumerate_windows(128, 1, 7).unwrap() {
            let ((od, oi), (rd, ri)) = window.child_nodes(tree.depth());
            let (pd, pi) = window.parent_node(tree.depth());
            let obs = window_average(&inst, 0, window.observation_start(), window.w).unwrap();
            let pred = window_average(&inst, 0, window.t0, window.w).unwrap();
            assert!((obs - tree.node_mean(od, oi)).abs() < 1e-12);
            assert!((pred - tree.node_mean(rd, ri)).abs() < 1e-12);
            // Averaging the two halves recovers the parent block's mean.
            assert!(((obs + pred) / 2.0 - tree.node_mean(pd, pi)).abs() < 1e-12);
        }
    }

    #[test]
    fn walk_marginal_is_uniform_over_depth_nodes() {
        // Every depth-j node is reached by exactly 2^(M-j) of the 2^M
        // walks, so Z(j)'s walk distribution is the uniform distribution
        // over depth-j node values.
        let m = 6u32;
        let leaves = 1usize << m;
        for j in 0..=m {
            let mut hits = vec![0u32; 1 << j];
            for leaf in 0..leaves {
                hits[leaf >> (m - j)] += 1;
            }
            assert!(hits.iter().all(|&h| h == 1 << (m - j)));
        }
    }

    #[test]
    fn walks_split_scales_evenly() {
        // Conditional on reaching a window's parent node, the next step
        // lands on the observation and prediction halves equally often.
        let seq: Vec<f64> = (0..16).map(|i| f64::from(i % 2 == 0)).collect();
        let tree = AverageTree::from_values(&seq).unwrap();
        let m = tree.depth();
        for (window, _) in enumerate_windows(16, 1, 4).unwrap() {
            let (pd, pi) = window.parent_node(m);
            let mut hits = [0u32; 2];
            for leaf in 0..tree.leaves() {
                if leaf >> (m - pd) == pi {
                    hits[(leaf >> (m - pd - 1)) & 1] += 1;
                }
            }
            assert_eq!(hits[0], hits[1]);
        }
    }
}
