//! Lookahead best-arm identification for adversarial multi-armed bandits.
//!
//! In each round the learner queries one of `K` arms of a reward matrix that
//! was fixed ahead of time by an oblivious adversary. Instead of chasing the
//! best arm in hindsight, a *lookahead* identifier commits, at a stopping
//! time of its choosing, to an arm judged by its average reward over a
//! *future* window. This crate provides:
//!
//! - [`instances`]: reward instances, including the adversarial constructions
//!   used by the lower-bound experiments (sign trees, set-disjointness
//!   embeddings, polarized instances) and a local-sparsity analyzer;
//! - [`dyadic`]: the dyadic window sampler shared by all identifiers, plus
//!   exact enumeration oracles for the window-gap bound and the random-walk
//!   orthogonality identity it rests on;
//! - [`lookahead`]: the dense identifier, its sketch-backed sparse variant,
//!   a full-information reference predictor, and prediction scoring;
//! - [`countsketch`]: a weighted CountSketch with an approximate-top query
//!   and exact bit accounting;
//! - [`regret`]: sparse-support online learners and the block reduction that
//!   runs them under bandit feedback;
//! - [`meter`]: the single bit-accounting policy every algorithm reports
//!   its state under;
//! - [`harness`]: seeded Monte Carlo experiments, verification suites, and
//!   CSV/JSON result serialization.
//!
//! Rounds are 1-based everywhere (`1..=T`); arms are 0-based (`0..K`).
//!
//! ```
//! use lookahead_bai::{instances::BanditInstance, lookahead, rng};
//!
//! let inst = BanditInstance::dense(vec![vec![1.0; 16], vec![0.0; 16]], "demo").unwrap();
//! let mut stream = rng::substream(7, "demo", 0);
//! let pred = lookahead::run_bai(&inst, 2, 4, &mut stream).unwrap();
//! let score = lookahead::score(&inst, &pred).unwrap();
//! assert_eq!(pred.arm, 0);
//! assert_eq!(score.error, 0.0);
//! ```

pub mod countsketch;
pub mod dyadic;
mod error;
pub mod harness;
pub mod instances;
pub mod lookahead;
pub mod meter;
pub mod regret;
pub mod rng;
pub(crate) mod util;

pub use error::{Error, Result};
