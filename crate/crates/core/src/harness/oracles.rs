//! Exact enumeration oracle for the sign-tree misprediction bound.
//!
//! Fix a parent node at depth `d - 1` in each of two independent sign
//! trees and look at their right children. A predictor `h` sees only the
//! two parent signs and guesses which tree's child sign is larger. The
//! oracle enumerates, for every one of the 16 possible predictors, the
//! exact probability that the child signs differ *and* the predictor
//! misses, and returns the minimum — the quantity that drives the
//! adversarial error lower bound, which promises at least `1 / (8d)`.
//!
//! The copy probability `alpha(d) = (1 + sqrt((d-1)/d)) / 2` is irrational,
//! so the probabilities live in the quadratic field `Q[sqrt((d-1)/d)]`.
//! [`QuadExt`] implements exact arithmetic and comparison there; nothing in
//! this module rounds.
//!
//! Conditioned on the parent signs being equal, the children flip
//! independently, disagreement has probability exactly `1/(2d)`, and any
//! predictor is wrong half the time it matters, contributing exactly
//! `1/(8d)` regardless of `h`; that branch is reported separately and is
//! where the bound is tight. Unequal parents contribute a strictly
//! positive extra term, so the full minimum sits strictly above `1/(8d)`
//! (at `d = 1` it is `1/4`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use std::cmp::Ordering;

/// An exact element `a + b * sqrt(radicand)` with rational `a`, `b`, and
/// `radicand >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadExt {
    a: BigRational,
    b: BigRational,
    radicand: BigRational,
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl QuadExt {
    pub fn rational(num: i64, den: i64, radicand: BigRational) -> Self {
        Self { a: ratio(num, den), b: BigRational::zero(), radicand }
    }

    fn root_term(coeff: BigRational, radicand: BigRational) -> Self {
        Self { a: BigRational::zero(), b: coeff, radicand }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.radicand, other.radicand);
        Self {
            a: &self.a + &other.a,
            b: &self.b + &other.b,
            radicand: self.radicand.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.radicand, other.radicand);
        Self {
            a: &self.a * &other.a + &self.b * &other.b * &self.radicand,
            b: &self.a * &other.b + &self.b * &other.a,
            radicand: self.radicand.clone(),
        }
    }

    fn sign(&self) -> Ordering {
        if self.radicand.is_zero() || self.b.is_zero() {
            return self.a.cmp(&BigRational::zero());
        }
        let a_sign = self.a.cmp(&BigRational::zero());
        let b_sign = self.b.cmp(&BigRational::zero());
        if a_sign != Ordering::Less && b_sign != Ordering::Less {
            return Ordering::Greater; // b != 0 and sqrt > 0
        }
        if a_sign != Ordering::Greater && b_sign != Ordering::Greater {
            return Ordering::Less;
        }
        // Mixed signs: compare a^2 against b^2 * radicand.
        let lhs = &self.a * &self.a;
        let rhs = &self.b * &self.b * &self.radicand;
        if a_sign == Ordering::Greater {
            lhs.cmp(&rhs)
        } else {
            rhs.cmp(&lhs)
        }
    }

    pub fn cmp_value(&self, other: &Self) -> Ordering {
        debug_assert_eq!(self.radicand, other.radicand);
        Self {
            a: &self.a - &other.a,
            b: &self.b - &other.b,
            radicand: self.radicand.clone(),
        }
        .sign()
    }

    /// Exact comparison against the rational `num / den`.
    pub fn cmp_ratio(&self, num: i64, den: i64) -> Ordering {
        self.cmp_value(&Self::rational(num, den, self.radicand.clone()))
    }

    pub fn approx(&self) -> f64 {
        let to_f64 = |r: &BigRational| {
            r.numer().to_string().parse::<f64>().unwrap() / r.denom().to_string().parse::<f64>().unwrap()
        };
        to_f64(&self.a) + to_f64(&self.b) * to_f64(&self.radicand).sqrt()
    }
}

/// The exact enumeration result at child depth `d`.
#[derive(Clone, Debug)]
pub struct MispredictionOracle {
    pub depth: u32,
    /// Minimum over all 16 predictors of
    /// `P[child signs differ and predictor wrong]`.
    pub joint_min: QuadExt,
    /// The same minimum restricted to equal parent signs; exactly
    /// `1 / (8d)` for every predictor.
    pub equal_parents_branch: QuadExt,
}

/// Enumerate the misprediction probability exactly at child depth `d >= 1`.
pub fn misprediction_oracle(d: u32) -> MispredictionOracle {
    let radicand = ratio(i64::from(d) - 1, i64::from(d));
    let alpha = QuadExt::rational(1, 2, radicand.clone())
        .add(&QuadExt::root_term(ratio(1, 2), radicand.clone()));
    oracle_with_copy_probability(d, alpha, radicand)
}

/// The same enumeration with an arbitrary exact copy probability; used to
/// sanity-check degenerate settings like deterministic copying.
pub fn oracle_with_copy_probability(
    d: u32,
    alpha: QuadExt,
    radicand: BigRational,
) -> MispredictionOracle {
    let one = QuadExt::rational(1, 1, radicand.clone());
    let minus_one = QuadExt::rational(-1, 1, radicand.clone());
    let flip = one.add(&alpha.mul(&minus_one)); // 1 - alpha
    let quarter = QuadExt::rational(1, 4, radicand.clone());

    let signs = [1i8, -1i8];
    let mut joint_min: Option<QuadExt> = None;
    let mut branch_min: Option<QuadExt> = None;

    // A predictor maps the 4 parent-sign combinations to a tree in {0, 1}.
    for h in 0u8..16 {
        let mut joint = QuadExt::rational(0, 1, radicand.clone());
        let mut branch = QuadExt::rational(0, 1, radicand.clone());
        for (pi, &s1) in signs.iter().enumerate() {
            for (pj, &s2) in signs.iter().enumerate() {
                let guess = (h >> (2 * pi + pj)) & 1;
                for &r1 in &signs {
                    for &r2 in &signs {
                        if r1 == r2 {
                            continue;
                        }
                        let p1 = if r1 == s1 { &alpha } else { &flip };
                        let p2 = if r2 == s2 { &alpha } else { &flip };
                        let winner = u8::from(r2 > r1); // tree with the +1 child
                        if guess != winner {
                            let term = quarter.mul(&p1.mul(p2));
                            joint = joint.add(&term);
                            if s1 == s2 {
                                branch = branch.add(&term);
                            }
                        }
                    }
                }
            }
        }
        let keep_min = |current: &mut Option<QuadExt>, candidate: QuadExt| {
            let smaller = current
                .as_ref()
                .is_none_or(|m| candidate.cmp_value(m) == Ordering::Less);
            if smaller {
                *current = Some(candidate);
            }
        };
        keep_min(&mut joint_min, joint);
        keep_min(&mut branch_min, branch);
    }

    MispredictionOracle {
        depth: d,
        joint_min: joint_min.expect("16 predictors enumerated"),
        equal_parents_branch: branch_min.expect("16 predictors enumerated"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_one_is_a_quarter_joint_and_an_eighth_conditioned() {
        let oracle = misprediction_oracle(1);
        assert_eq!(oracle.joint_min.cmp_ratio(1, 4), Ordering::Equal);
        assert_eq!(oracle.equal_parents_branch.cmp_ratio(1, 8), Ordering::Equal);
    }

    #[test]
    fn depth_two_closed_form() {
        // joint minimum = 1/4 - (1/4) sqrt(1/2) = (2 - sqrt 2) / 8.
        let oracle = misprediction_oracle(2);
        let radicand = ratio(1, 2);
        let expect = QuadExt::rational(1, 4, radicand.clone())
            .add(&QuadExt::root_term(ratio(-1, 4), radicand));
        assert_eq!(oracle.joint_min.cmp_value(&expect), Ordering::Equal);
        assert!((oracle.joint_min.approx() - 0.07322330470336313).abs() < 1e-15);
    }

    #[test]
    fn bound_holds_exactly_for_all_depths() {
        for d in 1..=64u32 {
            let oracle = misprediction_oracle(d);
            assert_ne!(
                oracle.joint_min.cmp_ratio(1, 8 * i64::from(d)),
                Ordering::Less,
                "depth {d}"
            );
            assert_eq!(
                oracle.equal_parents_branch.cmp_ratio(1, 8 * i64::from(d)),
                Ordering::Equal,
                "depth {d}"
            );
        }
    }

    #[test]
    fn deterministic_copying_kills_the_equal_parents_branch() {
        // alpha = 1: children never disagree when the parents agree.
        let radicand = ratio(0, 1);
        let alpha = QuadExt::rational(1, 1, radicand.clone());
        let oracle = oracle_with_copy_probability(5, alpha, radicand);
        assert_eq!(oracle.equal_parents_branch.cmp_ratio(0, 1), Ordering::Equal);
    }

    #[test]
    fn quad_ext_comparisons() {
        let r = ratio(1, 2);
        let x = QuadExt::rational(1, 4, r.clone()).add(&QuadExt::root_term(ratio(-1, 4), r.clone()));
        assert_eq!(x.cmp_ratio(0, 1), Ordering::Greater);
        assert_eq!(x.cmp_ratio(1, 10), Ordering::Less);
        let y = QuadExt::root_term(ratio(1, 1), r.clone());
        // sqrt(1/2) vs 7/10: 0.7071 > 0.7
        assert_eq!(y.cmp_ratio(7, 10), Ordering::Greater);
        assert_eq!(y.cmp_ratio(71, 100), Ordering::Less);
        assert!((x.approx() - (0.25 - 0.25 * 0.5f64.sqrt())).abs() < 1e-15);
    }
}
