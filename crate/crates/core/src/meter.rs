//! The bit-accounting policy.
//!
//! Memory claims in this crate are *model* quantities: every algorithm
//! declares its persistent state, per-round scratch, and private randomness
//! as bounded registers, and this module converts the declaration into bits
//! under one fixed policy:
//!
//! - integer counter with range `[0, V]`: `ceil(log2(V+1))` bits;
//! - signed fixed-point real, magnitude at most `V`, `rho` fractional bits:
//!   `ceil(log2(V+1)) + rho + 1` bits;
//! - arm index over `K` arms: `ceil(log2(K))` bits;
//! - round index over horizon `T`: `ceil(log2(T))` bits;
//! - hash seed: its declared width;
//! - raw 64-bit word: 64 bits (used by reference learners that make no
//!   boundedness claim).
//!
//! The master experiment seed is shared randomness and is never counted;
//! per-algorithm derived hash seeds are. Host-process allocations are out of
//! scope by design.

use serde::{Deserialize, Serialize};

use crate::util::ceil_log2;
use crate::{Error, Result};

/// Default fractional precision for real-valued accumulators.
pub const DEFAULT_FRAC_BITS: u32 = 16;

/// A bounded register kind.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Quantity {
    /// Integer counter over `[0, max]`.
    IntCounter { max: u64 },
    /// Signed fixed-point real with `|value| <= magnitude`.
    FixedPoint { magnitude: f64, frac_bits: u32 },
    /// Index of one of `arms` arms.
    ArmIndex { arms: u64 },
    /// Index of one of `horizon` rounds.
    RoundIndex { horizon: u64 },
    /// Hash-seed material of a declared width.
    Seed { width_bits: u64 },
    /// An IEEE double stored as-is.
    Word64,
}

impl Quantity {
    fn bits(&self, name: &str) -> Result<u64> {
        let unbounded = |()| Error::UnboundedDescriptor { name: name.to_string() };
        Ok(match *self {
            Quantity::IntCounter { max } => ceil_log2(max + 1),
            Quantity::FixedPoint { magnitude, frac_bits } => {
                if !magnitude.is_finite() || magnitude < 0.0 {
                    return Err(unbounded(()));
                }
                ceil_log2(magnitude.ceil() as u64 + 1) + u64::from(frac_bits) + 1
            }
            Quantity::ArmIndex { arms } => {
                if arms == 0 {
                    return Err(unbounded(()));
                }
                ceil_log2(arms)
            }
            Quantity::RoundIndex { horizon } => {
                if horizon == 0 {
                    return Err(unbounded(()));
                }
                ceil_log2(horizon)
            }
            Quantity::Seed { width_bits } => width_bits,
            Quantity::Word64 => 64,
        })
    }
}

/// Which part of the report a register belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateClass {
    /// State carried between rounds.
    Persistent,
    /// Transient per-round state, reported at its high-water mark.
    Scratch,
    /// Private randomness material.
    Seed,
}

/// One named group of identical registers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Descriptor {
    pub name: String,
    pub class: StateClass,
    pub quantity: Quantity,
    pub count: u64,
}

impl Descriptor {
    pub fn new(name: &str, class: StateClass, quantity: Quantity, count: u64) -> Self {
        Self { name: name.to_string(), class, quantity, count }
    }

    pub fn persistent(name: &str, quantity: Quantity, count: u64) -> Self {
        Self::new(name, StateClass::Persistent, quantity, count)
    }

    pub fn scratch(name: &str, quantity: Quantity, count: u64) -> Self {
        Self::new(name, StateClass::Scratch, quantity, count)
    }

    pub fn seed(name: &str, width_bits: u64, count: u64) -> Self {
        Self::new(name, StateClass::Seed, Quantity::Seed { width_bits }, count)
    }
}

/// The metered memory of one algorithm run.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct MemoryReport {
    pub persistent_bits: u64,
    pub scratch_high_water_bits: u64,
    pub seed_bits: u64,
    /// Named components; their sum equals the total exactly.
    pub breakdown: Vec<(String, u64)>,
}

impl MemoryReport {
    pub fn total_bits(&self) -> u64 {
        self.persistent_bits + self.scratch_high_water_bits + self.seed_bits
    }

    /// Component-wise sum of two reports, keeping both breakdowns.
    pub fn merged(&self, other: &MemoryReport) -> MemoryReport {
        let mut breakdown = self.breakdown.clone();
        breakdown.extend(other.breakdown.iter().cloned());
        MemoryReport {
            persistent_bits: self.persistent_bits + other.persistent_bits,
            scratch_high_water_bits: self.scratch_high_water_bits + other.scratch_high_water_bits,
            seed_bits: self.seed_bits + other.seed_bits,
            breakdown,
        }
    }
}

/// Convert a state declaration into a [`MemoryReport`].
///
/// Every register must declare a finite bound; an unbounded descriptor is
/// rejected rather than guessed at.
pub fn account(descriptors: &[Descriptor]) -> Result<MemoryReport> {
    let mut report = MemoryReport::default();
    for d in descriptors {
        let bits = d.quantity.bits(&d.name)?.checked_mul(d.count).ok_or_else(|| {
            Error::UnboundedDescriptor { name: d.name.clone() }
        })?;
        match d.class {
            StateClass::Persistent => report.persistent_bits += bits,
            StateClass::Scratch => report.scratch_high_water_bits += bits,
            StateClass::Seed => report.seed_bits += bits,
        }
        report.breakdown.push((d.name.clone(), bits));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits_of(q: Quantity) -> u64 {
        account(&[Descriptor::persistent("x", q, 1)]).unwrap().total_bits()
    }

    #[test]
    fn policy_arithmetic() {
        assert_eq!(bits_of(Quantity::IntCounter { max: 0 }), 0);
        assert_eq!(bits_of(Quantity::IntCounter { max: 1 }), 1);
        assert_eq!(bits_of(Quantity::IntCounter { max: 8 }), 4);
        assert_eq!(bits_of(Quantity::FixedPoint { magnitude: 8.0, frac_bits: 16 }), 4 + 16 + 1);
        assert_eq!(bits_of(Quantity::ArmIndex { arms: 1 }), 0);
        assert_eq!(bits_of(Quantity::ArmIndex { arms: 6 }), 3);
        assert_eq!(bits_of(Quantity::RoundIndex { horizon: 1 << 14 }), 14);
        assert_eq!(bits_of(Quantity::Seed { width_bits: 61 }), 61);
    }

    #[test]
    fn empty_descriptor_list_is_zero_bits() {
        let r = account(&[]).unwrap();
        assert_eq!(r.total_bits(), 0);
        assert!(r.breakdown.is_empty());
    }

    #[test]
    fn dense_identifier_state_formula() {
        // K accumulators of range [0, w] at 16 fractional bits plus three
        // round registers.
        let k = 4u64;
        let w = 8u64;
        let t = 64u64;
        let report = account(&[
            Descriptor::persistent(
                "accumulators",
                Quantity::FixedPoint { magnitude: w as f64, frac_bits: 16 },
                k,
            ),
            Descriptor::persistent("window", Quantity::RoundIndex { horizon: t }, 3),
        ])
        .unwrap();
        let expected = k * (ceil_log2(w + 1) + 17) + 3 * ceil_log2(t);
        assert_eq!(report.total_bits(), expected);
        assert_eq!(report.total_bits(), 4 * 21 + 18);
    }

    #[test]
    fn totals_match_breakdown_exactly() {
        let r = account(&[
            Descriptor::persistent("a", Quantity::IntCounter { max: 100 }, 3),
            Descriptor::scratch("b", Quantity::Word64, 2),
            Descriptor::seed("c", 61, 4),
        ])
        .unwrap();
        let sum: u64 = r.breakdown.iter().map(|(_, b)| b).sum();
        assert_eq!(sum, r.total_bits());
        assert_eq!(r.scratch_high_water_bits, 128);
        assert_eq!(r.seed_bits, 244);
    }

    #[test]
    fn unbounded_descriptor_rejected() {
        let err = account(&[Descriptor::persistent(
            "bad",
            Quantity::FixedPoint { magnitude: f64::INFINITY, frac_bits: 16 },
            1,
        )]);
        assert!(matches!(err, Err(Error::UnboundedDescriptor { .. })));
    }

    #[test]
    fn adding_a_descriptor_never_decreases_total() {
        let base = vec![Descriptor::persistent("a", Quantity::IntCounter { max: 7 }, 2)];
        let mut more = base.clone();
        more.push(Descriptor::scratch("b", Quantity::ArmIndex { arms: 64 }, 1));
        assert!(account(&more).unwrap().total_bits() >= account(&base).unwrap().total_bits());
    }

    #[test]
    fn identical_descriptors_identical_reports() {
        let d = vec![
            Descriptor::persistent("a", Quantity::FixedPoint { magnitude: 31.0, frac_bits: 16 }, 5),
            Descriptor::seed("s", 61, 2),
        ];
        let r1 = account(&d).unwrap();
        let r2 = account(&d).unwrap();
        assert_eq!(r1.total_bits(), r2.total_bits());
        assert_eq!(r1.breakdown, r2.breakdown);
    }
}
