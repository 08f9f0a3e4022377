//! Small numeric helpers shared across modules.

/// Neumaier-compensated summation. Used wherever an expectation is promised
/// at absolute tolerance 1e-10 or better.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Largest `m` with `2^m <= x`. Panics on `x == 0`.
pub fn floor_log2(x: usize) -> u32 {
    assert!(x > 0, "floor_log2(0)");
    usize::BITS - 1 - x.leading_zeros()
}

/// Bits needed to index `values` distinct states: `ceil(log2(values))`.
pub fn ceil_log2(values: u64) -> u64 {
    match values {
        0 | 1 => 0,
        v => u64::from(u64::BITS - (v - 1).leading_zeros()),
    }
}

/// Integer square root: largest `r` with `r*r <= x`.
pub fn isqrt(x: usize) -> usize {
    if x < 2 {
        return x;
    }
    let mut r = (x as f64).sqrt() as usize;
    while r.checked_mul(r).is_none_or(|sq| sq > x) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= x) {
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut k = Kahan::new();
        let mut naive = 1.0f64;
        k.add(1.0);
        for _ in 0..20 {
            k.add(1e-17);
            naive += 1e-17;
        }
        assert_eq!(naive, 1.0); // plain summation loses the tail
        assert!(k.value() > 1.0);
    }

    #[test]
    fn log_helpers() {
        assert_eq!(floor_log2(1), 0);
        assert_eq!(floor_log2(1023), 9);
        assert_eq!(floor_log2(1024), 10);
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(9), 4);
    }

    #[test]
    fn isqrt_exact_edges() {
        for x in 0..2000usize {
            let r = isqrt(x);
            assert!(r * r <= x && (r + 1) * (r + 1) > x, "x={x} r={r}");
        }
        assert_eq!(isqrt(1 << 16), 256);
    }
}
