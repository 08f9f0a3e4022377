//! Per-metric Monte Carlo summaries.

use serde::{Deserialize, Serialize};

use crate::util::Kahan;
use crate::{Error, Result};

/// Mean, spread, and a normal-approximation 95% interval for one metric.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Summary {
    pub metric: String,
    pub count: u64,
    pub mean: f64,
    pub std: f64,
    pub se: f64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
}

/// Summarize `values`; refuses an empty record set explicitly.
pub fn summarize(metric: &str, values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::EmptySummary);
    }
    let n = values.len() as f64;
    let mut acc = Kahan::new();
    for &v in values {
        acc.add(v);
    }
    let mean = acc.value() / n;
    let mut sq = Kahan::new();
    for &v in values {
        sq.add((v - mean) * (v - mean));
    }
    let var = if values.len() > 1 { sq.value() / (n - 1.0) } else { 0.0 };
    let std = var.max(0.0).sqrt();
    let se = std / n.sqrt();
    Ok(Summary {
        metric: metric.to_string(),
        count: values.len() as u64,
        mean,
        std,
        se,
        ci95_lo: mean - 1.96 * se,
        ci95_hi: mean + 1.96 * se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refuses_empty() {
        assert!(matches!(summarize("x", &[]), Err(Error::EmptySummary)));
    }

    #[test]
    fn known_values() {
        let s = summarize("x", &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.count, 4);
        assert_eq!(s.mean, 2.5);
        let expect_std = (5.0f64 / 3.0).sqrt();
        assert!((s.std - expect_std).abs() < 1e-12);
        assert!((s.se - expect_std / 2.0).abs() < 1e-12);
        assert!(s.ci95_lo < s.mean && s.mean < s.ci95_hi);
    }

    #[test]
    fn single_value_has_zero_spread() {
        let s = summarize("x", &[0.7]).unwrap();
        assert_eq!((s.std, s.se), (0.0, 0.0));
        assert_eq!(s.ci95_lo, s.ci95_hi);
    }
}
