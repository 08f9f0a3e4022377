//! Result records and their CSV/JSON renderings.
//!
//! Every experiment kind has a fixed record schema. CSV files start with a
//! header row and print floats at 12 significant digits; parsing a rendered
//! file back and re-rendering it reproduces the same bytes. JSON carries
//! full-precision floats through serde. Failed trials are never dropped:
//! they ride along as `(trial, message)` pairs next to the records.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::harness::summary::Summary;
use crate::{Error, Result};

/// 12 significant digits, scientific; `0` stays `0`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.11e}")
    }
}

pub fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|e| Error::Config(format!("bad float `{s}`: {e}")))
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| Error::Config(format!("bad field `{s}`: {e}")))
}

fn split_fields(line: &str, expect: usize) -> Result<Vec<&str>> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != expect {
        return Err(Error::Config(format!(
            "row has {} fields, schema wants {expect}: `{line}`",
            fields.len()
        )));
    }
    Ok(fields)
}

/// One experiment kind's row schema.
pub trait Record: Serialize + DeserializeOwned + Clone {
    const KIND: &'static str;
    fn csv_header() -> &'static str;
    fn csv_row(&self) -> String;
    fn parse_csv_row(line: &str) -> Result<Self>;
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BaiRecord {
    pub seed: u64,
    pub m: u32,
    pub b: usize,
    pub t0: usize,
    pub w: usize,
    pub arm: usize,
    pub error: f64,
    pub bits: u64,
    pub queries: u64,
}

impl Record for BaiRecord {
    const KIND: &'static str = "bai";
    fn csv_header() -> &'static str {
        "seed,m,b,t0,w,arm,error,bits,queries"
    }
    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.seed,
            self.m,
            self.b,
            self.t0,
            self.w,
            self.arm,
            fmt_f64(self.error),
            self.bits,
            self.queries
        )
    }
    fn parse_csv_row(line: &str) -> Result<Self> {
        let f = split_fields(line, 9)?;
        Ok(Self {
            seed: parse_num(f[0])?,
            m: parse_num(f[1])?,
            b: parse_num(f[2])?,
            t0: parse_num(f[3])?,
            w: parse_num(f[4])?,
            arm: parse_num(f[5])?,
            error: parse_f64(f[6])?,
            bits: parse_num(f[7])?,
            queries: parse_num(f[8])?,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegretRecord {
    pub seed: u64,
    pub learner: String,
    pub k: usize,
    pub t: usize,
    pub q: usize,
    pub s: usize,
    pub regret: f64,
    pub exploration_rounds: u64,
    pub learner_bits: u64,
}

impl Record for RegretRecord {
    const KIND: &'static str = "regret";
    fn csv_header() -> &'static str {
        "seed,learner,k,t,q,s,regret,exploration_rounds,learner_bits"
    }
    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.seed,
            self.learner,
            self.k,
            self.t,
            self.q,
            self.s,
            fmt_f64(self.regret),
            self.exploration_rounds,
            self.learner_bits
        )
    }
    fn parse_csv_row(line: &str) -> Result<Self> {
        let f = split_fields(line, 9)?;
        Ok(Self {
            seed: parse_num(f[0])?,
            learner: f[1].to_string(),
            k: parse_num(f[2])?,
            t: parse_num(f[3])?,
            q: parse_num(f[4])?,
            s: parse_num(f[5])?,
            regret: parse_f64(f[6])?,
            exploration_rounds: parse_num(f[7])?,
            learner_bits: parse_num(f[8])?,
        })
    }
}

/// One sequence's exact window-gap expectation (`verify lemma1`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapRecord {
    pub seed: u64,
    pub gap: f64,
    pub bound: f64,
}

impl Record for GapRecord {
    const KIND: &'static str = "lemma1";
    fn csv_header() -> &'static str {
        "seed,gap,bound"
    }
    fn csv_row(&self) -> String {
        format!("{},{},{}", self.seed, fmt_f64(self.gap), fmt_f64(self.bound))
    }
    fn parse_csv_row(line: &str) -> Result<Self> {
        let f = split_fields(line, 3)?;
        Ok(Self { seed: parse_num(f[0])?, gap: parse_f64(f[1])?, bound: parse_f64(f[2])? })
    }
}

/// One sequence's worst identity mismatch (`verify orthogonality`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrthogonalityRecord {
    pub seed: u64,
    pub m: u32,
    pub max_abs_diff: f64,
}

impl Record for OrthogonalityRecord {
    const KIND: &'static str = "orthogonality";
    fn csv_header() -> &'static str {
        "seed,m,max_abs_diff"
    }
    fn csv_row(&self) -> String {
        format!("{},{},{}", self.seed, self.m, fmt_f64(self.max_abs_diff))
    }
    fn parse_csv_row(line: &str) -> Result<Self> {
        let f = split_fields(line, 3)?;
        Ok(Self { seed: parse_num(f[0])?, m: parse_num(f[1])?, max_abs_diff: parse_f64(f[2])? })
    }
}

/// Exact misprediction floor per depth (`verify claim4`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MispredictionRecord {
    pub d: u32,
    pub joint_min: f64,
    pub equal_parents_branch: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Record for MispredictionRecord {
    const KIND: &'static str = "claim4";
    fn csv_header() -> &'static str {
        "d,joint_min,equal_parents_branch,bound,pass"
    }
    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.d,
            fmt_f64(self.joint_min),
            fmt_f64(self.equal_parents_branch),
            fmt_f64(self.bound),
            self.pass
        )
    }
    fn parse_csv_row(line: &str) -> Result<Self> {
        let f = split_fields(line, 5)?;
        Ok(Self {
            d: parse_num(f[0])?,
            joint_min: parse_f64(f[1])?,
            equal_parents_branch: parse_f64(f[2])?,
            bound: parse_f64(f[3])?,
            pass: parse_num(f[4])?,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SparsityRecord {
    pub r: usize,
    pub k: usize,
    pub t: usize,
    pub w: usize,
    pub phi: f64,
    pub bound: f64,
    pub worst_window_start: usize,
    pub naive_matches: bool,
    pub pass: bool,
}

impl Record for SparsityRecord {
    const KIND: &'static str = "sparsity";
    fn csv_header() -> &'static str {
        "r,k,t,w,phi,bound,worst_window_start,naive_matches,pass"
    }
    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.r,
            self.k,
            self.t,
            self.w,
            fmt_f64(self.phi),
            fmt_f64(self.bound),
            self.worst_window_start,
            self.naive_matches,
            self.pass
        )
    }
    fn parse_csv_row(line: &str) -> Result<Self> {
        let f = split_fields(line, 9)?;
        Ok(Self {
            r: parse_num(f[0])?,
            k: parse_num(f[1])?,
            t: parse_num(f[2])?,
            w: parse_num(f[3])?,
            phi: parse_f64(f[4])?,
            bound: parse_f64(f[5])?,
            worst_window_start: parse_num(f[6])?,
            naive_matches: parse_num(f[7])?,
            pass: parse_num(f[8])?,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SdDemoRecord {
    pub seed: u64,
    pub tau: usize,
    pub t0: usize,
    pub w: usize,
    pub hit: bool,
    pub decision_correct: bool,
    pub sd_correct: bool,
}

impl Record for SdDemoRecord {
    const KIND: &'static str = "sd-demo";
    fn csv_header() -> &'static str {
        "seed,tau,t0,w,hit,decision_correct,sd_correct"
    }
    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.seed, self.tau, self.t0, self.w, self.hit, self.decision_correct, self.sd_correct
        )
    }
    fn parse_csv_row(line: &str) -> Result<Self> {
        let f = split_fields(line, 7)?;
        Ok(Self {
            seed: parse_num(f[0])?,
            tau: parse_num(f[1])?,
            t0: parse_num(f[2])?,
            w: parse_num(f[3])?,
            hit: parse_num(f[4])?,
            decision_correct: parse_num(f[5])?,
            sd_correct: parse_num(f[6])?,
        })
    }
}

/// Full-information error on an adversarial pair (`lb-error`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LbErrorRecord {
    pub seed: u64,
    pub m: u32,
    pub b: usize,
    pub t0: usize,
    pub w: usize,
    /// Depth of the window's halves in the sign tree.
    pub d: u32,
    pub error: f64,
}

impl Record for LbErrorRecord {
    const KIND: &'static str = "lb-error";
    fn csv_header() -> &'static str {
        "seed,m,b,t0,w,d,error"
    }
    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.seed,
            self.m,
            self.b,
            self.t0,
            self.w,
            self.d,
            fmt_f64(self.error)
        )
    }
    fn parse_csv_row(line: &str) -> Result<Self> {
        let f = split_fields(line, 7)?;
        Ok(Self {
            seed: parse_num(f[0])?,
            m: parse_num(f[1])?,
            b: parse_num(f[2])?,
            t0: parse_num(f[3])?,
            w: parse_num(f[4])?,
            d: parse_num(f[5])?,
            error: parse_f64(f[6])?,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SketchBenchRecord {
    pub seed: u64,
    pub k: usize,
    pub stream_len: u64,
    pub top_count: u64,
    pub returned: usize,
    pub returned_count: u64,
    pub success: bool,
    pub bits: u64,
}

impl Record for SketchBenchRecord {
    const KIND: &'static str = "sketch-bench";
    fn csv_header() -> &'static str {
        "seed,k,stream_len,top_count,returned,returned_count,success,bits"
    }
    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.seed,
            self.k,
            self.stream_len,
            self.top_count,
            self.returned,
            self.returned_count,
            self.success,
            self.bits
        )
    }
    fn parse_csv_row(line: &str) -> Result<Self> {
        let f = split_fields(line, 8)?;
        Ok(Self {
            seed: parse_num(f[0])?,
            k: parse_num(f[1])?,
            stream_len: parse_num(f[2])?,
            top_count: parse_num(f[3])?,
            returned: parse_num(f[4])?,
            returned_count: parse_num(f[5])?,
            success: parse_num(f[6])?,
            bits: parse_num(f[7])?,
        })
    }
}

/// A completed experiment: records, per-trial failures, and summaries.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "R: Record", deserialize = "R: Record"))]
pub struct ExperimentOutput<R: Record> {
    pub kind: String,
    pub master_seed: u64,
    pub requested_trials: u64,
    pub records: Vec<R>,
    pub failures: Vec<(u64, String)>,
    pub summaries: Vec<Summary>,
}

impl<R: Record> ExperimentOutput<R> {
    pub fn new(master_seed: u64, requested_trials: u64) -> Self {
        Self {
            kind: R::KIND.to_string(),
            master_seed,
            requested_trials,
            records: Vec::new(),
            failures: Vec::new(),
            summaries: Vec::new(),
        }
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::from(R::csv_header());
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Vec<R>> {
        let mut lines = text.lines();
        match lines.next() {
            Some(header) if header == R::csv_header() => {}
            other => {
                return Err(Error::Config(format!(
                    "expected header `{}`, got {other:?}",
                    R::csv_header()
                )))
            }
        }
        lines.map(R::parse_csv_row).collect()
    }

    pub fn render_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Deterministic human-readable summary block.
    pub fn render_summary(&self) -> String {
        let mut out = format!(
            "kind={} seed={} trials={} ok={} failed={}\n",
            self.kind,
            self.master_seed,
            self.requested_trials,
            self.records.len(),
            self.failures.len()
        );
        for s in &self.summaries {
            out.push_str(&format!(
                "metric={} n={} mean={} std={} se={} ci95=[{},{}]\n",
                s.metric,
                s.count,
                fmt_f64(s.mean),
                fmt_f64(s.std),
                fmt_f64(s.se),
                fmt_f64(s.ci95_lo),
                fmt_f64(s.ci95_hi)
            ));
        }
        for (trial, msg) in &self.failures {
            out.push_str(&format!("failure trial={trial} {msg}\n"));
        }
        out
    }
}
