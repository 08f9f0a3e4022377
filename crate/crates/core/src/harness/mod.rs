//! Experiment configuration, seeded Monte Carlo execution, and the
//! verification suites.
//!
//! A config fully determines its outputs: trial `i` draws from substreams
//! derived from `(master_seed, label, i)`, trials run in parallel but
//! reduce in trial order, and rendered records are byte-stable across
//! runs. Failed trials are recorded and counted, never dropped.

mod experiments;
pub mod oracles;
pub mod output;
pub mod summary;

pub use oracles::{misprediction_oracle, MispredictionOracle, QuadExt};
pub use output::{
    fmt_f64, BaiRecord, ExperimentOutput, GapRecord, LbErrorRecord, MispredictionRecord,
    OrthogonalityRecord, Record, RegretRecord, SdDemoRecord, SketchBenchRecord, SparsityRecord,
};
pub use summary::{summarize, Summary};

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::instances::io::InstanceFile;
use crate::instances::BanditInstance;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Bai,
    SparseBai,
    Regret,
    Lemma1,
    Orthogonality,
    LbError,
    LbClaim4,
    SdDemo,
    Sparsity,
    SketchBench,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Bai => "bai",
            Self::SparseBai => "sparse-bai",
            Self::Regret => "regret",
            Self::Lemma1 => "lemma1",
            Self::Orthogonality => "orthogonality",
            Self::LbError => "lb-error",
            Self::LbClaim4 => "lb-claim4",
            Self::SdDemo => "sd-demo",
            Self::Sparsity => "sparsity",
            Self::SketchBench => "sketch-bench",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

fn empty_params() -> serde_json::Value {
    serde_json::Value::Object(serde_json::Map::new())
}

/// One experiment, fully specified. Mirrors the JSON config file format;
/// unknown keys are rejected.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub trials: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Inline instance description, for kinds that consume one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceFile>,
    /// Alternatively, a path to an instance file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_path: Option<PathBuf>,
    /// Kind-specific parameters; each kind validates its own schema.
    #[serde(default = "empty_params")]
    pub params: serde_json::Value,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, trials: u64, master_seed: u64) -> Self {
        Self {
            kind,
            trials,
            master_seed,
            format: OutputFormat::default(),
            out: None,
            instance: None,
            instance_path: None,
            params: empty_params(),
        }
    }

    pub fn with_params<T: Serialize>(mut self, params: &T) -> Result<Self> {
        self.params = serde_json::to_value(params)?;
        Ok(self)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub(crate) fn resolve_instance(&self) -> Result<BanditInstance> {
        match (&self.instance, &self.instance_path) {
            (Some(file), None) => file.to_instance(),
            (None, Some(path)) => InstanceFile::load(path)?.to_instance(),
            (None, None) => {
                Err(Error::Config(format!("experiment `{}` needs an instance", self.kind.as_str())))
            }
            (Some(_), Some(_)) => {
                Err(Error::Config("give either an inline instance or a path, not both".into()))
            }
        }
    }

    pub(crate) fn typed_params<T: serde::de::DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(self.params.clone())
            .map_err(|e| Error::Config(format!("bad `{}` params: {e}", self.kind.as_str())))
    }
}

/// What an experiment run produced, rendered and ready to persist.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub kind: ExperimentKind,
    /// Records in the configured format (CSV table or JSON document).
    pub records_rendered: String,
    /// Deterministic human-readable summary block.
    pub summary_rendered: String,
    pub summaries: Vec<Summary>,
    pub requested_trials: u64,
    pub completed_trials: u64,
    pub failed_trials: u64,
    /// `Some(passed)` for verification kinds, `None` for plain experiments.
    pub verification: Option<bool>,
}

/// Run a configured experiment: execute trials, summarize, render, and
/// persist to `config.out` when set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome> {
    let needs_trials = !matches!(config.kind, ExperimentKind::LbClaim4 | ExperimentKind::Sparsity);
    if needs_trials && config.trials == 0 {
        return Err(Error::Config("trials must be >= 1; nothing to run or summarize".into()));
    }
    let outcome = match config.kind {
        ExperimentKind::Bai => experiments::bai(config)?,
        ExperimentKind::SparseBai => experiments::sparse_bai(config)?,
        ExperimentKind::Regret => experiments::regret(config)?,
        ExperimentKind::Lemma1 => experiments::window_gap(config)?,
        ExperimentKind::Orthogonality => experiments::orthogonality(config)?,
        ExperimentKind::LbError => experiments::lb_error(config)?,
        ExperimentKind::LbClaim4 => experiments::misprediction_floor(config)?,
        ExperimentKind::SdDemo => experiments::sd_demo(config)?,
        ExperimentKind::Sparsity => experiments::sparsity(config)?,
        ExperimentKind::SketchBench => experiments::sketch_bench(config)?,
    };
    if let Some(path) = &config.out {
        std::fs::write(path, &outcome.records_rendered)?;
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn config(kind: ExperimentKind, trials: u64, seed: u64, params: serde_json::Value) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(kind, trials, seed);
        c.params = params;
        c
    }

    #[test]
    fn zero_trials_refused_with_explicit_message() {
        let cfg = config(ExperimentKind::LbError, 0, 1, json!({"m": 6}));
        match run_experiment(&cfg) {
            Err(Error::Config(msg)) => assert!(msg.contains("trials")),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn bai_on_constant_arms_has_zero_mean_error() {
        let mut cfg = config(ExperimentKind::Bai, 25, 2, json!({}));
        cfg.instance = Some(
            InstanceFile::dense(&[vec![1.0; 64], vec![0.0; 64]], "steps").unwrap(),
        );
        let outcome = run_experiment(&cfg).unwrap();
        assert_eq!(outcome.completed_trials, 25);
        let error = outcome.summaries.iter().find(|s| s.metric == "error").unwrap();
        assert_eq!(error.mean, 0.0);
    }

    #[test]
    fn shared_sign_streams_have_zero_error() {
        let cfg = config(
            ExperimentKind::LbError,
            40,
            3,
            json!({"m": 8, "shared_signs": true}),
        );
        let outcome = run_experiment(&cfg).unwrap();
        let error = outcome.summaries.iter().find(|s| s.metric == "error").unwrap();
        assert_eq!(error.mean, 0.0);
        assert_eq!(error.std, 0.0);
    }

    #[test]
    fn error_floor_shrinks_with_depth() {
        // The adversarial construction's gaps scale like sqrt(d/M): the
        // shallow tree is strictly harder for the predictor.
        let mean_at = |m: u32| {
            let cfg = config(ExperimentKind::LbError, 400, 4, json!({"m": m}));
            run_experiment(&cfg).unwrap().summaries[0].mean
        };
        assert!(mean_at(4) >= mean_at(16));
    }

    #[test]
    fn summaries_recompute_exactly_from_rendered_records() {
        let cfg = config(ExperimentKind::LbError, 30, 5, json!({"m": 8}));
        let outcome = run_experiment(&cfg).unwrap();
        let records =
            ExperimentOutput::<LbErrorRecord>::parse_csv(&outcome.records_rendered).unwrap();
        assert_eq!(records.len() as u64 + outcome.failed_trials, outcome.requested_trials);
        let errors: Vec<f64> = records.iter().map(|r| r.error).collect();
        let recomputed = summarize("error", &errors).unwrap();
        let original = &outcome.summaries[0];
        // CSV floats carry 12 significant digits; the recomputed moments
        // agree to that precision.
        assert_eq!(recomputed.count, original.count);
        assert!((recomputed.mean - original.mean).abs() <= 1e-10 * original.mean.abs().max(1.0));
        assert!((recomputed.std - original.std).abs() <= 1e-10 * original.std.abs().max(1.0));
    }

    #[test]
    fn outputs_do_not_depend_on_thread_count() {
        let cfg = config(ExperimentKind::LbError, 40, 12, json!({"m": 8}));
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_experiment(&cfg))
            .unwrap();
        let parallel = run_experiment(&cfg).unwrap();
        assert_eq!(single.records_rendered, parallel.records_rendered);
        assert_eq!(single.summary_rendered, parallel.summary_rendered);
    }

    #[test]
    fn unknown_param_keys_rejected() {
        let cfg = config(ExperimentKind::Lemma1, 5, 1, json!({"t": 64, "lo": 1, "hi": 5, "nope": 1}));
        assert!(matches!(run_experiment(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn instance_source_is_exclusive() {
        let mut cfg = config(ExperimentKind::Bai, 5, 1, json!({}));
        cfg.instance =
            Some(InstanceFile::dense(&[vec![0.5; 16]], "x").unwrap());
        cfg.instance_path = Some("also.json".into());
        assert!(matches!(run_experiment(&cfg), Err(Error::Config(_))));
    }
}
