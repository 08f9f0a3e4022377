//! `lbai`: generate adversarial bandit instances, run lookahead
//! identification and regret experiments, and execute the exact
//! verification suites.
//!
//! Exit codes: 0 success, 1 validation error, 2 trial failures occurred,
//! 3 a verification suite failed.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use lookahead_bai::harness::{
    run_experiment, ExperimentConfig, ExperimentKind, OutputFormat, RunOutcome,
};
use lookahead_bai::instances::io::{GeneratorSpec, InstanceFile};

#[derive(Parser)]
#[command(name = "lbai", version, about)]
struct Cli {
    /// Master seed; every trial derives its own substream from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of Monte Carlo trials (enumeration suites ignore it).
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Write records to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Run a JSON experiment config instead of a subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen(GenArgs),
    /// Dense lookahead identification on an instance.
    Bai(BaiArgs),
    /// Sketch-backed lookahead identification on an instance.
    SparseBai(SparseBaiArgs),
    /// Block-reduction regret minimization on an instance (losses = 1 - reward).
    Regret(RegretArgs),
    /// The set-disjointness window demo.
    SdDemo(SdDemoArgs),
    /// Full-information error on adversarial sign-tree pairs.
    LbError(LbErrorArgs),
    /// Synthetic-stream sketch benchmark.
    SketchBench(SketchBenchArgs),
    /// Exact verification suites.
    Verify {
        #[command(subcommand)]
        suite: VerifySuite,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    /// Heavy-arm count (polarized).
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    light_cap: Option<usize>,
    #[arg(long)]
    heavy_zeros: Option<usize>,
    /// Tree depth (sign-tree-pair).
    #[arg(long)]
    m: Option<u32>,
    /// Universe size (set-disjointness).
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated set, e.g. `1,3,7`.
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    tau: Option<usize>,
    /// Band fraction as `num/den`.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    w: Option<usize>,
    /// Success probability (bernoulli).
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    label: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Polarized,
    SignTreePair,
    SetDisjointness,
    Bernoulli,
}

#[derive(Args)]
struct BaiArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    lo: Option<u32>,
    #[arg(long)]
    hi: Option<u32>,
}

#[derive(Args)]
struct SparseBaiArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Local sparsity bound handed to the sketch.
    #[arg(long)]
    phi: f64,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    lo: Option<u32>,
    #[arg(long)]
    hi: Option<u32>,
}

#[derive(Args)]
struct RegretArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "hedge")]
    learner: String,
    /// Block count; defaults to the largest divisor of T under T^(2/3) K^(1/3).
    #[arg(long)]
    q: Option<usize>,
    /// Pool size (pool-hedge).
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    epoch_len: Option<usize>,
}

#[derive(Args)]
struct SdDemoArgs {
    #[arg(long, default_value_t = 31)]
    n: usize,
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
    #[arg(long, default_value_t = 1 << 14)]
    t: usize,
    /// Window divisor: the window length is t / c.
    #[arg(long, default_value_t = 2)]
    c: usize,
    /// Band fraction as `num/den`.
    #[arg(long)]
    lambda: Option<String>,
}

#[derive(Args)]
struct LbErrorArgs {
    /// Tree depth; the horizon is 2^m.
    #[arg(long, default_value_t = 16)]
    m: u32,
    #[arg(long)]
    shared_signs: bool,
    #[arg(long)]
    lo: Option<u32>,
    #[arg(long)]
    hi: Option<u32>,
}

#[derive(Args)]
struct SketchBenchArgs {
    #[arg(long, default_value_t = 64)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    heavy_items: usize,
    #[arg(long, default_value_t = 1000)]
    heavy_count: u64,
    #[arg(long, default_value_t = 100)]
    ratio: u64,
    #[arg(long, default_value_t = 0.3)]
    eps: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long)]
    phi: Option<f64>,
}

#[derive(Subcommand)]
enum VerifySuite {
    /// Exact window-gap bound over random sequences.
    Lemma1 {
        #[arg(long, default_value_t = 1024)]
        t: usize,
        #[arg(long, default_value_t = 3)]
        lo: u32,
        #[arg(long, default_value_t = 9)]
        hi: u32,
    },
    /// Walk-increment orthogonality identity by full enumeration.
    Orthogonality {
        #[arg(long, default_value_t = 8)]
        max_depth: u32,
    },
    /// Exact misprediction floor per depth.
    Claim4 {
        #[arg(long, default_value_t = 64)]
        max_d: u32,
    },
    /// Polarized-instance sparsity bound and sliding-vs-naive agreement.
    Sparsity {
        #[arg(long, default_value_t = 64)]
        k: usize,
        #[arg(long, default_value_t = 1 << 16)]
        t: usize,
        #[arg(long, default_value_t = 1 << 8)]
        w: usize,
        /// Comma-separated heavy-arm counts.
        #[arg(long, default_value = "1,2,4")]
        r: String,
    },
}

fn parse_set(text: &str) -> Result<Vec<usize>, String> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|part| part.trim().parse::<usize>().map_err(|e| format!("bad set entry `{part}`: {e}")))
        .collect()
}

fn parse_lambda(text: &str) -> Result<(u64, u64), String> {
    let (num, den) = text.split_once('/').ok_or_else(|| format!("lambda `{text}` is not num/den"))?;
    Ok((
        num.trim().parse().map_err(|e| format!("bad lambda numerator: {e}"))?,
        den.trim().parse().map_err(|e| format!("bad lambda denominator: {e}"))?,
    ))
}

fn require<T: Copy>(value: Option<T>, flag: &str) -> Result<T, String> {
    value.ok_or_else(|| format!("missing required flag --{flag}"))
}

fn run_gen(cli: &Cli, args: &GenArgs) -> Result<(), String> {
    let out = cli.out.clone().ok_or("gen needs --out")?;
    let seed = cli.seed;
    let file = match args.kind {
        GenKind::Polarized => {
            let k = require(args.k, "k")?;
            let t = require(args.t, "t")?;
            let r = require(args.r, "r")?;
            let mut params = json!({"k": k, "t": t, "r": r});
            if let Some(cap) = args.light_cap {
                params["light_cap"] = json!(cap);
            }
            if let Some(z) = args.heavy_zeros {
                params["heavy_zeros"] = json!(z);
            }
            InstanceFile::generator(
                k,
                t,
                args.label.as_deref().unwrap_or("polarized"),
                GeneratorSpec { name: "polarized".into(), params, seed },
            )
        }
        GenKind::SignTreePair => {
            let m = require(args.m, "m")?;
            InstanceFile::generator(
                2,
                1 << m,
                args.label.as_deref().unwrap_or("sign-tree-pair"),
                GeneratorSpec { name: "sign-tree-pair".into(), params: json!({"m": m}), seed },
            )
        }
        GenKind::SetDisjointness => {
            let n = require(args.n, "n")?;
            let t = require(args.t, "t")?;
            let tau = require(args.tau, "tau")?;
            let w = require(args.w, "w")?;
            let a = parse_set(args.a.as_deref().ok_or("missing required flag --a")?)?;
            let b = parse_set(args.b.as_deref().ok_or("missing required flag --b")?)?;
            let mut params = json!({"n": n, "t": t, "a": a, "b": b, "tau": tau, "w": w});
            if let Some(lambda) = &args.lambda {
                params["lambda"] = json!(parse_lambda(lambda)?);
            }
            InstanceFile::generator(
                n + 1,
                t,
                args.label.as_deref().unwrap_or("set-disjointness"),
                GeneratorSpec { name: "set-disjointness".into(), params, seed },
            )
        }
        GenKind::Bernoulli => {
            let k = require(args.k, "k")?;
            let t = require(args.t, "t")?;
            let p = require(args.p, "p")?;
            InstanceFile::generator(
                k,
                t,
                args.label.as_deref().unwrap_or("bernoulli"),
                GeneratorSpec { name: "bernoulli".into(), params: json!({"k": k, "t": t, "p": p}), seed },
            )
        }
    };
    // Materialize once so malformed parameters fail here, not at use.
    file.to_instance().map_err(|e| e.to_string())?;
    file.save(&out).map_err(|e| e.to_string())?;
    println!("wrote {} ({}x{}, kind {:?})", out.display(), file.k, file.t, file.kind);
    Ok(())
}

fn base_config(cli: &Cli, kind: ExperimentKind, default_trials: u64) -> ExperimentConfig {
    let mut config = ExperimentConfig::new(kind, cli.trials.unwrap_or(default_trials), cli.seed);
    config.format = cli.format.into();
    config.out = cli.out.clone();
    config
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, String> {
    let command = cli.command.as_ref().ok_or("no subcommand or --config given")?;
    let with_params = |mut config: ExperimentConfig,
                       params: serde_json::Value,
                       instance: Option<&PathBuf>|
     -> ExperimentConfig {
        config.params = params;
        config.instance_path = instance.cloned();
        config
    };
    Ok(match command {
        Command::Gen(_) => unreachable!("gen is handled before config building"),
        Command::Bai(args) => with_params(
            base_config(cli, ExperimentKind::Bai, 100),
            json!({"lo": args.lo, "hi": args.hi}),
            Some(&args.instance),
        ),
        Command::SparseBai(args) => with_params(
            base_config(cli, ExperimentKind::SparseBai, 100),
            json!({
                "phi": args.phi,
                "eps": args.eps,
                "delta": args.delta,
                "lo": args.lo,
                "hi": args.hi,
            }),
            Some(&args.instance),
        ),
        Command::Regret(args) => with_params(
            base_config(cli, ExperimentKind::Regret, 20),
            json!({
                "learner": args.learner,
                "q": args.q,
                "s": args.s,
                "eta": args.eta,
                "epoch_len": args.epoch_len,
            }),
            Some(&args.instance),
        ),
        Command::SdDemo(args) => {
            let mut params = json!({
                "n": args.n,
                "a": parse_set(&args.a)?,
                "b": parse_set(&args.b)?,
                "t": args.t,
                "c": args.c,
            });
            if let Some(lambda) = &args.lambda {
                params["lambda"] = json!(parse_lambda(lambda)?);
            }
            with_params(base_config(cli, ExperimentKind::SdDemo, 1000), params, None)
        }
        Command::LbError(args) => with_params(
            base_config(cli, ExperimentKind::LbError, 400),
            json!({
                "m": args.m,
                "shared_signs": args.shared_signs,
                "lo": args.lo,
                "hi": args.hi,
            }),
            None,
        ),
        Command::SketchBench(args) => with_params(
            base_config(cli, ExperimentKind::SketchBench, 100),
            json!({
                "k": args.k,
                "heavy_items": args.heavy_items,
                "heavy_count": args.heavy_count,
                "ratio": args.ratio,
                "eps": args.eps,
                "delta": args.delta,
                "phi": args.phi,
            }),
            None,
        ),
        Command::Verify { suite } => match suite {
            VerifySuite::Lemma1 { t, lo, hi } => with_params(
                base_config(cli, ExperimentKind::Lemma1, 200),
                json!({"t": t, "lo": lo, "hi": hi}),
                None,
            ),
            VerifySuite::Orthogonality { max_depth } => with_params(
                base_config(cli, ExperimentKind::Orthogonality, 100),
                json!({"max_depth": max_depth}),
                None,
            ),
            VerifySuite::Claim4 { max_d } => with_params(
                base_config(cli, ExperimentKind::LbClaim4, 1),
                json!({"max_d": max_d}),
                None,
            ),
            VerifySuite::Sparsity { k, t, w, r } => with_params(
                base_config(cli, ExperimentKind::Sparsity, 1),
                json!({"k": k, "t": t, "w": w, "r_values": parse_set(r)?}),
                None,
            ),
        },
    })
}

/// Drop null-valued keys so kind-specific param structs see real defaults.
fn prune_nulls(value: &mut serde_json::Value) {
    if let Some(map) = value.as_object_mut() {
        map.retain(|_, v| !v.is_null());
    }
}

fn report(outcome: &RunOutcome) -> ExitCode {
    print!("{}", outcome.summary_rendered);
    if let Some(passed) = outcome.verification {
        println!("verification: {}", if passed { "PASS" } else { "FAIL" });
        if !passed {
            return ExitCode::from(3);
        }
    }
    if outcome.failed_trials > 0 {
        eprintln!("{} of {} trials failed", outcome.failed_trials, outcome.requested_trials);
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(path) = &cli.config {
        if cli.command.is_some() {
            eprintln!("give either --config or a subcommand, not both");
            return ExitCode::from(1);
        }
        return match ExperimentConfig::load(path).and_then(|config| run_experiment(&config)) {
            Ok(outcome) => report(&outcome),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        };
    }

    if let Some(Command::Gen(args)) = &cli.command {
        return match run_gen(&cli, args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        };
    }

    let mut config = match build_config(&cli) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    prune_nulls(&mut config.params);
    match run_experiment(&config) {
        Ok(outcome) => report(&outcome),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
