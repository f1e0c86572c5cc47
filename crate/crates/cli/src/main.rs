//! `switchsel`: select between nested exponential-family models, run an
//! anytime-valid sequential test on a stream, drive the Monte Carlo harness,
//! and run numerical self-checks.

use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use serde_json::json;
use switchsel::criteria::{post_selection_estimate, AnytimeCriterion, Decision, RobustTest};
use switchsel::expfam::{Estimator, SuffStats};
use switchsel::harness::{self, fmt_f64, write_atomic, SimConfig, SimKind};
use switchsel::{Error, Model};

mod diag;
mod input;
mod manifest;
mod pair;

use input::InputError;
use manifest::RunManifest;
use pair::PairConfig;

#[derive(Debug, Parser)]
#[command(name = "switchsel", version, about = "Switch-criterion model selection and anytime-valid testing")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat TOML config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Observations: CSV, or JSON lines for .jsonl/.ndjson/.json. Defaults to stdin.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Output path for `simulate`; the CSV and JSON reports share its stem.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// e.g. switch, switch:0.5, bayes, aic, aic-level:0.05, bic, hq:1.2.
    #[arg(long, global = true)]
    criterion: Option<String>,
    #[arg(long, global = true)]
    reps: Option<usize>,
    /// Single stopping horizon for `simulate stopping|lil`.
    #[arg(long, global = true)]
    horizon: Option<usize>,
    /// Worker threads for `simulate`; 0 uses every core.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Choose a model for a data file and print the decision and estimate as JSON.
    Select,
    /// Read one observation per line and print the test status after each.
    Test,
    /// Run a Monte Carlo study: risk, stopping, power, lil, consistency or decomposition.
    Simulate { kind: String },
    /// Check the Laplace diagnostic, the loss sandwich and quadrature against the conjugate marginal.
    Diag,
}

/// Exit status and message of a failed run.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    const PARSE: u8 = 2;
    const OBSERVATION: u8 = 3;
    const CONFIG: u8 = 4;
    const NOT_ANYTIME: u8 = 5;

    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            // The data cannot support the requested criterion.
            Error::InvalidObservation { .. } | Error::UndefinedMle(_) | Error::NTooSmall { .. } => Failure::OBSERVATION,
            Error::NotAnytimeValid(_) => Failure::NOT_ANYTIME,
            Error::InvalidConfig(_) | Error::InvalidParameter(_) | Error::Unsupported(_) => Failure::CONFIG,
            _ => 1,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        match e {
            InputError::Parse(m) => Failure::new(Failure::PARSE, m),
            InputError::Unsupported(m) => Failure::new(Failure::OBSERVATION, m),
        }
    }
}

fn io_failure(what: &Path, e: io::Error) -> Failure {
    Failure::new(1, format!("{}: {e}", what.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Select => cmd_select(&cli),
        Command::Test => cmd_test(&cli),
        Command::Simulate { kind } => cmd_simulate(&cli, kind),
        Command::Diag => cmd_diag(&cli),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_config(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(Failure::CONFIG, format!("{}: {e}", path.display())))
}

fn load_pair_config(cli: &Cli) -> Result<PairConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => PairConfig::from_toml(&read_config(p)?)?,
        None => PairConfig::default(),
    };
    if let Some(c) = &cli.criterion {
        cfg.criterion = c.clone();
    }
    if let Some(a) = cli.alpha {
        cfg.alpha = a;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_select(cli: &Cli) -> Result<u8, Failure> {
    let cfg = load_pair_config(cli)?;
    let manifest = RunManifest::start("select", &cfg, None);
    let sel = cfg.selector()?;
    let kind = cfg.criterion_kind()?;
    let xs = input::read_observations(cli.data.as_deref())?;
    for &x in &xs {
        sel.pair.family().check_observation(x)?;
    }
    let decision = if xs.is_empty() {
        // No data: nothing favours the complex model.
        Decision {
            criterion: kind,
            selected: Model::Simple,
            evidence: 1.0,
            ln_evidence: kind.is_ratio().then_some(0.0),
            n: 0,
            singleton_null: sel.pair.is_singleton(),
        }
    } else {
        sel.decide(kind, &xs)?
    };
    let stats = SuffStats::from_sample(*sel.pair.family(), &xs)?;
    let (estimate, estimator) = match post_selection_estimate(&decision, &stats, &Estimator::Mle, &Estimator::Mle, &sel.pair) {
        Ok(m) => (m, "mle"),
        Err(Error::UndefinedMle(_) | Error::EmptySample) => {
            let map = cfg.fallback_estimator()?;
            (post_selection_estimate(&decision, &stats, &map, &map, &sel.pair)?, "map-fallback")
        }
        Err(e) => return Err(e.into()),
    };
    let out = json!({
        "manifest": manifest.finish(),
        "decision": decision,
        "estimate": estimate.values(),
        "estimator": estimator,
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("output serializes"));
    Ok(0)
}

fn cmd_test(cli: &Cli) -> Result<u8, Failure> {
    let cfg = load_pair_config(cli)?;
    let crit = AnytimeCriterion::try_from(cfg.criterion_kind()?)?;
    let sel = cfg.selector()?;
    let mut test = RobustTest::new(crit, &sel, cfg.alpha)?;
    let manifest = RunManifest::start("test", &cfg, None);

    let reader: Box<dyn BufRead> = match &cli.data {
        Some(p) => Box::new(io::BufReader::new(std::fs::File::open(p).map_err(|e| io_failure(p, e))?)),
        None => Box::new(io::stdin().lock()),
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let emit = |out: &mut io::StdoutLock, line: String| -> Result<(), Failure> {
        writeln!(out, "{line}").and_then(|_| out.flush()).map_err(|e| Failure::new(1, format!("stdout: {e}")))
    };
    emit(&mut out, manifest.comment_line())?;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Failure::new(Failure::OBSERVATION, format!("line {}: {e}", i + 1)))?;
        if line.trim().is_empty() {
            continue;
        }
        let x = input::parse_stream_line(&line)
            .map_err(|e| Failure::new(Failure::OBSERVATION, format!("line {}: {}", i + 1, Failure::from(e).message)))?;
        let step = test.push(x).map_err(|e| {
            let f = Failure::from(e);
            Failure::new(f.code, format!("line {}: {}", i + 1, f.message))
        })?;
        emit(
            &mut out,
            format!("{}\t{}\t{}\t{}", step.n, fmt_f64(step.evidence), fmt_f64(step.ln_evidence), step.status.as_str()),
        )?;
    }
    Ok(0)
}

fn output_paths(cli: &Cli, kind: SimKind) -> (PathBuf, PathBuf) {
    let base = cli.out.clone().unwrap_or_else(|| PathBuf::from(kind.as_str()));
    (base.with_extension("csv"), base.with_extension("json"))
}

fn cmd_simulate(cli: &Cli, kind: &str) -> Result<u8, Failure> {
    let kind = SimKind::from_str(kind).map_err(|e| Failure::new(Failure::CONFIG, e.to_string()))?;
    let mut cfg = match &cli.config {
        Some(p) => SimConfig::from_toml(&read_config(p)?, Some(kind))?,
        None => SimConfig::defaults(kind),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(r) = cli.reps {
        cfg.reps = r;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(h) = cli.horizon {
        cfg.horizons = vec![h];
    }
    if let Some(a) = cli.alpha {
        cfg.alphas = vec![a];
    }
    if let Some(c) = &cli.criterion {
        cfg.criteria = vec![c.clone()];
    }
    cfg.validate()?;

    let manifest = RunManifest::start("simulate", &cfg, Some(cfg.seed));
    let report = harness::run(&cfg)?;
    let manifest = manifest.finish().to_value();
    let (csv_path, json_path) = output_paths(cli, kind);
    let json = serde_json::to_string_pretty(&report.to_json(&manifest, &cfg)).expect("report serializes");
    write_atomic(&json_path, json.as_bytes()).map_err(|e| io_failure(&json_path, e))?;
    write_atomic(&csv_path, report.csv_with_manifest(&manifest).as_bytes()).map_err(|e| io_failure(&csv_path, e))?;
    println!("wrote {} rows to {} and {}", report.row_count(), csv_path.display(), json_path.display());
    Ok(0)
}

fn cmd_diag(cli: &Cli) -> Result<u8, Failure> {
    let cfg = load_pair_config(cli)?;
    let manifest = RunManifest::start("diag", &cfg, Some(cfg.seed));
    let checks = diag::run(&cfg)?;
    println!("{}", manifest.finish().comment_line());
    for c in &checks {
        println!("{}\t{}\t{}", c.name, c.status(), c.detail);
    }
    Ok(if checks.iter().any(|c| c.pass == Some(false)) { 1 } else { 0 })
}
