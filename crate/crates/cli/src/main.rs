//! `lowlying`: exact moment predictions, Haar Monte Carlo, and identity checks
//! from the command line. Every run prints a JSON report; exit status is 0 when
//! all checks pass, 1 on a failed check, 2 on a usage error.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use config::{load_config, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] lowlying::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(lowlying::Error::Domain(_) | lowlying::Error::Parse(_)) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "lowlying", version, about = "Centered moments of low-lying zero statistics")]
struct Cli {
    /// `key = value` file; command-line flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Also write the JSON report here.
    #[arg(long, global = true)]
    json: Option<String>,
    /// Worker threads (sets RAYON_NUM_THREADS).
    #[arg(long, global = true, env = "LOWLYING_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Exact predicted centered moment.
    Moment(MomentArgs),
    /// Haar Monte Carlo over SO(M).
    Rmt(RmtArgs),
    /// Brute-force identity suites.
    Verify {
        #[command(subcommand)]
        what: VerifyCmd,
    },
    /// Bound on the proportion vanishing to order >= r.
    Vanish(VanishArgs),
    /// Compare the class expansion, the closed form and the quadrature oracle.
    Crosscheck(CrossArgs),
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    Combinat(CombinatArgs),
    Arith(ArithArgs),
    All(AllArgs),
}

#[derive(Args, Debug)]
struct MomentArgs {
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    sign: Option<String>,
}

#[derive(Args, Debug)]
struct RmtArgs {
    #[arg(long = "M", alias = "m")]
    m: Option<String>,
    #[arg(long)]
    parity: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    nmax: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Per-sample output: `sample_index,Z`.
    #[arg(long)]
    csv: Option<String>,
}

#[derive(Args, Debug)]
struct CombinatArgs {
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    tmax: Option<String>,
    #[arg(long)]
    shards: Option<String>,
}

#[derive(Args, Debug)]
struct ArithArgs {
    #[arg(long)]
    qmax: Option<String>,
    #[arg(long)]
    kloosterman_sweep: bool,
}

#[derive(Args, Debug)]
struct AllArgs {
    #[arg(long)]
    quick: bool,
}

#[derive(Args, Debug)]
struct VanishArgs {
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    sign: Option<String>,
    /// Sweep over comma-separated moment orders (with --sigmas).
    #[arg(long)]
    ns: Option<String>,
    #[arg(long)]
    sigmas: Option<String>,
}

#[derive(Args, Debug)]
struct CrossArgs {
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    a: Option<String>,
    /// Also run the Monte Carlo kernel oracle with this many samples.
    #[arg(long)]
    mc_samples: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

#[derive(Serialize)]
struct Timing {
    seconds: f64,
    parallel: bool,
}

#[derive(Serialize)]
struct Report {
    command: String,
    params: std::collections::BTreeMap<String, String>,
    seed: Option<u64>,
    results: Vec<serde_json::Value>,
    assumptions: Vec<String>,
    pass: bool,
    timing: Timing,
}

fn command_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Moment(_) => "moment",
        Cmd::Rmt(_) => "rmt",
        Cmd::Verify { what: VerifyCmd::Combinat(_) } => "verify-combinat",
        Cmd::Verify { what: VerifyCmd::Arith(_) } => "verify-arith",
        Cmd::Verify { what: VerifyCmd::All(_) } => "verify-all",
        Cmd::Vanish(_) => "vanish",
        Cmd::Crosscheck(_) => "crosscheck",
    }
}

/// Flags given on the command line, as `(key, value)` pairs.
fn flag_pairs(cmd: &Cmd) -> Vec<(&'static str, Option<String>)> {
    let b = |x: bool| x.then(|| "true".to_string());
    match cmd {
        Cmd::Moment(a) => vec![("sigma", a.sigma.clone()), ("n", a.n.clone()), ("a", a.a.clone()), ("sign", a.sign.clone())],
        Cmd::Rmt(a) => vec![
            ("m", a.m.clone()),
            ("parity", a.parity.clone()),
            ("samples", a.samples.clone()),
            ("sigma", a.sigma.clone()),
            ("nmax", a.nmax.clone()),
            ("seed", a.seed.clone()),
            ("csv", a.csv.clone()),
        ],
        Cmd::Verify { what: VerifyCmd::Combinat(a) } => {
            vec![("n", a.n.clone()), ("a", a.a.clone()), ("tmax", a.tmax.clone()), ("shards", a.shards.clone())]
        }
        Cmd::Verify { what: VerifyCmd::Arith(a) } => {
            vec![("qmax", a.qmax.clone()), ("kloosterman_sweep", b(a.kloosterman_sweep))]
        }
        Cmd::Verify { what: VerifyCmd::All(a) } => vec![("quick", b(a.quick))],
        Cmd::Vanish(a) => vec![
            ("r", a.r.clone()),
            ("n", a.n.clone()),
            ("sigma", a.sigma.clone()),
            ("sign", a.sign.clone()),
            ("ns", a.ns.clone()),
            ("sigmas", a.sigmas.clone()),
        ],
        Cmd::Crosscheck(a) => vec![
            ("n", a.n.clone()),
            ("sigma", a.sigma.clone()),
            ("a", a.a.clone()),
            ("mc_samples", a.mc_samples.clone()),
            ("seed", a.seed.clone()),
        ],
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let name = command_name(&cli.cmd);
    let mut cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    if let Some(c) = cfg.command() {
        if c != name {
            return Err(CliError::Usage(format!("config is for '{c}' but the command is '{name}'")));
        }
    }
    cfg.set("command", name)?;
    for (k, v) in flag_pairs(&cli.cmd) {
        if let Some(v) = v {
            cfg.set(k, &v)?;
        }
    }
    if let Some(j) = &cli.json {
        cfg.set("json", j)?;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(Report, Option<String>), CliError> {
    let start = Instant::now();
    let mut cfg = resolve(cli)?;
    let outcome = match command_name(&cli.cmd) {
        "moment" => commands::moment(&mut cfg)?,
        "rmt" => commands::rmt(&mut cfg)?,
        "verify-combinat" => commands::verify_combinat(&mut cfg)?,
        "verify-arith" => commands::verify_arith(&mut cfg)?,
        "verify-all" => commands::verify_all(&mut cfg)?,
        "vanish" => commands::vanish(&mut cfg)?,
        "crosscheck" => commands::crosscheck(&mut cfg)?,
        other => unreachable!("unhandled command {other}"),
    };
    let report = Report {
        command: cfg.command().unwrap_or_default().to_string(),
        seed: cfg.get("seed").and_then(|s| s.parse().ok()),
        params: cfg.params.clone(),
        results: outcome.results,
        assumptions: outcome.assumptions,
        pass: outcome.pass,
        timing: Timing { seconds: start.elapsed().as_secs_f64(), parallel: lowlying::par::is_parallel() },
    };
    Ok((report, cfg.get("json").map(String::from)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        // Read by rayon when its global pool starts, before any parallel work.
        std::env::set_var("RAYON_NUM_THREADS", t.to_string());
    }
    match run(&cli) {
        Ok((report, path)) => {
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            // A closed pipe (e.g. `| head`) is not an error worth a panic.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if let Some(p) = path {
                if let Err(e) = std::fs::write(&p, &text) {
                    eprintln!("error: cannot write {p}: {e}");
                    return ExitCode::from(1);
                }
            }
            ExitCode::from(if report.pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
