//! `ccalab`: command-line front end for the random-CCA experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use ccalab::harness::{apply_override, load_config_value, parse_config, run, RunError};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "ccalab", version, about = "Random canonical correlation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Wachter density and tail mass on a grid over the support.
    DensityTable(Common),
    /// Classical locations γ_1..γ_q.
    Quantiles(Common),
    /// One sample canonical correlation spectrum with rigidity deviations.
    Spectrum(Common),
    /// Local-law errors of the linearized resolvent over a z-grid.
    LocalLawSweep(Common),
    /// Tracy–Widom edge comparison against a GOE reference.
    TwEdge(Common),
    /// Rigidity deviations at n0, 2n0, 4n0 with fitted decay exponents.
    RigidityScaling(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config file, or a manifest.json from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Dotted-key override, e.g. `--override law.beta=4.5`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Command {
    fn split(self) -> (&'static str, Common) {
        match self {
            Command::DensityTable(c) => ("density-table", c),
            Command::Quantiles(c) => ("quantiles", c),
            Command::Spectrum(c) => ("spectrum", c),
            Command::LocalLawSweep(c) => ("local-law-sweep", c),
            Command::TwEdge(c) => ("tw-edge", c),
            Command::RigidityScaling(c) => ("rigidity-scaling", c),
        }
    }
}

fn build(kind: &str, common: &Common) -> Result<(ccalab::harness::ExperimentConfig, PathBuf), String> {
    let mut value = match &common.config {
        Some(path) => load_config_value(path)?,
        None => json!({}),
    };
    for o in &common.overrides {
        apply_override(&mut value, o)?;
    }
    let obj = value.as_object_mut().expect("config is an object");
    match obj.get("kind") {
        Some(Value::String(k)) if k != kind => {
            return Err(format!("kind: config is for {k} but the subcommand is {kind}"));
        }
        _ => {
            obj.insert("kind".into(), json!(kind));
        }
    }
    if let Some(seed) = common.seed {
        obj.insert("seed".into(), json!(seed));
    }
    if let Some(t) = common.threads {
        obj.insert("threads".into(), json!(t));
    }
    let cfg = parse_config(value)?;
    let out = common
        .out
        .clone()
        .or_else(|| cfg.out.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join(kind));
    Ok((cfg, out))
}

fn main() -> ExitCode {
    let (kind, common) = Cli::parse().command.split();
    let (cfg, out) = match build(kind, &common) {
        Ok(v) => v,
        Err(reason) => {
            eprintln!("error: {}", RunError::Validation(vec![reason]).reason());
            return ExitCode::from(2);
        }
    };
    match run(&cfg, &out) {
        Ok(summary) => {
            for f in &summary.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.reason());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
