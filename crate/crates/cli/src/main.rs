use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use indbench::datagen::DEFAULT_EPISODES;
use indbench::io::write_trajectory;
use indbench::miscal::penalty_landscape;
use indbench::{
    evaluate_policy, export_batch, generate_batch, rollout, transfer_layout, BehaviorPolicy, EnvConfig, Error,
    Format, InitMode, SetpointMode,
};

const EXIT_VALIDATION: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "indbench", version, about = "Industrial benchmark simulator and batch-data tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Roll one environment and write its trajectory as CSV.
    Rollout(RolloutArgs),
    /// Generate a transition batch across setpoints.
    Batch(BatchArgs),
    /// Score a behavior policy and print summary statistics as JSON.
    Evaluate(EvaluateArgs),
    /// Generate a large source batch and a small target batch.
    Transfer(TransferArgs),
    /// Dump the mis-calibration penalty grid as CSV (phi, h_e, m).
    Landscape(LandscapeArgs),
}

#[derive(Args)]
struct Common {
    /// Random seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Behavior policy: random | safe | safe:<amplitude>,<noise_scale>.
    #[arg(long, default_value = "random")]
    policy: String,
    /// Output path; stdout when omitted (where supported).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RolloutArgs {
    #[command(flatten)]
    common: Common,
    /// Environment configuration JSON file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Constant setpoint; overrides the configuration file.
    #[arg(long)]
    setpoint: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    /// Append latent-state columns.
    #[arg(long)]
    debug_latents: bool,
}

#[derive(Args)]
struct BatchArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated setpoints.
    #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50,60,70,80,90,100")]
    setpoints: Vec<f64>,
    /// Steps per setpoint.
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50,60,70,80,90,100")]
    setpoints: Vec<f64>,
    /// Scored steps per episode.
    #[arg(long = "steps", alias = "horizon", default_value_t = 1000)]
    horizon: usize,
    #[arg(long, default_value_t = DEFAULT_EPISODES)]
    episodes: usize,
    /// Episode start: start | random.
    #[arg(long, default_value = "start")]
    init: String,
}

#[derive(Args)]
struct TransferArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 50.0)]
    source_setpoint: f64,
    #[arg(long, default_value_t = 10_000)]
    source_size: usize,
    #[arg(long, default_value_t = 75.0)]
    target_setpoint: f64,
    #[arg(long, default_value_t = 500)]
    target_size: usize,
    #[arg(long, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct LandscapeArgs {
    /// Grid spacing in effective shift.
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn require_out(out: Option<&PathBuf>) -> Result<&Path, Error> {
    out.map(PathBuf::as_path)
        .ok_or_else(|| Error::Validation("--out is required".into()))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Rollout(a) => {
            let mut cfg = match &a.config {
                Some(path) => EnvConfig::from_path(path).map_err(|e| match e {
                    Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
                    other => other,
                })?,
                None => EnvConfig::default(),
            };
            if a.config.is_none() || a.common.seed != 0 {
                cfg.seed = a.common.seed;
            }
            if let Some(p) = a.setpoint {
                cfg.setpoint = SetpointMode::Constant { value: p };
            }
            cfg.validate()?;
            let policy = BehaviorPolicy::parse(&a.common.policy)?;
            let rows = rollout(cfg, &policy, a.steps)?;
            let mut w = output(a.common.out.as_deref())?;
            write_trajectory(&rows, a.debug_latents, &mut w)?;
            w.flush()?;
        }
        Command::Batch(a) => {
            let policy = BehaviorPolicy::parse(&a.common.policy)?;
            let out = require_out(a.common.out.as_ref())?;
            let batch = generate_batch(&a.setpoints, a.steps, &policy, a.common.seed)?;
            export_batch(&batch, a.format, out)?;
            eprintln!("wrote {} transitions to {}", batch.records.len(), out.display());
        }
        Command::Evaluate(a) => {
            let policy = BehaviorPolicy::parse(&a.common.policy)?;
            let init = match a.init.as_str() {
                "start" => InitMode::Start,
                "random" => InitMode::Random,
                other => return Err(Error::Validation(format!("unknown init mode {other:?}"))),
            };
            let summary = evaluate_policy(&policy, &a.setpoints, a.horizon, a.episodes, a.common.seed, init)?;
            let mut w = output(a.common.out.as_deref())?;
            serde_json::to_writer_pretty(&mut w, &summary)?;
            writeln!(w)?;
            w.flush()?;
        }
        Command::Transfer(a) => {
            let policy = BehaviorPolicy::parse(&a.common.policy)?;
            let dir = require_out(a.common.out.as_ref())?;
            let (source, target) = transfer_layout(
                a.source_setpoint,
                a.source_size,
                a.target_setpoint,
                a.target_size,
                &policy,
                a.common.seed,
            )?;
            std::fs::create_dir_all(dir)?;
            let ext = match a.format {
                Format::Csv => "csv",
                Format::Jsonl => "jsonl",
            };
            export_batch(&source, a.format, dir.join(format!("source.{ext}")))?;
            export_batch(&target, a.format, dir.join(format!("target.{ext}")))?;
        }
        Command::Landscape(a) => {
            if !(a.step > 0.0 && a.step <= 3.0) {
                return Err(Error::Validation(format!("step {} outside (0, 3]", a.step)));
            }
            let mut w = output(a.out.as_deref())?;
            writeln!(w, "phi,h_e,m")?;
            for (phi, he, m) in penalty_landscape(a.step) {
                writeln!(w, "{phi},{he},{m}")?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { EXIT_IO } else { EXIT_VALIDATION })
        }
    }
}
