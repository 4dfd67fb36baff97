//! `ringbdg <command> --config <file> [--out <dir>] [--seed <u64>] [--preset <name>]`

mod config;
mod output;
mod run;

use anyhow::{bail, Context};
use clap::Parser;
use config::{Command, ConfigError, RunConfig};
use output::{ErrorRecord, Manifest, Outputs};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "ringbdg",
    version,
    about = "Coupled-ring BEC stability and double-well splitting runs"
)]
struct Cli {
    command: Command,
    /// JSON run configuration; keys override the preset when both are given.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: config `out`, else `out`].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Noise seed; overrides the config value.
    #[arg(long)]
    seed: Option<u64>,
    /// Embedded configuration: fig1, fig2, paper-instability.
    #[arg(long)]
    preset: Option<String>,
}

fn load(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut map = serde_json::Map::new();
    if let Some(name) = &cli.preset {
        map = config::parse_object(config::preset(name)?)?;
    }
    if let Some(path) = &cli.config {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let overlay = config::parse_object(&text).map_err(|e| match e {
            ConfigError::Syntax { .. } => anyhow::anyhow!("{}: {e}", path.display()),
            other => other.into(),
        })?;
        map.extend(overlay);
    }
    if cli.preset.is_none() && cli.config.is_none() {
        bail!("one of --config or --preset is required");
    }
    let mut cfg = config::parse_config(map, Some(cli.command))?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    Ok(cfg)
}

fn configure_threads() -> anyhow::Result<usize> {
    let requested = match std::env::var("RINGBDG_THREADS") {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .with_context(|| {
                    format!("RINGBDG_THREADS must be a positive integer, got `{v}`")
                })?,
        ),
        Err(_) => None,
    };
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = requested {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()?;
        }
        Ok(rayon::current_num_threads())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = requested;
        Ok(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match configure_threads() {
        Ok(n) => n,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let mut outputs = match Outputs::create(&dir) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_FAILED);
        }
    };
    let started_at = chrono::Utc::now().to_rfc3339();
    let result = run::execute(&cfg, &mut outputs);
    let manifest = Manifest {
        tool: "ringbdg",
        version: env!("CARGO_PKG_VERSION"),
        command: cfg.command.name().to_string(),
        preset: cli.preset.clone(),
        threads,
        config: cfg.to_json(),
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339(),
        status: if result.is_ok() { "ok" } else { "failed" },
        error: result.as_ref().err().map(|e| ErrorRecord {
            kind: e.kind().to_string(),
            message: e.to_string(),
        }),
        outputs: outputs.files().to_vec(),
    };
    if let Err(e) = manifest.write(&dir) {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_FAILED);
    }
    match result {
        Ok(()) => {
            for f in outputs.files() {
                println!("{}", dir.join(&f.file).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILED)
        }
    }
}
