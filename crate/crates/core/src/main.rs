use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use oddm::harness::{self, ExperimentKind, Outcome};
use oddm::Config;

#[derive(Parser)]
#[command(name = "oddm", version, about = "ODDM modulation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// `key = value` configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSV artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Full frame size `M = 512`, `N = 64` instead of the configured grid.
    #[arg(long)]
    full: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Ambiguity-function orthogonality audit over the DD grid.
    Ortho(Common),
    /// Welch PSD of ODDM and OTFS streams and the out-of-band gap.
    Psd(Common),
    /// BER sweep of ODDM and OTFS with message-passing detection.
    Ber(Common),
    /// Waveform pipeline versus DD-domain matrix model.
    MatrixCheck(Common),
    /// Channel-free modulate/demodulate round trip.
    Loopback(Common),
    /// Runs several experiments and writes a manifest.
    RunAll {
        #[command(flatten)]
        common: Common,
        /// Comma-separated subset, e.g. `ortho,matrix-check`.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
    },
}

fn load_config(common: &Common) -> Result<Config> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let mut cfg =
                Config::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
            // channel files are relative to the config file
            if let Some(f) = &cfg.channel_file {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.channel_file = Some(base.join(f).to_string_lossy().into_owned());
            }
            cfg
        }
        None => Config::default(),
    };
    if common.full {
        log::warn!("full-size grid M = 512, N = 64: BER and PSD runs take much longer");
        cfg.m = 512;
        cfg.n = 64;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report(o: &Outcome) {
    let status = if o.passed { "PASS" } else { "FAIL" };
    println!("{} {status}", o.kind.as_str());
    if let Some(e) = &o.error {
        println!("  error: {e}");
    }
    for (k, v) in &o.metrics {
        println!("  {k}: {v}");
    }
    for f in &o.files {
        println!("  wrote {}", f.display());
    }
}

fn run(cli: Cli) -> Result<bool> {
    let (kinds, common) = match &cli.command {
        Command::Ortho(c) => (vec![ExperimentKind::Ortho], c),
        Command::Psd(c) => (vec![ExperimentKind::Psd], c),
        Command::Ber(c) => (vec![ExperimentKind::Ber], c),
        Command::MatrixCheck(c) => (vec![ExperimentKind::MatrixCheck], c),
        Command::Loopback(c) => (vec![ExperimentKind::Loopback], c),
        Command::RunAll { common, only } => {
            let kinds = match only {
                Some(list) => list
                    .iter()
                    .map(|s| s.trim().parse::<ExperimentKind>())
                    .collect::<oddm::Result<Vec<_>>>()?,
                None => ExperimentKind::ALL.to_vec(),
            };
            (kinds, common)
        }
    };
    let cfg = load_config(common)?;
    let summary = harness::run_all(&kinds, &cfg, &common.out)
        .with_context(|| format!("running into {}", common.out.display()))?;
    for o in &summary.outcomes {
        report(o);
    }
    println!("manifest {}", summary.manifest.display());
    Ok(summary.all_passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
