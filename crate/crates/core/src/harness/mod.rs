//! Experiment drivers behind the CLI: orthogonality audit, PSD, BER sweep,
//! DD-matrix check and loopback. Each writes CSV artifacts into an output
//! directory and returns a pass/fail verdict with its key metrics.
//!
//! Every random draw comes from a seed derived from the master seed and the
//! task path, and every reduction runs in index order, so outputs are
//! identical for any thread count.

pub mod ber;
pub mod loopback;
pub mod manifest;
pub mod matrix_check;
pub mod ortho;
pub mod psd;
pub mod stats;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;

use crate::channel::{self, eva, DdChannel};
use crate::config::{ChannelKind, Config, PulseKind};
use crate::error::{Error, Result};
use crate::params::GridParams;
use crate::pulse::{build_train, design_srrc, design_srrc_truncated, ProtoPulse, PulseTrain};
use crate::qam::QamConstellation;

pub use ber::{run_ber, BerPoint, BerReport, Scheme};
pub use loopback::{run_loopback, LoopbackReport};
pub use manifest::{blob_hash, Manifest};
pub use matrix_check::{run_matrix_check, MatrixCheckReport};
pub use ortho::run_ortho;
pub use psd::{run_psd, PsdReport, Welch};
pub use stats::{derive_seed, linear_fit, wilson_interval, Z95};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    Ortho,
    Psd,
    Ber,
    MatrixCheck,
    Loopback,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::Ortho,
        ExperimentKind::Psd,
        ExperimentKind::Ber,
        ExperimentKind::MatrixCheck,
        ExperimentKind::Loopback,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Ortho => "ortho",
            ExperimentKind::Psd => "psd",
            ExperimentKind::Ber => "ber",
            ExperimentKind::MatrixCheck => "matrix-check",
            ExperimentKind::Loopback => "loopback",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown experiment {s:?}")))
    }
}

/// Verdict and headline numbers of one experiment.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub kind: ExperimentKind,
    pub passed: bool,
    pub metrics: Vec<(String, String)>,
    pub files: Vec<PathBuf>,
    pub error: Option<String>,
}

impl Outcome {
    pub(crate) fn new(kind: ExperimentKind, passed: bool) -> Self {
        Self {
            kind,
            passed,
            metrics: Vec::new(),
            files: Vec::new(),
            error: None,
        }
    }

    pub(crate) fn metric(&mut self, key: &str, value: impl std::fmt::Display) {
        self.metrics.push((key.to_string(), value.to_string()));
    }
}

/// Grid, constellation and pulses shared by the experiments.
#[derive(Debug, Clone)]
pub struct Setup {
    pub params: GridParams,
    pub qam: QamConstellation,
    pub proto: ProtoPulse,
    /// Train without the cyclic prefix (receiver side).
    pub u: PulseTrain,
    /// Train with the cyclic-prefix replica (transmitter side).
    pub ucp: PulseTrain,
}

impl Setup {
    pub fn new(cfg: &Config) -> Result<Self> {
        cfg.validate()?;
        let params = cfg.grid()?;
        let proto = match cfg.pulse {
            PulseKind::Srrc => design_srrc(&params, cfg.rolloff)?,
            PulseKind::SrrcTruncated => design_srrc_truncated(&params, cfg.rolloff)?,
        };
        Ok(Self {
            qam: QamConstellation::new(cfg.qam_order)?,
            u: build_train(&proto, &params, false)?,
            ucp: build_train(&proto, &params, true)?,
            proto,
            params,
        })
    }
}

/// Reads the fixed channel of `channel = file`, if any.
pub fn load_fixed_channel(cfg: &Config) -> Result<Option<DdChannel>> {
    match (&cfg.channel, &cfg.channel_file) {
        (ChannelKind::File, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            Ok(Some(channel::parse_channel_csv(&text)?))
        }
        _ => Ok(None),
    }
}

/// One channel realization of the configured model.
pub fn draw_channel<R: Rng + ?Sized>(
    cfg: &Config,
    params: &GridParams,
    fixed: Option<&DdChannel>,
    rng: &mut R,
) -> Result<DdChannel> {
    match cfg.channel {
        ChannelKind::Eva => Ok(eva::eva_jakes_draws(params, cfg.speed_kmh, cfg.fc_hz, rng)?.0),
        ChannelKind::Uniform => {
            channel::random_jakes_paths(cfg.paths, cfg.max_delay, cfg.doppler_bins_max, rng)
        }
        ChannelKind::Grid => channel::random_grid_paths(
            cfg.paths,
            cfg.max_delay,
            cfg.doppler_bins_max.floor() as usize,
            rng,
        ),
        ChannelKind::File => fixed
            .cloned()
            .ok_or_else(|| Error::InvalidParams("channel = file needs a loaded channel".into())),
    }
}

pub(crate) fn write_csv(
    dir: &Path,
    name: &str,
    header: &str,
    rows: impl IntoIterator<Item = String>,
) -> Result<PathBuf> {
    let mut s = String::new();
    let _ = writeln!(s, "{header}");
    for r in rows {
        let _ = writeln!(s, "{r}");
    }
    let path = dir.join(name);
    std::fs::write(&path, s)?;
    Ok(path)
}

pub fn run_one(kind: ExperimentKind, cfg: &Config, out: &Path) -> Result<Outcome> {
    std::fs::create_dir_all(out)?;
    match kind {
        ExperimentKind::Ortho => ortho::run_ortho(cfg, out).map(|r| r.1),
        ExperimentKind::Psd => psd::run_psd(cfg, out).map(|r| r.1),
        ExperimentKind::Ber => ber::run_ber(cfg, out).map(|r| r.1),
        ExperimentKind::MatrixCheck => matrix_check::run_matrix_check(cfg, out).map(|r| r.1),
        ExperimentKind::Loopback => loopback::run_loopback(cfg, out).map(|r| r.1),
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub outcomes: Vec<Outcome>,
    pub manifest: PathBuf,
}

impl RunSummary {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

/// Runs `kinds` in order. A failing experiment is recorded and the rest still
/// run; artifacts already written are kept. `manifest.txt` lists the
/// configuration, input hashes and every outcome.
pub fn run_all(kinds: &[ExperimentKind], cfg: &Config, out: &Path) -> Result<RunSummary> {
    std::fs::create_dir_all(out)?;
    let mut man = Manifest::default();
    let cfg_text = cfg.to_text();
    man.push("version", env!("CARGO_PKG_VERSION"));
    man.push("seed", cfg.seed.to_string());
    man.push("config_hash", blob_hash(cfg_text.as_bytes()));
    if let Some(f) = &cfg.channel_file {
        if cfg.channel == ChannelKind::File {
            man.push("channel_file_hash", manifest::file_hash(Path::new(f))?);
        }
    }
    std::fs::write(out.join("config.txt"), &cfg_text)?;

    let mut outcomes = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let outcome = run_one(kind, cfg, out).unwrap_or_else(|e| {
            log::error!("{} failed: {e}", kind.as_str());
            let mut o = Outcome::new(kind, false);
            o.error = Some(e.to_string());
            o
        });
        let name = kind.as_str();
        man.push(
            format!("{name}.status"),
            if outcome.passed { "pass" } else { "fail" },
        );
        if let Some(e) = &outcome.error {
            man.push(format!("{name}.error"), e.clone());
        }
        for (k, v) in &outcome.metrics {
            man.push(format!("{name}.{k}"), v.clone());
        }
        for f in &outcome.files {
            let fname = f.file_name().map(|s| s.to_string_lossy().into_owned());
            man.push(
                format!("{name}.file.{}", fname.unwrap_or_default()),
                manifest::file_hash(f)?,
            );
        }
        outcomes.push(outcome);
    }
    let manifest = out.join("manifest.txt");
    std::fs::write(&manifest, man.to_text())?;
    Ok(RunSummary { outcomes, manifest })
}
