//! Plain-text `key = value` experiment configuration.
//!
//! Blank lines and `#` comments are ignored. Unknown or repeated keys are
//! errors. [`Config::to_text`] writes every key with shortest round-trip
//! float formatting, so `parse(to_text(c)) == c` bit for bit.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::detector::MpConfig;
use crate::error::{Error, Result};
use crate::params::GridParams;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChannelKind {
    /// EVA profile with Jakes Dopplers from `speed_kmh` and `fc_hz`.
    Eva,
    /// `paths` distinct delays in `0..=max_delay`, Dopplers
    /// `round(doppler_bins_max · cos θ)`.
    Uniform,
    /// `paths` distinct cells of the `[0, max_delay] × [-K, K]` grid with
    /// `K = floor(doppler_bins_max)`.
    Grid,
    /// Fixed channel read from `channel_file`.
    File,
}

impl ChannelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ChannelKind::Eva => "eva",
            ChannelKind::Uniform => "uniform",
            ChannelKind::Grid => "grid",
            ChannelKind::File => "file",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseKind {
    Srrc,
    SrrcTruncated,
}

impl PulseKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PulseKind::Srrc => "srrc",
            PulseKind::SrrcTruncated => "srrc-truncated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub m: usize,
    pub n: usize,
    pub scs_hz: f64,
    pub q: usize,
    pub rolloff: f64,
    pub oversample: usize,
    pub cp_len: usize,
    pub qam_order: usize,
    pub seed: u64,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub channel: ChannelKind,
    pub speed_kmh: f64,
    pub fc_hz: f64,
    pub paths: usize,
    pub max_delay: usize,
    pub doppler_bins_max: f64,
    pub channel_file: Option<String>,
    pub mp_max_iters: usize,
    pub mp_damping: f64,
    pub mp_eps: f64,
    pub mp_noise_floor: f64,
    pub psd_frames: usize,
    pub pulse: PulseKind,
    pub mmse: bool,
    /// Orthogonality tolerance outside the exact region.
    pub wrap_tol: f64,
    /// Per-entry tolerance of the waveform-versus-matrix check.
    pub matrix_tol: f64,
}

impl Default for Config {
    /// Desk-scale geometry: `M = 64`, `N = 16`, 15 kHz, `Q = 8`, `J = 4`,
    /// 4-QAM, 4-path channel.
    fn default() -> Self {
        Self {
            m: 64,
            n: 16,
            scs_hz: 15e3,
            q: 8,
            rolloff: 0.25,
            oversample: 4,
            cp_len: 4,
            qam_order: 4,
            seed: 1,
            snr_db: vec![0.0, 4.0, 8.0, 12.0, 16.0],
            trials: 100,
            channel: ChannelKind::Uniform,
            speed_kmh: 500.0,
            fc_hz: 5e9,
            paths: 4,
            max_delay: 3,
            doppler_bins_max: 2.37,
            channel_file: None,
            mp_max_iters: 30,
            mp_damping: 0.6,
            mp_eps: 1e-6,
            mp_noise_floor: 1e-4,
            psd_frames: 100,
            pulse: PulseKind::Srrc,
            mmse: false,
            wrap_tol: 1e-3,
            matrix_tol: 1e-3,
        }
    }
}

fn parse_num<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config {
        line,
        msg: format!("invalid value {v:?} for {key}"),
    })
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config {
            line,
            msg: format!("invalid boolean {v:?} for {key}"),
        }),
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Config::default();
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| Error::Config {
                line,
                msg: format!("expected key = value, got {body:?}"),
            })?;
            let key = key.trim();
            let v = value.trim();
            let canon = match key {
                "M" | "m" => "M",
                "N" | "n" => "N",
                "scs_hz" | "scs_khz" => "scs",
                other => other,
            };
            if seen.iter().any(|s| s == canon) {
                return Err(Error::Config {
                    line,
                    msg: format!("duplicate key {key}"),
                });
            }
            seen.push(canon.to_string());
            match key {
                "M" | "m" => c.m = parse_num(line, key, v)?,
                "N" | "n" => c.n = parse_num(line, key, v)?,
                "scs_hz" => c.scs_hz = parse_num(line, key, v)?,
                "scs_khz" => c.scs_hz = parse_num::<f64>(line, key, v)? * 1e3,
                "Q" | "q" => c.q = parse_num(line, key, v)?,
                "rolloff" => c.rolloff = parse_num(line, key, v)?,
                "J" | "oversample" => c.oversample = parse_num(line, key, v)?,
                "cp_len" => c.cp_len = parse_num(line, key, v)?,
                "qam_order" => c.qam_order = parse_num(line, key, v)?,
                "seed" => c.seed = parse_num(line, key, v)?,
                "snr_db" => {
                    c.snr_db = v
                        .split(',')
                        .map(|s| parse_num(line, key, s.trim()))
                        .collect::<Result<Vec<f64>>>()?;
                }
                "trials" => c.trials = parse_num(line, key, v)?,
                "channel" => {
                    c.channel = match v {
                        "eva" => ChannelKind::Eva,
                        "uniform" => ChannelKind::Uniform,
                        "grid" => ChannelKind::Grid,
                        "file" => ChannelKind::File,
                        _ => {
                            return Err(Error::Config {
                                line,
                                msg: format!("unknown channel {v:?} (eva, uniform, grid, file)"),
                            })
                        }
                    }
                }
                "speed_kmh" => c.speed_kmh = parse_num(line, key, v)?,
                "fc_hz" => c.fc_hz = parse_num(line, key, v)?,
                "paths" => c.paths = parse_num(line, key, v)?,
                "max_delay" => c.max_delay = parse_num(line, key, v)?,
                "doppler_bins_max" => c.doppler_bins_max = parse_num(line, key, v)?,
                "channel_file" => c.channel_file = Some(v.to_string()),
                "mp_max_iters" => c.mp_max_iters = parse_num(line, key, v)?,
                "mp_damping" => c.mp_damping = parse_num(line, key, v)?,
                "mp_eps" => c.mp_eps = parse_num(line, key, v)?,
                "mp_noise_floor" => c.mp_noise_floor = parse_num(line, key, v)?,
                "psd_frames" => c.psd_frames = parse_num(line, key, v)?,
                "pulse" => {
                    c.pulse = match v {
                        "srrc" => PulseKind::Srrc,
                        "srrc-truncated" => PulseKind::SrrcTruncated,
                        _ => {
                            return Err(Error::Config {
                                line,
                                msg: format!("unknown pulse {v:?} (srrc, srrc-truncated)"),
                            })
                        }
                    }
                }
                "mmse" => c.mmse = parse_bool(line, key, v)?,
                "wrap_tol" => c.wrap_tol = parse_num(line, key, v)?,
                "matrix_tol" => c.matrix_tol = parse_num(line, key, v)?,
                _ => {
                    return Err(Error::Config {
                        line,
                        msg: format!("unknown key {key:?}"),
                    })
                }
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| s.is_nan()) {
            return bad("snr_db must be a non-empty list of numbers".into());
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            return bad(format!("rolloff must lie in [0, 1], got {}", self.rolloff));
        }
        if !(self.wrap_tol > 0.0 && self.matrix_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.channel == ChannelKind::File && self.channel_file.is_none() {
            return bad("channel = file needs channel_file".into());
        }
        self.mp_config().validate()
    }

    pub fn grid(&self) -> Result<GridParams> {
        GridParams::new(
            self.m,
            self.n,
            self.scs_hz,
            self.q,
            self.oversample,
            self.cp_len,
        )
    }

    pub fn mp_config(&self) -> MpConfig {
        MpConfig {
            max_iters: self.mp_max_iters,
            damping: self.mp_damping,
            convergence_eps: self.mp_eps,
            early_stop: true,
            noise_floor: self.mp_noise_floor,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let snr: Vec<String> = self.snr_db.iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(s, "M = {}", self.m);
        let _ = writeln!(s, "N = {}", self.n);
        let _ = writeln!(s, "scs_hz = {}", self.scs_hz);
        let _ = writeln!(s, "Q = {}", self.q);
        let _ = writeln!(s, "rolloff = {}", self.rolloff);
        let _ = writeln!(s, "J = {}", self.oversample);
        let _ = writeln!(s, "cp_len = {}", self.cp_len);
        let _ = writeln!(s, "qam_order = {}", self.qam_order);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "snr_db = {}", snr.join(","));
        let _ = writeln!(s, "trials = {}", self.trials);
        let _ = writeln!(s, "channel = {}", self.channel.as_str());
        let _ = writeln!(s, "speed_kmh = {}", self.speed_kmh);
        let _ = writeln!(s, "fc_hz = {}", self.fc_hz);
        let _ = writeln!(s, "paths = {}", self.paths);
        let _ = writeln!(s, "max_delay = {}", self.max_delay);
        let _ = writeln!(s, "doppler_bins_max = {}", self.doppler_bins_max);
        if let Some(f) = &self.channel_file {
            let _ = writeln!(s, "channel_file = {f}");
        }
        let _ = writeln!(s, "mp_max_iters = {}", self.mp_max_iters);
        let _ = writeln!(s, "mp_damping = {}", self.mp_damping);
        let _ = writeln!(s, "mp_eps = {}", self.mp_eps);
        let _ = writeln!(s, "mp_noise_floor = {}", self.mp_noise_floor);
        let _ = writeln!(s, "psd_frames = {}", self.psd_frames);
        let _ = writeln!(s, "pulse = {}", self.pulse.as_str());
        let _ = writeln!(s, "mmse = {}", self.mmse);
        let _ = writeln!(s, "wrap_tol = {}", self.wrap_tol);
        let _ = writeln!(s, "matrix_tol = {}", self.matrix_tol);
        s
    }
}
