//! Noiseless, channel-free modulate/demodulate round trip.

use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::Config;
use crate::error::Result;
use crate::harness::{derive_seed, write_csv, ExperimentKind, Outcome, Setup};
use crate::modem::{demodulate, modulate, otfs_demodulate, otfs_modulate, DdFrame};

/// Per-entry tolerance on `|Y - X|`.
pub const LOOPBACK_TOL: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct LoopbackReport {
    pub oddm_max_err: f64,
    pub otfs_max_err: f64,
    /// `|Y - X|` per `(m, n)`, row-major.
    pub oddm_err: Vec<f64>,
}

/// Writes `loopback.csv` (`m,n,err`) and the transmitted ODDM waveform to
/// `waveform.csv` (`i,t,re,im`).
pub fn run_loopback(cfg: &Config, out: &Path) -> Result<(LoopbackReport, Outcome)> {
    let setup = Setup::new(cfg)?;
    let p = &setup.params;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[0x100b]));
    let (frame, _) = DdFrame::random_qam(p, &setup.qam, &mut rng);

    let x = modulate(&frame, &setup.ucp, p)?;
    let y = demodulate(&x, &setup.u, p)?;
    let oddm_err: Vec<f64> = y
        .as_slice()
        .iter()
        .zip(frame.as_slice())
        .map(|(a, b): (&Complex64, &Complex64)| (a - b).norm())
        .collect();
    let oddm_max_err = oddm_err.iter().copied().fold(0.0, f64::max);
    let xo = otfs_modulate(&frame, p)?;
    let yo = otfs_demodulate(&xo, p)?;
    let otfs_max_err = crate::dsp::max_abs_diff(yo.as_slice(), frame.as_slice());

    let n = p.n;
    let f1 = write_csv(
        out,
        "loopback.csv",
        "m,n,err",
        oddm_err
            .iter()
            .enumerate()
            .map(|(i, e)| format!("{},{},{:e}", i / n, i % n, e)),
    )?;
    let f2 = write_csv(
        out,
        "waveform.csv",
        "i,t,re,im",
        x.samples.iter().enumerate().map(|(k, v)| {
            let i = x.start + k as i64;
            format!("{},{:e},{:e},{:e}", i, i as f64 * x.dt, v.re, v.im)
        }),
    )?;

    let passed = oddm_max_err <= LOOPBACK_TOL && otfs_max_err <= 1e-9;
    let mut o = Outcome::new(ExperimentKind::Loopback, passed);
    o.metric("oddm_max_err", format!("{oddm_max_err:e}"));
    o.metric("otfs_max_err", format!("{otfs_max_err:e}"));
    o.files.extend([f1, f2]);
    Ok((
        LoopbackReport {
            oddm_max_err,
            otfs_max_err,
            oddm_err,
        },
        o,
    ))
}
