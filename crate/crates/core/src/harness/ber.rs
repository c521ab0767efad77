//! Monte-Carlo BER sweep of ODDM and the OTFS baseline over one channel model.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{apply, dd_noise_variance, NoiseSpec};
use crate::config::Config;
use crate::ddmatrix::{build, DdChannelMatrix, DENSE_LIMIT};
use crate::detector::{mmse_detect, mp_detect, MpConfig};
use crate::error::Result;
use crate::harness::{
    derive_seed, draw_channel, load_fixed_channel, wilson_interval, write_csv, ExperimentKind,
    Outcome, Setup, Z95,
};
use crate::modem::{
    demodulate, dump_gain, modulate, otfs_demodulate, otfs_modulate, DdFrame, Waveform,
};
use crate::qam::QamConstellation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    OddmMp,
    OtfsMp,
    OddmMmse,
    OtfsMmse,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::OddmMp => "oddm-mp",
            Scheme::OtfsMp => "otfs-mp",
            Scheme::OddmMmse => "oddm-mmse",
            Scheme::OtfsMmse => "otfs-mmse",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub bit_errors: u64,
    pub bits: u64,
    pub ber: f64,
    /// 95% Wilson interval.
    pub ci: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct BerReport {
    /// Ordered by scheme, then by the configured SNR order.
    pub points: Vec<BerPoint>,
}

impl BerReport {
    pub fn curve(&self, scheme: Scheme) -> Vec<&BerPoint> {
        self.points.iter().filter(|p| p.scheme == scheme).collect()
    }

    /// True when no higher-SNR point is significantly worse than a lower-SNR
    /// point of the same scheme (disjoint Wilson intervals).
    pub fn monotone_within_ci(&self) -> bool {
        let mut schemes: Vec<Scheme> = self.points.iter().map(|p| p.scheme).collect();
        schemes.dedup();
        schemes.into_iter().all(|s| {
            let mut c = self.curve(s);
            c.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
            c.windows(2).all(|w| w[1].ci.0 <= w[0].ci.1)
        })
    }
}

struct Link<'a> {
    scheme: Scheme,
    h: &'a DdChannelMatrix,
    tx: &'a Waveform,
    es: f64,
}

fn detect(
    scheme: Scheme,
    y: &[num_complex::Complex64],
    h: &DdChannelMatrix,
    qam: &QamConstellation,
    nv: f64,
    mp: &MpConfig,
) -> Result<Vec<usize>> {
    let r = match scheme {
        Scheme::OddmMp | Scheme::OtfsMp => mp_detect(y, h, qam, nv.max(mp.noise_floor), mp)?,
        Scheme::OddmMmse | Scheme::OtfsMmse => mmse_detect(y, h, qam, nv.max(mp.noise_floor))?,
    };
    Ok(r.indices)
}

/// Bit errors of one trial, indexed `[scheme][snr]`.
fn run_trial(
    cfg: &Config,
    setup: &Setup,
    fixed: Option<&crate::DdChannel>,
    schemes: &[Scheme],
    t: u64,
) -> Result<Vec<Vec<u64>>> {
    let p = &setup.params;
    let tseed = derive_seed(cfg.seed, &[0xbe7, t]);
    let mut rng = ChaCha8Rng::seed_from_u64(tseed);
    let ch = draw_channel(cfg, p, fixed, &mut rng)?;
    let (frame, idx) = DdFrame::random_qam(p, &setup.qam, &mut rng);
    let x_oddm = modulate(&frame, &setup.ucp, p)?;
    let x_otfs = otfs_modulate(&frame, p)?;
    let h_oddm = build(&ch, p)?;
    let h_otfs = build(&ch.map_gains(|path| dump_gain(path.k, p))?, p)?;
    let mp = cfg.mp_config();

    let mut out = Vec::with_capacity(schemes.len());
    for &scheme in schemes {
        let link = match scheme {
            Scheme::OddmMp | Scheme::OddmMmse => Link {
                scheme,
                h: &h_oddm,
                tx: &x_oddm,
                es: 1.0,
            },
            Scheme::OtfsMp | Scheme::OtfsMmse => Link {
                scheme,
                h: &h_otfs,
                tx: &x_otfs,
                es: p.delay_resolution(),
            },
        };
        let mut row = Vec::with_capacity(cfg.snr_db.len());
        for (k, &snr) in cfg.snr_db.iter().enumerate() {
            // both detectors of a waveform see the same noise
            let wave_id = matches!(link.scheme, Scheme::OtfsMp | Scheme::OtfsMmse) as u64;
            let noise = NoiseSpec::new(snr, derive_seed(tseed, &[k as u64, wave_id]))
                .with_symbol_energy(link.es);
            let y = apply(link.tx, &ch, p, Some(&noise))?;
            let yd = match link.scheme {
                Scheme::OddmMp | Scheme::OddmMmse => demodulate(&y, &setup.u, p)?,
                _ => otfs_demodulate(&y, p)?,
            };
            let got = detect(
                scheme,
                yd.as_slice(),
                link.h,
                &setup.qam,
                dd_noise_variance(snr),
                &mp,
            )?;
            let errs: u64 = got
                .iter()
                .zip(&idx)
                .map(|(&a, &b)| setup.qam.bit_errors(a, b) as u64)
                .sum();
            row.push(errs);
        }
        out.push(row);
    }
    Ok(out)
}

/// Runs the sweep and writes `ber.csv`
/// (`scheme,snr_db,bit_errors,bits,ber,ci_low,ci_high`). Every scheme sees
/// the same channels and data; the verdict is monotonicity within the 95%
/// Wilson intervals.
pub fn run_ber(cfg: &Config, out: &Path) -> Result<(BerReport, Outcome)> {
    let setup = Setup::new(cfg)?;
    let p = &setup.params;
    let fixed = load_fixed_channel(cfg)?;
    let mut schemes = vec![Scheme::OddmMp, Scheme::OtfsMp];
    if cfg.mmse {
        if p.grid_len() <= DENSE_LIMIT {
            schemes.extend([Scheme::OddmMmse, Scheme::OtfsMmse]);
        } else {
            log::warn!("MMSE skipped: MN = {} exceeds {DENSE_LIMIT}", p.grid_len());
        }
    }
    let trials: Vec<Vec<Vec<u64>>> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(cfg, &setup, fixed.as_ref(), &schemes, t))
        .collect::<Result<_>>()?;

    let bits = (cfg.trials * p.grid_len() * setup.qam.bits_per_symbol()) as u64;
    let mut points = Vec::new();
    for (si, &scheme) in schemes.iter().enumerate() {
        for (k, &snr) in cfg.snr_db.iter().enumerate() {
            let errs: u64 = trials.iter().map(|tr| tr[si][k]).sum();
            points.push(BerPoint {
                scheme,
                snr_db: snr,
                bit_errors: errs,
                bits,
                ber: errs as f64 / bits as f64,
                ci: wilson_interval(errs, bits, Z95),
            });
        }
    }
    let rep = BerReport { points };
    let file = write_csv(
        out,
        "ber.csv",
        "scheme,snr_db,bit_errors,bits,ber,ci_low,ci_high",
        rep.points.iter().map(|b| {
            format!(
                "{},{},{},{},{:e},{:e},{:e}",
                b.scheme.as_str(),
                b.snr_db,
                b.bit_errors,
                b.bits,
                b.ber,
                b.ci.0,
                b.ci.1
            )
        }),
    )?;
    let mut o = Outcome::new(ExperimentKind::Ber, rep.monotone_within_ci());
    o.metric("bits_per_point", bits);
    for b in &rep.points {
        o.metric(
            &format!("{}@{}dB", b.scheme.as_str(), b.snr_db),
            format!("{:e}", b.ber),
        );
    }
    o.files.push(file);
    Ok((rep, o))
}
