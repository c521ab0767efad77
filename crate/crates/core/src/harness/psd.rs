//! Welch PSD of long ODDM and OTFS streams and their out-of-band gap.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::harness::{derive_seed, write_csv, ExperimentKind, Outcome, Setup};
use crate::modem::{modulate, otfs_modulate, DdFrame, Waveform};

/// Minimum out-of-band gap at 1.5× the half bandwidth.
pub const GAP_TOL_DB: f64 = 15.0;
/// Relative half-width of the averaging window around an offset.
pub const GAP_WINDOW: f64 = 0.02;

/// Streaming Welch estimator: Hann window, 50% overlap.
///
/// Samples are overlap-added at absolute stream positions; segments are
/// folded in once [`Welch::flush`] declares their range complete.
pub struct Welch {
    seg_len: usize,
    hop: usize,
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    acc: Vec<f64>,
    segments: usize,
    buf: Vec<Complex64>,
    buf_start: u64,
    next_seg: u64,
}

impl Welch {
    pub fn new(seg_len: usize) -> Self {
        let window = (0..seg_len)
            .map(|i| {
                let x = std::f64::consts::PI * i as f64 / seg_len as f64;
                x.sin().powi(2)
            })
            .collect();
        Self {
            seg_len,
            hop: seg_len / 2,
            window,
            fft: FftPlanner::new().plan_fft_forward(seg_len),
            acc: vec![0.0; seg_len],
            segments: 0,
            buf: Vec::new(),
            buf_start: 0,
            next_seg: 0,
        }
    }

    /// Adds `samples` starting at absolute position `pos`; positions before
    /// the last flush are rejected.
    pub fn add(&mut self, pos: u64, samples: &[Complex64]) -> Result<()> {
        if pos < self.buf_start {
            return Err(Error::InvalidParams(
                "sample position already flushed".into(),
            ));
        }
        let off = (pos - self.buf_start) as usize;
        if self.buf.len() < off + samples.len() {
            self.buf
                .resize(off + samples.len(), Complex64::new(0.0, 0.0));
        }
        for (b, s) in self.buf[off..].iter_mut().zip(samples) {
            *b += s;
        }
        Ok(())
    }

    /// Folds in every segment ending at or before `complete`.
    pub fn flush(&mut self, complete: u64) {
        let mut seg = vec![Complex64::new(0.0, 0.0); self.seg_len];
        while self.next_seg + self.seg_len as u64 <= complete {
            let off = (self.next_seg - self.buf_start) as usize;
            for (i, s) in seg.iter_mut().enumerate() {
                let v = self.buf.get(off + i).copied().unwrap_or_default();
                *s = v * self.window[i];
            }
            self.fft.process(&mut seg);
            for (a, s) in self.acc.iter_mut().zip(&seg) {
                *a += s.norm_sqr();
            }
            self.segments += 1;
            self.next_seg += self.hop as u64;
        }
        let drop = ((self.next_seg - self.buf_start) as usize).min(self.buf.len());
        self.buf.drain(..drop);
        self.buf_start += drop as u64;
    }

    /// Folds in every segment that fits in the samples added so far.
    pub fn flush_all(&mut self) {
        self.flush(self.buf_start + self.buf.len() as u64);
    }

    pub fn segments(&self) -> usize {
        self.segments
    }

    /// Two-sided PSD per hertz in FFT bin order.
    pub fn finish(&self, sample_rate: f64) -> Vec<f64> {
        let w2: f64 = self.window.iter().map(|w| w * w).sum();
        let scale = 1.0 / (sample_rate * w2 * self.segments.max(1) as f64);
        self.acc.iter().map(|a| a * scale).collect()
    }
}

/// Frequency of FFT bin `k` of an `len`-point transform.
pub fn bin_frequency(k: usize, len: usize, sample_rate: f64) -> f64 {
    let k = if k < len.div_ceil(2) {
        k as i64
    } else {
        k as i64 - len as i64
    };
    k as f64 * sample_rate / len as f64
}

/// Streams `frames` frames spaced `period` samples apart through a Welch
/// estimator with `seg_len`-sample segments. `gen(f)` must return frame `f`
/// with a fixed start offset; frames are generated in parallel batches and
/// added in order.
pub fn welch_stream<G>(
    frames: usize,
    period: usize,
    seg_len: usize,
    sample_rate: f64,
    gen: G,
) -> Result<(Vec<f64>, usize)>
where
    G: Fn(usize) -> Result<Waveform> + Sync,
{
    let mut welch = Welch::new(seg_len);
    let batch = (2 * rayon::current_num_threads()).max(1);
    let mut origin: Option<i64> = None;
    let mut f0 = 0;
    while f0 < frames {
        let f1 = (f0 + batch).min(frames);
        let waves: Vec<Waveform> = (f0..f1).into_par_iter().map(&gen).collect::<Result<_>>()?;
        for (f, w) in (f0..f1).zip(&waves) {
            let o = *origin.get_or_insert(w.start);
            let pos = (f * period) as i64 + w.start - o;
            welch.add(pos as u64, &w.samples)?;
            welch.flush(((f + 1) * period) as u64);
        }
        f0 = f1;
    }
    welch.flush_all();
    Ok((welch.finish(sample_rate), welch.segments()))
}

#[derive(Debug, Clone)]
pub struct PsdReport {
    /// Ascending bin frequencies in hertz.
    pub freqs_hz: Vec<f64>,
    /// dB relative to the in-band mean of each scheme.
    pub oddm_db: Vec<f64>,
    pub otfs_db: Vec<f64>,
    pub half_bandwidth_hz: f64,
    pub segments: usize,
}

impl PsdReport {
    fn mean_at(&self, db: &[f64], offset: f64) -> f64 {
        let lo = offset * (1.0 - GAP_WINDOW) * self.half_bandwidth_hz;
        let hi = offset * (1.0 + GAP_WINDOW) * self.half_bandwidth_hz;
        let (mut s, mut c) = (0.0, 0usize);
        for (f, v) in self.freqs_hz.iter().zip(db) {
            if (lo..=hi).contains(&f.abs()) {
                s += 10f64.powf(v / 10.0);
                c += 1;
            }
        }
        10.0 * (s / c.max(1) as f64).log10()
    }

    /// Mean in-band-normalized PSD (dB) within ±2% of `offset` half
    /// bandwidths from the centre, both sides.
    pub fn level_db(&self, otfs: bool, offset: f64) -> f64 {
        self.mean_at(if otfs { &self.otfs_db } else { &self.oddm_db }, offset)
    }

    /// OTFS level minus ODDM level at `offset` half bandwidths.
    pub fn gap_db(&self, offset: f64) -> f64 {
        self.level_db(true, offset) - self.level_db(false, offset)
    }
}

fn normalize_db(psd: &[f64], freqs: &[f64], half_bw: f64) -> Vec<f64> {
    let (s, c) = psd
        .iter()
        .zip(freqs)
        .filter(|(_, f)| f.abs() <= half_bw)
        .fold((0.0, 0usize), |(s, c), (p, _)| (s + p, c + 1));
    let mean = s / c.max(1) as f64;
    psd.iter()
        .map(|p| 10.0 * (p / mean).max(1e-300).log10())
        .collect()
}

/// Streams `cfg.psd_frames` random frames of each scheme (cyclic prefixes
/// included) and writes `psd.csv` (`freq_hz,norm_freq,oddm_db,otfs_db`).
/// Segments are one frame duration `NT` long.
pub fn run_psd(cfg: &Config, out: &Path) -> Result<(PsdReport, Outcome)> {
    let setup = Setup::new(cfg)?;
    let p = &setup.params;
    if p.oversample < 2 {
        return Err(Error::InvalidParams(
            "PSD needs J >= 2 to resolve 1.5x the half bandwidth".into(),
        ));
    }
    if cfg.psd_frames == 0 {
        return Err(Error::InvalidParams("psd_frames must be at least 1".into()));
    }
    let period = (p.grid_len() + p.cp_len) * p.oversample;
    let seg_len = p.frame_period_samples();
    let fs = p.sample_rate();
    let data = |f: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[0x95d, f as u64]));
        DdFrame::random_qam(p, &setup.qam, &mut rng).0
    };
    let (oddm, segments) = welch_stream(cfg.psd_frames, period, seg_len, fs, |f| {
        modulate(&data(f), &setup.ucp, p)
    })?;
    let (otfs, _) = welch_stream(cfg.psd_frames, period, seg_len, fs, |f| {
        otfs_modulate(&data(f), p)
    })?;

    let mut order: Vec<usize> = (0..seg_len).collect();
    order.sort_by(|&a, &b| bin_frequency(a, seg_len, fs).total_cmp(&bin_frequency(b, seg_len, fs)));
    let freqs_hz: Vec<f64> = order
        .iter()
        .map(|&k| bin_frequency(k, seg_len, fs))
        .collect();
    let half_bandwidth_hz = p.bandwidth() / 2.0;
    let pick = |v: &[f64]| order.iter().map(|&k| v[k]).collect::<Vec<f64>>();
    let rep = PsdReport {
        oddm_db: normalize_db(&pick(&oddm), &freqs_hz, half_bandwidth_hz),
        otfs_db: normalize_db(&pick(&otfs), &freqs_hz, half_bandwidth_hz),
        freqs_hz,
        half_bandwidth_hz,
        segments,
    };
    let file = write_csv(
        out,
        "psd.csv",
        "freq_hz,norm_freq,oddm_db,otfs_db",
        (0..seg_len).map(|i| {
            format!(
                "{:e},{:e},{:.4},{:.4}",
                rep.freqs_hz[i],
                rep.freqs_hz[i] / half_bandwidth_hz,
                rep.oddm_db[i],
                rep.otfs_db[i]
            )
        }),
    )?;
    let gap15 = rep.gap_db(1.5);
    let mut o = Outcome::new(ExperimentKind::Psd, gap15 >= GAP_TOL_DB);
    o.metric("segments", segments);
    o.metric("gap_db_at_1.5", format!("{gap15:.2}"));
    o.metric("gap_db_at_1.2", format!("{:.2}", rep.gap_db(1.2)));
    o.metric("oddm_db_at_1.5", format!("{:.2}", rep.level_db(false, 1.5)));
    o.metric("otfs_db_at_1.5", format!("{:.2}", rep.level_db(true, 1.5)));
    o.files.push(file);
    Ok((rep, o))
}
