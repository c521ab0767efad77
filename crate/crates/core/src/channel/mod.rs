//! On-grid doubly-selective channels and their waveform-level application.
//!
//! A path with gain `h`, delay index `l` and Doppler index `k̂` maps the
//! sampled input to `h x[i - lJ] exp(j2π k̂ (i - lJ) / (NMJ))`, an exact
//! integer shift followed by the Doppler ramp `exp(j2π ν (t - τ))`.

pub mod eva;
pub mod file;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dsp::Twiddles;
use crate::error::{Error, Result};
use crate::modem::Waveform;
use crate::params::GridParams;

pub use eva::{eva_jakes, eva_jakes_draws, max_doppler_hz, PathDraw, EVA_DELAYS_NS, EVA_POWERS_DB};
pub use file::{parse_channel_csv, write_channel_csv};

/// Speed of light used for Doppler computations, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdPath {
    pub h: Complex64,
    /// Delay `l T/M`.
    pub l: usize,
    /// Doppler `k̂ / (NT)`.
    pub k: i64,
}

impl DdPath {
    pub fn new(h: Complex64, l: usize, k: i64) -> Self {
        Self { h, l, k }
    }
}

/// Path list together with its `(2K+1) × L` spreading matrix `G`.
///
/// Row `r` (0-based) of `G` holds Doppler `k̂ = r - K`; in 1-based row
/// numbering `k = r + 1` this is `k̂ = k - K - 1`. Paths sharing a cell are
/// merged, so the path list is exactly the nonzero entries of `G`, sorted by
/// `(l, k̂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DdChannel {
    paths: Vec<DdPath>,
    l_span: usize,
    k_max: usize,
    g: Vec<Complex64>,
}

impl DdChannel {
    /// `l_span` is `L` (delays `0..L`), `k_max` is `K` (Dopplers `-K..=K`).
    pub fn new(paths: &[DdPath], l_span: usize, k_max: usize) -> Result<Self> {
        if l_span == 0 {
            return Err(Error::InvalidParams(
                "delay span L must be at least 1".into(),
            ));
        }
        let rows = 2 * k_max + 1;
        let mut g = vec![Complex64::new(0.0, 0.0); rows * l_span];
        for p in paths {
            if !(p.h.re.is_finite() && p.h.im.is_finite()) {
                return Err(Error::InvalidParams("path gain must be finite".into()));
            }
            if p.l >= l_span || p.k.unsigned_abs() as usize > k_max {
                return Err(Error::OffGrid(format!(
                    "path (l={}, k={}) outside L={l_span}, K={k_max}",
                    p.l, p.k
                )));
            }
            g[(p.k + k_max as i64) as usize * l_span + p.l] += p.h;
        }
        let mut merged = Vec::new();
        for l in 0..l_span {
            for r in 0..rows {
                let h = g[r * l_span + l];
                if h != Complex64::new(0.0, 0.0) {
                    merged.push(DdPath::new(h, l, r as i64 - k_max as i64));
                }
            }
        }
        Ok(Self {
            paths: merged,
            l_span,
            k_max,
            g,
        })
    }

    /// Smallest `L` and `K` that hold the given paths.
    pub fn from_paths(paths: &[DdPath]) -> Result<Self> {
        let l_span = paths.iter().map(|p| p.l + 1).max().unwrap_or(1);
        let k_max = paths
            .iter()
            .map(|p| p.k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        Self::new(paths, l_span, k_max)
    }

    /// Single unit path at the origin.
    pub fn identity() -> Self {
        Self::from_paths(&[DdPath::new(Complex64::new(1.0, 0.0), 0, 0)]).expect("valid path")
    }

    pub fn paths(&self) -> &[DdPath] {
        &self.paths
    }

    /// Number of nonzero entries of `G`.
    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn l_span(&self) -> usize {
        self.l_span
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn max_delay(&self) -> usize {
        self.paths.iter().map(|p| p.l).max().unwrap_or(0)
    }

    /// `G` entry for 1-based Doppler row `k` and delay `l`.
    pub fn g(&self, k: usize, l: usize) -> Complex64 {
        assert!((1..=2 * self.k_max + 1).contains(&k) && l < self.l_span);
        self.g[(k - 1) * self.l_span + l]
    }

    /// `G` entry for Doppler index `k̂` and delay `l`.
    pub fn g_at(&self, k_hat: i64, l: usize) -> Complex64 {
        self.g((k_hat + self.k_max as i64 + 1) as usize, l)
    }

    /// Dense `G`, row-major, `(2K+1) × L`.
    pub fn g_matrix(&self) -> &[Complex64] {
        &self.g
    }

    /// Copy with every gain multiplied by `f(path)`.
    pub fn map_gains(&self, f: impl Fn(&DdPath) -> Complex64) -> Result<Self> {
        let paths: Vec<DdPath> = self
            .paths
            .iter()
            .map(|p| DdPath::new(p.h * f(p), p.l, p.k))
            .collect();
        Self::new(&paths, self.l_span, self.k_max)
    }

    /// Fails when a path delay exceeds the cyclic prefix.
    pub fn check_cp(&self, params: &GridParams) -> Result<()> {
        match self.paths.iter().find(|p| p.l > params.cp_len) {
            Some(p) => Err(Error::PathExceedsCp {
                delay: p.l,
                cp_len: params.cp_len,
            }),
            None => Ok(()),
        }
    }
}

/// Complex circular Gaussian sample with variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// White noise at `Es/N0 = 10^(snr_db/10)`.
///
/// `N0` is the one-sided noise spectral density; each waveform sample
/// receives `CN(0, N0/dt)`, so a unit-energy matched filter sees variance
/// `N0`. `symbol_energy` is `Es` as seen by the receiver: 1 for ODDM, `T/M`
/// for the OTFS baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub symbol_energy: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(snr_db: f64, seed: u64) -> Self {
        Self {
            snr_db,
            symbol_energy: 1.0,
            seed,
        }
    }

    pub fn with_symbol_energy(mut self, es: f64) -> Self {
        self.symbol_energy = es;
        self
    }

    /// `N0`; zero for an infinite SNR.
    pub fn n0(&self) -> f64 {
        if self.snr_db == f64::INFINITY {
            0.0
        } else {
            self.symbol_energy / 10f64.powf(self.snr_db / 10.0)
        }
    }
}

/// Noise variance of a DD sample after the receiver, for unit-energy symbols.
pub fn dd_noise_variance(snr_db: f64) -> f64 {
    NoiseSpec::new(snr_db, 0).n0()
}

/// Passes `x` through the channel. The output extends `cp_len · J` samples
/// past the end of `x` to hold the delayed tails.
pub fn apply(
    x: &Waveform,
    ch: &DdChannel,
    params: &GridParams,
    noise: Option<&NoiseSpec>,
) -> Result<Waveform> {
    params.validate()?;
    ch.check_cp(params)?;
    let j = params.oversample as i64;
    let ext = params.cp_len * params.oversample;
    let mut y = Waveform::zeros(x.start, x.len() + ext, x.dt);
    let tw = Twiddles::new(params.frame_period_samples());
    for p in ch.paths() {
        let shift = p.l as i64 * j;
        for (k, xv) in x.samples.iter().enumerate() {
            let src = x.start + k as i64;
            let out = (k as i64 + shift) as usize;
            y.samples[out] += xv * p.h * tw.at(p.k * src);
        }
    }
    if let Some(ns) = noise {
        let n0 = ns.n0();
        if n0 > 0.0 {
            let var = n0 / x.dt;
            let mut rng = ChaCha8Rng::seed_from_u64(ns.seed);
            for v in y.samples.iter_mut() {
                *v += complex_gaussian(&mut rng, var);
            }
        }
    }
    Ok(y)
}

/// `P` paths with distinct delays in `0..=max_delay` (repeats allowed once
/// all delays are used), Jakes-style Dopplers `round(k_max cos θ)` with `θ`
/// uniform, and gains `CN(0, 1/P)`.
pub fn random_jakes_paths<R: Rng + ?Sized>(
    paths: usize,
    max_delay: usize,
    k_max: f64,
    rng: &mut R,
) -> Result<DdChannel> {
    if paths == 0 || !(k_max.is_finite() && k_max >= 0.0) {
        return Err(Error::InvalidParams(
            "need at least one path and a finite non-negative Doppler".into(),
        ));
    }
    let mut pool: Vec<usize> = Vec::new();
    let mut out = Vec::with_capacity(paths);
    for _ in 0..paths {
        if pool.is_empty() {
            pool = (0..=max_delay).collect();
        }
        let l = pool.swap_remove(rng.gen_range(0..pool.len()));
        let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let k = (k_max * theta.cos()).round() as i64;
        let h = complex_gaussian(rng, 1.0 / paths as f64);
        out.push(DdPath::new(h, l, k));
    }
    DdChannel::new(&out, max_delay + 1, k_max.ceil() as usize)
}

/// `P` paths in distinct, uniformly chosen cells of the
/// `[0, max_delay] × [-max_doppler, max_doppler]` grid, gains `CN(0, 1/P)`.
pub fn random_grid_paths<R: Rng + ?Sized>(
    paths: usize,
    max_delay: usize,
    max_doppler: usize,
    rng: &mut R,
) -> Result<DdChannel> {
    let rows = 2 * max_doppler + 1;
    let cells = (max_delay + 1) * rows;
    if paths == 0 || paths > cells {
        return Err(Error::InvalidParams(format!(
            "cannot place {paths} paths in {cells} grid cells"
        )));
    }
    let picks = rand::seq::index::sample(rng, cells, paths).into_vec();
    let out: Vec<DdPath> = picks
        .into_iter()
        .map(|c| {
            let h = complex_gaussian(rng, 1.0 / paths as f64);
            DdPath::new(h, c / rows, (c % rows) as i64 - max_doppler as i64)
        })
        .collect();
    DdChannel::new(&out, max_delay + 1, max_doppler)
}
