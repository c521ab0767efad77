//! Frame geometry and the sampling conventions shared by every module.
//!
//! Time origin: `t = 0` is the start of delay symbol `m = 0`. A cyclic prefix,
//! when present, occupies negative time. Analog waveforms are emulated on the
//! sample grid `t = i * dt` with `dt = T / (M * J)`, so that one delay bin
//! `T/M` is exactly `J` samples and one reference period `T` is `M * J`
//! samples. All waveform spans are half-open `[start, end)` sample ranges.

use crate::error::{Error, Result};

/// Frame geometry: `M` delay bins, `N` Doppler bins, reference subcarrier
/// spacing `1/T`, pulse half-length `Q` (in units of `T/M`), analog
/// oversampling `J` and cyclic prefix length `L - 1` (in units of `T/M`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridParams {
    pub m: usize,
    pub n: usize,
    /// `1/T` in Hz.
    pub scs_hz: f64,
    pub q: usize,
    pub oversample: usize,
    pub cp_len: usize,
}

/// Values derived from [`GridParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionReport {
    pub delay_resolution_s: f64,
    pub doppler_resolution_hz: f64,
    pub bandwidth_hz: f64,
    pub frame_duration_s: f64,
    pub sample_rate_hz: f64,
    pub sample_interval_s: f64,
    /// `(T/M) * (1/(NT))`, always `1/(MN)`.
    pub grid_area: f64,
    /// `M N J`: frame without CP and without pulse tails.
    pub frame_samples: usize,
    /// `J (MN + 2Q)`: frame with pulse tails.
    pub frame_samples_with_tails: usize,
    /// `J (MN + (L-1) + 2Q)`: CP-included frame with pulse tails.
    pub frame_samples_with_cp: usize,
}

impl GridParams {
    pub fn new(
        m: usize,
        n: usize,
        scs_hz: f64,
        q: usize,
        oversample: usize,
        cp_len: usize,
    ) -> Result<Self> {
        let p = Self {
            m,
            n,
            scs_hz,
            q,
            oversample,
            cp_len,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidParams("M and N must be positive".into()));
        }
        if !(self.scs_hz.is_finite() && self.scs_hz > 0.0) {
            return Err(Error::InvalidParams(format!(
                "subcarrier spacing must be positive and finite, got {}",
                self.scs_hz
            )));
        }
        if self.oversample == 0 {
            return Err(Error::InvalidParams(
                "oversampling J must be positive".into(),
            ));
        }
        if self.q == 0 {
            return Err(Error::InvalidParams(
                "pulse half-length Q must be at least 1".into(),
            ));
        }
        if 2 * self.q >= self.m {
            return Err(Error::InvalidParams(format!(
                "pulse replicas overlap: need 2Q < M, got Q={} M={}",
                self.q, self.m
            )));
        }
        if self.cp_len >= self.m {
            return Err(Error::InvalidParams(format!(
                "cyclic prefix must be shorter than one period: cp_len={} M={}",
                self.cp_len, self.m
            )));
        }
        Ok(())
    }

    /// Reference OFDM symbol period `T`.
    pub fn symbol_period(&self) -> f64 {
        1.0 / self.scs_hz
    }

    /// `T / M`.
    pub fn delay_resolution(&self) -> f64 {
        self.symbol_period() / self.m as f64
    }

    /// `1 / (N T)`.
    pub fn doppler_resolution(&self) -> f64 {
        1.0 / (self.n as f64 * self.symbol_period())
    }

    /// `M / T`.
    pub fn bandwidth(&self) -> f64 {
        self.m as f64 / self.symbol_period()
    }

    /// `N T`.
    pub fn frame_duration(&self) -> f64 {
        self.n as f64 * self.symbol_period()
    }

    /// `M J / T`.
    pub fn sample_rate(&self) -> f64 {
        (self.m * self.oversample) as f64 / self.symbol_period()
    }

    /// `T / (M J)`.
    pub fn sample_interval(&self) -> f64 {
        self.symbol_period() / (self.m * self.oversample) as f64
    }

    /// Number of DD grid points `M N`.
    pub fn grid_len(&self) -> usize {
        self.m * self.n
    }

    /// Samples per reference period `T`.
    pub fn period_samples(&self) -> usize {
        self.m * self.oversample
    }

    /// Samples per frame duration `N T`; the Doppler phase ramps wrap on this.
    pub fn frame_period_samples(&self) -> usize {
        self.n * self.m * self.oversample
    }

    pub fn derive(&self) -> Result<ResolutionReport> {
        self.validate()?;
        let j = self.oversample;
        let mn = self.grid_len();
        Ok(ResolutionReport {
            delay_resolution_s: self.delay_resolution(),
            doppler_resolution_hz: self.doppler_resolution(),
            bandwidth_hz: self.bandwidth(),
            frame_duration_s: self.frame_duration(),
            sample_rate_hz: self.sample_rate(),
            sample_interval_s: self.sample_interval(),
            grid_area: self.delay_resolution() * self.doppler_resolution(),
            frame_samples: mn * j,
            frame_samples_with_tails: j * (mn + 2 * self.q),
            frame_samples_with_cp: j * (mn + self.cp_len + 2 * self.q),
        })
    }
}
