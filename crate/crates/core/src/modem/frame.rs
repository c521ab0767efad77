//! DD symbol grids and sampled waveforms.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::params::GridParams;
use crate::qam::QamConstellation;

/// `M × N` grid `X(m, n)`, row `m` = delay, column `n` = Doppler.
///
/// Stored row-major, which is exactly the vectorization
/// `x = [x_0ᵀ … x_{M-1}ᵀ]ᵀ` with `x_m = X(m, :)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DdFrame {
    m: usize,
    n: usize,
    data: Vec<Complex64>,
}

impl DdFrame {
    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            data: vec![Complex64::new(0.0, 0.0); m * n],
        }
    }

    /// Inverse of [`DdFrame::as_slice`].
    pub fn from_vec(m: usize, n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != m * n {
            return Err(Error::DimensionMismatch {
                expected: m * n,
                got: data.len(),
            });
        }
        Ok(Self { m, n, data })
    }

    pub fn for_params(params: &GridParams) -> Self {
        Self::zeros(params.m, params.n)
    }

    /// Frame of constellation points selected by `indices` (row-major).
    pub fn from_indices(
        params: &GridParams,
        qam: &QamConstellation,
        indices: &[usize],
    ) -> Result<Self> {
        let data = indices.iter().map(|&i| qam.point(i)).collect();
        Self::from_vec(params.m, params.n, data)
    }

    /// Uniformly random symbols; returns the frame and the symbol indices.
    pub fn random_qam<R: Rng + ?Sized>(
        params: &GridParams,
        qam: &QamConstellation,
        rng: &mut R,
    ) -> (Self, Vec<usize>) {
        let idx: Vec<usize> = (0..params.grid_len())
            .map(|_| rng.gen_range(0..qam.order()))
            .collect();
        let frame = Self::from_indices(params, qam, &idx).expect("length matches grid");
        (frame, idx)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.data[m * self.n + n]
    }

    #[inline]
    pub fn set(&mut self, m: usize, n: usize, v: Complex64) {
        self.data[m * self.n + n] = v;
    }

    /// Row `m`, i.e. the block `x_m` of the vectorized frame.
    pub fn row(&self, m: usize) -> &[Complex64] {
        &self.data[m * self.n..(m + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn energy(&self) -> f64 {
        crate::dsp::energy(&self.data)
    }

    pub(crate) fn check(&self, params: &GridParams) -> Result<()> {
        if self.m != params.m || self.n != params.n {
            return Err(Error::DimensionMismatch {
                expected: params.grid_len(),
                got: self.m * self.n,
            });
        }
        Ok(())
    }
}

/// Complex baseband samples `x(i dt)` for `i` in `[start, start + len)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<Complex64>,
    /// Sample index of `samples[0]`; time `start * dt` is usually negative.
    pub start: i64,
    pub dt: f64,
}

impl Waveform {
    pub fn zeros(start: i64, len: usize, dt: f64) -> Self {
        Self {
            samples: vec![Complex64::new(0.0, 0.0); len],
            start,
            dt,
        }
    }

    /// One past the last sample index.
    pub fn end(&self) -> i64 {
        self.start + self.samples.len() as i64
    }

    pub fn t0(&self) -> f64 {
        self.start as f64 * self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sample at absolute index `i`, zero outside the span.
    #[inline]
    pub fn at(&self, i: i64) -> Complex64 {
        let k = i - self.start;
        if k < 0 || k as usize >= self.samples.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.samples[k as usize]
        }
    }

    /// `Σ |x|² dt`.
    pub fn energy(&self) -> f64 {
        crate::dsp::energy(&self.samples) * self.dt
    }

    /// Fails unless `[need_start, need_end)` lies inside the span.
    pub fn require_span(&self, need_start: i64, need_end: i64) -> Result<()> {
        if need_start < self.start || need_end > self.end() {
            return Err(Error::InsufficientSpan {
                need_start,
                need_end,
                have_start: self.start,
                have_end: self.end(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vectorization_round_trip() {
        let p = GridParams::new(8, 4, 15e3, 2, 2, 0).unwrap();
        let q = QamConstellation::new(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (f, idx) = DdFrame::random_qam(&p, &q, &mut rng);
        assert_eq!(f.get(3, 2), q.point(idx[3 * 4 + 2]));
        assert_eq!(f.row(5), &f.as_slice()[20..24]);
        let g = DdFrame::from_vec(8, 4, f.clone().into_vec()).unwrap();
        assert_eq!(f, g);
        assert!(DdFrame::from_vec(8, 3, g.into_vec()).is_err());
    }

    #[test]
    fn span_checks() {
        let w = Waveform::zeros(-4, 10, 0.5);
        assert_eq!(w.end(), 6);
        assert_eq!(w.t0(), -2.0);
        assert!(w.require_span(-4, 6).is_ok());
        assert!(w.require_span(-5, 6).is_err());
        assert_eq!(w.at(100), Complex64::new(0.0, 0.0));
    }
}
