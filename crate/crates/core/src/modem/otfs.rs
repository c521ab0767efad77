//! OTFS baseline: ISFFT to the coarse TF grid, rectangular-pulse Heisenberg
//! transform (zero-order hold of each digital sample over `T/M`) and a frame
//! cyclic prefix. The receiver integrates and dumps over each `T/M` interval
//! and inverts the transforms.
//!
//! Symbol energy is `T/M` per DD symbol, against 1 for ODDM.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::Result;
use crate::modem::frame::{DdFrame, Waveform};
use crate::params::GridParams;

/// ISFFT `X_tf[ṅ, m'] = (NM)^{-1/2} Σ_k Σ_l X(l,k) exp(j2π(ṅk/N - m'l/M))`,
/// stored with `ṅ` as the row index.
pub fn isfft(frame: &DdFrame, params: &GridParams) -> Result<Vec<Complex64>> {
    frame.check(params)?;
    let (m_len, n_len) = (params.m, params.n);
    let mut planner = FftPlanner::new();
    let ifft_n = planner.plan_fft_inverse(n_len);
    let fft_m = planner.plan_fft_forward(m_len);
    let scale = 1.0 / ((m_len * n_len) as f64).sqrt();
    let mut tf = vec![Complex64::new(0.0, 0.0); m_len * n_len];
    let mut buf = vec![Complex64::new(0.0, 0.0); n_len];
    for l in 0..m_len {
        buf.copy_from_slice(frame.row(l));
        ifft_n.process(&mut buf);
        for (nd, v) in buf.iter().enumerate() {
            tf[nd * m_len + l] = *v;
        }
    }
    for row in tf.chunks_mut(m_len) {
        fft_m.process(row);
        row.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(tf)
}

/// Per-slot `M`-point IDFT (scaled `M^{-1/2}`) of the TF grid: the OTFS
/// digital sequence, equal to the ODDM one.
pub fn otfs_digital_sequence(frame: &DdFrame, params: &GridParams) -> Result<Vec<Complex64>> {
    let mut tf = isfft(frame, params)?;
    let ifft_m = FftPlanner::new().plan_fft_inverse(params.m);
    let scale = 1.0 / (params.m as f64).sqrt();
    for row in tf.chunks_mut(params.m) {
        ifft_m.process(row);
        row.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(tf)
}

/// Zero-order-hold waveform with the last `cp_len` digital samples prepended.
pub fn otfs_modulate(frame: &DdFrame, params: &GridParams) -> Result<Waveform> {
    let s = otfs_digital_sequence(frame, params)?;
    let j = params.oversample;
    let cp = params.cp_len;
    let mn = s.len();
    let mut out = Waveform::zeros(-((cp * j) as i64), (mn + cp) * j, params.sample_interval());
    for (k, chunk) in out.samples.chunks_mut(j).enumerate() {
        let v = s[(k + mn - cp) % mn];
        chunk.iter_mut().for_each(|x| *x = v);
    }
    Ok(out)
}

/// Sample span `[start, end)` the OTFS receiver reads.
pub fn otfs_demod_span(params: &GridParams) -> (i64, i64) {
    (0, (params.grid_len() * params.oversample) as i64)
}

/// Integrate-and-dump per `T/M`, then the per-delay `N`-point DFT over `ṅ`.
pub fn otfs_demodulate(y: &Waveform, params: &GridParams) -> Result<DdFrame> {
    let (a, b) = otfs_demod_span(params);
    y.require_span(a, b)?;
    let (m_len, n_len) = (params.m, params.n);
    let j = params.oversample as i64;
    let inv_j = 1.0 / j as f64;
    let fft = FftPlanner::new().plan_fft_forward(n_len);
    let scale = 1.0 / (n_len as f64).sqrt();
    let mut out = Vec::with_capacity(m_len * n_len);
    let mut buf = vec![Complex64::new(0.0, 0.0); n_len];
    for m in 0..m_len {
        for (nd, v) in buf.iter_mut().enumerate() {
            let q = (m + nd * m_len) as i64;
            *v = (0..j).map(|k| y.at(q * j + k)).sum::<Complex64>() * inv_j;
        }
        fft.process(&mut buf);
        out.extend(buf.iter().map(|v| v * scale));
    }
    DdFrame::from_vec(m_len, n_len, out)
}

/// Gain of a Doppler ramp `exp(j2π k̂ i/(NMJ))` averaged over one dump
/// interval, relative to its value at the interval start.
pub fn dump_gain(k_hat: i64, params: &GridParams) -> Complex64 {
    let j = params.oversample as i64;
    let big = params.frame_period_samples() as u64;
    (0..j)
        .map(|i| crate::dsp::cis_ratio(k_hat * i, big))
        .sum::<Complex64>()
        / j as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::max_abs_diff;
    use crate::modem::oddm::digital_sequence;
    use crate::qam::QamConstellation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn same_digital_sequence_as_oddm() {
        let p = GridParams::new(16, 8, 15e3, 2, 2, 0).unwrap();
        let q = QamConstellation::new(16).unwrap();
        let (f, _) = DdFrame::random_qam(&p, &q, &mut ChaCha8Rng::seed_from_u64(2));
        let a = digital_sequence(&f, &p).unwrap();
        let b = otfs_digital_sequence(&f, &p).unwrap();
        assert!(max_abs_diff(&a, &b) < 1e-12);
    }

    #[test]
    fn loopback_is_exact_and_holds_samples() {
        let p = GridParams::new(16, 8, 15e3, 2, 4, 3).unwrap();
        let q = QamConstellation::new(4).unwrap();
        let (f, _) = DdFrame::random_qam(&p, &q, &mut ChaCha8Rng::seed_from_u64(4));
        let x = otfs_modulate(&f, &p).unwrap();
        assert_eq!(x.start, -12);
        let s = digital_sequence(&f, &p).unwrap();
        for (k, v) in s.iter().enumerate() {
            assert!((x.at(4 * k as i64) - v).norm() < 1e-12);
        }
        // the prefix repeats the frame tail
        assert!((x.at(-12) - s[128 - 3]).norm() < 1e-15);
        let back = otfs_demodulate(&x, &p).unwrap();
        assert!(max_abs_diff(back.as_slice(), f.as_slice()) < 1e-10);
        let body = crate::dsp::energy(&x.samples[12..]) * x.dt;
        let es = body / f.energy();
        assert!((es - p.delay_resolution()).abs() < 1e-12 * es.max(1.0));
    }

    #[test]
    fn dump_gain_limits() {
        let p = GridParams::new(16, 8, 15e3, 2, 4, 0).unwrap();
        assert!((dump_gain(0, &p) - 1.0).norm() < 1e-15);
        let g = dump_gain(2, &p);
        assert!(g.norm() < 1.0 && g.norm() > 0.999);
    }
}
