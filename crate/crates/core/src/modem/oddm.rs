//! ODDM modulation and matched-filter demodulation.
//!
//! The transmitted waveform is
//! `x(t) = Σ_m Σ_n X(m,n) u(t - mT/M) exp(j2π n (t - mT/M) / (NT))`.
//! Writing a sample index as `i = mJ + ṅMJ + r` with `|r| ≤ QJ` splits the
//! double sum into an `N`-point IDFT per `(m, r)`, which is how both
//! directions are computed here.
//!
//! With a CP the transmitter also emits the `ṅ = -1` replica for the last
//! `cp_len` delay symbols only, so the prefix is the last `cp_len` samples of
//! the digital sequence, pulse shaped.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::dsp::Twiddles;
use crate::error::{Error, Result};
use crate::modem::frame::{DdFrame, Waveform};
use crate::params::GridParams;
use crate::pulse::{ProtoPulse, PulseTrain};

/// Digital sequence `s[m + Mṅ] = N^{-1/2} Σ_n X(m,n) exp(j2π nṅ/N)`.
///
/// Unitary: `Σ|s|² = Σ|X|²`.
pub fn digital_sequence(frame: &DdFrame, params: &GridParams) -> Result<Vec<Complex64>> {
    frame.check(params)?;
    let (m_len, n_len) = (params.m, params.n);
    let ifft = FftPlanner::new().plan_fft_inverse(n_len);
    let scale = 1.0 / (n_len as f64).sqrt();
    let mut s = vec![Complex64::new(0.0, 0.0); m_len * n_len];
    let mut buf = vec![Complex64::new(0.0, 0.0); n_len];
    for m in 0..m_len {
        buf.copy_from_slice(frame.row(m));
        ifft.process(&mut buf);
        for (nd, v) in buf.iter().enumerate() {
            s[m + m_len * nd] = v * scale;
        }
    }
    Ok(s)
}

/// Sample span `[start, end)` of a modulated frame.
pub fn frame_span(params: &GridParams, cp: bool) -> (i64, i64) {
    let j = params.oversample as i64;
    let q = params.q as i64;
    let lead = if cp { params.cp_len as i64 } else { 0 };
    (-(lead + q) * j, (params.grid_len() as i64 + q) * j)
}

/// Sample span `[start, end)` the matched filters read.
pub fn demod_span(params: &GridParams) -> (i64, i64) {
    let j = params.oversample as i64;
    let q = params.q as i64;
    (-q * j, (params.grid_len() as i64 - 1 + q) * j + 1)
}

fn check_train(train: &PulseTrain, params: &GridParams) -> Result<()> {
    params.validate()?;
    let p = train.proto();
    if p.q() != params.q || p.oversample() != params.oversample || train.n() != params.n {
        return Err(Error::InvalidParams(
            "pulse train was built for different grid parameters".into(),
        ));
    }
    Ok(())
}

/// Pulse-shaped ODDM waveform; `u_cp` trains add the cyclic prefix.
pub fn modulate(frame: &DdFrame, train: &PulseTrain, params: &GridParams) -> Result<Waveform> {
    frame.check(params)?;
    check_train(train, params)?;
    let proto = train.proto();
    let cp = train.is_cp();
    let (m_len, n_len) = (params.m, params.n);
    let j = params.oversample as i64;
    let period = params.period_samples() as i64;
    let half = proto.half_len() as i64;
    let (start, end) = frame_span(params, cp);
    let mut out = Waveform::zeros(start, (end - start) as usize, params.sample_interval());
    let tw = Twiddles::new(params.frame_period_samples());
    let ifft = FftPlanner::new().plan_fft_inverse(n_len);
    let mut buf = vec![Complex64::new(0.0, 0.0); n_len];
    let cp_from = m_len - params.cp_len;
    for m in 0..m_len {
        let row = frame.row(m);
        if row.iter().all(|v| v.norm_sqr() == 0.0) {
            continue;
        }
        for r in -half..=half {
            let a = proto.tap(r);
            if a == 0.0 {
                continue;
            }
            for (n, b) in buf.iter_mut().enumerate() {
                *b = row[n] * tw.at(n as i64 * r);
            }
            ifft.process(&mut buf);
            let base = m as i64 * j + r - start;
            for (nd, v) in buf.iter().enumerate() {
                out.samples[(base + nd as i64 * period) as usize] += v * a;
            }
            if cp && m >= cp_from {
                out.samples[(base - period) as usize] += buf[n_len - 1] * a;
            }
        }
    }
    Ok(out)
}

/// Digital sequence upsampled by `J` and filtered by `a(t)`, scaled by `√N`
/// so that it approximates [`modulate`] (the per-sample phase
/// `exp(j2π n r/(NMJ))` across the pulse support is dropped).
pub fn modulate_filtered(
    frame: &DdFrame,
    proto: &ProtoPulse,
    params: &GridParams,
    cp: bool,
) -> Result<Waveform> {
    let s = digital_sequence(frame, params)?;
    let j = params.oversample as i64;
    let half = proto.half_len() as i64;
    let (start, end) = frame_span(params, cp);
    let mut out = Waveform::zeros(start, (end - start) as usize, params.sample_interval());
    let gain = (params.n as f64).sqrt();
    let mn = s.len() as i64;
    let first = if cp { -(params.cp_len as i64) } else { 0 };
    for q in first..mn {
        let v = s[q.rem_euclid(mn) as usize] * gain;
        let base = q * j - start;
        for r in -half..=half {
            out.samples[(base + r) as usize] += v * proto.tap(r);
        }
    }
    Ok(out)
}

/// Matched filter `Y(m,n) = Σ_i y[i] u[i - mJ] exp(-j2π n (i - mJ)/(NMJ)) dt`.
///
/// Uses the replicas `ṅ = 0..N-1` of the prototype regardless of whether
/// `train` carries the CP replica.
pub fn demodulate(y: &Waveform, train: &PulseTrain, params: &GridParams) -> Result<DdFrame> {
    check_train(train, params)?;
    let (need_start, need_end) = demod_span(params);
    y.require_span(need_start, need_end)?;
    let proto = train.proto();
    let (m_len, n_len) = (params.m, params.n);
    let j = params.oversample as i64;
    let period = params.period_samples() as i64;
    let half = proto.half_len() as i64;
    let tw = Twiddles::new(params.frame_period_samples());
    let fft = FftPlanner::new().plan_fft_forward(n_len);
    let dt = params.sample_interval();
    let rows: Vec<Vec<Complex64>> = (0..m_len)
        .into_par_iter()
        .map(|m| {
            let mut acc = vec![Complex64::new(0.0, 0.0); n_len];
            let mut buf = vec![Complex64::new(0.0, 0.0); n_len];
            for r in -half..=half {
                let a = proto.tap(r);
                if a == 0.0 {
                    continue;
                }
                let base = m as i64 * j + r;
                for (nd, b) in buf.iter_mut().enumerate() {
                    *b = y.at(base + nd as i64 * period);
                }
                fft.process(&mut buf);
                for (n, (s, b)) in acc.iter_mut().zip(&buf).enumerate() {
                    *s += b * tw.at(-(n as i64) * r) * a;
                }
            }
            acc.iter_mut().for_each(|v| *v *= dt);
            acc
        })
        .collect();
    DdFrame::from_vec(m_len, n_len, rows.concat())
}

/// Direct-summation implementations used as oracles for the fast paths.
pub mod reference {
    use super::*;
    use crate::dsp::cis_ratio;

    /// `O((MN)²)` double sum over `(m, n)` for every digital sample.
    pub fn digital_sequence(frame: &DdFrame, params: &GridParams) -> Result<Vec<Complex64>> {
        frame.check(params)?;
        let (m_len, n_len) = (params.m, params.n);
        let scale = 1.0 / (n_len as f64).sqrt();
        let mut s = vec![Complex64::new(0.0, 0.0); m_len * n_len];
        for (q, out) in s.iter_mut().enumerate() {
            for m in 0..m_len {
                for n in 0..n_len {
                    if q % m_len != m {
                        continue;
                    }
                    let nd = (q / m_len) as i64;
                    *out += frame.get(m, n) * cis_ratio(n as i64 * nd, n_len as u64) * scale;
                }
            }
        }
        Ok(s)
    }

    /// Evaluates the modulation formula sample by sample from the train.
    pub fn modulate(frame: &DdFrame, train: &PulseTrain, params: &GridParams) -> Result<Waveform> {
        frame.check(params)?;
        let cp = train.is_cp();
        let (start, end) = frame_span(params, cp);
        let j = params.oversample as i64;
        let big = params.frame_period_samples() as u64;
        let period = params.period_samples() as i64;
        let proto = train.proto();
        let mut out = Waveform::zeros(start, (end - start) as usize, params.sample_interval());
        for (k, x) in out.samples.iter_mut().enumerate() {
            let i = start + k as i64;
            for m in 0..params.m {
                let d = i - m as i64 * j;
                let mut w = 0.0;
                for nd in 0..params.n as i64 {
                    w += proto.tap(d - nd * period);
                }
                if cp && m >= params.m - params.cp_len {
                    w += proto.tap(d + period);
                }
                if w == 0.0 {
                    continue;
                }
                for n in 0..params.n {
                    *x += frame.get(m, n) * cis_ratio(n as i64 * d, big) * w;
                }
            }
        }
        Ok(out)
    }

    /// Evaluates the matched-filter integral sample by sample.
    pub fn demodulate(y: &Waveform, train: &PulseTrain, params: &GridParams) -> Result<DdFrame> {
        let (need_start, need_end) = demod_span(params);
        y.require_span(need_start, need_end)?;
        let j = params.oversample as i64;
        let big = params.frame_period_samples() as u64;
        let period = params.period_samples() as i64;
        let proto = train.proto();
        let mut out = DdFrame::for_params(params);
        for m in 0..params.m {
            for n in 0..params.n {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in y.start..y.end() {
                    let d = i - m as i64 * j;
                    let w: f64 = (0..params.n as i64)
                        .map(|nd| proto.tap(d - nd * period))
                        .sum();
                    if w != 0.0 {
                        acc += y.at(i) * cis_ratio(-(n as i64) * d, big) * w;
                    }
                }
                out.set(m, n, acc * params.sample_interval());
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::max_abs_diff;
    use crate::pulse::{build_train, design_srrc};
    use crate::qam::QamConstellation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(
        m: usize,
        n: usize,
        q: usize,
        j: usize,
        cp: usize,
    ) -> (GridParams, PulseTrain, PulseTrain) {
        let p = GridParams::new(m, n, 15e3, q, j, cp).unwrap();
        let a = design_srrc(&p, 0.25).unwrap();
        let u = build_train(&a, &p, false).unwrap();
        let ucp = build_train(&a, &p, true).unwrap();
        (p, u, ucp)
    }

    fn random_frame(p: &GridParams, seed: u64) -> DdFrame {
        let q = QamConstellation::new(4).unwrap();
        DdFrame::random_qam(p, &q, &mut ChaCha8Rng::seed_from_u64(seed)).0
    }

    #[test]
    fn single_symbol_digital_sequence() {
        let (p, _, _) = setup(8, 4, 2, 2, 0);
        let mut f = DdFrame::for_params(&p);
        f.set(0, 0, Complex64::new(1.0, 0.0));
        let s = digital_sequence(&f, &p).unwrap();
        for (q, v) in s.iter().enumerate() {
            let want = if q % 8 == 0 { 0.5 } else { 0.0 };
            assert!((v - want).norm() < 1e-15, "q={q}");
        }
    }

    #[test]
    fn digital_sequence_matches_double_sum() {
        let (p, _, _) = setup(8, 4, 2, 2, 0);
        let f = random_frame(&p, 3);
        let a = digital_sequence(&f, &p).unwrap();
        let b = reference::digital_sequence(&f, &p).unwrap();
        assert!(max_abs_diff(&a, &b) < 1e-13);
        let ea: f64 = crate::dsp::energy(&a);
        assert!((ea - f.energy()).abs() < 1e-12);
    }

    #[test]
    fn fast_paths_match_direct_sums() {
        let (p, u, ucp) = setup(8, 4, 2, 3, 2);
        let f = random_frame(&p, 5);
        for train in [&u, &ucp] {
            let a = modulate(&f, train, &p).unwrap();
            let b = reference::modulate(&f, train, &p).unwrap();
            assert_eq!((a.start, a.len()), (b.start, b.len()));
            assert!(max_abs_diff(&a.samples, &b.samples) < 1e-12);
        }
        let y = modulate(&f, &ucp, &p).unwrap();
        let ya = demodulate(&y, &u, &p).unwrap();
        let yb = reference::demodulate(&y, &u, &p).unwrap();
        assert!(max_abs_diff(ya.as_slice(), yb.as_slice()) < 1e-12);
    }

    #[test]
    fn single_symbol_is_shifted_modulated_train() {
        let (p, u, _) = setup(16, 4, 3, 4, 0);
        let mut f = DdFrame::for_params(&p);
        f.set(0, 0, Complex64::new(1.0, 0.0));
        let x = modulate(&f, &u, &p).unwrap();
        for i in x.start..x.end() {
            assert!((x.at(i) - u.value(i)).norm() < 1e-14);
        }
        let peak = u.proto().tap(0);
        let (m0, n0) = (5i64, 3i64);
        let mut f = DdFrame::for_params(&p);
        f.set(m0 as usize, n0 as usize, Complex64::new(1.0, 0.0));
        let x = modulate(&f, &u, &p).unwrap();
        let big = p.frame_period_samples() as u64;
        for i in x.start..x.end() {
            let d = i - m0 * 4;
            let want = crate::dsp::cis_ratio(n0 * d, big) * u.value(d);
            assert!((x.at(i) - want).norm() < 1e-13 * peak);
        }
    }

    #[test]
    fn loopback_and_span_errors() {
        let (p, u, ucp) = setup(32, 8, 4, 4, 3);
        let f = random_frame(&p, 9);
        let y = modulate(&f, &ucp, &p).unwrap();
        let back = demodulate(&y, &u, &p).unwrap();
        assert!(max_abs_diff(back.as_slice(), f.as_slice()) < 1e-2);
        let mut short = y.clone();
        short.samples.truncate(short.samples.len() - 4 * 4);
        assert!(matches!(
            demodulate(&short, &u, &p),
            Err(Error::InsufficientSpan { .. })
        ));
    }

    #[test]
    fn filtered_impulse_response() {
        let (p, u, _) = setup(16, 4, 3, 4, 0);
        let mut f = DdFrame::for_params(&p);
        f.set(0, 0, Complex64::new(1.0, 0.0));
        let x = modulate_filtered(&f, u.proto(), &p, false).unwrap();
        // impulse at every q ≡ 0 mod M gives the a(t) replicas of u(t)
        for i in x.start..x.end() {
            assert!((x.at(i) - u.value(i)).norm() < 1e-14);
        }
    }
}
