//! Extended Vehicular A (3GPP TS 36.104 Annex B.2) with Jakes Dopplers,
//! quantized onto the DD grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{complex_gaussian, DdChannel, DdPath, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::params::GridParams;

pub const EVA_DELAYS_NS: [f64; 9] = [
    0.0, 30.0, 150.0, 310.0, 370.0, 710.0, 1090.0, 1730.0, 2510.0,
];
pub const EVA_POWERS_DB: [f64; 9] = [0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9];

/// One drawn tap before and after grid quantization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathDraw {
    pub tau_s: f64,
    pub nu_hz: f64,
    pub l: usize,
    pub k: i64,
}

/// `ν_max = v f_c / c` with `v` in km/h.
pub fn max_doppler_hz(speed_kmh: f64, fc_hz: f64) -> f64 {
    speed_kmh / 3.6 * fc_hz / SPEED_OF_LIGHT
}

/// EVA channel with `L = cp_len + 1` and `K = round(ν_max N T)`.
pub fn eva_jakes(params: &GridParams, speed_kmh: f64, fc_hz: f64, seed: u64) -> Result<DdChannel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    eva_jakes_draws(params, speed_kmh, fc_hz, &mut rng).map(|(ch, _)| ch)
}

/// As [`eva_jakes`], drawing from `rng` and also returning the unquantized taps.
pub fn eva_jakes_draws<R: Rng + ?Sized>(
    params: &GridParams,
    speed_kmh: f64,
    fc_hz: f64,
    rng: &mut R,
) -> Result<(DdChannel, Vec<PathDraw>)> {
    params.validate()?;
    if !(speed_kmh.is_finite() && speed_kmh >= 0.0 && fc_hz.is_finite() && fc_hz > 0.0) {
        return Err(Error::InvalidParams(format!(
            "speed must be non-negative and carrier positive, got {speed_kmh} km/h, {fc_hz} Hz"
        )));
    }
    let nu_max = max_doppler_hz(speed_kmh, fc_hz);
    let k_max = (nu_max * params.frame_duration()).round() as usize;
    let lin: Vec<f64> = EVA_POWERS_DB.iter().map(|p| 10f64.powf(p / 10.0)).collect();
    let total: f64 = lin.iter().sum();
    let mut paths = Vec::with_capacity(lin.len());
    let mut draws = Vec::with_capacity(lin.len());
    for (tau_ns, p) in EVA_DELAYS_NS.iter().zip(&lin) {
        let tau_s = tau_ns * 1e-9;
        let l = (tau_s / params.delay_resolution()).round() as usize;
        if l > params.cp_len {
            return Err(Error::PathExceedsCp {
                delay: l,
                cp_len: params.cp_len,
            });
        }
        let h = complex_gaussian(rng, p / total);
        let theta = rng.gen_range(-std::f64::consts::PI..=std::f64::consts::PI);
        let nu_hz = nu_max * theta.cos();
        let k = (nu_hz * params.frame_duration()).round() as i64;
        // |ν| ≤ ν_max rounds to at most K bins
        let k = k.clamp(-(k_max as i64), k_max as i64);
        paths.push(DdPath::new(h, l, k));
        draws.push(PathDraw { tau_s, nu_hz, l, k });
    }
    let ch = DdChannel::new(&paths, params.cp_len + 1, k_max)?;
    Ok((ch, draws))
}
