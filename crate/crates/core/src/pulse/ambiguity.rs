//! Discrete ambiguity function of a pulse train and the DD-grid orthogonality
//! audit.
//!
//! `A(m, n) = Σ_i u[i] u[i - mJ] exp(-j2π n (i - mJ) / (NMJ)) dt`, i.e. the
//! sampled form of `∫ u(t) u(t - mT/M) exp(-j2π n (t - mT/M)/(NT)) dt`. Because
//! replicas do not overlap, the product `u[i] u[i - mJ]` is nonzero only on a
//! few short segments, which is all the scan touches.
//!
//! Accuracy: the sum is a rectangle rule at rate `MJ/T`. For an SRRC the
//! integrand is band-limited to `(1 + rolloff) M / T`, so `J ≥ 2` already makes
//! the rule exact up to the truncation of the pulse tails. The wrap-region
//! residue (`M - 2Q < |m| ≤ M - 1`) is a property of the continuous pulse, not
//! of the discretization.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dsp::Twiddles;
use crate::error::Result;
use crate::params::GridParams;
use crate::pulse::train::PulseTrain;

/// Audit-grid region of a point `(m, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Origin,
    /// `|m| ≤ M - 2Q`, where the ambiguity is exactly `δ(m)δ(n)`.
    Exact,
    /// `M - 2Q < |m| ≤ M - 1`, where it is only approximately zero.
    Wrap,
}

impl Region {
    pub fn classify(m: i64, n: i64, params: &GridParams) -> Region {
        if m == 0 && n == 0 {
            Region::Origin
        } else if m.unsigned_abs() as usize <= params.m - 2 * params.q {
            Region::Exact
        } else {
            Region::Wrap
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Region::Origin => "origin",
            Region::Exact => "exact",
            Region::Wrap => "wrap",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditEntry {
    pub m: i64,
    pub n: i64,
    pub value: Complex64,
    pub region: Region,
}

#[derive(Debug, Clone)]
pub struct AuditReport {
    pub origin: Complex64,
    pub exact_max: f64,
    pub wrap_max: f64,
    /// Largest off-origin magnitudes, descending.
    pub worst: Vec<AuditEntry>,
    /// Every scanned point, ordered by `m` then `n`.
    pub entries: Vec<AuditEntry>,
    /// Samples per `T/M` used for the integration.
    pub oversample: usize,
}

impl AuditReport {
    /// Max `|A|` over the grid excluding the origin.
    pub fn off_origin_max(&self) -> f64 {
        self.exact_max.max(self.wrap_max)
    }
}

const WORST_KEPT: usize = 16;

/// Nonzero runs of `u[i] u[i - shift]`, as `(first index, products)`.
fn product_segments(train: &PulseTrain, shift: i64) -> Vec<(i64, Vec<f64>)> {
    let half = train.proto().half_len() as i64;
    let period = train.period() as i64;
    let mut out = Vec::new();
    for r in train.replicas() {
        let lo = r * period - half;
        let hi = r * period + half;
        let prods: Vec<f64> = (lo..=hi)
            .map(|i| train.value(i) * train.value(i - shift))
            .collect();
        let first = prods.iter().position(|&x| x != 0.0);
        let last = prods.iter().rposition(|&x| x != 0.0);
        if let (Some(a), Some(b)) = (first, last) {
            out.push((lo + a as i64, prods[a..=b].to_vec()));
        }
    }
    out
}

fn grid_value(
    segments: &[(i64, Vec<f64>)],
    shift: i64,
    n: i64,
    tw: &Twiddles,
    dt: f64,
) -> Complex64 {
    let len = tw.len() as i64;
    let step = (-n).rem_euclid(len);
    let mut acc = Complex64::new(0.0, 0.0);
    for (start, prods) in segments {
        let mut idx = (-n * (start - shift)).rem_euclid(len);
        for &p in prods {
            acc += tw.at(idx) * p;
            idx += step;
            if idx >= len {
                idx -= len;
            }
        }
    }
    acc * dt
}

/// `A(mT/M, n/(NT))` for integer grid indices.
pub fn ambiguity(train: &PulseTrain, m: i64, n: i64) -> Complex64 {
    let j = train.proto().oversample() as i64;
    let shift = m * j;
    let tw = Twiddles::new(train.n() * train.period());
    grid_value(&product_segments(train, shift), shift, n, &tw, train.dt())
}

/// `A(τ, ν)` for arbitrary delay and Doppler; `τ` is rounded to the nearest
/// sample.
pub fn ambiguity_at(train: &PulseTrain, delay_s: f64, doppler_hz: f64) -> Complex64 {
    let dt = train.dt();
    let shift = (delay_s / dt).round() as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for (start, prods) in product_segments(train, shift) {
        for (k, &p) in prods.iter().enumerate() {
            let t = (start + k as i64 - shift) as f64 * dt;
            acc += Complex64::from_polar(p, -2.0 * std::f64::consts::PI * doppler_hz * t);
        }
    }
    acc * dt
}

/// Scans `|m| ≤ M - 1`, `|n| ≤ N - 1`, parallel over `m`.
pub fn orthogonality_audit(train: &PulseTrain, params: &GridParams) -> Result<AuditReport> {
    params.validate()?;
    let j = params.oversample as i64;
    let mi = params.m as i64;
    let ni = params.n as i64;
    let tw = Twiddles::new(params.frame_period_samples());
    let dt = train.dt();
    let entries: Vec<AuditEntry> = (-(mi - 1)..mi)
        .into_par_iter()
        .flat_map_iter(|m| {
            let shift = m * j;
            let segs = product_segments(train, shift);
            let tw = &tw;
            (-(ni - 1)..ni)
                .map(move |n| AuditEntry {
                    m,
                    n,
                    value: if segs.is_empty() {
                        Complex64::new(0.0, 0.0)
                    } else {
                        grid_value(&segs, shift, n, tw, dt)
                    },
                    region: Region::classify(m, n, params),
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let mut origin = Complex64::new(0.0, 0.0);
    let mut exact_max = 0.0f64;
    let mut wrap_max = 0.0f64;
    for e in &entries {
        match e.region {
            Region::Origin => origin = e.value,
            Region::Exact => exact_max = exact_max.max(e.value.norm()),
            Region::Wrap => wrap_max = wrap_max.max(e.value.norm()),
        }
    }
    let mut worst: Vec<AuditEntry> = entries
        .iter()
        .filter(|e| e.region != Region::Origin)
        .copied()
        .collect();
    worst.sort_by(|a, b| {
        b.value
            .norm()
            .total_cmp(&a.value.norm())
            .then(a.m.cmp(&b.m))
            .then(a.n.cmp(&b.n))
    });
    worst.truncate(WORST_KEPT);
    Ok(AuditReport {
        origin,
        exact_max,
        wrap_max,
        worst,
        entries,
        oversample: params.oversample,
    })
}
