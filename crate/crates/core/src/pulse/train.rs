//! The DD-plane pulse `u(t) = Σ_{ṅ=0}^{N-1} a(t - ṅT)` and its CP variant
//! with the extra replica at `ṅ = -1`.

use crate::error::{Error, Result};
use crate::params::GridParams;
use crate::pulse::srrc::ProtoPulse;

#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrain {
    proto: ProtoPulse,
    n: usize,
    period: usize,
    first_replica: i64,
    samples: Vec<f64>,
}

/// Builds `u(t)`, or `u_cp(t)` when `cp` is set.
pub fn build_train(proto: &ProtoPulse, params: &GridParams, cp: bool) -> Result<PulseTrain> {
    params.validate()?;
    if proto.q() != params.q || proto.oversample() != params.oversample || proto.n() != params.n {
        return Err(Error::InvalidParams(format!(
            "prototype (Q={}, J={}, N={}) does not match grid (Q={}, J={}, N={})",
            proto.q(),
            proto.oversample(),
            proto.n(),
            params.q,
            params.oversample,
            params.n
        )));
    }
    if (proto.dt() - params.sample_interval()).abs() > 1e-12 * params.sample_interval() {
        return Err(Error::InvalidParams(
            "prototype sample interval does not match grid".into(),
        ));
    }
    let period = params.period_samples();
    let first_replica = if cp { -1 } else { 0 };
    let replicas = (params.n as i64 - first_replica) as usize;
    let taps = proto.taps();
    let len = (replicas - 1) * period + taps.len();
    let mut samples = vec![0.0; len];
    for r in 0..replicas {
        // replicas never overlap since 2Q < M
        samples[r * period..r * period + taps.len()].copy_from_slice(taps);
    }
    Ok(PulseTrain {
        proto: proto.clone(),
        n: params.n,
        period,
        first_replica,
        samples,
    })
}

impl PulseTrain {
    pub fn proto(&self) -> &ProtoPulse {
        &self.proto
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_cp(&self) -> bool {
        self.first_replica < 0
    }

    /// Samples per period `T`.
    pub fn period(&self) -> usize {
        self.period
    }

    pub fn dt(&self) -> f64 {
        self.proto.dt()
    }

    /// Replica indices `ṅ` present in the train.
    pub fn replicas(&self) -> std::ops::Range<i64> {
        self.first_replica..self.n as i64
    }

    /// Sample index of `samples()[0]`.
    pub fn start(&self) -> i64 {
        self.first_replica * self.period as i64 - self.proto.half_len() as i64
    }

    /// One past the last sample index.
    pub fn end(&self) -> i64 {
        self.start() + self.samples.len() as i64
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// `u(i dt)`, zero outside the support.
    #[inline]
    pub fn value(&self, i: i64) -> f64 {
        let k = i - self.start();
        if k < 0 || k as usize >= self.samples.len() {
            0.0
        } else {
            self.samples[k as usize]
        }
    }

    /// `Σ u² dt`: 1 for `u`, `(N+1)/N` for `u_cp`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum::<f64>() * self.dt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::srrc::design_srrc;

    #[test]
    fn single_replica_is_the_prototype() {
        let p = GridParams::new(16, 1, 15e3, 4, 4, 0).unwrap();
        let a = design_srrc(&p, 0.25).unwrap();
        let u = build_train(&a, &p, false).unwrap();
        assert_eq!(u.samples(), a.taps());
        assert!((u.energy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn replica_peaks_one_period_apart() {
        let p = GridParams::new(8, 4, 15e3, 2, 4, 0).unwrap();
        let a = design_srrc(&p, 0.25).unwrap();
        let u = build_train(&a, &p, false).unwrap();
        // local maxima oracle on the sampled train
        let s = u.samples();
        let peaks: Vec<i64> = (1..s.len() - 1)
            .filter(|&i| s[i] > s[i - 1] && s[i] >= s[i + 1] && s[i] > 0.5 * a.tap(0))
            .map(|i| i as i64 + u.start())
            .collect();
        assert_eq!(peaks, vec![0, 32, 64, 96]);
    }

    #[test]
    fn full_size_train_energy_and_cp_agreement() {
        let p = GridParams::new(512, 64, 15e3, 16, 8, 24).unwrap();
        let a = design_srrc(&p, 0.25).unwrap();
        let u = build_train(&a, &p, false).unwrap();
        let ucp = build_train(&a, &p, true).unwrap();
        assert!((u.energy() - 1.0).abs() < 1e-10);
        assert!((ucp.energy() - 65.0 / 64.0).abs() < 1e-10);
        for i in u.start() + 1..u.end() - 1 {
            assert_eq!(u.value(i), ucp.value(i));
        }
        assert_eq!(ucp.start(), -(512 * 8) - 16 * 8);
    }

    #[test]
    fn rejects_mismatched_prototype() {
        let p = GridParams::new(16, 4, 15e3, 2, 4, 0).unwrap();
        let a = design_srrc(&p, 0.25).unwrap();
        let other = GridParams::new(16, 8, 15e3, 2, 4, 0).unwrap();
        assert!(build_train(&a, &other, false).is_err());
    }
}
