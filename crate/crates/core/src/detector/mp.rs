//! Message passing over the sparse factor graph of `H` with a Gaussian
//! approximation of the interference at each observation node.
//!
//! Observation node `a` (one per row of `H`) and variable node `b` (one per
//! column) are joined when `H[a, b] ≠ 0`, so each observation has at most `P`
//! neighbours and one iteration costs `O(MN P |Q|)`. The schedule is
//! flooding: all observation messages, then all variable messages, with a
//! barrier in between. Both half-iterations are parallel over nodes and
//! write by index, so results do not depend on the thread count.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::ddmatrix::DdChannelMatrix;
use crate::detector::{softmax, DetectionResult};
use crate::error::{Error, Result};
use crate::qam::QamConstellation;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpConfig {
    pub max_iters: usize,
    /// Weight of the new message in `p = Δ p̃ + (1 - Δ) p_old`.
    pub damping: f64,
    pub convergence_eps: f64,
    pub early_stop: bool,
    /// Smallest noise variance used; smaller inputs are raised to it.
    pub noise_floor: f64,
}

impl Default for MpConfig {
    fn default() -> Self {
        Self {
            max_iters: 30,
            damping: 0.6,
            convergence_eps: 1e-6,
            early_stop: true,
            noise_floor: 1e-4,
        }
    }
}

impl MpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParams("max_iters must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if !(self.convergence_eps >= 0.0 && self.noise_floor > 0.0) {
            return Err(Error::InvalidParams(
                "convergence_eps must be non-negative and noise_floor positive".into(),
            ));
        }
        Ok(())
    }
}

/// Graph edges in observation-major order, plus the variable-major permutation.
struct Graph {
    obs_ptr: Vec<usize>,
    obs_of_edge: Vec<usize>,
    var_of_edge: Vec<usize>,
    h: Vec<Complex64>,
    /// Variable-major slot of each edge.
    slot_of_edge: Vec<usize>,
    var_ptr: Vec<usize>,
    edge_of_slot: Vec<usize>,
}

impl Graph {
    fn new(hm: &DdChannelMatrix) -> Self {
        let rows = hm.sparse_rows();
        let dim = rows.rows();
        let mut obs_of_edge = Vec::with_capacity(rows.cols.len());
        for a in 0..dim {
            obs_of_edge.extend(std::iter::repeat_n(
                a,
                rows.row_ptr[a + 1] - rows.row_ptr[a],
            ));
        }
        let mut var_ptr = vec![0usize; dim + 1];
        for &b in &rows.cols {
            var_ptr[b + 1] += 1;
        }
        for b in 0..dim {
            var_ptr[b + 1] += var_ptr[b];
        }
        let mut fill = var_ptr.clone();
        let mut slot_of_edge = vec![0; rows.cols.len()];
        let mut edge_of_slot = vec![0; rows.cols.len()];
        for (e, &b) in rows.cols.iter().enumerate() {
            slot_of_edge[e] = fill[b];
            edge_of_slot[fill[b]] = e;
            fill[b] += 1;
        }
        Self {
            obs_ptr: rows.row_ptr,
            obs_of_edge,
            var_of_edge: rows.cols,
            h: rows.vals,
            slot_of_edge,
            var_ptr,
            edge_of_slot,
        }
    }
}

pub fn mp_detect(
    y: &[Complex64],
    hm: &DdChannelMatrix,
    qam: &QamConstellation,
    noise_var: f64,
    cfg: &MpConfig,
) -> Result<DetectionResult> {
    cfg.validate()?;
    if y.len() != hm.dim() {
        return Err(Error::DimensionMismatch {
            expected: hm.dim(),
            got: y.len(),
        });
    }
    if noise_var.is_nan() || noise_var < 0.0 {
        return Err(Error::InvalidParams(format!(
            "noise variance must be non-negative, got {noise_var}"
        )));
    }
    let sigma2 = if noise_var < cfg.noise_floor {
        log::warn!(
            "noise variance {noise_var:e} below floor {:e}; using the floor",
            cfg.noise_floor
        );
        cfg.noise_floor
    } else {
        noise_var
    };

    let g = Graph::new(hm);
    let q = qam.order();
    let pts = qam.points();
    let dim = hm.dim();
    let slots = g.h.len();
    let mut msgs = vec![1.0 / q as f64; slots * q];
    let mut post = vec![1.0 / q as f64; dim * q];
    let mut ll = vec![0.0; slots * q];
    let mut iterations = 0;
    let mut converged = false;

    for _ in 0..cfg.max_iters {
        iterations += 1;
        // moments of the variable-to-observation messages
        let moments: Vec<(Complex64, f64)> = msgs
            .par_chunks(q)
            .map(|p| {
                let mut mean = Complex64::new(0.0, 0.0);
                let mut second = 0.0;
                for (w, x) in p.iter().zip(pts) {
                    mean += x * *w;
                    second += w * x.norm_sqr();
                }
                (mean, (second - mean.norm_sqr()).max(0.0))
            })
            .collect();

        // observation side: interference-plus-noise statistics per edge
        let totals: Vec<(Complex64, f64)> = (0..dim)
            .into_par_iter()
            .map(|a| {
                let mut mu = Complex64::new(0.0, 0.0);
                let mut var = sigma2;
                for e in g.obs_ptr[a]..g.obs_ptr[a + 1] {
                    let (m, v) = moments[g.slot_of_edge[e]];
                    mu += g.h[e] * m;
                    var += g.h[e].norm_sqr() * v;
                }
                (mu, var)
            })
            .collect();

        // per-slot log-likelihoods of each candidate symbol
        ll.par_chunks_mut(q).enumerate().for_each(|(s, out)| {
            let e = g.edge_of_slot[s];
            let a = g.obs_of_edge[e];
            let (m, v) = moments[s];
            let (tmu, tvar) = totals[a];
            let mu = tmu - g.h[e] * m;
            let var = (tvar - g.h[e].norm_sqr() * v).max(sigma2);
            let r = y[a] - mu;
            for (o, x) in out.iter_mut().zip(pts) {
                *o = -(r - g.h[e] * x).norm_sqr() / var;
            }
        });

        // variable side: full and extrinsic beliefs
        let full: Vec<f64> = (0..dim)
            .into_par_iter()
            .flat_map_iter(|b| {
                let mut acc = vec![0.0; q];
                for s in g.var_ptr[b]..g.var_ptr[b + 1] {
                    for (a, l) in acc.iter_mut().zip(&ll[s * q..(s + 1) * q]) {
                        *a += l;
                    }
                }
                acc
            })
            .collect();
        let var_of_slot = |s: usize| g.var_of_edge[g.edge_of_slot[s]];
        let damp = cfg.damping;
        msgs.par_chunks_mut(q).enumerate().for_each(|(s, p)| {
            let b = var_of_slot(s);
            let mut w: Vec<f64> = full[b * q..(b + 1) * q]
                .iter()
                .zip(&ll[s * q..(s + 1) * q])
                .map(|(f, l)| f - l)
                .collect();
            softmax(&mut w);
            for (old, new) in p.iter_mut().zip(&w) {
                *old = damp * new + (1.0 - damp) * *old;
            }
        });

        let mut new_post = full;
        new_post.par_chunks_mut(q).for_each(softmax);
        let change = new_post
            .iter()
            .zip(&post)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        post = new_post;
        if change < cfg.convergence_eps {
            converged = true;
            if cfg.early_stop {
                break;
            }
        }
    }
    Ok(DetectionResult::from_posteriors(
        post, qam, iterations, converged,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{complex_gaussian, random_grid_paths, DdChannel};
    use crate::ddmatrix::build;
    use crate::params::GridParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_channel_is_slicing() {
        let p = GridParams::new(8, 4, 15e3, 2, 2, 3).unwrap();
        let h = build(&DdChannel::identity(), &p).unwrap();
        let qam = QamConstellation::new(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y: Vec<Complex64> = (0..32)
            .map(|_| qam.point(rng.gen_range(0..16)) + complex_gaussian(&mut rng, 0.05))
            .collect();
        let r = mp_detect(&y, &h, &qam, 0.05, &MpConfig::default()).unwrap();
        let want: Vec<usize> = y.iter().map(|v| qam.slice(*v)).collect();
        assert_eq!(r.indices, want);
        for i in 0..32 {
            assert!((r.posterior(i).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn noiseless_recovery() {
        let p = GridParams::new(8, 4, 15e3, 2, 2, 3).unwrap();
        let qam = QamConstellation::new(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let ch = random_grid_paths(3, 3, 1, &mut rng).unwrap();
            let h = build(&ch, &p).unwrap();
            let idx: Vec<usize> = (0..32).map(|_| rng.gen_range(0..4)).collect();
            let x: Vec<Complex64> = idx.iter().map(|&i| qam.point(i)).collect();
            let y = h.matvec(&x).unwrap();
            let r = mp_detect(&y, &h, &qam, 0.0, &MpConfig::default()).unwrap();
            assert_eq!(r.indices, idx);
        }
    }

    #[test]
    fn config_validation() {
        let bad = MpConfig {
            damping: 0.0,
            ..MpConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = MpConfig {
            max_iters: 0,
            ..MpConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
