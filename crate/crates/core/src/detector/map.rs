//! Exhaustive maximum-likelihood search for tiny instances.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::ddmatrix::DdChannelMatrix;
use crate::detector::DetectionResult;
use crate::error::{Error, Result};
use crate::qam::QamConstellation;

/// Largest number of candidate vectors searched.
pub const MAP_LIMIT: u64 = 1 << 20;

/// Minimizes `‖y - Hx‖²` over all `|Q|^{MN}` candidates. Hard decisions are
/// the joint minimizer; posteriors are the exact symbol marginals under
/// `CN(0, noise_var)` noise (one-hot when `noise_var` is zero).
pub fn map_bruteforce(
    y: &[Complex64],
    hm: &DdChannelMatrix,
    qam: &QamConstellation,
    noise_var: f64,
) -> Result<DetectionResult> {
    let dim = hm.dim();
    if y.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: y.len(),
        });
    }
    let q = qam.order();
    let total = (q as u64)
        .checked_pow(dim as u32)
        .filter(|&t| t <= MAP_LIMIT)
        .ok_or_else(|| {
            Error::TooLarge(format!(
                "{q}^{dim} candidates exceed the exhaustive-search limit {MAP_LIMIT}"
            ))
        })?;
    let h: DMatrix<Complex64> = hm.to_dense()?;
    let pts = qam.points();

    // odometer over digit vectors; the residual is updated per changed digit
    let mut digits = vec![0usize; dim];
    let mut resid: Vec<Complex64> = y.to_vec();
    for c in 0..dim {
        for r in 0..dim {
            resid[r] -= h[(r, c)] * pts[0];
        }
    }
    let mut metrics = Vec::with_capacity(total as usize);
    for cand in 0..total {
        metrics.push(resid.iter().map(|v| v.norm_sqr()).sum::<f64>());
        if cand + 1 == total {
            break;
        }
        let mut pos = 0;
        loop {
            let old = digits[pos];
            let new = (old + 1) % q;
            digits[pos] = new;
            let delta = pts[new] - pts[old];
            for r in 0..dim {
                resid[r] -= h[(r, pos)] * delta;
            }
            if new != 0 {
                break;
            }
            pos += 1;
        }
    }

    let best = metrics
        .iter()
        .enumerate()
        .fold(0usize, |b, (i, &m)| if m < metrics[b] { i } else { b });
    let digit_of = |cand: usize, pos: usize| (cand / q.pow(pos as u32)) % q;
    let indices: Vec<usize> = (0..dim).map(|p| digit_of(best, p)).collect();

    let mut post = vec![0.0; dim * q];
    if noise_var > 0.0 {
        let dmin = metrics[best];
        for (cand, &m) in metrics.iter().enumerate() {
            let w = (-(m - dmin) / noise_var).exp();
            if w == 0.0 {
                continue;
            }
            for p in 0..dim {
                post[p * q + digit_of(cand, p)] += w;
            }
        }
        for row in post.chunks_mut(q) {
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= s);
        }
    } else {
        for (p, &i) in indices.iter().enumerate() {
            post[p * q + i] = 1.0;
        }
    }
    Ok(DetectionResult::with_indices(indices, post, qam, 1, true))
}
