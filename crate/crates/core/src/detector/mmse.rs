//! Linear MMSE reference detector (dense, small instances only).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::ddmatrix::DdChannelMatrix;
use crate::detector::{softmax, DetectionResult};
use crate::error::{Error, Result};
use crate::qam::QamConstellation;

/// `x̂ = (HᴴH + σ²I)⁻¹ Hᴴ y`, then per-entry decisions on the unbiased
/// estimate `x̂_i / μ_i` with `μ_i = [(HᴴH + σ²I)⁻¹ HᴴH]_ii`.
///
/// Posteriors treat `x̂_i = μ_i x_i + w_i` with `var(w_i) = μ_i (1 - μ_i)`,
/// which holds for unit-energy symbols.
pub fn mmse_detect(
    y: &[Complex64],
    hm: &DdChannelMatrix,
    qam: &QamConstellation,
    noise_var: f64,
) -> Result<DetectionResult> {
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
    let h = hm.to_dense()?;
    let dim = h.ncols();
    let hh = h.adjoint();
    let gram = &hh * &h;
    let reg = &gram + DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(noise_var, 0.0);
    let chol = reg
        .cholesky()
        .ok_or_else(|| Error::Singular("HᴴH + σ²I is not positive definite".into()))?;
    let xhat = chol.solve(&(&hh * DVector::from_column_slice(y)));
    let bias = chol.solve(&gram);

    let q = qam.order();
    let mut post = vec![0.0; dim * q];
    let mut indices = Vec::with_capacity(dim);
    for i in 0..dim {
        let mu = bias[(i, i)].re;
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::Singular(format!("no signal reaches symbol {i}")));
        }
        let est = xhat[i] / mu;
        let idx = qam.slice(est);
        indices.push(idx);
        let var = mu * (1.0 - mu);
        let w = &mut post[i * q..(i + 1) * q];
        if var > 1e-300 {
            for (o, x) in w.iter_mut().zip(qam.points()) {
                *o = -(xhat[i] - x * mu).norm_sqr() / var;
            }
            softmax(w);
        } else {
            w[idx] = 1.0;
        }
    }
    Ok(DetectionResult::with_indices(indices, post, qam, 1, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{random_grid_paths, DdChannel};
    use crate::ddmatrix::build;
    use crate::params::GridParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_is_slicing_and_zf_limit_is_exact() {
        let p = GridParams::new(4, 2, 15e3, 1, 2, 3).unwrap();
        let qam = QamConstellation::new(16).unwrap();
        let h = build(&DdChannel::identity(), &p).unwrap();
        let y: Vec<Complex64> = (0..8).map(|i| qam.point(i * 2) * 0.9).collect();
        let r = mmse_detect(&y, &h, &qam, 0.1).unwrap();
        let want: Vec<usize> = y.iter().map(|v| qam.slice(*v)).collect();
        assert_eq!(r.indices, want);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ch = random_grid_paths(3, 3, 1, &mut rng).unwrap();
        let h = build(&ch, &p).unwrap();
        let idx: Vec<usize> = (0..8).map(|_| rng.gen_range(0..16)).collect();
        let x: Vec<Complex64> = idx.iter().map(|&i| qam.point(i)).collect();
        let r = mmse_detect(&h.matvec(&x).unwrap(), &h, &qam, 1e-12).unwrap();
        assert_eq!(r.indices, idx);
    }
}
