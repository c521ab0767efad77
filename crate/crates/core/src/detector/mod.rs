//! Symbol detection for `y = H x + z` in the DD domain.

pub mod map;
pub mod mmse;
pub mod mp;

use num_complex::Complex64;

use crate::qam::QamConstellation;

pub use map::{map_bruteforce, MAP_LIMIT};
pub use mmse::mmse_detect;
pub use mp::{mp_detect, MpConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    /// Decided constellation indices, row-major over `(m, n)`.
    pub indices: Vec<usize>,
    pub hard_symbols: Vec<Complex64>,
    /// `indices.len() × order` probabilities, row-major.
    pub posteriors: Vec<f64>,
    pub order: usize,
    pub iterations: usize,
    pub converged: bool,
}

impl DetectionResult {
    pub(crate) fn from_posteriors(
        posteriors: Vec<f64>,
        qam: &QamConstellation,
        iterations: usize,
        converged: bool,
    ) -> Self {
        let order = qam.order();
        let indices: Vec<usize> = posteriors.chunks(order).map(argmax_first).collect();
        Self::with_indices(indices, posteriors, qam, iterations, converged)
    }

    pub(crate) fn with_indices(
        indices: Vec<usize>,
        posteriors: Vec<f64>,
        qam: &QamConstellation,
        iterations: usize,
        converged: bool,
    ) -> Self {
        Self {
            hard_symbols: indices.iter().map(|&i| qam.point(i)).collect(),
            indices,
            posteriors,
            order: qam.order(),
            iterations,
            converged,
        }
    }

    /// Probability vector of symbol `i`.
    pub fn posterior(&self, i: usize) -> &[f64] {
        &self.posteriors[i * self.order..(i + 1) * self.order]
    }

    /// Bit errors against transmitted indices.
    pub fn bit_errors(&self, sent: &[usize]) -> u64 {
        self.indices
            .iter()
            .zip(sent)
            .map(|(a, b)| (a ^ b).count_ones() as u64)
            .sum()
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub(crate) fn argmax_first(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

/// In-place softmax of log-weights.
pub(crate) fn softmax(logw: &mut [f64]) {
    let mx = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in logw.iter_mut() {
        *v = (*v - mx).exp();
        total += *v;
    }
    logw.iter_mut().for_each(|v| *v /= total);
}
