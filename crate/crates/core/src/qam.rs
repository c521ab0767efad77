//! Square Gray-mapped QAM constellations with unit average energy.
//!
//! Point index `i` carries the bit label `i` (MSB first). The upper half of
//! the label selects the in-phase level and the lower half the quadrature
//! level, each through a reflected Gray code.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QamConstellation {
    order: usize,
    bits_per_symbol: usize,
    points: Vec<Complex64>,
}

fn gray_to_binary(mut g: usize) -> usize {
    let mut b = 0;
    while g != 0 {
        b ^= g;
        g >>= 1;
    }
    b
}

impl QamConstellation {
    /// Builds a square QAM of the given order (4, 16, 64, ...).
    pub fn new(order: usize) -> Result<Self> {
        if order < 4 || !order.is_power_of_two() || !order.trailing_zeros().is_multiple_of(2) {
            return Err(Error::InvalidParams(format!(
                "QAM order must be a power of 4 and at least 4, got {order}"
            )));
        }
        let bits = order.trailing_zeros() as usize;
        let half = bits / 2;
        let side = 1usize << half;
        let mask = side - 1;
        let scale = (2.0 * (order as f64 - 1.0) / 3.0).sqrt();
        let level = |g: usize| (2.0 * gray_to_binary(g) as f64 - (side as f64 - 1.0)) / scale;
        let points = (0..order)
            .map(|i| Complex64::new(level(i >> half), level(i & mask)))
            .collect();
        Ok(Self {
            order,
            bits_per_symbol: bits,
            points,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    /// Bit `b` (0 = MSB) of the label of point `index`.
    pub fn bit(&self, index: usize, b: usize) -> u8 {
        ((index >> (self.bits_per_symbol - 1 - b)) & 1) as u8
    }

    /// Maps a bit stream (MSB first per symbol) to symbol indices.
    pub fn indices_from_bits(&self, bits: &[u8]) -> Result<Vec<usize>> {
        if !bits.len().is_multiple_of(self.bits_per_symbol) {
            return Err(Error::DimensionMismatch {
                expected: bits.len().div_ceil(self.bits_per_symbol) * self.bits_per_symbol,
                got: bits.len(),
            });
        }
        Ok(bits
            .chunks(self.bits_per_symbol)
            .map(|c| {
                c.iter()
                    .fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize)
            })
            .collect())
    }

    /// Number of differing bits between the labels of two points.
    pub fn bit_errors(&self, a: usize, b: usize) -> u32 {
        (a ^ b).count_ones()
    }

    /// Nearest point by Euclidean distance. Ties resolve to the lowest index.
    pub fn slice(&self, y: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (y - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}
