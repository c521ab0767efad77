//! Small numeric helpers shared by the modem, pulse and matrix code.

use std::f64::consts::PI;

use num_complex::Complex64;

/// `exp(j 2 pi num / den)` with the integer ratio reduced before the
/// floating-point multiply, so large phase indices stay exact.
pub fn cis_ratio(num: i64, den: u64) -> Complex64 {
    let r = num.rem_euclid(den as i64) as f64;
    Complex64::from_polar(1.0, 2.0 * PI * r / den as f64)
}

/// Table of `exp(j 2 pi k / len)` for `k` in `0..len`.
#[derive(Debug, Clone)]
pub struct Twiddles {
    table: Vec<Complex64>,
}

impl Twiddles {
    pub fn new(len: usize) -> Self {
        let table = (0..len).map(|k| cis_ratio(k as i64, len as u64)).collect();
        Self { table }
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// `exp(j 2 pi k / len)` for any integer `k`.
    #[inline]
    pub fn at(&self, k: i64) -> Complex64 {
        self.table[k.rem_euclid(self.table.len() as i64) as usize]
    }
}

/// Sum of squared magnitudes.
pub fn energy(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

/// `max_i |a_i - b_i|`; panics on length mismatch.
pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
