//! DD-domain input-output operator `y = H x`.
//!
//! With `x_m = X(m, :)` the received block is
//! `y_m = Σ_l H_l^m x̃_{m-l}`, where `x̃_{m-l} = x_{m-l}` for `m ≥ l` and
//! `D x_{m-l+M}` otherwise (`D = diag(exp(-j2π n/N))`, from the cyclic
//! prefix). Each block is the circulant
//! `H_l^m = Σ_k̂ g(k̂, l) exp(j2π k̂ (m-l)/(MN)) C^k̂`, `(C^k̂ v)[n] = v[[n-k̂]_N]`.
//!
//! Blocks are kept as per-`m` tap lists `(l, k̂ mod N, coefficient)`, so a
//! matvec costs `O(MN P)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::DdChannel;
use crate::dsp::cis_ratio;
use crate::error::{Error, Result};
use crate::params::GridParams;

/// Largest `MN` for which [`DdChannelMatrix::to_dense`] is allowed.
pub const DENSE_LIMIT: usize = 4096;

/// One cyclic-shift term of a block `H_l^m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockTap {
    pub l: usize,
    /// Shift power `k̂ mod N`.
    pub shift: usize,
    pub coef: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DdChannelMatrix {
    m: usize,
    n: usize,
    l_span: usize,
    k_max: usize,
    /// `blocks[m]`: taps of `H_l^m` for every `l`, sorted by `(l, shift)`.
    blocks: Vec<Vec<BlockTap>>,
    d: Vec<Complex64>,
}

/// `exp(j2π k̂ (m - l)/(MN))`.
pub fn phase_term(m: i64, l: i64, k_hat: i64, params: &GridParams) -> Complex64 {
    grid_phase(m, l, k_hat, params.grid_len())
}

fn grid_phase(m: i64, l: i64, k_hat: i64, mn: usize) -> Complex64 {
    cis_ratio(k_hat * (m - l), mn as u64)
}

/// Builds `H` for an on-grid channel.
pub fn build(ch: &DdChannel, params: &GridParams) -> Result<DdChannelMatrix> {
    params.validate()?;
    build_for_grid(ch, params.m, params.n)
}

/// Builds `H` from the grid size alone. `H` does not depend on the pulse, so
/// this also serves grids too small to carry one (e.g. `M = N = 2`).
pub fn build_for_grid(ch: &DdChannel, m_len: usize, n_len: usize) -> Result<DdChannelMatrix> {
    if m_len == 0 || n_len == 0 {
        return Err(Error::InvalidParams("M and N must be positive".into()));
    }
    if ch.max_delay() >= m_len {
        return Err(Error::OffGrid(format!(
            "delay index {} is not below M={m_len}",
            ch.max_delay()
        )));
    }
    let mn = m_len * n_len;
    let blocks = (0..m_len)
        .map(|m| {
            let mut taps: Vec<BlockTap> = Vec::with_capacity(ch.num_paths());
            for p in ch.paths() {
                let shift = p.k.rem_euclid(n_len as i64) as usize;
                let coef = p.h * grid_phase(m as i64, p.l as i64, p.k, mn);
                // aliasing Dopplers (2K+1 > N) share a shift power
                match taps.iter_mut().find(|t| t.l == p.l && t.shift == shift) {
                    Some(t) => t.coef += coef,
                    None => taps.push(BlockTap {
                        l: p.l,
                        shift,
                        coef,
                    }),
                }
            }
            taps.sort_by_key(|t| (t.l, t.shift));
            taps
        })
        .collect();
    let d = (0..n_len)
        .map(|n| cis_ratio(-(n as i64), n_len as u64))
        .collect();
    Ok(DdChannelMatrix {
        m: m_len,
        n: n_len,
        l_span: ch.l_span(),
        k_max: ch.k_max(),
        blocks,
        d,
    })
}

/// Compressed sparse rows of `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRows {
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<Complex64>,
}

impl SparseRows {
    pub fn rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn row(&self, r: usize) -> (&[usize], &[Complex64]) {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.cols[a..b], &self.vals[a..b])
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.rows())
            .map(|r| {
                let (c, v) = self.row(r);
                c.iter().zip(v).map(|(&c, v)| v * x[c]).sum()
            })
            .collect()
    }
}

impl DdChannelMatrix {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m * self.n
    }

    pub fn l_span(&self) -> usize {
        self.l_span
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Taps of every `H_l^m` for fixed `m`.
    pub fn block_taps(&self, m: usize) -> &[BlockTap] {
        &self.blocks[m]
    }

    /// Diagonal of `D`.
    pub fn d_diag(&self) -> &[Complex64] {
        &self.d
    }

    /// Dense `N × N` block `H_l^m`, without the `D` factor.
    pub fn block_dense(&self, m: usize, l: usize) -> DMatrix<Complex64> {
        let n = self.n;
        let mut b = DMatrix::zeros(n, n);
        for t in self.blocks[m].iter().filter(|t| t.l == l) {
            for row in 0..n {
                b[(row, (row + n - t.shift) % n)] += t.coef;
            }
        }
        b
    }

    /// Column index and coefficient feeding output `(m, n)` through `t`.
    #[inline]
    fn source(&self, m: usize, n: usize, t: &BlockTap) -> (usize, Complex64) {
        let src_n = (n + self.n - t.shift) % self.n;
        if m >= t.l {
            ((m - t.l) * self.n + src_n, t.coef)
        } else {
            ((m + self.m - t.l) * self.n + src_n, t.coef * self.d[src_n])
        }
    }

    /// `H x` in `O(MN P)`.
    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim()];
        for m in 0..self.m {
            for t in &self.blocks[m] {
                for n in 0..self.n {
                    let (c, v) = self.source(m, n, t);
                    y[m * self.n + n] += v * x[c];
                }
            }
        }
        Ok(y)
    }

    /// Row-sparse view with at most `P` entries per row.
    pub fn sparse_rows(&self) -> SparseRows {
        let mut row_ptr = Vec::with_capacity(self.dim() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for m in 0..self.m {
            for n in 0..self.n {
                let start = cols.len();
                for t in &self.blocks[m] {
                    let (c, v) = self.source(m, n, t);
                    match cols[start..].iter().position(|&x| x == c) {
                        Some(k) => vals[start + k] += v,
                        None => {
                            cols.push(c);
                            vals.push(v);
                        }
                    }
                }
                row_ptr.push(cols.len());
            }
        }
        SparseRows {
            row_ptr,
            cols,
            vals,
        }
    }

    /// Dense `MN × MN` matrix; refused above [`DENSE_LIMIT`].
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        let dim = self.dim();
        if dim > DENSE_LIMIT {
            return Err(Error::TooLarge(format!(
                "dense export needs MN ≤ {DENSE_LIMIT}, got {dim}"
            )));
        }
        let mut h = DMatrix::zeros(dim, dim);
        for m in 0..self.m {
            for t in &self.blocks[m] {
                for n in 0..self.n {
                    let (c, v) = self.source(m, n, t);
                    h[(m * self.n + n, c)] += v;
                }
            }
        }
        Ok(h)
    }
}
