//! Symmetric banded matrices and an `LDLᵀ` factorization without pivoting.

use crate::error::{Error, Result};

/// Symmetric matrix stored by its lower band, row-major:
/// `data[i * (bw + 1) + t] = A[i, i - bw + t]`, so `t = bw` is the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBand {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + self.bw + j - i
    }

    /// `A[i, j]` for `j ≤ i`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    /// Sets `A[i, j] = A[j, i]` for `j ≤ i` within the band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.data[i * (self.bw + 1) + self.bw]
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let w = self.bw + 1;
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let row = &self.data[i * w..(i + 1) * w];
            let j0 = i.saturating_sub(self.bw);
            let mut acc = row[self.bw] * x[i];
            for j in j0..i {
                let a = row[self.bw + j - i];
                if a != 0.0 {
                    acc += a * x[j];
                    y[j] += a * x[i];
                }
            }
            y[i] += acc;
        }
    }

    /// Gershgorin bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        let mut sums = vec![0.0; self.n];
        for i in 0..self.n {
            for j in i.saturating_sub(self.bw)..=i {
                let a = self.get(i, j).abs();
                sums[i] += a;
                if j != i {
                    sums[j] += a;
                }
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// `LDLᵀ` factorization of `A - shift I`.
    pub fn factor_shifted(&self, shift: f64) -> Result<BandLdl> {
        BandLdl::new(self, shift)
    }
}

/// `A - σI = L D Lᵀ` with `L` unit lower banded.
#[derive(Debug, Clone)]
pub struct BandLdl {
    n: usize,
    bw: usize,
    /// Strictly lower part of `L`, same layout as [`SymBand`] (diagonal slot unused).
    l: Vec<f64>,
    d: Vec<f64>,
    shift: f64,
}

/// Pivots smaller than this multiple of the matrix norm abort the factorization.
const PIVOT_FLOOR: f64 = 1e-13;

impl BandLdl {
    fn new(a: &SymBand, shift: f64) -> Result<Self> {
        let (n, bw) = (a.n, a.bw);
        let w = bw + 1;
        let scale = a.norm_bound().max(shift.abs()).max(f64::MIN_POSITIVE);
        let mut l = vec![0.0; n * w];
        let mut d = vec![0.0; n];
        // s[t] holds L[i, k] D[k] for the current row
        let mut s = vec![0.0; w];
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            let off_i = i * w + bw - i;
            s.iter_mut().for_each(|v| *v = 0.0);
            for k in j0..i {
                let off_k = k * w + bw - k;
                let m_lo = j0.max(k.saturating_sub(bw));
                let mut acc = a.data[off_i + k];
                for m in m_lo..k {
                    acc -= s[bw + m - i] * l[off_k + m];
                }
                s[bw + k - i] = acc;
                l[off_i + k] = acc / d[k];
            }
            let mut di = a.data[off_i + i] - shift;
            for k in j0..i {
                di -= s[bw + k - i] * l[off_i + k];
            }
            if !di.is_finite() || di.abs() < PIVOT_FLOOR * scale {
                return Err(Error::Factorization {
                    shift,
                    reason: format!("pivot {di:e} at row {i}"),
                });
            }
            d[i] = di;
        }
        Ok(Self { n, bw, l, d, shift })
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Number of negative pivots, which equals the number of eigenvalues of
    /// `A` below the shift.
    pub fn negative_count(&self) -> usize {
        self.d.iter().filter(|&&v| v < 0.0).count()
    }

    /// Solves `(A - σI) x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            let off = i * w + bw - i;
            let mut acc = x[i];
            for j in j0..i {
                acc -= self.l[off + j] * x[j];
            }
            x[i] = acc;
        }
        for (v, d) in x.iter_mut().zip(&self.d) {
            *v /= d;
        }
        for i in (0..n).rev() {
            let j0 = i.saturating_sub(bw);
            let off = i * w + bw - i;
            let xi = x[i];
            for j in j0..i {
                x[j] -= self.l[off + j] * xi;
            }
        }
    }
}
