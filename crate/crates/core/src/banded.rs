//! Symmetric positive-definite banded systems (lower-band storage,
//! Cholesky factorization).

use crate::error::{CalError, Result};

#[derive(Debug, Clone)]
pub struct BandedSpd {
    n: usize,
    bw: usize,
    /// Row i holds entries (i, i-bw..=i); `data[i*(bw+1) + (bw - (i-j))]`.
    data: Vec<f64>,
}

impl BandedSpd {
    pub fn zeros(n: usize, half_bandwidth: usize) -> Self {
        Self {
            n,
            bw: half_bandwidth,
            data: vec![0.0; n * (half_bandwidth + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (self.bw - (i - j))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    /// Adds `v` to the symmetric pair `(i, j)`/`(j, i)` (once on the
    /// diagonal). Panics outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.bw, "entry ({i}, {j}) outside band {}", self.bw);
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..=i {
                let a = self.data[self.slot(i, j)];
                y[i] += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    /// Solves `A x = b` by banded Cholesky `A = LLᵀ`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(b.len(), self.n);
        let bw = self.bw;
        let mut l = self.data.clone();
        let idx = |i: usize, j: usize| i * (bw + 1) + (bw - (i - j));
        for i in 0..self.n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let klo = lo.max(j.saturating_sub(bw));
                let mut sum = l[idx(i, j)];
                for k in klo..j {
                    sum -= l[idx(i, k)] * l[idx(j, k)];
                }
                if i == j {
                    if !(sum > 0.0) || !sum.is_finite() {
                        return Err(CalError::SingularSystem { row: i, pivot: sum });
                    }
                    l[idx(i, i)] = sum.sqrt();
                } else {
                    l[idx(i, j)] = sum / l[idx(j, j)];
                }
            }
        }
        let mut y = b.to_vec();
        for i in 0..self.n {
            let lo = i.saturating_sub(bw);
            let mut s = y[i];
            for k in lo..i {
                s -= l[idx(i, k)] * y[k];
            }
            y[i] = s / l[idx(i, i)];
        }
        for i in (0..self.n).rev() {
            let hi = (i + bw).min(self.n - 1);
            let mut s = y[i];
            for k in (i + 1)..=hi {
                s -= l[idx(k, i)] * y[k];
            }
            y[i] = s / l[idx(i, i)];
        }
        Ok(y)
    }
}
