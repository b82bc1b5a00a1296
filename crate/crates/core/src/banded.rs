//! Symmetric banded matrices: Cholesky solves for the implicit time stepper
//! and LDLᵀ inertia counts for eigenvalue counting.

use crate::error::{Error, Result};

/// Lower band of a symmetric matrix: entry `(i, j)` with `i - bw <= j <= i`.
#[derive(Debug, Clone)]
pub struct SymmetricBand {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymmetricBand {
    pub fn zeros(n: usize, bw: usize) -> Self {
        let bw = bw.min(n.saturating_sub(1));
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (i - j)
    }

    /// Reads entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Adds to entry `(i, j)` (and implicitly `(j, i)`).
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.bw, "entry ({i}, {j}) outside the band");
        let k = self.idx(i, j);
        self.data[k] += value;
    }

    pub fn add_diagonal(&mut self, diag: &[f64]) {
        for (i, d) in diag.iter().enumerate() {
            self.add(i, i, *d);
        }
    }

    /// Cholesky factorization; fails if the matrix is not positive definite.
    pub fn cholesky(&self) -> Result<BandCholesky> {
        let (n, bw) = (self.n, self.bw);
        let mut l = self.data.clone();
        let w = bw + 1;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for k in lo..=i {
                let mut sum = l[i * w + (i - k)];
                let mlo = lo.max(k.saturating_sub(bw));
                for m in mlo..k {
                    sum -= l[i * w + (i - m)] * l[k * w + (k - m)];
                }
                if k == i {
                    if sum <= 0.0 || !sum.is_finite() {
                        return Err(Error::Numerical(format!(
                            "matrix not positive definite (pivot {sum:.3e} at row {i})"
                        )));
                    }
                    l[i * w] = sum.sqrt();
                } else {
                    l[i * w + (i - k)] = sum / l[k * w];
                }
            }
        }
        Ok(BandCholesky { n, bw, l })
    }

    /// Inertia `(negative, zero-or-positive)` via an unpivoted LDLᵀ
    /// factorization (Sylvester's law of inertia).
    ///
    /// An exactly vanishing pivot is replaced by a tiny positive value, so
    /// singular leading minors count toward the non-negative side.
    pub fn negative_count(&self) -> usize {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        let scale = (0..n)
            .map(|i| self.data[i * w].abs())
            .fold(0.0_f64, f64::max)
            .max(f64::MIN_POSITIVE);
        let mut l = self.data.clone();
        let mut d = vec![0.0; n];
        let mut negatives = 0;
        let mut ld = vec![0.0; w];
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            // l[i][k] holds the raw entry until overwritten with the unit factor.
            for k in lo..i {
                let mut sum = l[i * w + (i - k)];
                let mlo = lo.max(k.saturating_sub(bw));
                for m in mlo..k {
                    sum -= ld[m - lo] * l[k * w + (k - m)];
                }
                // ld holds L[i][m] * D[m] for m < k
                ld[k - lo] = sum;
                l[i * w + (i - k)] = sum / d[k];
            }
            let mut di = l[i * w];
            for m in lo..i {
                di -= ld[m - lo] * l[i * w + (i - m)];
            }
            if di == 0.0 {
                di = f64::EPSILON * scale;
            }
            if di < 0.0 {
                negatives += 1;
            }
            d[i] = di;
        }
        negatives
    }
}

#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        assert_eq!(b.len(), n);
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = b[i];
            for m in lo..i {
                s -= self.l[i * w + (i - m)] * b[m];
            }
            b[i] = s / self.l[i * w];
        }
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let mut s = b[i];
            for m in (i + 1)..=hi {
                s -= self.l[m * w + (m - i)] * b[m];
            }
            b[i] = s / self.l[i * w];
        }
    }

    /// `log det A`
    pub fn log_det(&self) -> f64 {
        let w = self.bw + 1;
        (0..self.n).map(|i| 2.0 * self.l[i * w].ln()).sum()
    }
}
