//! Cholesky factorization and solves for symmetric positive-definite
//! banded matrices, used to apply `M⁻¹` inside the iterative eigensolver.

use super::lanczos::LinearOp;
use super::BandedFockMatrix;

/// Lower-triangular Cholesky factor of a banded SPD matrix, stored as
/// dense diagonals: `l[d * n + j] = L(j + d, j)` for `d = 0..=bandwidth`.
pub struct BandedCholesky {
    n: usize,
    bandwidth: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    /// Returns `None` if the matrix is not positive definite.
    pub fn factor(matrix: &BandedFockMatrix) -> Option<Self> {
        Self::factor_shifted(matrix, 0.0)
    }

    /// Factors `M - shift·I`; `None` if that matrix is not positive definite.
    pub fn factor_shifted(matrix: &BandedFockMatrix, shift: f64) -> Option<Self> {
        let n = matrix.size();
        let w = matrix.band_offsets().max().unwrap_or(0);
        let mut l = vec![0.0f64; (w + 1) * n];
        for d in 0..=w {
            for j in 0..n.saturating_sub(d) {
                l[d * n + j] = matrix.entry(j + d, j);
                if d == 0 {
                    l[j] -= shift;
                }
            }
        }
        for j in 0..n {
            let start = j.saturating_sub(w);
            let mut s = l[j];
            for k in start..j {
                let v = l[(j - k) * n + k];
                s -= v * v;
            }
            if !(s > 0.0) || !s.is_finite() {
                return None;
            }
            let diag = s.sqrt();
            l[j] = diag;
            for d in 1..=w {
                let i = j + d;
                if i >= n {
                    break;
                }
                let kstart = start.max(i.saturating_sub(w));
                let mut s = l[d * n + j];
                for k in kstart..j {
                    s -= l[(i - k) * n + k] * l[(j - k) * n + k];
                }
                l[d * n + j] = s / diag;
            }
        }
        Some(Self { n, bandwidth: w, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `L Lᵀ x = b`.
    pub fn solve(&self, b: &[f64], x: &mut [f64]) {
        let n = self.n;
        let w = self.bandwidth;
        // forward: L y = b, written into x
        for i in 0..n {
            let mut s = b[i];
            for d in 1..=w.min(i) {
                s -= self.l[d * n + (i - d)] * x[i - d];
            }
            x[i] = s / self.l[i];
        }
        // backward: Lᵀ x = y, in place
        for j in (0..n).rev() {
            let mut s = x[j];
            for d in 1..=w {
                if j + d >= n {
                    break;
                }
                s -= self.l[d * n + j] * x[j + d];
            }
            x[j] = s / self.l[j];
        }
    }
}

/// `M⁻¹` as a linear operator backed by the Cholesky factor.
pub struct InverseOp<'a> {
    chol: &'a BandedCholesky,
}

impl<'a> InverseOp<'a> {
    pub fn new(chol: &'a BandedCholesky) -> Self {
        Self { chol }
    }
}

impl LinearOp for InverseOp<'_> {
    fn dim(&self) -> usize {
        self.chol.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.chol.solve(x, y);
    }
}
