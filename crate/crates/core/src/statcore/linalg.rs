//! Dense least squares via Householder QR.

use super::{Result, StatError};

/// Relative size of a diagonal `R` entry below which its column is treated
/// as linearly dependent on the preceding ones.
const RANK_TOL: f64 = 1e-9;

/// Row-major design matrix.
#[derive(Debug, Clone)]
pub struct Design {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Design {
    pub fn with_capacity(cols: usize, rows: usize) -> Self {
        Self { rows: 0, cols, data: Vec::with_capacity(rows * cols) }
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.cols, "row width");
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }
}

#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coef: Vec<f64>,
    pub residuals: Vec<f64>,
    pub ssr: f64,
    /// Diagonal of `(X'X)^-1`.
    pub cov_unscaled_diag: Vec<f64>,
}

impl LeastSquares {
    /// Residual degrees of freedom.
    pub fn dof(&self) -> usize {
        self.residuals.len() - self.coef.len()
    }

    /// Classical standard error of coefficient `j`.
    pub fn std_err(&self, j: usize) -> f64 {
        let s2 = self.ssr / self.dof() as f64;
        (s2 * self.cov_unscaled_diag[j]).sqrt()
    }
}

/// Solves `min ||X b - y||`. Fails on fewer rows than columns or when a
/// column is (numerically) a combination of earlier ones.
pub fn lstsq(x: &Design, y: &[f64]) -> Result<LeastSquares> {
    let (n, k) = (x.rows(), x.cols());
    assert_eq!(n, y.len(), "design rows vs response length");
    if n < k {
        return Err(StatError::TooShort { need: k, got: n });
    }
    // Column-major working copy.
    let mut a: Vec<Vec<f64>> = (0..k).map(|c| (0..n).map(|r| x.get(r, c)).collect()).collect();
    let col_norms: Vec<f64> = a.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    let mut qty = y.to_vec();
    let mut diag = vec![0.0; k];

    for j in 0..k {
        let norm = a[j][j..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if col_norms[j] == 0.0 || norm <= RANK_TOL * col_norms[j] {
            return Err(StatError::RankDeficient);
        }
        let alpha = if a[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        diag[j] = alpha;
        if vnorm2 > 0.0 {
            let reflect = |col: &mut [f64]| {
                let dot: f64 = v.iter().zip(col.iter()).map(|(p, q)| p * q).sum();
                let f = 2.0 * dot / vnorm2;
                for (c, vi) in col.iter_mut().zip(&v) {
                    *c -= f * vi;
                }
            };
            for col in a.iter_mut().skip(j + 1) {
                reflect(&mut col[j..]);
            }
            reflect(&mut qty[j..]);
        }
    }

    // R is upper triangular with R[i][j] = a[j][i] for i < j and diag on the diagonal.
    let r = |i: usize, j: usize| if i == j { diag[i] } else { a[j][i] };
    let mut coef = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = ((i + 1)..k).map(|j| r(i, j) * coef[j]).sum();
        coef[i] = (qty[i] - s) / r(i, i);
    }

    // R^-1, upper triangular, column by column.
    let mut rinv = vec![vec![0.0; k]; k];
    for c in 0..k {
        rinv[c][c] = 1.0 / r(c, c);
        for i in (0..c).rev() {
            let s: f64 = ((i + 1)..=c).map(|j| r(i, j) * rinv[j][c]).sum();
            rinv[i][c] = -s / r(i, i);
        }
    }
    let cov_unscaled_diag = (0..k).map(|i| (i..k).map(|c| rinv[i][c] * rinv[i][c]).sum()).collect();

    let residuals: Vec<f64> = (0..n).map(|row| y[row] - (0..k).map(|c| x.get(row, c) * coef[c]).sum::<f64>()).collect();
    let ssr = residuals.iter().map(|e| e * e).sum();
    Ok(LeastSquares { coef, residuals, ssr, cov_unscaled_diag })
}
