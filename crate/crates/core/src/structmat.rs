//! Structured matrix kernels.
//!
//! Lower-triangular Toeplitz matrices are stored by their first column,
//! circulant matrices by their eigenvalues in the DFT basis. Dense matrices
//! exist only for small-size validation and dumps.
//!
//! DFT convention: the unitary matrix `F_m` has entries
//! `omega^{-jk} / sqrt(m)` with `omega = exp(2 pi i / m)`. A real circulant
//! `A` with first column `c` factors as `A = F* diag(lambda) F` where
//! `lambda` is the unnormalized forward transform of `c`.

use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Lower-triangular Toeplitz matrix: entry `(j, k)` is `col[j - k]` for
/// `j >= k` and zero above the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangularToeplitz {
    col: Vec<f64>,
}

impl LowerTriangularToeplitz {
    pub fn new(col: Vec<f64>) -> Result<Self> {
        if col.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Self { col })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut col = vec![0.0; n];
        if let Some(first) = col.first_mut() {
            *first = 1.0;
        }
        Self::new(col)
    }

    /// The counting matrix: all ones on and below the diagonal.
    pub fn counting(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn n(&self) -> usize {
        self.col.len()
    }

    pub fn col(&self) -> &[f64] {
        &self.col
    }

    pub fn entry(&self, j: usize, k: usize) -> f64 {
        if j >= k {
            self.col[j - k]
        } else {
            0.0
        }
    }

    /// Product of two LTT matrices: the truncated convolution of the columns.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: other.n(),
            });
        }
        Self::new(truncated_convolution(&self.col, &other.col))
    }

    /// `y = T x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: x.len(),
            });
        }
        Ok(truncated_convolution(&self.col, x))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.n();
        let mut m = DenseMatrix::zeros(n, n);
        for j in 0..n {
            for k in 0..=j {
                m.set(j, k, self.col[j - k]);
            }
        }
        m
    }
}

/// `out[k] = sum_{i+j=k} a[i] b[j]`, truncated to `a.len()`.
fn truncated_convolution(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..n)
        .map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum())
        .collect()
}

/// Unitary DFT. Forward kernel `omega^{-jk}/sqrt(m)`, inverse kernel
/// `omega^{jk}/sqrt(m)`, `omega = exp(2 pi i/m)`.
pub fn dft(v: &[Complex64], inverse: bool) -> Result<Vec<Complex64>> {
    if v.is_empty() {
        return Err(Error::EmptyInput);
    }
    let m = v.len();
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(m)
    } else {
        planner.plan_fft_forward(m)
    };
    let mut buf = v.to_vec();
    fft.process(&mut buf);
    let scale = 1.0 / (m as f64).sqrt();
    buf.iter_mut().for_each(|z| *z *= scale);
    Ok(buf)
}

/// Direct `O(m^2)` evaluation of the same transform as [`dft`].
pub fn dft_direct(v: &[Complex64], inverse: bool) -> Result<Vec<Complex64>> {
    if v.is_empty() {
        return Err(Error::EmptyInput);
    }
    let m = v.len();
    let sign = if inverse { 1.0 } else { -1.0 };
    let scale = 1.0 / (m as f64).sqrt();
    Ok((0..m)
        .map(|j| {
            let acc: Complex64 = v
                .iter()
                .enumerate()
                .map(|(k, &x)| {
                    // reduce jk mod m before scaling to keep the angle small
                    let phase = ((j * k) % m) as f64 / m as f64;
                    x * Complex64::from_polar(1.0, sign * 2.0 * std::f64::consts::PI * phase)
                })
                .sum();
            acc * scale
        })
        .collect())
}

/// A circulant matrix held as its eigenvalues in the DFT basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculantSpectrum {
    eigenvalues: Vec<Complex64>,
}

impl CirculantSpectrum {
    pub fn new(eigenvalues: Vec<Complex64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Self { eigenvalues })
    }

    /// Spectrum of the real circulant with the given first column.
    pub fn from_first_column(col: &[f64]) -> Result<Self> {
        let v: Vec<Complex64> = col.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let scale = (col.len() as f64).sqrt();
        let eig = dft(&v, false)?.into_iter().map(|z| z * scale).collect();
        Self::new(eig)
    }

    pub fn m(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    /// Largest `|lambda_k - conj(lambda_{m-k})|`.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let m = self.m();
        (0..m)
            .map(|k| (self.eigenvalues[k] - self.eigenvalues[(m - k) % m].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Principal square root of every eigenvalue.
    pub fn sqrt(&self) -> Self {
        Self {
            eigenvalues: self
                .eigenvalues
                .iter()
                .map(|z| principal_sqrt(*z))
                .collect(),
        }
    }

    /// Elementwise square (matrix square in the eigenvalue domain).
    pub fn square(&self) -> Self {
        Self {
            eigenvalues: self.eigenvalues.iter().map(|z| z * z).collect(),
        }
    }

    /// First column of the represented matrix and the largest imaginary
    /// residue discarded when taking its real part.
    pub fn first_column(&self) -> (Vec<f64>, f64) {
        let scale = 1.0 / (self.m() as f64).sqrt();
        let lam: Vec<Complex64> = self.eigenvalues.iter().map(|z| z * scale).collect();
        let col = dft(&lam, true).expect("spectrum is non-empty");
        let residue = col.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        (col.iter().map(|z| z.re).collect(), residue)
    }

    /// `y = A x` computed in the eigenvalue domain.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.m() {
            return Err(Error::DimensionMismatch {
                expected: self.m(),
                got: x.len(),
            });
        }
        let v: Vec<Complex64> = x.iter().map(|&t| Complex64::new(t, 0.0)).collect();
        let mut fx = dft(&v, false)?;
        fx.iter_mut()
            .zip(&self.eigenvalues)
            .for_each(|(a, l)| *a *= l);
        Ok(dft(&fx, true)?.into_iter().map(|z| z.re).collect())
    }

    /// Materialize `F* diag(lambda) F`; complex residue is dropped.
    pub fn to_dense(&self) -> DenseMatrix {
        let (col, _) = self.first_column();
        circulant_dense(&col)
    }
}

/// Principal branch: non-negative real part, and `+i sqrt(|x|)` on the
/// negative real axis.
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re < 0.0 {
        Complex64::new(0.0, (-z.re).sqrt())
    } else {
        z.sqrt()
    }
}

/// Dense circulant with the given first column: `A[j][k] = c[(j - k) mod m]`.
pub fn circulant_dense(col: &[f64]) -> DenseMatrix {
    let m = col.len();
    let mut a = DenseMatrix::zeros(m, m);
    for j in 0..m {
        for k in 0..m {
            a.set(j, k, col[(j + m - k) % m]);
        }
    }
    a
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn counting(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for j in 0..n {
            for k in 0..=j {
                m.set(j, k, 1.0);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.entries[j * self.cols + k]
    }

    pub fn set(&mut self, j: usize, k: usize, v: f64) {
        self.entries[j * self.cols + k] = v;
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.entries[j * self.cols..(j + 1) * self.cols]
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let dst = &mut out.entries[i * other.cols..(i + 1) * other.cols];
            for (t, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (d, &b) in dst.iter_mut().zip(other.row(t)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                got: other.rows * other.cols,
            });
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn row_norms_sq(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|j| self.row(j).iter().map(|v| v * v).sum())
            .collect()
    }

    pub fn col_norms_sq(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for j in 0..self.rows {
            for (o, v) in out.iter_mut().zip(self.row(j)) {
                *o += v * v;
            }
        }
        out
    }

    /// Writes the matrix as CSV, one row per line, shortest round-trip
    /// decimals.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(out);
        for j in 0..self.rows {
            w.write_record(self.row(j).iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}
