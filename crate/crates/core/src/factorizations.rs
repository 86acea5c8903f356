//! Explicit factorizations `L R = M_count` of the counting matrix.
//!
//! * square root: `L = R = C` with `C^2 = M_count`, a lower-triangular
//!   Toeplitz matrix whose first column holds the Wallis coefficients;
//! * normalized square root (NSR): `R = C D^{-1}` has unit columns and
//!   `L = M_count D C^{-1}`;
//! * group algebra: `L = P S`, `R = S P^T` where `S` is the square root of
//!   the `2n x 2n` circulant extension of `M_count` and `P` keeps the first
//!   `n` coordinates.
//!
//! Factors are kept in structured form. Dense copies are produced only on
//! request and only up to [`DENSE_BUDGET`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{require_size, Error, Result};
use crate::sequences::CoefficientTable;
use crate::structmat::{CirculantSpectrum, DenseMatrix, LowerTriangularToeplitz};
use crate::summation::compensated_sum;

/// Largest `n` for which factors are materialized densely.
pub const DENSE_BUDGET: usize = 4096;

/// Imaginary residue tolerated when taking the real part of a circulant
/// square root.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    SquareRoot,
    Nsr,
    GroupAlgebra,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::SquareRoot, Method::Nsr, Method::GroupAlgebra];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::SquareRoot => "sqrt",
            Method::Nsr => "nsr",
            Method::GroupAlgebra => "group-algebra",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sqrt" | "square-root" => Ok(Method::SquareRoot),
            "nsr" => Ok(Method::Nsr),
            "group-algebra" | "ga" => Ok(Method::GroupAlgebra),
            _ => Err(Error::UnknownMethod(s.to_string())),
        }
    }
}

/// Real circulant matrix kept both as first column and as spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Circulant {
    col: Vec<f64>,
    spectrum: CirculantSpectrum,
    /// Cyclic prefix sums of `col[i]^2` over two periods.
    sq_prefix: Vec<f64>,
}

impl Circulant {
    fn from_spectrum(spectrum: CirculantSpectrum) -> Self {
        let (col, residue) = spectrum.first_column();
        log::debug!("circulant square root: max imaginary residue {residue:e}");
        debug_assert!(residue < IMAG_RESIDUE_TOL, "imaginary residue {residue}");
        let m = col.len();
        let mut sq_prefix = Vec::with_capacity(2 * m + 1);
        sq_prefix.push(0.0);
        let mut acc = 0.0;
        for i in 0..2 * m {
            acc += col[i % m] * col[i % m];
            sq_prefix.push(acc);
        }
        Self {
            col,
            spectrum,
            sq_prefix,
        }
    }

    pub fn m(&self) -> usize {
        self.col.len()
    }

    pub fn col(&self) -> &[f64] {
        &self.col
    }

    pub fn spectrum(&self) -> &CirculantSpectrum {
        &self.spectrum
    }

    pub fn entry(&self, j: usize, k: usize) -> f64 {
        let m = self.m();
        self.col[(j % m + m - k % m) % m]
    }

    /// `sum_{i=0}^{len-1} col[(start + i) mod m]^2`.
    fn window_sq(&self, start: usize, len: usize) -> f64 {
        let s = start % self.m();
        self.sq_prefix[s + len] - self.sq_prefix[s]
    }

    fn norm_sq(&self) -> f64 {
        compensated_sum(self.col.iter().map(|v| v * v))
    }
}

/// A factor of the counting matrix in structured form.
#[derive(Debug, Clone, PartialEq)]
pub enum FactorMatrix {
    /// Lower-triangular Toeplitz.
    Toeplitz(LowerTriangularToeplitz),
    /// `T diag(col_scale)`.
    ScaledToeplitz {
        base: LowerTriangularToeplitz,
        col_scale: Vec<f64>,
    },
    /// `M_count diag(d) T`: the NSR left factor with `T = C^{-1}`.
    NsrLeft {
        inverse: LowerTriangularToeplitz,
        d: Vec<f64>,
    },
    /// First `rows` rows of a circulant.
    CirculantTopRows {
        circulant: Arc<Circulant>,
        rows: usize,
    },
    /// First `cols` columns of a circulant.
    CirculantLeftCols {
        circulant: Arc<Circulant>,
        cols: usize,
    },
}

impl FactorMatrix {
    pub fn rows(&self) -> usize {
        match self {
            FactorMatrix::Toeplitz(t) => t.n(),
            FactorMatrix::ScaledToeplitz { base, .. } => base.n(),
            FactorMatrix::NsrLeft { d, .. } => d.len(),
            FactorMatrix::CirculantTopRows { rows, .. } => *rows,
            FactorMatrix::CirculantLeftCols { circulant, .. } => circulant.m(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            FactorMatrix::Toeplitz(t) => t.n(),
            FactorMatrix::ScaledToeplitz { base, .. } => base.n(),
            FactorMatrix::NsrLeft { d, .. } => d.len(),
            FactorMatrix::CirculantTopRows { circulant, .. } => circulant.m(),
            FactorMatrix::CirculantLeftCols { cols, .. } => *cols,
        }
    }

    /// Single entry, 0-based. `O(n)` for the NSR left factor, `O(1)` otherwise.
    pub fn entry(&self, j: usize, k: usize) -> f64 {
        match self {
            FactorMatrix::Toeplitz(t) => t.entry(j, k),
            FactorMatrix::ScaledToeplitz { base, col_scale } => base.entry(j, k) * col_scale[k],
            FactorMatrix::NsrLeft { inverse, d } => {
                if j < k {
                    0.0
                } else {
                    (0..=j - k).map(|t| inverse.col()[t] * d[k + t]).sum()
                }
            }
            FactorMatrix::CirculantTopRows { circulant, .. }
            | FactorMatrix::CirculantLeftCols { circulant, .. } => circulant.entry(j, k),
        }
    }

    /// Matrix-vector product using the structure.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                got: x.len(),
            });
        }
        match self {
            FactorMatrix::Toeplitz(t) => t.apply(x),
            FactorMatrix::ScaledToeplitz { base, col_scale } => {
                let scaled: Vec<f64> = x.iter().zip(col_scale).map(|(a, s)| a * s).collect();
                base.apply(&scaled)
            }
            FactorMatrix::NsrLeft { inverse, d } => {
                let y = inverse.apply(x)?;
                let mut acc = 0.0;
                Ok(y.iter()
                    .zip(d)
                    .map(|(v, dj)| {
                        acc += v * dj;
                        acc
                    })
                    .collect())
            }
            FactorMatrix::CirculantTopRows { circulant, rows } => {
                let mut y = circulant.spectrum.apply(x)?;
                y.truncate(*rows);
                Ok(y)
            }
            FactorMatrix::CirculantLeftCols { circulant, .. } => {
                let mut padded = x.to_vec();
                padded.resize(circulant.m(), 0.0);
                circulant.spectrum.apply(&padded)
            }
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let (rows, cols) = (self.rows(), self.cols());
        match self {
            FactorMatrix::NsrLeft { inverse, d } => {
                let mut out = DenseMatrix::zeros(rows, cols);
                for k in 0..cols {
                    let mut b = 0.0;
                    for (j, dj) in d.iter().enumerate().take(rows).skip(k) {
                        b += inverse.col()[j - k] * dj;
                        out.set(j, k, b);
                    }
                }
                out
            }
            _ => {
                let mut out = DenseMatrix::zeros(rows, cols);
                for j in 0..rows {
                    for k in 0..cols {
                        out.set(j, k, self.entry(j, k));
                    }
                }
                out
            }
        }
    }

    /// Squared row norms.
    pub fn row_norms_sq(&self) -> Vec<f64> {
        match self {
            FactorMatrix::Toeplitz(t) => {
                let mut acc = 0.0;
                t.col()
                    .iter()
                    .map(|v| {
                        acc += v * v;
                        acc
                    })
                    .collect()
            }
            FactorMatrix::ScaledToeplitz { base, col_scale } => (0..base.n())
                .map(|j| {
                    (0..=j)
                        .map(|k| (base.col()[j - k] * col_scale[k]).powi(2))
                        .sum()
                })
                .collect(),
            FactorMatrix::NsrLeft { inverse, d } => nsr_left_norms(inverse.col(), d).0,
            FactorMatrix::CirculantTopRows { circulant, rows } => vec![circulant.norm_sq(); *rows],
            FactorMatrix::CirculantLeftCols { circulant, cols } => {
                // row j holds col[j], col[j-1], .., col[j-cols+1] (cyclic)
                let m = circulant.m();
                (0..m)
                    .map(|j| circulant.window_sq(j + m + 1 - cols, *cols))
                    .collect()
            }
        }
    }

    /// Squared column norms.
    pub fn col_norms_sq(&self) -> Vec<f64> {
        match self {
            FactorMatrix::Toeplitz(t) => toeplitz_col_norms_sq(t),
            FactorMatrix::ScaledToeplitz { base, col_scale } => toeplitz_col_norms_sq(base)
                .into_iter()
                .zip(col_scale)
                .map(|(c, s)| c * s * s)
                .collect(),
            FactorMatrix::NsrLeft { inverse, d } => nsr_left_norms(inverse.col(), d).1,
            FactorMatrix::CirculantTopRows { circulant, rows } => {
                // column k holds col[-k], col[1-k], .., col[rows-1-k] (cyclic)
                let m = circulant.m();
                (0..m).map(|k| circulant.window_sq(m - k, *rows)).collect()
            }
            FactorMatrix::CirculantLeftCols { circulant, cols } => vec![circulant.norm_sq(); *cols],
        }
    }
}

fn toeplitz_col_norms_sq(t: &LowerTriangularToeplitz) -> Vec<f64> {
    // column k of an n x n LTT holds col[0..n-k]
    let n = t.n();
    let mut acc = 0.0;
    let prefix: Vec<f64> = t
        .col()
        .iter()
        .map(|v| {
            acc += v * v;
            acc
        })
        .collect();
    (0..n).map(|k| prefix[n - 1 - k]).collect()
}

/// Row and column squared norms of `M_count diag(d) C^{-1}` in one streaming
/// pass: `O(n^2)` time and `O(n)` memory.
///
/// For fixed column `k`, `B[j][k] = B[j-1][k] + rtilde[j-k] d[j]`.
fn nsr_left_norms(rtilde: &[f64], d: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = d.len();
    let mut rows = vec![0.0; n];
    let mut cols = vec![0.0; n];
    for k in 0..n {
        let mut b = 0.0;
        let mut col_acc = 0.0;
        for ((row, &rt), &dj) in rows[k..].iter_mut().zip(rtilde).zip(&d[k..]) {
            b += rt * dj;
            let sq = b * b;
            *row += sq;
            col_acc += sq;
        }
        cols[k] = col_acc;
    }
    (rows, cols)
}

/// A factorization `left * right = M_count` with cached norms.
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    method: Method,
    n: usize,
    left: FactorMatrix,
    right: FactorMatrix,
    row_norms_sq_left: Vec<f64>,
    col_norms_sq_right: Vec<f64>,
    frobenius_sq_left: f64,
}

impl Factorization {
    fn assemble(method: Method, n: usize, left: FactorMatrix, right: FactorMatrix) -> Self {
        let row_norms_sq_left = left.row_norms_sq();
        let col_norms_sq_right = right.col_norms_sq();
        let frobenius_sq_left = compensated_sum(row_norms_sq_left.iter().copied());
        Self {
            method,
            n,
            left,
            right,
            row_norms_sq_left,
            col_norms_sq_right,
            frobenius_sq_left,
        }
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Inner dimension: `n` for the square-root methods, `2n` for group algebra.
    pub fn inner_dim(&self) -> usize {
        self.left.cols()
    }

    pub fn left(&self) -> &FactorMatrix {
        &self.left
    }

    pub fn right(&self) -> &FactorMatrix {
        &self.right
    }

    pub fn row_norms_sq_left(&self) -> &[f64] {
        &self.row_norms_sq_left
    }

    pub fn col_norms_sq_right(&self) -> &[f64] {
        &self.col_norms_sq_right
    }

    pub fn frobenius_sq_left(&self) -> f64 {
        self.frobenius_sq_left
    }

    fn check_budget(&self) -> Result<()> {
        if self.n > DENSE_BUDGET {
            Err(Error::DenseBudgetExceeded {
                n: self.n,
                budget: DENSE_BUDGET,
            })
        } else {
            Ok(())
        }
    }

    pub fn dense_left(&self) -> Result<DenseMatrix> {
        self.check_budget()?;
        Ok(self.left.to_dense())
    }

    pub fn dense_right(&self) -> Result<DenseMatrix> {
        self.check_budget()?;
        Ok(self.right.to_dense())
    }
}

/// `L = R = C`, the lower-triangular Toeplitz square root of `M_count`.
pub fn sqrt_factorization(n: usize) -> Result<Factorization> {
    let table = CoefficientTable::new(n)?;
    let c = LowerTriangularToeplitz::new(table.r().to_vec())?;
    Ok(Factorization::assemble(
        Method::SquareRoot,
        n,
        FactorMatrix::Toeplitz(c.clone()),
        FactorMatrix::Toeplitz(c),
    ))
}

/// Normalized square root: `R = C D^{-1}`, `L = M_count D C^{-1}`.
pub fn nsr_factorization(n: usize) -> Result<Factorization> {
    let table = CoefficientTable::new(n)?;
    let d = table.d();
    let c = LowerTriangularToeplitz::new(table.r().to_vec())?;
    let c_inv = LowerTriangularToeplitz::new(table.rtilde().to_vec())?;
    let right = FactorMatrix::ScaledToeplitz {
        base: c,
        col_scale: d.iter().map(|v| 1.0 / v).collect(),
    };
    let left = FactorMatrix::NsrLeft { inverse: c_inv, d };
    Ok(Factorization::assemble(Method::Nsr, n, left, right))
}

/// Eigenvalues of the `2n x 2n` circulant extension of `M_count` in the DFT
/// basis: `n` at 0, `2/(1 - omega^{-k})` at odd `k`, zero at even `k != 0`,
/// with `omega = exp(i pi/n)`.
pub fn counting_extension_spectrum(n: usize) -> Result<CirculantSpectrum> {
    require_size(n, 1)?;
    let eig = (0..2 * n)
        .map(|k| {
            if k == 0 {
                Complex64::new(n as f64, 0.0)
            } else if k % 2 == 1 {
                // 2/(1 - exp(-i theta)) = 1 - i cot(theta/2)
                let half = PI * k as f64 / (2 * n) as f64;
                Complex64::new(1.0, -half.cos() / half.sin())
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    CirculantSpectrum::new(eig)
}

/// Group-algebra factorization via the square root of the circulant
/// extension.
pub fn group_algebra_factorization(n: usize) -> Result<Factorization> {
    let root = counting_extension_spectrum(n)?.sqrt();
    let circulant = Arc::new(Circulant::from_spectrum(root));
    let left = FactorMatrix::CirculantTopRows {
        circulant: Arc::clone(&circulant),
        rows: n,
    };
    let right = FactorMatrix::CirculantLeftCols { circulant, cols: n };
    Ok(Factorization::assemble(
        Method::GroupAlgebra,
        n,
        left,
        right,
    ))
}

pub fn factorize(method: Method, n: usize) -> Result<Factorization> {
    match method {
        Method::SquareRoot => sqrt_factorization(n),
        Method::Nsr => nsr_factorization(n),
        Method::GroupAlgebra => group_algebra_factorization(n),
    }
}

/// Max-abs deviation of `L R` from `M_count`, by dense multiplication.
pub fn verify_reconstruction(f: &Factorization) -> Result<f64> {
    let product = f.dense_left()?.matmul(&f.dense_right()?)?;
    product.max_abs_diff(&DenseMatrix::counting(f.n()))
}
