//! Lower bounds on the factorization norms of `M_count` and the cosecant
//! and log-product sums that drive their asymptotics.

use std::f64::consts::PI;

use crate::error::{require_size, Result};
use crate::sequences::{constants, log_baseline};
use crate::summation::{compensated_sum, sorted_sum};

/// `||M_count||_* / n = (1/2n) sum_{j=1}^{n} csc((2j-1) pi/(4n+2))`.
///
/// The csc terms are the singular values of `M_count`; this lower-bounds both
/// MaxSE and MeanSE of any factorization.
pub fn nuclear_lower_bound(n: usize) -> Result<f64> {
    require_size(n, 1)?;
    Ok(sorted_sum(singular_values(n)) / n as f64)
}

/// Singular values of `M_count`, `1/(2 sin((2j-1) pi/(4n+2)))`, unsorted.
pub fn singular_values(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|j| 1.0 / (2.0 * ((2 * j - 1) as f64 * PI / (4 * n + 2) as f64).sin()))
        .collect()
}

/// `((n+1)/2n^2) sum_{j=1}^{n} csc((2j-1) pi/(2n))`.
pub fn mathias_lower_bound(n: usize) -> Result<f64> {
    require_size(n, 1)?;
    let nf = n as f64;
    let terms = (1..=n)
        .map(|j| 1.0 / ((2 * j - 1) as f64 * PI / (2.0 * nf)).sin())
        .collect();
    Ok((nf + 1.0) / (2.0 * nf * nf) * sorted_sum(terms))
}

/// A finite sum next to its asymptotic prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticPair {
    pub value: f64,
    pub predicted: f64,
}

impl AsymptoticPair {
    pub fn gap(&self) -> f64 {
        (self.value - self.predicted).abs()
    }
}

/// `G(n) = (1/n) sum_{l=1}^{n-1} csc(pi l/n)` against
/// `(2/pi)(log n + gamma + log(2/pi))`.
pub fn cosecant_average(n: usize) -> Result<AsymptoticPair> {
    require_size(n, 2)?;
    let nf = n as f64;
    let terms = (1..n).map(|l| 1.0 / (PI * l as f64 / nf).sin()).collect();
    let predicted = 2.0 / PI * (nf.ln() + constants().euler_gamma + (2.0 / PI).ln());
    Ok(AsymptoticPair {
        value: sorted_sum(terms) / nf,
        predicted,
    })
}

/// `(1/n) sum_{j=1}^{n} log(j) log(n+1-j)` against
/// `log^2 n - 2 log n + 2 - pi^2/6`.
pub fn log_product_average(n: usize) -> Result<AsymptoticPair> {
    require_size(n, 1)?;
    let value =
        compensated_sum((1..=n).map(|j| (j as f64).ln() * ((n + 1 - j) as f64).ln())) / n as f64;
    let l = (n as f64).ln();
    Ok(AsymptoticPair {
        value,
        predicted: l * l - 2.0 * l + 2.0 - PI * PI / 6.0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub n: usize,
    pub nuclear_lb: f64,
    pub mathias_lb: f64,
    pub nuclear_residual: f64,
    pub mathias_residual: f64,
    /// `G(n)`; `None` for `n = 1`.
    pub g_n: Option<f64>,
    pub g_n_predicted: Option<f64>,
}

impl BoundReport {
    pub fn new(n: usize) -> Result<Self> {
        let nuclear_lb = nuclear_lower_bound(n)?;
        let mathias_lb = mathias_lower_bound(n)?;
        let g = if n >= 2 {
            Some(cosecant_average(n)?)
        } else {
            None
        };
        Ok(Self {
            n,
            nuclear_lb,
            mathias_lb,
            nuclear_residual: nuclear_lb - log_baseline(n),
            mathias_residual: mathias_lb - log_baseline(n),
            g_n: g.map(|p| p.value),
            g_n_predicted: g.map(|p| p.predicted),
        })
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n >= 2 && self.nuclear_lb < self.mathias_lb {
            out.push(format!(
                "nuclear bound {} below Mathias bound {}",
                self.nuclear_lb, self.mathias_lb
            ));
        }
        out
    }
}
