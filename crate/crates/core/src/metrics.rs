//! MaxSE / MeanSE of a factorization, computed from the factors and from
//! closed forms, plus the asymptotic residual constants.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::bounds::nuclear_lower_bound;
use crate::error::{require_size, Error, Result};
use crate::factorizations::{FactorMatrix, Factorization, Method};
use crate::sequences::{constants, log_baseline, CoefficientTable};
use crate::summation::{compensated_sum, sorted_sum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    MaxSe,
    MeanSe,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::MaxSe, Metric::MeanSe];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::MaxSe => "maxse",
            Metric::MeanSe => "meanse",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "maxse" => Ok(Metric::MaxSe),
            "meanse" => Ok(Metric::MeanSe),
            _ => Err(Error::UnknownMetric(s.to_string())),
        }
    }
}

/// `||L||_{2->inf}`: the largest row norm.
pub fn max_row_norm(m: &FactorMatrix) -> f64 {
    max_of(&m.row_norms_sq()).sqrt()
}

/// `||R||_{1->2}`: the largest column norm.
pub fn max_col_norm(m: &FactorMatrix) -> f64 {
    max_of(&m.col_norms_sq()).sqrt()
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// `||L||_{2->inf} ||R||_{1->2}`, from the cached norms.
pub fn maxse(f: &Factorization) -> f64 {
    max_of(f.row_norms_sq_left()).sqrt() * max_of(f.col_norms_sq_right()).sqrt()
}

/// `||L||_F ||R||_{1->2} / sqrt(n)`, from the cached norms.
pub fn meanse(f: &Factorization) -> f64 {
    (f.frobenius_sq_left() / f.n() as f64).sqrt() * max_of(f.col_norms_sq_right()).sqrt()
}

/// `MaxSE(C, C) = sum_{j<n} r_j^2 = alpha_n + log(n)/pi`.
pub fn closed_form_maxse_sqrt(n: usize) -> Result<f64> {
    let t = CoefficientTable::new(n)?;
    Ok(t.prefix_sq()[n - 1])
}

/// `MeanSE(C, C) = sqrt(sum_j d_j^2 / n) * sqrt(d_1^2)`; row `j` of `C` has
/// squared norm `sum_{t<=j} r_t^2`.
pub fn closed_form_meanse_sqrt(n: usize) -> Result<f64> {
    let t = CoefficientTable::new(n)?;
    let frob = compensated_sum(t.prefix_sq().iter().copied());
    Ok((frob / n as f64).sqrt() * t.prefix_sq()[n - 1].sqrt())
}

/// `1/2 + (1/2n) sum_{l=1}^{n} csc(pi (2l-1)/(2n))`; MeanSE equals MaxSE for
/// the group-algebra factorization.
pub fn closed_form_maxse_group_algebra(n: usize) -> Result<f64> {
    require_size(n, 1)?;
    let terms = (1..=n)
        .map(|l| 1.0 / (PI * (2 * l - 1) as f64 / (2 * n) as f64).sin())
        .collect();
    Ok(0.5 + sorted_sum(terms) / (2 * n) as f64)
}

/// Asymptotic constant `c` in `error = log(n)/pi + c + o(1)`.
pub fn predicted_residual(method: Method, metric: Metric) -> f64 {
    let c = constants();
    match (method, metric) {
        (Method::SquareRoot, Metric::MaxSe) => c.alpha_infinity,
        (Method::SquareRoot, Metric::MeanSe) => c.sqrt_meanse_const,
        (Method::Nsr, Metric::MaxSe) => c.nsr_maxse_const,
        (Method::Nsr, Metric::MeanSe) => c.nsr_meanse_const,
        (Method::GroupAlgebra, _) => c.ga_const,
    }
}

/// String front end for [`predicted_residual`].
pub fn predicted_residuals(method: &str, metric: &str) -> Result<f64> {
    Ok(predicted_residual(method.parse()?, metric.parse()?))
}

/// Closed-form MaxSE / MeanSE when one exists for the method.
pub fn closed_forms(method: Method, n: usize) -> Result<(Option<f64>, Option<f64>)> {
    Ok(match method {
        Method::SquareRoot => (
            Some(closed_form_maxse_sqrt(n)?),
            Some(closed_form_meanse_sqrt(n)?),
        ),
        Method::Nsr => (None, None),
        Method::GroupAlgebra => {
            let v = closed_form_maxse_group_algebra(n)?;
            (Some(v), Some(v))
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub method: Method,
    pub n: usize,
    pub maxse: f64,
    pub meanse: f64,
    pub maxse_residual: f64,
    pub meanse_residual: f64,
    pub closed_form_maxse: Option<f64>,
    pub closed_form_meanse: Option<f64>,
    pub predicted_maxse_residual: f64,
    pub predicted_meanse_residual: f64,
}

impl ErrorReport {
    pub fn new(f: &Factorization) -> Result<Self> {
        let n = f.n();
        let method = f.method();
        let (maxse, meanse) = (maxse(f), meanse(f));
        let (closed_form_maxse, closed_form_meanse) = closed_forms(method, n)?;
        Ok(Self {
            method,
            n,
            maxse,
            meanse,
            maxse_residual: maxse - log_baseline(n),
            meanse_residual: meanse - log_baseline(n),
            closed_form_maxse,
            closed_form_meanse,
            predicted_maxse_residual: predicted_residual(method, Metric::MaxSe),
            predicted_meanse_residual: predicted_residual(method, Metric::MeanSe),
        })
    }

    pub fn value(&self, metric: Metric) -> f64 {
        match metric {
            Metric::MaxSe => self.maxse,
            Metric::MeanSe => self.meanse,
        }
    }

    /// Invariant violations: MeanSE above MaxSE, MaxSE under the nuclear
    /// lower bound, or disagreement with an available closed form.
    pub fn violations(&self) -> Result<Vec<String>> {
        let mut out = Vec::new();
        if self.meanse > self.maxse * (1.0 + 1e-12) {
            out.push(format!(
                "meanse {} exceeds maxse {}",
                self.meanse, self.maxse
            ));
        }
        let lb = nuclear_lower_bound(self.n)?;
        if self.maxse < lb * (1.0 - 1e-12) {
            out.push(format!(
                "maxse {} below nuclear lower bound {lb}",
                self.maxse
            ));
        }
        let tol = match self.method {
            Method::SquareRoot => 1e-12,
            _ => 1e-9,
        };
        for (name, direct, closed) in [
            ("maxse", self.maxse, self.closed_form_maxse),
            ("meanse", self.meanse, self.closed_form_meanse),
        ] {
            if let Some(c) = closed {
                if (direct - c).abs() > tol * c.abs() {
                    out.push(format!("{name} {direct} differs from closed form {c}"));
                }
            }
        }
        Ok(out)
    }
}
