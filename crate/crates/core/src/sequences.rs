//! Scalar sequences behind every factorization of the counting matrix.
//!
//! Storage is 0-based throughout. Where the mathematics indexes from 1
//! (column norms `d_j`, Landau offsets `alpha_m`), entry `j` lives at storage
//! index `j - 1`; the 1-based accessors on [`CoefficientTable`] do the shift.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{require_size, Result};
use crate::summation::CompensatedSum;

/// Euler–Mascheroni constant.
#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_86;

/// Asymptotic constants of the factorization errors and lower bounds.
///
/// Every residual is measured against `log(n)/pi` with the natural log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NamedConstants {
    pub euler_gamma: f64,
    /// Limit of the Landau offsets, `(gamma + log 16)/pi`.
    pub alpha_infinity: f64,
    /// NSR max-error constant, `(gamma + log 8)/pi`.
    pub nsr_maxse_const: f64,
    /// NSR mean-error constant, `(gamma + log 16 - 1)/pi`.
    pub nsr_meanse_const: f64,
    /// Square-root mean-error constant, `alpha_infinity - 1/(2 pi)`.
    pub sqrt_meanse_const: f64,
    /// Group-algebra constant, `1/2 + (gamma + log(8/pi))/pi`.
    pub ga_const: f64,
    /// Nuclear-norm lower-bound constant, `(gamma + log(16/pi))/pi`.
    pub lb_const: f64,
    /// Mathias lower-bound constant, `(gamma + log(8/pi))/pi`.
    pub mathias_lb_const: f64,
}

impl NamedConstants {
    pub fn new() -> Self {
        let g = EULER_GAMMA;
        let alpha_infinity = (g + 16f64.ln()) / PI;
        Self {
            euler_gamma: g,
            alpha_infinity,
            nsr_maxse_const: (g + 8f64.ln()) / PI,
            nsr_meanse_const: (g + 16f64.ln() - 1.0) / PI,
            sqrt_meanse_const: alpha_infinity - 1.0 / (2.0 * PI),
            ga_const: 0.5 + (g + (8.0 / PI).ln()) / PI,
            lb_const: (g + (16.0 / PI).ln()) / PI,
            mathias_lb_const: (g + (8.0 / PI).ln()) / PI,
        }
    }
}

impl Default for NamedConstants {
    fn default() -> Self {
        Self::new()
    }
}

/// Shared instance of [`NamedConstants`].
pub fn constants() -> &'static NamedConstants {
    static CONSTANTS: OnceLock<NamedConstants> = OnceLock::new();
    CONSTANTS.get_or_init(NamedConstants::new)
}

/// The residual baseline `log(n)/pi`.
pub fn log_baseline(n: usize) -> f64 {
    (n as f64).ln() / PI
}

/// Taylor coefficients `r_k` of `(1-x)^{-1/2}`, i.e. `binom(2k,k)/4^k`.
///
/// Computed by the recurrence `r_k = r_{k-1} (2k-1)/(2k)`; the binomial form
/// overflows 64-bit integers long before the sizes used here.
pub fn wallis_coeffs(n: usize) -> Result<Vec<f64>> {
    require_size(n, 1)?;
    Ok(wallis_iter().take(n).collect())
}

fn wallis_iter() -> impl Iterator<Item = f64> {
    let mut k = 0u64;
    let mut r = 1.0f64;
    std::iter::from_fn(move || {
        if k > 0 {
            r *= (2 * k - 1) as f64 / (2 * k) as f64;
        }
        k += 1;
        Some(r)
    })
}

/// Taylor coefficients of `(1-x)^{1/2}`: the first column of `C^{-1}`.
///
/// `rtilde_0 = 1` and `rtilde_j = -r_j/(2j-1)`. Their prefix sums reproduce
/// `r_j`, which is the identity `M_count C^{-1} = C`.
pub fn inverse_coeffs(n: usize) -> Result<Vec<f64>> {
    let r = wallis_coeffs(n)?;
    Ok(inverse_from_wallis(&r))
}

fn inverse_from_wallis(r: &[f64]) -> Vec<f64> {
    r.iter()
        .enumerate()
        .map(|(j, &rj)| {
            if j == 0 {
                1.0
            } else {
                -rj / (2 * j - 1) as f64
            }
        })
        .collect()
}

/// Squared column norms of `C`: `d_j^2 = sum_{t=0}^{n-j} r_t^2` for `j = 1..=n`.
///
/// Returned 0-based (`d_j^2` at index `j - 1`). `d_n^2 = 1` exactly.
pub fn column_norms_sq(n: usize) -> Result<Vec<f64>> {
    let r = wallis_coeffs(n)?;
    Ok(column_norms_from_prefix(&prefix_squares(&r)))
}

/// `P[i] = sum_{t<=i} r_t^2`, compensated.
fn prefix_squares(r: &[f64]) -> Vec<f64> {
    let mut acc = CompensatedSum::new();
    r.iter()
        .map(|&v| {
            acc.add(v * v);
            acc.value()
        })
        .collect()
}

fn column_norms_from_prefix(prefix: &[f64]) -> Vec<f64> {
    let n = prefix.len();
    (1..=n).map(|j| prefix[n - j]).collect()
}

/// Landau offset `alpha_n = sum_{j<n} r_j^2 - log(n)/pi`.
///
/// Increases monotonically to `(gamma + log 16)/pi` with
/// `alpha_inf - alpha_n` in `(0, 1/(5n)]`.
pub fn landau_alpha(n: usize) -> Result<f64> {
    require_size(n, 1)?;
    let sum = wallis_iter()
        .take(n)
        .map(|r| r * r)
        .collect::<CompensatedSum>();
    Ok(sum.value() - log_baseline(n))
}

/// The coefficient sequences for one matrix size, built once and shared
/// read-only.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    n: usize,
    r: Vec<f64>,
    rtilde: Vec<f64>,
    prefix_sq: Vec<f64>,
    d_sq: Vec<f64>,
    alpha: Vec<f64>,
}

impl CoefficientTable {
    pub fn new(n: usize) -> Result<Self> {
        let r = wallis_coeffs(n)?;
        let rtilde = inverse_from_wallis(&r);
        let prefix_sq = prefix_squares(&r);
        let d_sq = column_norms_from_prefix(&prefix_sq);
        let alpha = prefix_sq
            .iter()
            .enumerate()
            .map(|(i, &p)| p - log_baseline(i + 1))
            .collect();
        Ok(Self {
            n,
            r,
            rtilde,
            prefix_sq,
            d_sq,
            alpha,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `r_0..r_{n-1}`.
    pub fn r(&self) -> &[f64] {
        &self.r
    }

    /// `rtilde_0..rtilde_{n-1}`.
    pub fn rtilde(&self) -> &[f64] {
        &self.rtilde
    }

    /// `sum_{t<=i} r_t^2` at index `i`.
    pub fn prefix_sq(&self) -> &[f64] {
        &self.prefix_sq
    }

    /// `d_1^2..d_n^2`, stored 0-based.
    pub fn d_sq_slice(&self) -> &[f64] {
        &self.d_sq
    }

    /// `alpha_1..alpha_n`, stored 0-based.
    pub fn alpha_slice(&self) -> &[f64] {
        &self.alpha
    }

    /// `d_j^2` for 1-based `j`.
    pub fn d_sq(&self, j: usize) -> f64 {
        self.d_sq[j - 1]
    }

    /// `alpha_m` for 1-based `m`.
    pub fn alpha(&self, m: usize) -> f64 {
        self.alpha[m - 1]
    }

    /// Column norms `d_1..d_n`, stored 0-based.
    pub fn d(&self) -> Vec<f64> {
        self.d_sq.iter().map(|v| v.sqrt()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact `binom(2k,k)/4^k` for small k.
    fn wallis_exact(k: u32) -> f64 {
        let mut b: u128 = 1;
        for i in 0..k as u128 {
            b = b * (2 * k as u128 - i) / (i + 1);
        }
        b as f64 / 4f64.powi(k as i32)
    }

    #[test]
    fn wallis_examples() {
        assert_eq!(wallis_coeffs(1).unwrap(), vec![1.0]);
        assert_eq!(wallis_coeffs(3).unwrap(), vec![1.0, 0.5, 0.375]);
        assert_eq!(*wallis_coeffs(4).unwrap().last().unwrap(), 0.3125);
        assert!(wallis_coeffs(0).is_err());
    }

    #[test]
    fn wallis_recurrence_matches_binomials() {
        let r = wallis_coeffs(61).unwrap();
        for k in 0..61 {
            let exact = wallis_exact(k);
            assert!((r[k as usize] - exact).abs() <= 1e-14 * exact, "k = {k}");
        }
    }

    #[test]
    fn wallis_sandwich_and_monotone() {
        let r = wallis_coeffs(1 << 14).unwrap();
        assert_eq!(r[0], 1.0);
        for k in 1..r.len() {
            let kf = k as f64;
            let sq = r[k] * r[k];
            assert!(r[k] < r[k - 1]);
            assert!(sq >= 1.0 / (PI * (kf + 4.0 / PI - 1.0)), "k = {k}");
            assert!(sq <= 1.0 / (PI * (kf + 0.25)), "k = {k}");
            assert!(r[k] >= 1.0 / (PI * (kf + 1.0)).sqrt());
            assert!(r[k] <= 1.0 / (PI * kf).sqrt());
        }
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(inverse_coeffs(2).unwrap(), vec![1.0, -0.5]);
        assert_eq!(inverse_coeffs(3).unwrap(), vec![1.0, -0.5, -0.125]);
        assert_eq!(*inverse_coeffs(4).unwrap().last().unwrap(), -0.0625);
        assert!(inverse_coeffs(0).is_err());
    }

    #[test]
    fn inverse_prefix_sums_recover_wallis() {
        let t = CoefficientTable::new(1 << 14).unwrap();
        let mut acc = 0.0;
        for (j, (&rt, &r)) in t.rtilde().iter().zip(t.r()).enumerate() {
            acc += rt;
            assert!((acc - r).abs() <= 1e-13, "j = {j}");
        }
    }

    #[test]
    fn column_norm_examples() {
        assert_eq!(column_norms_sq(2).unwrap(), vec![1.25, 1.0]);
        assert_eq!(column_norms_sq(1).unwrap(), vec![1.0]);
        assert_eq!(column_norms_sq(3).unwrap()[0], 1.390625);
    }

    #[test]
    fn column_norms_decrease_by_squared_coefficients() {
        let n = 4096;
        let t = CoefficientTable::new(n).unwrap();
        assert_eq!(t.d_sq(n), 1.0);
        for j in 1..n {
            let diff = t.d_sq(j) - t.d_sq(j + 1);
            let expected = t.r()[n - j].powi(2);
            assert!(diff > 0.0);
            // the difference of two O(log n) numbers carries their absolute
            // rounding, so the relative check is against d_j^2
            assert!((diff - expected).abs() <= 1e-14 * t.d_sq(j), "j = {j}");
        }
    }

    #[test]
    fn landau_examples() {
        assert_eq!(landau_alpha(1).unwrap(), 1.0);
        let a2 = landau_alpha(2).unwrap();
        assert!((a2 - (1.25 - 2f64.ln() / PI)).abs() <= 1e-15);
        assert!((a2 - 1.0294).abs() < 1e-4);
        assert!(landau_alpha(0).is_err());
    }

    #[test]
    fn landau_watson_gap() {
        let ainf = constants().alpha_infinity;
        for n in [1usize, 2, 3, 10, 100, 1000, 10_000, 1_000_000] {
            let gap = ainf - landau_alpha(n).unwrap();
            assert!(
                gap > 0.0 && gap <= 1.0 / (5.0 * n as f64),
                "n = {n}, gap = {gap}"
            );
        }
    }

    #[test]
    fn table_alpha_is_monotone_and_bounded() {
        let t = CoefficientTable::new(100_000).unwrap();
        let a = t.alpha_slice();
        for m in 1..a.len() {
            assert!(a[m] > a[m - 1], "m = {}", m + 1);
        }
        assert_eq!(t.alpha(1), 1.0);
        assert!(a.iter().all(|&v| (1.0..=1.0663).contains(&v)));
        assert_eq!(t.alpha(100_000), landau_alpha(100_000).unwrap());
    }

    #[test]
    fn named_constant_ranges() {
        let c = constants();
        assert!((1.06627..=1.06628).contains(&c.alpha_infinity));
        assert!((0.8456..=0.8457).contains(&c.nsr_maxse_const));
        assert!((0.7018..=0.7019).contains(&c.lb_const));
        assert!((0.7479..=0.7480).contains(&c.nsr_meanse_const));
        assert!((0.9812..=0.9813).contains(&c.ga_const));
        assert!((0.9071..=0.9072).contains(&c.sqrt_meanse_const));
        assert!((0.4812..=0.4813).contains(&c.mathias_lb_const));
        assert!((c.nsr_maxse_const - (c.alpha_infinity - 2f64.ln() / PI)).abs() < 1e-15);
        assert!((c.nsr_meanse_const - (c.alpha_infinity - 1.0 / PI)).abs() < 1e-15);
    }
}
