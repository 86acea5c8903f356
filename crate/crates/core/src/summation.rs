//! Compensated (Neumaier) summation.

use std::ops::AddAssign;

/// Running sum with a second-order error term.
///
/// Neumaier's variant of Kahan summation; it stays accurate when an added
/// term is larger in magnitude than the running total.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    err: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.err += (self.sum - t) + value;
        } else {
            self.err += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.err
    }
}

impl AddAssign<f64> for CompensatedSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of an iterator of values.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Sums the terms in ascending magnitude with compensation.
///
/// Used for cosecant sums whose terms span several orders of magnitude.
pub fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    compensated_sum(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_lost_by_naive_sum() {
        let terms = [1.0, 1e100, 1.0, -1e100];
        let naive: f64 = terms.iter().sum();
        assert_eq!(naive, 0.0);
        assert_eq!(compensated_sum(terms), 2.0);
    }

    #[test]
    fn harmonic_sum_matches_reverse_order() {
        let n = 1_000_000;
        let fwd = compensated_sum((1..=n).map(|k| 1.0 / k as f64));
        let rev = compensated_sum((1..=n).rev().map(|k| 1.0 / k as f64));
        assert!((fwd - rev).abs() <= 2.0 * f64::EPSILON * fwd);
    }

    #[test]
    fn sorted_sum_of_empty_is_zero() {
        assert_eq!(sorted_sum(Vec::new()), 0.0);
    }
}
