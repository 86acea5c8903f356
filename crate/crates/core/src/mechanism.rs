//! Seeded Monte-Carlo simulation of the Gaussian matrix mechanism
//! `M(x) = L (R x + sigma z)`.
//!
//! The noise scale is `sigma = ||R||_{1->2} / mu`: neighbouring inputs differ
//! by at most one in one coordinate, so `||R||_{1->2}` is the L2 sensitivity
//! of `R x` and the release is `mu`-GDP.
//!
//! Noise for trial `t` is drawn from ChaCha8 seeded with `seed` on stream
//! `t`, converted to standard normals by `rand_distr::StandardNormal`. Each
//! `(seed, trial)` pair therefore yields the same draws on every platform and
//! regardless of how trials are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::factorizations::Factorization;
use crate::metrics::{maxse, meanse};

/// Trials per reduction block. Blocks are reduced in index order, so results
/// do not depend on the thread count.
const BLOCK: u64 = 256;

#[derive(Debug, Clone)]
pub struct MechanismConfig<'a> {
    pub factorization: &'a Factorization,
    /// GDP parameter; `f64::INFINITY` gives the noiseless mechanism.
    pub mu: f64,
    pub trials: u64,
    pub seed: u64,
    pub input: Vec<f64>,
}

impl<'a> MechanismConfig<'a> {
    pub fn new(
        factorization: &'a Factorization,
        mu: f64,
        trials: u64,
        seed: u64,
        input: Vec<f64>,
    ) -> Self {
        Self {
            factorization,
            mu,
            trials,
            seed,
            input,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.mu.is_nan() || self.mu <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "mu must be positive, got {}",
                self.mu
            )));
        }
        if self.input.len() != self.factorization.n() {
            return Err(Error::DimensionMismatch {
                expected: self.factorization.n(),
                got: self.input.len(),
            });
        }
        Ok(())
    }

    /// `||R||_{1->2} / mu`.
    pub fn sigma(&self) -> f64 {
        let sens = self
            .factorization
            .col_norms_sq_right()
            .iter()
            .copied()
            .fold(0.0, f64::max)
            .sqrt();
        sens / self.mu
    }
}

/// Standard normal draws for one trial.
pub fn noise(seed: u64, trial_index: u64, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_index);
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// One release `L (R x + sigma z)`.
pub fn run_mechanism_once(cfg: &MechanismConfig<'_>, trial_index: u64) -> Result<Vec<f64>> {
    cfg.validate()?;
    let f = cfg.factorization;
    let sigma = cfg.sigma();
    let z = noise(cfg.seed, trial_index, f.inner_dim());
    let mut y = f.right().apply(&cfg.input)?;
    if sigma > 0.0 {
        y.iter_mut().zip(&z).for_each(|(v, zi)| *v += sigma * zi);
    }
    f.left().apply(&y)
}

/// Mean and variance of one coordinate's standardized deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZScoreSummary {
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub trials: u64,
    pub sigma: f64,
    /// `max_i sqrt(E[(M(x) - M_count x)_i^2])`.
    pub empirical_err_inf: f64,
    /// `sqrt(E[||M(x) - M_count x||^2 / n])`.
    pub empirical_err_2: f64,
    /// `MaxSE / mu`.
    pub theory_err_inf: f64,
    /// `MeanSE / mu`.
    pub theory_err_2: f64,
    /// Per coordinate, deviations divided by `sigma ||L_i||`.
    pub z_scores: Vec<ZScoreSummary>,
}

impl SimulationResult {
    /// Coordinates whose z-scores fail `|mean| < 4/sqrt(T)` or
    /// `|variance - 1| < 5/sqrt(T)`.
    pub fn gaussianity_failures(&self) -> Vec<usize> {
        let root = (self.trials as f64).sqrt();
        self.z_scores
            .iter()
            .enumerate()
            .filter(|(_, z)| z.mean.abs() >= 4.0 / root || (z.variance - 1.0).abs() >= 5.0 / root)
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone)]
struct Partial {
    dev_sq: Vec<f64>,
    z_sum: Vec<f64>,
    z_sq: Vec<f64>,
    mean_sq: f64,
}

impl Partial {
    fn zeros(n: usize) -> Self {
        Self {
            dev_sq: vec![0.0; n],
            z_sum: vec![0.0; n],
            z_sq: vec![0.0; n],
            mean_sq: 0.0,
        }
    }

    fn merge(&mut self, other: &Partial) {
        let pairs = [
            (&mut self.dev_sq, &other.dev_sq),
            (&mut self.z_sum, &other.z_sum),
            (&mut self.z_sq, &other.z_sq),
        ];
        for (a, b) in pairs {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        self.mean_sq += other.mean_sq;
    }
}

/// Monte-Carlo estimate of the per-coordinate and mean error of the
/// mechanism.
///
/// The deviation `M(x) - M_count x` equals `sigma L z`, so it is evaluated on
/// the noise path directly. This makes the estimates independent of `x` and
/// exactly proportional to `1/mu` for a fixed seed.
pub fn estimate_errors(cfg: &MechanismConfig<'_>) -> Result<SimulationResult> {
    cfg.validate()?;
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let f = cfg.factorization;
    let n = f.n();
    let sigma = cfg.sigma();
    let row_norms: Vec<f64> = f.row_norms_sq_left().iter().map(|v| v.sqrt()).collect();
    let blocks = cfg.trials.div_ceil(BLOCK);

    let partials: Vec<Partial> = (0..blocks)
        .into_par_iter()
        .map(|b| -> Result<Partial> {
            let mut acc = Partial::zeros(n);
            for t in b * BLOCK..((b + 1) * BLOCK).min(cfg.trials) {
                let z = noise(cfg.seed, t, f.inner_dim());
                let lz = f.left().apply(&z)?;
                let mut total = 0.0;
                for i in 0..n {
                    let dev = sigma * lz[i];
                    let dev_sq = dev * dev;
                    acc.dev_sq[i] += dev_sq;
                    total += dev_sq;
                    let zs = if row_norms[i] > 0.0 {
                        lz[i] / row_norms[i]
                    } else {
                        0.0
                    };
                    acc.z_sum[i] += zs;
                    acc.z_sq[i] += zs * zs;
                }
                acc.mean_sq += total / n as f64;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;

    let mut total = Partial::zeros(n);
    for p in &partials {
        total.merge(p);
    }
    let trials = cfg.trials as f64;
    let empirical_err_inf = total
        .dev_sq
        .iter()
        .map(|s| (s / trials).sqrt())
        .fold(0.0, f64::max);
    let empirical_err_2 = (total.mean_sq / trials).sqrt();
    let z_scores = total
        .z_sum
        .iter()
        .zip(&total.z_sq)
        .map(|(s, s2)| {
            let mean = s / trials;
            let variance = if cfg.trials > 1 {
                (s2 - trials * mean * mean) / (trials - 1.0)
            } else {
                0.0
            };
            ZScoreSummary { mean, variance }
        })
        .collect();

    Ok(SimulationResult {
        trials: cfg.trials,
        sigma,
        empirical_err_inf,
        empirical_err_2,
        theory_err_inf: maxse(f) / cfg.mu,
        theory_err_2: meanse(f) / cfg.mu,
        z_scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorizations::{factorize, sqrt_factorization, Method};

    fn prefix(x: &[f64]) -> Vec<f64> {
        let mut acc = 0.0;
        x.iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect()
    }

    #[test]
    fn noiseless_release_is_prefix_sum() {
        for method in Method::ALL {
            let f = factorize(method, 12).unwrap();
            let x: Vec<f64> = (0..12).map(|i| i as f64 - 3.5).collect();
            let cfg = MechanismConfig::new(&f, f64::INFINITY, 1, 7, x.clone());
            assert_eq!(cfg.sigma(), 0.0);
            let out = run_mechanism_once(&cfg, 0).unwrap();
            for (a, b) in out.iter().zip(prefix(&x)) {
                assert!((a - b).abs() < 1e-10, "{method}");
            }
        }
    }

    #[test]
    fn single_coordinate_sample_is_standard_normal_draw() {
        let f = sqrt_factorization(1).unwrap();
        let cfg = MechanismConfig::new(&f, 1.0, 1, 42, vec![0.0]);
        assert_eq!(cfg.sigma(), 1.0);
        let out = run_mechanism_once(&cfg, 3).unwrap();
        assert_eq!(out, noise(42, 3, 1));
    }

    #[test]
    fn releases_differ_by_prefix_sums_of_input_difference() {
        for method in Method::ALL {
            let f = factorize(method, 9).unwrap();
            let x: Vec<f64> = (0..9).map(|i| (i as f64).sin()).collect();
            let x2: Vec<f64> = (0..9).map(|i| (i as f64).cos() * 2.0).collect();
            let a =
                run_mechanism_once(&MechanismConfig::new(&f, 1.0, 1, 5, x.clone()), 11).unwrap();
            let b =
                run_mechanism_once(&MechanismConfig::new(&f, 1.0, 1, 5, x2.clone()), 11).unwrap();
            let diff: Vec<f64> = x.iter().zip(&x2).map(|(p, q)| p - q).collect();
            for ((p, q), e) in a.iter().zip(&b).zip(prefix(&diff)) {
                assert!((p - q - e).abs() < 1e-10, "{method}");
            }
        }
    }

    #[test]
    fn release_deviation_is_scaled_noise_path() {
        let f = factorize(Method::Nsr, 16).unwrap();
        let x = vec![1.0; 16];
        let cfg = MechanismConfig::new(&f, 0.5, 1, 9, x.clone());
        let out = run_mechanism_once(&cfg, 2).unwrap();
        let lz = f.left().apply(&noise(9, 2, 16)).unwrap();
        for ((o, p), l) in out.iter().zip(prefix(&x)).zip(lz) {
            assert!((o - p - cfg.sigma() * l).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_config() {
        let f = sqrt_factorization(4).unwrap();
        assert!(run_mechanism_once(&MechanismConfig::new(&f, 1.0, 1, 0, vec![0.0; 3]), 0).is_err());
        assert!(estimate_errors(&MechanismConfig::new(&f, 0.0, 10, 0, vec![0.0; 4])).is_err());
        assert!(estimate_errors(&MechanismConfig::new(&f, -1.0, 10, 0, vec![0.0; 4])).is_err());
        assert!(estimate_errors(&MechanismConfig::new(&f, 1.0, 0, 0, vec![0.0; 4])).is_err());
    }

    #[test]
    fn sqrt_n1_recovers_unit_variance() {
        let f = sqrt_factorization(1).unwrap();
        let res = estimate_errors(&MechanismConfig::new(&f, 1.0, 100_000, 1, vec![0.0])).unwrap();
        assert!(
            (0.99..=1.01).contains(&res.empirical_err_inf),
            "{}",
            res.empirical_err_inf
        );
        assert_eq!(res.theory_err_inf, 1.0);
    }

    #[test]
    fn deterministic_and_input_independent() {
        let f = factorize(Method::GroupAlgebra, 8).unwrap();
        let a = estimate_errors(&MechanismConfig::new(&f, 1.0, 700, 3, vec![0.0; 8])).unwrap();
        let b = estimate_errors(&MechanismConfig::new(&f, 1.0, 700, 3, vec![0.0; 8])).unwrap();
        let c = estimate_errors(&MechanismConfig::new(&f, 1.0, 700, 3, vec![5.0; 8])).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn errors_scale_inversely_with_mu() {
        for method in Method::ALL {
            let f = factorize(method, 10).unwrap();
            let one =
                estimate_errors(&MechanismConfig::new(&f, 1.0, 300, 8, vec![0.0; 10])).unwrap();
            let two =
                estimate_errors(&MechanismConfig::new(&f, 2.0, 300, 8, vec![0.0; 10])).unwrap();
            assert_eq!(two.empirical_err_inf, one.empirical_err_inf / 2.0);
            assert_eq!(two.empirical_err_2, one.empirical_err_2 / 2.0);
        }
    }

    #[test]
    fn z_scores_look_standard_normal() {
        let f = factorize(Method::Nsr, 32).unwrap();
        let res = estimate_errors(&MechanismConfig::new(&f, 1.0, 4000, 21, vec![0.0; 32])).unwrap();
        assert!(
            res.gaussianity_failures().is_empty(),
            "{:?}",
            res.gaussianity_failures()
        );
    }
}
