//! Ground-truth estimators: exact tails, naive Monte Carlo and exponentially
//! tilted importance sampling.
//!
//! All events are strict: an estimator of the tail at `threshold` targets
//! `P(Z_1 + ... + Z_n > threshold)`. Simulated sums of lattice laws carry
//! rounding error, so sums within `1e-9` (relative) of the threshold are
//! treated as equal to it, matching the snapping of the exact tails.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::Method;
use crate::cgf::{CgfProfile, CumulantFunction};
use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::rng::{chunks, substream, StreamRng};
use crate::saddle::solve_saddle;
use crate::special::RunningStats;

/// Smallest sample count the simulation estimators accept.
pub const MIN_SAMPLES: u64 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub method: Method,
    pub seed: u64,
    /// Tilt parameter `h` used for sampling; 0 for naive Monte Carlo.
    pub tilt: f64,
    /// Wall time in seconds. Not part of any determinism guarantee.
    pub elapsed: f64,
    pub warnings: Vec<String>,
}

impl SimulationReport {
    /// Standard error relative to the estimate; infinite for a zero estimate.
    pub fn relative_std_error(&self) -> f64 {
        if self.estimate == 0.0 {
            f64::INFINITY
        } else {
            self.std_error / self.estimate.abs()
        }
    }
}

/// Runs `draw` once per sample over the fixed chunk partition of
/// `n_samples`, in parallel, and merges the chunk statistics in index order.
pub(crate) fn run_chunked<F>(seed: u64, n_samples: u64, draw: F) -> RunningStats
where
    F: Fn(&mut StreamRng) -> f64 + Sync,
{
    let parts: Vec<(u64, u64)> = chunks(n_samples).collect();
    let stats: Vec<RunningStats> = parts
        .par_iter()
        .map(|&(index, count)| {
            let mut rng = substream(seed, index);
            let mut acc = RunningStats::default();
            for _ in 0..count {
                acc.push(draw(&mut rng));
            }
            acc
        })
        .collect();
    let mut total = RunningStats::default();
    for s in &stats {
        total.merge(s);
    }
    total
}

pub(crate) fn check_samples(n_samples: u64) -> Result<()> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "n_samples = {n_samples} is below the minimum of {MIN_SAMPLES}"
        )));
    }
    Ok(())
}

fn check_inputs(n: u64, threshold: f64, n_samples: u64) -> Result<()> {
    check_samples(n_samples)?;
    if n == 0 {
        return Err(Error::InvalidArgument("number of summands must be at least 1".into()));
    }
    if threshold.is_nan() {
        return Err(Error::InvalidArgument("threshold is NaN".into()));
    }
    Ok(())
}

/// Smallest simulated value counted as exceeding `threshold`; `scale` is
/// the typical magnitude of the summed terms.
pub(crate) fn event_cutoff(threshold: f64, scale: f64) -> f64 {
    threshold + 1e-9 * threshold.abs().max(scale)
}

/// Binomial standard error `sqrt(p (1 - p) / N)` of a hit fraction.
pub fn binomial_std_error(p: f64, n_samples: u64) -> f64 {
    (p * (1.0 - p) / n_samples as f64).max(0.0).sqrt()
}

/// Fraction of simulated sums exceeding `threshold`.
pub fn naive_mc_tail(
    spec: &DistributionSpec,
    n: u64,
    threshold: f64,
    n_samples: u64,
    seed: u64,
) -> Result<SimulationReport> {
    check_inputs(n, threshold, n_samples)?;
    let start = Instant::now();
    let sampler = spec.sampler();
    let cutoff = event_cutoff(threshold, n as f64 * spec.variance().sqrt());
    let stats = run_chunked(seed, n_samples, |rng| {
        let s: f64 = (0..n).map(|_| sampler.draw(rng)).sum();
        if s > cutoff {
            1.0
        } else {
            0.0
        }
    });
    let estimate = stats.mean();
    Ok(SimulationReport {
        estimate,
        std_error: binomial_std_error(estimate, n_samples),
        n_samples,
        method: Method::Mc,
        seed,
        tilt: 0.0,
        elapsed: start.elapsed().as_secs_f64(),
        warnings: Vec::new(),
    })
}

/// Importance-sampling estimate of the tail, tilting by the saddle root at
/// the per-summand mean `threshold / n`.
///
/// A non-positive target mean would call for a non-positive tilt; the
/// estimator then falls back to naive Monte Carlo with a warning.
pub fn tilted_is_tail(
    profile: &CgfProfile,
    n: u64,
    threshold: f64,
    n_samples: u64,
    seed: u64,
) -> Result<SimulationReport> {
    check_inputs(n, threshold, n_samples)?;
    let a = threshold / n as f64;
    if a <= 0.0 {
        let mut report = naive_mc_tail(profile.spec(), n, threshold, n_samples, seed)?;
        report.warnings.push(format!(
            "target mean {a} is not above the mean 0; fell back to naive Monte Carlo"
        ));
        return Ok(report);
    }
    let sol = solve_saddle(profile, a / profile.sigma())?;
    tilted_is_tail_at(profile, n, threshold, sol.h, n_samples, seed)
}

/// Importance-sampling estimate with a caller-chosen tilt `h`.
///
/// Each sample draws `S` from the `h`-tilted law and contributes
/// `1{S > threshold} exp(-h S + n kappa(h))`. At `h = 0` the weights are
/// exactly 1 and the estimate coincides with [`naive_mc_tail`] for the same
/// seed.
pub fn tilted_is_tail_at(
    profile: &CgfProfile,
    n: u64,
    threshold: f64,
    h: f64,
    n_samples: u64,
    seed: u64,
) -> Result<SimulationReport> {
    check_inputs(n, threshold, n_samples)?;
    let start = Instant::now();
    let tilted = profile.tilt(h)?;
    let sampler = tilted.sampler();
    let n_kappa = if h == 0.0 {
        0.0
    } else {
        n as f64 * profile.kappa_unchecked(h)
    };
    let cutoff = event_cutoff(threshold, n as f64 * profile.sigma());
    let stats = run_chunked(seed, n_samples, |rng| {
        let s: f64 = (0..n).map(|_| sampler.draw(rng)).sum();
        if s > cutoff {
            if h == 0.0 {
                1.0
            } else {
                (n_kappa - h * s).exp()
            }
        } else {
            0.0
        }
    });
    let mut warnings = Vec::new();
    if stats.mean() == 0.0 {
        warnings.push("no sample reached the tail event".to_string());
    }
    Ok(SimulationReport {
        estimate: stats.mean(),
        std_error: stats.std_error(),
        n_samples,
        method: Method::Is,
        seed,
        tilt: h,
        elapsed: start.elapsed().as_secs_f64(),
        warnings,
    })
}

/// Exact tail of an `n`-fold lattice sum by repeated convolution. Bernoulli
/// specs are converted to their two-atom lattice first.
pub fn exact_lattice_tail(spec: &DistributionSpec, n: u64, threshold: f64) -> Result<f64> {
    let lattice_spec = spec.to_lattice()?;
    let lattice = lattice_spec.as_lattice().expect("lattice spec");
    lattice.sum_tail(n, threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Family;

    fn spec(family: Family) -> DistributionSpec {
        DistributionSpec::new(family).unwrap()
    }

    fn bern03() -> DistributionSpec {
        spec(Family::CenteredBernoulli { p: 0.3 })
    }

    #[test]
    fn naive_gaussian_median() {
        let r = naive_mc_tail(&spec(Family::Gaussian { sigma: 1.0 }), 1, 0.0, 1_000_000, 3).unwrap();
        assert!((r.estimate - 0.5).abs() < 0.0015, "{}", r.estimate);
        assert!((r.std_error - 0.0005).abs() < 1e-6);
    }

    #[test]
    fn naive_bernoulli_matches_binomial() {
        let s = bern03();
        let exact = s.exact_sum_tail(10, 2.0).unwrap();
        let r = naive_mc_tail(&s, 10, 2.0, 1_000_000, 11).unwrap();
        assert!(
            (r.estimate - exact).abs() < 4.0 * r.std_error,
            "{} vs {exact}",
            r.estimate
        );
    }

    #[test]
    fn impossible_event_is_exactly_zero() {
        let r = naive_mc_tail(&bern03(), 10, 7.0, 1000, 1).unwrap();
        assert_eq!(r.estimate, 0.0);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn too_few_samples_rejected() {
        assert!(naive_mc_tail(&bern03(), 10, 0.0, 99, 1).is_err());
    }

    #[test]
    fn is_bernoulli_benchmark() {
        let s = bern03();
        // 50 or more successes out of 100: K - 30 > 19.5.
        let exact = s.exact_sum_tail(100, 19.5).unwrap();
        let r = tilted_is_tail(&CgfProfile::new(s), 100, 19.5, 100_000, 5).unwrap();
        assert!((r.estimate - exact).abs() < 4.0 * r.std_error);
        assert!(r.relative_std_error() < 0.02);
        assert!(r.tilt > 0.0);
    }

    #[test]
    fn is_exponential_benchmark() {
        let s = spec(Family::CenteredExponential { rate: 1.0 });
        let exact = s.exact_sum_tail(50, 50.0).unwrap();
        let r = tilted_is_tail(&CgfProfile::new(s), 50, 50.0, 100_000, 9).unwrap();
        assert!(
            (r.estimate - exact).abs() < 4.0 * r.std_error,
            "{} vs {exact}",
            r.estimate
        );
    }

    #[test]
    fn zero_tilt_reduces_to_naive() {
        for s in [spec(Family::Gaussian { sigma: 1.0 }), bern03()] {
            let p = CgfProfile::new(s.clone());
            let is = tilted_is_tail_at(&p, 10, 0.0, 0.0, 5000, 21).unwrap();
            let mc = naive_mc_tail(&s, 10, 0.0, 5000, 21).unwrap();
            assert_eq!(is.estimate.to_bits(), mc.estimate.to_bits());
        }
    }

    #[test]
    fn non_positive_target_falls_back() {
        let r = tilted_is_tail(&CgfProfile::new(bern03()), 10, -1.0, 1000, 2).unwrap();
        assert_eq!(r.method, Method::Mc);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn out_of_range_target_rejected() {
        let r = tilted_is_tail(&CgfProfile::new(bern03()), 10, 8.0, 1000, 2);
        assert!(matches!(r, Err(Error::TargetOutOfRange { .. })));
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let p = CgfProfile::new(bern03());
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| tilted_is_tail(&p, 100, 19.5, 20_000, 77).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn exact_lattice_examples() {
        let coin = DistributionSpec::lattice(&[(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        assert!((exact_lattice_tail(&coin, 4, 3.5).unwrap() - 0.0625).abs() < 1e-15);
        assert!((exact_lattice_tail(&coin, 4, -4.5).unwrap() - 1.0).abs() < 1e-15);
        let s = bern03();
        let a = exact_lattice_tail(&s, 10, 2.0).unwrap();
        let b = s.exact_sum_tail(10, 2.0).unwrap();
        assert!((a - b).abs() < 1e-13);
        assert!(exact_lattice_tail(&spec(Family::Gaussian { sigma: 1.0 }), 3, 0.0).is_err());
    }
}
