//! Special functions and summation helpers.
//!
//! The normal tail is evaluated through `libm::erfc` (a port of the FreeBSD
//! `s_erf.c` rational approximations, sub-ulp on the real line). For arguments
//! where `erfc` underflows the log-tail switches to a continued fraction for
//! the Mills ratio. Incomplete gamma and beta functions come from `statrs`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// `ln(sqrt(2 pi))`.
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Above this argument the log-tail uses the Mills-ratio continued fraction.
const MILLS_SWITCH: f64 = 30.0;

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Upper tail `1 - Phi(x)` of the standard normal law.
///
/// Relative accuracy is better than `1e-12` for `|x| <= 30`; for large
/// negative `x` the value rounds to exactly 1.
pub fn normal_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Lower tail `Phi(x)`.
pub fn normal_cdf(x: f64) -> f64 {
    normal_tail(-x)
}

/// Mills ratio `(1 - Phi(x)) / phi(x)` for `x > 0`.
///
/// Uses the Laplace continued fraction `1/(x + 1/(x + 2/(x + 3/(x + ...))))`
/// above [`MILLS_SWITCH`] and the direct quotient below it.
pub fn mills_ratio(x: f64) -> f64 {
    if x < MILLS_SWITCH {
        return normal_tail(x) / normal_pdf(x);
    }
    // Modified Lentz evaluation of b0 + a1/(b1 + a2/(b2 + ...)) with
    // b_k = x and a_k = k.
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

/// Natural logarithm of `1 - Phi(x)`, finite for every finite `x`.
pub fn log_normal_tail(x: f64) -> f64 {
    if x < MILLS_SWITCH {
        normal_tail(x).ln()
    } else {
        -0.5 * x * x - LN_SQRT_2PI + mills_ratio(x).ln()
    }
}

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    statrs::function::gamma::gamma_ur(a, x)
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    statrs::function::gamma::gamma_lr(a, x)
}

/// `P(K >= k)` for `K ~ Binomial(n, p)`, via the regularized incomplete beta
/// identity `P(K >= k) = I_p(k, n - k + 1)`.
pub fn binomial_sf(n: u64, p: f64, k: i64) -> f64 {
    if k <= 0 {
        return 1.0;
    }
    if k as u64 > n {
        return 0.0;
    }
    let k = k as f64;
    let n = n as f64;
    statrs::function::beta::beta_reg(k, n - k + 1.0, p)
}

/// `P(K <= k)` for `K ~ Binomial(n, p)`.
pub fn binomial_cdf(n: u64, p: f64, k: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    if k as u64 >= n {
        return 1.0;
    }
    // P(K <= k) = P(n - K >= n - k) with n - K ~ Binomial(n, 1 - p).
    binomial_sf(n, 1.0 - p, n as i64 - k)
}

/// Rounds `u` to the nearest integer when it is within `1e-9` (relative) of
/// one, so that lattice thresholds computed in floating point land on the
/// intended grid point.
pub fn snap_to_integer(u: f64) -> f64 {
    let r = u.round();
    if (u - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        u
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of a sequence.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Streaming mean and variance (Welford), mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(&mut self, other: &RunningStats) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / total as f64;
        self.mean += delta * w;
        self.m2 += other.m2 + delta * delta * self.count as f64 * w;
        self.count = total;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two observations.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}
