//! Saddle-point equation, correction function and rate exponent.
//!
//! For a standardized target `z` the tilt `h` solves `mbar(h) = sigma * z`.
//! At the root the rate exponent is `alpha = h * mbar - kappa(h)` (the
//! Legendre transform of `kappa` at `sigma * z`) and the correction function
//! satisfies `z^3 * lambda(z) = z^2 / 2 - alpha`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cgf::{Bound, CumulantFunction};
use crate::error::{Error, Result};

/// Newton iterations allowed after bracketing.
pub const MAX_ITERATIONS: u32 = 200;

/// Below this `|z|` the correction function is taken from its two-term series.
pub const SERIES_CUTOFF: f64 = 1e-3;

/// Width of the cubic blend between the series and the direct formula.
const BLEND_WIDTH: f64 = 1e-3;

/// `lambda_fn` refuses targets closer to zero than this.
pub const DEGENERATE_Z: f64 = 1e-8;

/// Zoom levels used by [`legendre_alpha_grid`].
const GRID_LEVELS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleSolution {
    pub z: f64,
    pub h: f64,
    pub mbar: f64,
    pub sigbar: f64,
    pub alpha: f64,
    pub lambda_z: f64,
    /// `1 / (|h| * sigbar * sqrt(2 pi))`; `None` at `z = 0`.
    pub b0: Option<f64>,
    pub iterations: u32,
}

fn out_of_range<C: CumulantFunction + ?Sized>(cgf: &C, target: f64) -> Error {
    Error::TargetOutOfRange {
        target,
        limits: cgf.drift_limits().to_string(),
    }
}

/// Solves `mbar(h) = sigma * z` for the unique root `h`.
pub fn solve_saddle<C: CumulantFunction + ?Sized>(cgf: &C, z: f64) -> Result<SaddleSolution> {
    if !z.is_finite() {
        return Err(Error::InvalidArgument(format!("target z = {z} is not finite")));
    }
    let sigma = cgf.sigma();
    let target = sigma * z;
    if !cgf.drift_limits().contains(target) {
        return Err(out_of_range(cgf, target));
    }
    if z == 0.0 {
        return Ok(SaddleSolution {
            z,
            h: 0.0,
            mbar: 0.0,
            sigbar: sigma,
            alpha: 0.0,
            lambda_z: lambda_coeffs(cgf).0,
            b0: None,
            iterations: 0,
        });
    }
    let (h, iterations) = find_tilt(cgf, z)?;
    let mbar = cgf.mbar_unchecked(h);
    let sigbar = cgf.sigbar2_unchecked(h).sqrt();
    // The Legendre objective h * target - kappa(h) is stationary at the
    // root, so evaluating it at the target keeps the solver's residual out of
    // alpha to first order.
    let alpha = h * target - cgf.kappa_unchecked(h);
    Ok(SaddleSolution {
        z,
        h,
        mbar,
        sigbar,
        alpha,
        lambda_z: blended_lambda(cgf, z, alpha),
        b0: Some(1.0 / (h.abs() * sigbar * (2.0 * PI).sqrt())),
        iterations,
    })
}

/// Bracketing plus safeguarded Newton on the strictly increasing `mbar`.
///
/// The search runs on `u = sign(z) * h >= 0` so both tails share one code
/// path. The bracket `[0, hi]` grows geometrically from the inversion-series
/// guess `z/sigma - gamma3 z^2 / (2 sigma^4)`, halving the distance to a
/// finite strip edge instead of crossing it.
fn find_tilt<C: CumulantFunction + ?Sized>(cgf: &C, z: f64) -> Result<(f64, u32)> {
    let c = cgf.cumulants();
    let sigma = c.sigma2.sqrt();
    let s = z.signum();
    let goal = (sigma * z).abs();
    let tol = 1e-10 * sigma.max(goal);
    let strip = cgf.strip();
    let edge = if s > 0.0 {
        strip.upper.finite()
    } else {
        match strip.lower {
            Bound::Finite(v) => Some(-v),
            Bound::Unbounded => None,
        }
    };
    let g = |u: f64| s * cgf.mbar_unchecked(s * u);
    let slope = |u: f64| cgf.sigbar2_unchecked(s * u);

    let series = s * (z / sigma - c.gamma3 * z * z / (2.0 * c.sigma2 * c.sigma2));
    let mut guess = if series > 0.0 && series.is_finite() {
        series
    } else {
        z.abs() / sigma
    };
    if let Some(a) = edge {
        if guess >= a {
            guess = 0.5 * a;
        }
    }

    let mut lo = 0.0;
    let mut hi = guess;
    let mut grown = 0;
    while g(hi) < goal {
        lo = hi;
        let mut next = 2.0 * hi;
        if let Some(a) = edge {
            if next >= a {
                next = hi + 0.5 * (a - hi);
                if a - next <= 1e-12 * a {
                    return Err(out_of_range(cgf, s * goal));
                }
            }
        }
        hi = next;
        grown += 1;
        if grown > 2000 || !hi.is_finite() {
            return Err(Error::NoConvergence {
                iterations: 0,
                residual: g(lo) - goal,
            });
        }
    }

    let mut u = guess.clamp(lo, hi);
    let mut residual = f64::INFINITY;
    for it in 1..=MAX_ITERATIONS {
        let f = g(u) - goal;
        residual = f;
        if f.abs() <= tol {
            return Ok((s * u, it));
        }
        if f < 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let mut next = u - f / slope(u);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == u {
            break;
        }
        u = next;
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        residual,
    })
}

/// `lambda(z)` from the two-term series near zero, the direct formula
/// `(z^2/2 - alpha)/z^3` elsewhere, and a smoothstep blend in between.
fn blended_lambda<C: CumulantFunction + ?Sized>(cgf: &C, z: f64, alpha: f64) -> f64 {
    let (c0, c1) = lambda_coeffs(cgf);
    let series = c0 + c1 * z;
    let a = z.abs();
    if a < SERIES_CUTOFF {
        return series;
    }
    let direct = (0.5 * z * z - alpha) / (z * z * z);
    if a >= SERIES_CUTOFF + BLEND_WIDTH {
        return direct;
    }
    let t = (a - SERIES_CUTOFF) / BLEND_WIDTH;
    let w = t * t * (3.0 - 2.0 * t);
    (1.0 - w) * series + w * direct
}

/// Correction function `lambda(z)`.
pub fn lambda_fn<C: CumulantFunction + ?Sized>(cgf: &C, z: f64) -> Result<f64> {
    if z.abs() < DEGENERATE_Z {
        return Err(Error::Degenerate(format!(
            "|z| = {} is below {DEGENERATE_Z}; use the series coefficients",
            z.abs()
        )));
    }
    Ok(solve_saddle(cgf, z)?.lambda_z)
}

/// Leading series coefficients `(c0, c1)` of `lambda(z)`.
pub fn lambda_coeffs<C: CumulantFunction + ?Sized>(cgf: &C) -> (f64, f64) {
    let c = cgf.cumulants();
    let s2 = c.sigma2;
    let s3 = s2 * s2.sqrt();
    let c0 = c.gamma3 / (6.0 * s3);
    let c1 = (s2 * c.gamma4 - 3.0 * c.gamma3 * c.gamma3) / (24.0 * s2 * s2 * s2);
    (c0, c1)
}

/// Rate exponent `alpha(c)` at the tilted mean `sigma * c`, from the saddle
/// root.
pub fn legendre_alpha<C: CumulantFunction + ?Sized>(cgf: &C, c: f64) -> Result<f64> {
    Ok(solve_saddle(cgf, c)?.alpha)
}

/// `sup_h (h * sigma * c - kappa(h))` by grid search (no derivatives, no
/// root finding). Each level evaluates `points` equispaced tilts and zooms
/// into the two cells around the best one.
pub fn legendre_alpha_grid<C: CumulantFunction + ?Sized>(cgf: &C, c: f64, points: usize) -> Result<f64> {
    if points < 3 {
        return Err(Error::InvalidArgument("grid needs at least 3 points".into()));
    }
    let sigma = cgf.sigma();
    let target = sigma * c;
    if !cgf.drift_limits().contains(target) {
        return Err(out_of_range(cgf, target));
    }
    if c == 0.0 {
        return Ok(0.0);
    }
    let s = c.signum();
    let strip = cgf.strip();
    let edge = if s > 0.0 {
        strip.upper.finite()
    } else {
        match strip.lower {
            Bound::Finite(v) => Some(-v),
            Bound::Unbounded => None,
        }
    };
    let objective = |u: f64| u * target.abs() - cgf.kappa_unchecked(s * u);

    // The objective is concave with value 0 at u = 0, so it is negative past
    // its maximum; doubling until it drops below zero brackets the sup.
    let mut top = match edge {
        Some(a) => a * (1.0 - 1e-9),
        None => {
            let mut top = c.abs().max(1.0) / sigma;
            let mut doublings = 0;
            while objective(top) >= 0.0 {
                top *= 2.0;
                doublings += 1;
                if doublings > 2000 {
                    return Err(Error::NoConvergence {
                        iterations: doublings,
                        residual: objective(top),
                    });
                }
            }
            top
        }
    };
    let mut bottom = 0.0;
    let mut best = f64::NEG_INFINITY;
    for _ in 0..GRID_LEVELS {
        let step = (top - bottom) / (points - 1) as f64;
        let (idx, val) = (0..points).map(|i| (i, objective(bottom + i as f64 * step))).fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
        );
        best = best.max(val);
        let new_bottom = bottom + idx.saturating_sub(1) as f64 * step;
        let new_top = bottom + (idx + 1).min(points - 1) as f64 * step;
        bottom = new_bottom;
        top = new_top;
        if top - bottom <= f64::EPSILON * top.abs() {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgf::CgfProfile;
    use crate::dist::{DistributionSpec, Family};

    fn profile(family: Family) -> CgfProfile {
        CgfProfile::new(DistributionSpec::new(family).unwrap())
    }

    fn exp1() -> CgfProfile {
        profile(Family::CenteredExponential { rate: 1.0 })
    }

    fn bern03() -> CgfProfile {
        profile(Family::CenteredBernoulli { p: 0.3 })
    }

    fn gauss1() -> CgfProfile {
        profile(Family::Gaussian { sigma: 1.0 })
    }

    fn coin() -> CgfProfile {
        profile(Family::FiniteLattice {
            atoms: vec![(-1.0, 0.5), (1.0, 0.5)],
        })
    }

    /// Closed-form `z^2/2 - z + ln(1+z)` over `z^3`, with the log series
    /// used for small `z` so that the oracle is free of cancellation.
    fn exp_lambda_oracle(z: f64) -> f64 {
        if z.abs() < 0.05 {
            // ln(1+z) - z + z^2/2 = sum_{k>=3} (-1)^{k+1} z^k / k
            (0..60).map(|j| (-z).powi(j) / (j as f64 + 3.0)).sum()
        } else {
            (0.5 * z * z - z + z.ln_1p()) / z.powi(3)
        }
    }

    #[test]
    fn gaussian_saddle() {
        let s = solve_saddle(&gauss1(), 2.0).unwrap();
        assert!((s.h - 2.0).abs() < 1e-12);
        assert!((s.alpha - 2.0).abs() < 1e-12);
        assert!(s.lambda_z.abs() < 1e-12);
        assert!((s.b0.unwrap() - 1.0 / (2.0 * (2.0 * PI).sqrt())).abs() < 1e-12);
    }

    #[test]
    fn exponential_saddle() {
        let s = solve_saddle(&exp1(), 1.0).unwrap();
        assert!((s.h - 0.5).abs() < 1e-12);
        assert!((s.mbar - 1.0).abs() < 1e-10);
        assert!((s.sigbar - 2.0).abs() < 1e-10);
        // alpha(c) = c - ln(1 + c).
        assert!((s.alpha - (1.0 - 2f64.ln())).abs() < 1e-12);
        assert!((s.alpha - 0.306_852_8).abs() < 1e-7);
        assert!((s.b0.unwrap() - 0.398_942_3).abs() < 1e-7);
    }

    #[test]
    fn bernoulli_saddle_matches_kl_divergence() {
        let p: f64 = 0.3;
        let sigma = (p * (1.0 - p)).sqrt();
        let z = 0.2 / sigma;
        let a: f64 = 0.5;
        let kl = a * (a / p).ln() + (1.0 - a) * ((1.0 - a) / (1.0 - p)).ln();
        let s = solve_saddle(&bern03(), z).unwrap();
        assert!((s.alpha - kl).abs() < 1e-12);
        assert!((s.alpha - 0.087_176_7).abs() < 1e-7);
        assert!((z - 0.436_435_8).abs() < 1e-7);
    }

    #[test]
    fn out_of_range_targets() {
        let b = bern03();
        let sigma = 0.21f64.sqrt();
        assert!(matches!(
            solve_saddle(&b, 0.7 / sigma),
            Err(Error::TargetOutOfRange { .. })
        ));
        assert!(matches!(
            solve_saddle(&b, -0.31 / sigma),
            Err(Error::TargetOutOfRange { .. })
        ));
        assert!(matches!(
            solve_saddle(&exp1(), -1.0),
            Err(Error::TargetOutOfRange { .. })
        ));
        assert!(solve_saddle(&exp1(), -0.999).is_ok());
        assert!(solve_saddle(&exp1(), 1e6).is_ok());
    }

    #[test]
    fn near_saturation_still_converges() {
        let b = bern03();
        let sigma = 0.21f64.sqrt();
        let s = solve_saddle(&b, 0.699_999 / sigma).unwrap();
        assert!(s.h > 10.0);
        assert!((s.mbar - 0.699_999).abs() <= 1e-10 * 0.7);
    }

    #[test]
    fn lambda_examples() {
        assert!(lambda_fn(&gauss1(), 0.5).unwrap().abs() < 1e-15);
        let got = lambda_fn(&exp1(), 0.1).unwrap();
        assert!(
            (got - exp_lambda_oracle(0.1)).abs() < 1e-10,
            "{got} vs {}",
            exp_lambda_oracle(0.1)
        );
        assert!((got - 0.310_18).abs() < 1e-6);
        assert!((lambda_fn(&exp1(), 1e-4).unwrap() - 1.0 / 3.0).abs() < 1e-4);
        assert!(matches!(lambda_fn(&exp1(), 1e-9), Err(Error::Degenerate(_))));
    }

    #[test]
    fn lambda_blend_is_accurate_across_the_switch() {
        let e = exp1();
        for &z in &[5e-4, 1e-3, 1.5e-3, 2e-3, 3e-3, -1.2e-3] {
            let got = lambda_fn(&e, z).unwrap();
            let want = exp_lambda_oracle(z);
            assert!((got - want).abs() < 1e-6, "z={z}: {got} vs {want}");
        }
    }

    #[test]
    fn coefficient_examples() {
        assert_eq!(lambda_coeffs(&gauss1()), (0.0, 0.0));
        let (c0, c1) = lambda_coeffs(&exp1());
        assert!((c0 - 1.0 / 3.0).abs() < 1e-15 && (c1 + 0.25).abs() < 1e-15);

        // Richardson extrapolation of lambda(z) to z = 0 from z = 0.02, 0.01, 0.005.
        let b = bern03();
        let l = |z: f64| lambda_fn(&b, z).unwrap();
        let r1 = 2.0 * l(0.01) - l(0.02);
        let r2 = 2.0 * l(0.005) - l(0.01);
        let limit = (4.0 * r2 - r1) / 3.0;
        let (c0, _) = lambda_coeffs(&b);
        assert!((c0 - limit).abs() < 1e-6, "{c0} vs {limit}");
        assert!((c0 - 0.084 / (6.0 * 0.21f64.powf(1.5))).abs() < 1e-15);
        assert!((c0 - 0.145_479).abs() < 1e-6);
    }

    #[test]
    fn legendre_examples() {
        assert!((legendre_alpha(&gauss1(), 1.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((legendre_alpha(&exp1(), 2.0).unwrap() - (2.0 - 3f64.ln())).abs() < 1e-12);
        for p in [gauss1(), exp1(), bern03(), coin()] {
            assert_eq!(legendre_alpha(&p, 0.0).unwrap(), 0.0);
            assert_eq!(legendre_alpha_grid(&p, 0.0, 2001).unwrap(), 0.0);
        }
        let grid = legendre_alpha_grid(&exp1(), 2.0, 2001).unwrap();
        assert!((grid - (2.0 - 3f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn sign_follows_target_and_identities_hold() {
        for p in [exp1(), bern03(), coin(), gauss1()] {
            for &z in &[-0.6, -0.1, -1e-3, 1e-3, 0.05, 0.4, 1.2] {
                let s = match solve_saddle(&p, z) {
                    Ok(s) => s,
                    Err(Error::TargetOutOfRange { .. }) => continue,
                    Err(e) => panic!("{e}"),
                };
                assert_eq!(s.h.signum(), z.signum());
                assert!(s.alpha > 0.0);
                let sigma = p.sigma();
                let eq18 = s.mbar * s.mbar / (2.0 * sigma * sigma) - s.h * s.mbar + p.kappa(s.h).unwrap();
                assert!((z.powi(3) * s.lambda_z - eq18).abs() < 1e-10);
                assert!((s.alpha - (0.5 * z * z - z.powi(3) * s.lambda_z)).abs() < 1e-10);
                assert!((s.mbar - sigma * z).abs() <= 1e-10 * sigma.max((sigma * z).abs()));
            }
        }
    }

    #[test]
    fn symmetric_law_is_sign_symmetric() {
        let p = coin();
        for &c in &[0.1, 0.3, 0.77] {
            let a = legendre_alpha(&p, c).unwrap();
            let b = legendre_alpha(&p, -c).unwrap();
            assert!((a - b).abs() < 1e-13);
            let l1 = lambda_fn(&p, c).unwrap();
            let l2 = lambda_fn(&p, -c).unwrap();
            assert!((l1 + l2).abs() < 1e-10);
        }
    }

    #[test]
    fn series_remainder_is_quadratic() {
        for p in [exp1(), bern03()] {
            let (c0, c1) = lambda_coeffs(&p);
            let ratios: Vec<f64> = [0.2, 0.1, 0.05, 0.025, 0.0125]
                .iter()
                .map(|&z| (lambda_fn(&p, z).unwrap() - c0 - c1 * z).abs() / (z * z))
                .collect();
            let max = ratios.iter().copied().fold(0.0, f64::max);
            let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(max < 2.0 * min + 1e-6, "{ratios:?}");
        }
    }

    #[test]
    fn inversion_series_remainder_is_cubic() {
        for p in [exp1(), bern03()] {
            let c = p.cumulants();
            let sigma = c.sigma2.sqrt();
            let ks: Vec<f64> = [0.2, 0.1, 0.05, 0.025, 0.0125]
                .iter()
                .map(|&z| {
                    let h = solve_saddle(&p, z).unwrap().h;
                    let series = z / sigma - c.gamma3 * z * z / (2.0 * c.sigma2 * c.sigma2);
                    (h - series).abs() / z.powi(3)
                })
                .collect();
            let max = ks.iter().copied().fold(0.0, f64::max);
            let min = ks.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(max < 2.0 * min, "{ks:?}");
        }
    }

    #[test]
    fn alpha_is_strictly_convex() {
        for p in [exp1(), bern03(), coin()] {
            let cs: Vec<f64> = (-4..=8).map(|i| 0.05 * i as f64).collect();
            let alphas: Vec<f64> = cs.iter().map(|&c| legendre_alpha(&p, c).unwrap()).collect();
            for w in alphas.windows(3) {
                assert!(w[0] - 2.0 * w[1] + w[2] > 0.0);
            }
        }
    }
}
