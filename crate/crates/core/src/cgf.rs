//! Cumulant generating functions, convergence strips and exponential tilts.
//!
//! For a zero-mean law `V` the generating function `R(h) = E[e^{hZ}]`
//! converges on an open strip `(-A2, A1)` around the origin. On that strip
//! `kappa = log R` is smooth and convex, its derivative `mbar(h)` is the mean
//! of the tilted law `dV_h = e^{hy} dV(y) / R(h)`, and `sigbar2(h)` is the
//! tilted variance. `mbar` increases strictly from `-sigma*C2` to
//! `sigma*C1` (the drift limits), which bounds the targets the saddle solver
//! can reach.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dist::{Cumulants, DistributionSpec, LawSampler, ShiftedLaw};
use crate::error::{Error, Result};
use crate::rng::StreamRng;

/// One endpoint of an open interval, either finite or unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Finite(f64),
    Unbounded,
}

impl Bound {
    pub fn is_finite(self) -> bool {
        matches!(self, Bound::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Bound::Finite(v) => Some(v),
            Bound::Unbounded => None,
        }
    }
}

/// An open interval `(lower, upper)`; an unbounded lower end is `-inf` and an
/// unbounded upper end is `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: Bound,
    pub upper: Bound,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lower: Bound::Unbounded,
        upper: Bound::Unbounded,
    };

    pub fn new(lower: Bound, upper: Bound) -> Self {
        Interval { lower, upper }
    }

    pub fn finite(lower: f64, upper: f64) -> Self {
        Interval::new(Bound::Finite(lower), Bound::Finite(upper))
    }

    /// Open-interval membership.
    pub fn contains(&self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        let above = match self.lower {
            Bound::Finite(lo) => x > lo,
            Bound::Unbounded => true,
        };
        let below = match self.upper {
            Bound::Finite(hi) => x < hi,
            Bound::Unbounded => true,
        };
        above && below
    }

    /// The image under `x -> -x`.
    pub fn negated(&self) -> Interval {
        let flip = |b: Bound| match b {
            Bound::Finite(v) => Bound::Finite(-v),
            Bound::Unbounded => Bound::Unbounded,
        };
        Interval::new(flip(self.upper), flip(self.lower))
    }

    /// The image under `x -> scale * x + shift` for `scale > 0`.
    pub fn affine(&self, scale: f64, shift: f64) -> Interval {
        let map = |b: Bound| match b {
            Bound::Finite(v) => Bound::Finite(scale * v + shift),
            Bound::Unbounded => Bound::Unbounded,
        };
        Interval::new(map(self.lower), map(self.upper))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lower {
            Bound::Finite(v) => write!(f, "({v}, ")?,
            Bound::Unbounded => write!(f, "(-inf, ")?,
        }
        match self.upper {
            Bound::Finite(v) => write!(f, "{v})"),
            Bound::Unbounded => write!(f, "+inf)"),
        }
    }
}

/// Endpoints of the convergence strip and the matching drift limits:
/// the strip is `(-a2, a1)` and `mbar` ranges over `(-sigma_c2, sigma_c1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripInfo {
    pub a1: Bound,
    pub a2: Bound,
    pub sigma_c1: Bound,
    pub sigma_c2: Bound,
}

/// Anything with a cumulant generating function the saddle solver can work
/// with: i.i.d. summands ([`CgfProfile`]) or a homogeneous process per unit
/// time ([`crate::process::ProcessProfile`]).
///
/// The `*_unchecked` methods assume `h` lies in the strip.
pub trait CumulantFunction {
    fn strip(&self) -> Interval;
    fn drift_limits(&self) -> Interval;
    fn cumulants(&self) -> Cumulants;
    fn kappa_unchecked(&self, h: f64) -> f64;
    fn mbar_unchecked(&self, h: f64) -> f64;
    fn sigbar2_unchecked(&self, h: f64) -> f64;

    fn sigma(&self) -> f64 {
        self.cumulants().sigma2.sqrt()
    }

    fn check_strip(&self, h: f64) -> Result<()> {
        let strip = self.strip();
        if strip.contains(h) {
            Ok(())
        } else {
            Err(Error::OutOfStrip {
                h,
                strip: strip.to_string(),
            })
        }
    }

    fn kappa(&self, h: f64) -> Result<f64> {
        self.check_strip(h)?;
        Ok(self.kappa_unchecked(h))
    }

    fn mbar(&self, h: f64) -> Result<f64> {
        self.check_strip(h)?;
        Ok(self.mbar_unchecked(h))
    }

    fn sigbar2(&self, h: f64) -> Result<f64> {
        self.check_strip(h)?;
        Ok(self.sigbar2_unchecked(h))
    }
}

/// CGF profile of a [`DistributionSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct CgfProfile {
    spec: DistributionSpec,
    strip: Interval,
    drift_limits: Interval,
    cumulants: Cumulants,
}

impl CgfProfile {
    /// Every built-in family has a generating function on an open strip
    /// around zero, so construction cannot fail.
    pub fn new(spec: DistributionSpec) -> Self {
        let repr = spec.repr();
        CgfProfile {
            strip: repr.strip(),
            drift_limits: repr.support(),
            cumulants: spec.moments(),
            spec,
        }
    }

    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    /// Profile of the sign-flipped law `-Z`.
    pub fn negated(&self) -> CgfProfile {
        CgfProfile::new(self.spec.negated())
    }

    pub fn strip_info(&self) -> StripInfo {
        strip(&self.spec)
    }

    /// Exponentially tilted law `e^{hy} dV(y) / R(h)`.
    pub fn tilt(&self, h: f64) -> Result<TiltedDistribution> {
        self.check_strip(h)?;
        Ok(TiltedDistribution {
            base: self.spec.clone(),
            h,
            mbar: self.mbar_unchecked(h),
            sigbar2: self.sigbar2_unchecked(h),
            repr: self.spec.repr().tilt(h),
        })
    }
}

impl CumulantFunction for CgfProfile {
    fn strip(&self) -> Interval {
        self.strip
    }

    fn drift_limits(&self) -> Interval {
        self.drift_limits
    }

    fn cumulants(&self) -> Cumulants {
        self.cumulants
    }

    fn kappa_unchecked(&self, h: f64) -> f64 {
        self.spec.repr().cgf(h)
    }

    fn mbar_unchecked(&self, h: f64) -> f64 {
        self.spec.repr().cgf_d1(h)
    }

    fn sigbar2_unchecked(&self, h: f64) -> f64 {
        self.spec.repr().cgf_d2(h)
    }
}

/// Convergence strip and drift limits of a distribution, in closed form.
pub fn strip(spec: &DistributionSpec) -> StripInfo {
    let repr = spec.repr();
    let strip = repr.strip();
    let drift = repr.support();
    let magnitude = |b: Bound| match b {
        Bound::Finite(v) => Bound::Finite(-v),
        Bound::Unbounded => Bound::Unbounded,
    };
    StripInfo {
        a1: strip.upper,
        a2: magnitude(strip.lower),
        sigma_c1: drift.upper,
        sigma_c2: magnitude(drift.lower),
    }
}

/// A distribution tilted by `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltedDistribution {
    pub base: DistributionSpec,
    pub h: f64,
    pub mbar: f64,
    pub sigbar2: f64,
    repr: ShiftedLaw,
}

impl TiltedDistribution {
    /// CGF of the tilted law at `s`; equals `kappa(h + s) - kappa(h)`.
    pub fn cgf(&self, s: f64) -> Result<f64> {
        let strip = self.strip();
        if !strip.contains(s) {
            return Err(Error::OutOfStrip {
                h: s,
                strip: strip.to_string(),
            });
        }
        Ok(self.repr.cgf(s))
    }

    /// Strip of the tilted CGF, `(-A2 - h, A1 - h)`.
    pub fn strip(&self) -> Interval {
        self.repr.strip()
    }

    pub fn sampler(&self) -> LawSampler {
        self.repr.sampler()
    }

    pub fn sample(&self, rng: &mut StreamRng, n: usize) -> Vec<f64> {
        let sampler = self.sampler();
        (0..n).map(|_| sampler.draw(rng)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Family;

    fn profile(family: Family) -> CgfProfile {
        CgfProfile::new(DistributionSpec::new(family).unwrap())
    }

    fn exp1() -> CgfProfile {
        profile(Family::CenteredExponential { rate: 1.0 })
    }

    fn bern03() -> CgfProfile {
        profile(Family::CenteredBernoulli { p: 0.3 })
    }

    fn gauss(sigma: f64) -> CgfProfile {
        profile(Family::Gaussian { sigma })
    }

    /// Composite Simpson rule.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn kappa_examples() {
        assert!((gauss(1.0).kappa(0.7).unwrap() - 0.245).abs() < 1e-15);
        // Quadrature of the centered exponential MGF at h = 0.5.
        let mgf = simpson(|y| (0.5 * (y - 1.0)).exp() * (-y).exp(), 0.0, 60.0, 120_000);
        let oracle = mgf.ln();
        let got = exp1().kappa(0.5).unwrap();
        assert!((got - oracle).abs() < 1e-10, "{got} vs {oracle}");
        assert!((got - 0.193_147).abs() < 1e-6);
        for p in [exp1(), bern03(), gauss(2.0)] {
            assert_eq!(p.kappa(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn derivative_examples() {
        let g = gauss(1.0);
        assert!((g.mbar(0.3).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(g.sigbar2(0.3).unwrap(), 1.0);
        let e = exp1();
        assert!((e.mbar(0.5).unwrap() - 1.0).abs() < 1e-14);
        assert!((e.sigbar2(0.5).unwrap() - 4.0).abs() < 1e-13);
        let fd1 = (e.kappa(0.5 + 1e-5).unwrap() - e.kappa(0.5 - 1e-5).unwrap()) / 2e-5;
        assert!((fd1 - 1.0).abs() < 1e-6);
        let b = bern03();
        assert!(b.mbar(0.0).unwrap().abs() < 1e-16);
        assert!((b.sigbar2(0.0).unwrap() - 0.21).abs() < 1e-15);
    }

    #[test]
    fn out_of_strip_is_rejected() {
        let e = exp1();
        assert!(matches!(e.kappa(1.0), Err(Error::OutOfStrip { .. })));
        assert!(matches!(e.mbar(1.5), Err(Error::OutOfStrip { .. })));
        assert!(matches!(e.tilt(2.0), Err(Error::OutOfStrip { .. })));
        assert!(e.kappa(-50.0).is_ok());
        assert!(e.kappa(0.999_999).is_ok());
    }

    #[test]
    fn strip_examples() {
        let s = exp1().strip_info();
        assert_eq!(s.a1, Bound::Finite(1.0));
        assert_eq!(s.a2, Bound::Unbounded);
        assert_eq!(s.sigma_c1, Bound::Unbounded);
        assert_eq!(s.sigma_c2, Bound::Finite(1.0));
        // mbar = h/(1-h) blows up at the strip edge and tends to -1 far left.
        let e = exp1();
        assert!(e.mbar(1.0 - 1e-9).unwrap() > 1e8);
        assert!((e.mbar(-1e9).unwrap() + 1.0).abs() < 1e-8);

        let b = bern03();
        let s = b.strip_info();
        assert_eq!((s.a1, s.a2), (Bound::Unbounded, Bound::Unbounded));
        let c1 = s.sigma_c1.finite().unwrap();
        let c2 = s.sigma_c2.finite().unwrap();
        assert!((c1 - 0.7).abs() < 1e-15 && (c2 - 0.3).abs() < 1e-15);
        assert!((b.mbar(50.0).unwrap() - 0.7).abs() < 1e-10);
        assert!((b.mbar(-50.0).unwrap() + 0.3).abs() < 1e-10);

        let g = gauss(1.0).strip_info();
        assert!([g.a1, g.a2, g.sigma_c1, g.sigma_c2].iter().all(|b| !b.is_finite()));
    }

    #[test]
    fn tilt_examples() {
        let t = gauss(1.0).tilt(2.0).unwrap();
        assert_eq!(t.mbar, 2.0);
        assert_eq!(t.sigbar2, 1.0);

        let t = bern03().tilt(1.0).unwrap();
        let up = 0.3 * (0.7f64).exp();
        let down = 0.7 * (-0.3f64).exp();
        let oracle_p = up / (up + down);
        assert!((oracle_p - 0.538_10).abs() < 1e-5);
        // Tilted mean of the two-point law {0.7, -0.3}.
        let mean = 0.7 * oracle_p - 0.3 * (1.0 - oracle_p);
        assert!((t.mbar - mean).abs() < 1e-14);

        for p in [exp1(), bern03(), gauss(1.5)] {
            let t = p.tilt(0.0).unwrap();
            assert_eq!(t.repr, *p.spec().repr());
        }
    }

    #[test]
    fn tilted_cgf_identity() {
        for p in [exp1(), bern03(), gauss(1.3)] {
            for &h in &[-0.8, -0.2, 0.3, 0.6] {
                let t = p.tilt(h).unwrap();
                for &s in &[-0.5, -0.1, 0.2, 0.35] {
                    if !p.strip().contains(h + s) {
                        continue;
                    }
                    let lhs = t.cgf(s).unwrap();
                    let rhs = p.kappa(h + s).unwrap() - p.kappa(h).unwrap();
                    assert!((lhs - rhs).abs() < 1e-10, "h={h} s={s}: {lhs} vs {rhs}");
                }
            }
        }
    }

    #[test]
    fn interval_display_and_membership() {
        let i = Interval::new(Bound::Unbounded, Bound::Finite(1.0));
        assert_eq!(i.to_string(), "(-inf, 1)");
        assert!(i.contains(-1e300));
        assert!(!i.contains(1.0));
        assert!(!i.contains(f64::NAN));
        assert_eq!(i.negated(), Interval::new(Bound::Finite(-1.0), Bound::Unbounded));
    }
}
