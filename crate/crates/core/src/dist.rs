//! Zero-mean input laws, their cumulants, samplers and exact sum tails.
//!
//! A [`DistributionSpec`] is a user-facing [`Family`] together with an
//! internal representation `±X + shift` of an uncentered base [`Law`]. The
//! base laws are shared with the jump laws of [`crate::process`], which do
//! not need to be centered.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::cgf::{Bound, Interval};
use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::special::{binomial_sf, compensated_sum, gamma_p, gamma_q, normal_tail, snap_to_integer, CompensatedSum};

/// Largest lattice sum support the exact convolution will build.
pub const MAX_CONVOLUTION_SUPPORT: u64 = 10_000_000;

/// Largest offset (in grid steps) a lattice atom may sit at.
const MAX_LATTICE_OFFSET: u64 = 1_000_000;

/// Second, third and fourth cumulants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cumulants {
    pub sigma2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
}

/// A finite law whose atoms lie on an arithmetic progression.
///
/// Atom values are kept as given; the grid `origin + k * step` indexes them
/// with exact integer offsets `k`, which is what convolution works on.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    values: Vec<f64>,
    probs: Vec<f64>,
    origin: f64,
    step: f64,
    offsets: Vec<u64>,
}

impl Lattice {
    /// Validates and normalizes a list of `(value, probability)` atoms:
    /// equal values are merged and atoms sorted by value.
    pub fn new(atoms: &[(f64, f64)]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidSpec("lattice needs at least one atom".into()));
        }
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        let mut sorted = atoms.to_vec();
        for &(v, p) in &sorted {
            if !v.is_finite() {
                return Err(Error::InvalidSpec(format!("atom value {v} is not finite")));
            }
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidSpec(format!("atom probability {p} is not in (0, 1]")));
            }
        }
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (v, p) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += p,
                _ => merged.push((v, p)),
            }
        }
        let total = compensated_sum(merged.iter().map(|a| a.1));
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec(format!("atom probabilities sum to {total}, not 1")));
        }
        let values: Vec<f64> = merged.iter().map(|a| a.0).collect();
        let probs: Vec<f64> = merged.iter().map(|a| a.1).collect();
        let (origin, step, offsets) = lattice_grid(&values)?;
        Ok(Lattice {
            values,
            probs,
            origin,
            step,
            offsets,
        })
    }

    /// Like [`Lattice::new`], then subtracts the mean from every atom. A mean
    /// already below `1e-15` of the value scale is left alone, which makes
    /// recentering idempotent.
    pub fn centered(atoms: &[(f64, f64)]) -> Result<Self> {
        let lattice = Lattice::new(atoms)?;
        let mean = lattice.mean();
        let scale = lattice.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if mean.abs() <= 1e-15 * scale {
            return Ok(lattice);
        }
        let values: Vec<f64> = lattice.values.iter().map(|v| v - mean).collect();
        let (origin, step, offsets) = lattice_grid(&values)?;
        Ok(Lattice {
            values,
            origin,
            step,
            offsets,
            probs: lattice.probs,
        })
    }

    pub fn atoms(&self) -> Vec<(f64, f64)> {
        self.values.iter().copied().zip(self.probs.iter().copied()).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.values.iter().zip(&self.probs).map(|(v, p)| v * p))
    }

    fn central_moment(&self, k: i32) -> f64 {
        let mean = self.mean();
        compensated_sum(self.values.iter().zip(&self.probs).map(|(v, p)| p * (v - mean).powi(k)))
    }

    fn raw_moment(&self, k: i32) -> f64 {
        compensated_sum(self.values.iter().zip(&self.probs).map(|(v, p)| p * v.powi(k)))
    }

    pub fn negated(&self) -> Lattice {
        let atoms: Vec<(f64, f64)> = self.atoms().into_iter().map(|(v, p)| (-v, p)).collect();
        Lattice::new(&atoms).expect("negating a valid lattice keeps it valid")
    }

    /// Log-weights `ln p_i + h v_i` and their log-sum-exp.
    fn log_weights(&self, h: f64) -> (Vec<f64>, f64) {
        let lw: Vec<f64> = self
            .values
            .iter()
            .zip(&self.probs)
            .map(|(v, p)| p.ln() + h * v)
            .collect();
        let max = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + compensated_sum(lw.iter().map(|w| (w - max).exp())).ln();
        (lw, lse)
    }

    fn tilted_probs(&self, h: f64) -> Vec<f64> {
        let (lw, lse) = self.log_weights(h);
        lw.into_iter().map(|w| (w - lse).exp()).collect()
    }

    fn cgf(&self, h: f64) -> f64 {
        self.log_weights(h).1
    }

    fn cgf_d1(&self, h: f64) -> f64 {
        let w = self.tilted_probs(h);
        compensated_sum(self.values.iter().zip(&w).map(|(v, w)| v * w))
    }

    fn cgf_d2(&self, h: f64) -> f64 {
        let w = self.tilted_probs(h);
        let mean = compensated_sum(self.values.iter().zip(&w).map(|(v, w)| v * w));
        compensated_sum(self.values.iter().zip(&w).map(|(v, w)| w * (v - mean).powi(2)))
    }

    fn tilt(&self, h: f64) -> Lattice {
        Lattice {
            probs: self.tilted_probs(h),
            ..self.clone()
        }
    }

    /// Number of grid points in the support of an `n`-fold sum.
    pub fn sum_support(&self, n: u64) -> u64 {
        n.saturating_mul(*self.offsets.last().unwrap_or(&0)).saturating_add(1)
    }

    /// PMF of the `n`-fold sum over offsets `0..=n*kmax`, by `n - 1`
    /// successive exact convolutions with compensated accumulation. Entry
    /// `k` is the probability that the sum equals `n*origin + k*step`.
    pub fn sum_pmf(&self, n: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::InvalidArgument("number of summands must be at least 1".into()));
        }
        let points = self.sum_support(n);
        if points > MAX_CONVOLUTION_SUPPORT {
            return Err(Error::TooLarge {
                points,
                limit: MAX_CONVOLUTION_SUPPORT,
            });
        }
        let kmax = *self.offsets.last().unwrap() as usize;
        let kernel: Vec<(usize, f64)> = self
            .offsets
            .iter()
            .map(|&k| k as usize)
            .zip(self.probs.iter().copied())
            .collect();
        let mut cur = vec![0.0; kmax + 1];
        for &(k, p) in &kernel {
            cur[k] = p;
        }
        for _ in 1..n {
            let len = cur.len() + kmax;
            let mut next = vec![0.0; len];
            for (j, slot) in next.iter_mut().enumerate() {
                let mut acc = CompensatedSum::new();
                for &(k, p) in &kernel {
                    if let Some(&c) = j.checked_sub(k).and_then(|i| cur.get(i)) {
                        acc.add(c * p);
                    }
                }
                *slot = acc.value();
            }
            cur = next;
        }
        Ok(cur)
    }

    /// Exact `P(Z_1 + ... + Z_n > threshold)`.
    pub fn sum_tail(&self, n: u64, threshold: f64) -> Result<f64> {
        let pmf = self.sum_pmf(n)?;
        let u = snap_to_integer((threshold - n as f64 * self.origin) / self.step);
        let first = u.floor() + 1.0;
        if first <= 0.0 {
            return Ok(compensated_sum(pmf.iter().copied()));
        }
        if first >= pmf.len() as f64 {
            return Ok(0.0);
        }
        Ok(compensated_sum(pmf[first as usize..].iter().copied()))
    }
}

/// Finds `origin`, `step` and integer offsets for sorted distinct values.
fn lattice_grid(values: &[f64]) -> Result<(f64, f64, Vec<u64>)> {
    let origin = values[0];
    if values.len() == 1 {
        return Ok((origin, 1.0, vec![0]));
    }
    let diffs: Vec<f64> = values.iter().map(|v| v - origin).collect();
    let span = *diffs.last().unwrap();
    let tol = 1e-9 * span;
    let mut step = diffs[1];
    for &d in &diffs[2..] {
        step = float_gcd(step, d, tol);
    }
    let not_lattice = || Error::InvalidSpec("atoms do not lie on a common lattice".into());
    if step <= tol {
        return Err(not_lattice());
    }
    let kmax = (span / step).round();
    if kmax > MAX_LATTICE_OFFSET as f64 {
        return Err(not_lattice());
    }
    let step = span / kmax;
    let mut offsets = Vec::with_capacity(values.len());
    for d in diffs {
        let k = d / step;
        if (k - k.round()).abs() > 1e-6 {
            return Err(not_lattice());
        }
        offsets.push(k.round() as u64);
    }
    Ok((origin, step, offsets))
}

/// Euclid's algorithm on non-negative reals with an absolute tolerance.
fn float_gcd(a: f64, b: f64, tol: f64) -> f64 {
    let (mut a, mut b) = if a >= b { (a, b) } else { (b, a) };
    while b > tol {
        let mut r = a % b;
        if b - r <= tol {
            r = 0.0;
        }
        a = b;
        b = r;
    }
    a
}

/// An uncentered base law.
#[derive(Debug, Clone, PartialEq)]
pub enum Law {
    /// Atoms `{0, 1}` with `P(1) = p`.
    Bernoulli {
        p: f64,
    },
    /// Exponential on `[0, inf)` with the given rate.
    Exponential {
        rate: f64,
    },
    Normal {
        mean: f64,
        sigma: f64,
    },
    Lattice(Lattice),
}

impl Law {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Law::Bernoulli { p } if !(p > 0.0 && p < 1.0) => {
                Err(Error::InvalidSpec(format!("Bernoulli p = {p} must lie in (0, 1)")))
            }
            Law::Exponential { rate } if !(rate > 0.0 && rate.is_finite()) => Err(Error::InvalidSpec(format!(
                "exponential rate {rate} must be positive and finite"
            ))),
            Law::Normal { mean, sigma } if !(sigma > 0.0 && sigma.is_finite() && mean.is_finite()) => {
                Err(Error::InvalidSpec(format!(
                    "normal law needs finite mean and sigma > 0, got ({mean}, {sigma})"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn cgf(&self, h: f64) -> f64 {
        match self {
            Law::Bernoulli { p } => {
                let q = 1.0 - p;
                if h >= 0.0 {
                    h + (q * (-h).exp_m1()).ln_1p()
                } else {
                    (p * h.exp_m1()).ln_1p()
                }
            }
            Law::Exponential { rate } => -(-h / rate).ln_1p(),
            Law::Normal { mean, sigma } => mean * h + 0.5 * sigma * sigma * h * h,
            Law::Lattice(l) => l.cgf(h),
        }
    }

    /// Success probability of the tilted Bernoulli law and its complement.
    fn bernoulli_tilt(p: f64, h: f64) -> (f64, f64) {
        let q = 1.0 - p;
        if h >= 0.0 {
            let d = p + q * (-h).exp();
            (p / d, q * (-h).exp() / d)
        } else {
            let d = q + p * h.exp();
            (p * h.exp() / d, q / d)
        }
    }

    pub fn cgf_d1(&self, h: f64) -> f64 {
        match self {
            Law::Bernoulli { p } => Self::bernoulli_tilt(*p, h).0,
            Law::Exponential { rate } => 1.0 / (rate - h),
            Law::Normal { mean, sigma } => mean + sigma * sigma * h,
            Law::Lattice(l) => l.cgf_d1(h),
        }
    }

    pub fn cgf_d2(&self, h: f64) -> f64 {
        match self {
            Law::Bernoulli { p } => {
                let (pt, qt) = Self::bernoulli_tilt(*p, h);
                pt * qt
            }
            Law::Exponential { rate } => (rate - h).powi(-2),
            Law::Normal { sigma, .. } => sigma * sigma,
            Law::Lattice(l) => l.cgf_d2(h),
        }
    }

    /// Open strip on which the generating function converges.
    pub fn strip(&self) -> Interval {
        match self {
            Law::Exponential { rate } => Interval::new(Bound::Unbounded, Bound::Finite(*rate)),
            _ => Interval::REAL_LINE,
        }
    }

    /// Convex hull of the support, which for these laws is also the range of
    /// the tilted mean over the strip.
    pub fn support(&self) -> Interval {
        match self {
            Law::Bernoulli { .. } => Interval::finite(0.0, 1.0),
            Law::Exponential { .. } => Interval::new(Bound::Finite(0.0), Bound::Unbounded),
            Law::Normal { .. } => Interval::REAL_LINE,
            Law::Lattice(l) => Interval::finite(l.values[0], *l.values.last().unwrap()),
        }
    }

    pub fn mean(&self) -> f64 {
        self.raw_moment(1)
    }

    /// `E[X^k]` for `k` in `1..=4`.
    pub fn raw_moment(&self, k: u32) -> f64 {
        match self {
            Law::Bernoulli { p } => *p,
            Law::Exponential { rate } => (1..=k).product::<u32>() as f64 / rate.powi(k as i32),
            Law::Normal { mean: m, sigma: s } => {
                let s2 = s * s;
                match k {
                    1 => *m,
                    2 => m * m + s2,
                    3 => m.powi(3) + 3.0 * m * s2,
                    4 => m.powi(4) + 6.0 * m * m * s2 + 3.0 * s2 * s2,
                    _ => unimplemented!("raw moments above the fourth are not needed"),
                }
            }
            Law::Lattice(l) => l.raw_moment(k as i32),
        }
    }

    pub fn cumulants(&self) -> Cumulants {
        match self {
            Law::Bernoulli { p } => {
                let q = 1.0 - p;
                let pq = p * q;
                Cumulants {
                    sigma2: pq,
                    gamma3: pq * (q - p),
                    gamma4: pq * (1.0 - 6.0 * pq),
                }
            }
            Law::Exponential { rate } => Cumulants {
                sigma2: rate.powi(-2),
                gamma3: 2.0 * rate.powi(-3),
                gamma4: 6.0 * rate.powi(-4),
            },
            Law::Normal { sigma, .. } => Cumulants {
                sigma2: sigma * sigma,
                gamma3: 0.0,
                gamma4: 0.0,
            },
            Law::Lattice(l) => {
                let m2 = l.central_moment(2);
                Cumulants {
                    sigma2: m2,
                    gamma3: l.central_moment(3),
                    gamma4: l.central_moment(4) - 3.0 * m2 * m2,
                }
            }
        }
    }

    /// The law with density proportional to `e^{hx}`; `h = 0` returns an
    /// identical copy.
    pub fn tilt(&self, h: f64) -> Law {
        if h == 0.0 {
            return self.clone();
        }
        match self {
            Law::Bernoulli { p } => Law::Bernoulli {
                p: Self::bernoulli_tilt(*p, h).0,
            },
            Law::Exponential { rate } => Law::Exponential { rate: rate - h },
            Law::Normal { mean, sigma } => Law::Normal {
                mean: mean + sigma * sigma * h,
                sigma: *sigma,
            },
            Law::Lattice(l) => Law::Lattice(l.tilt(h)),
        }
    }

    pub fn sampler(&self) -> LawSampler {
        match self {
            Law::Bernoulli { p } => LawSampler::Bernoulli(*p),
            Law::Exponential { rate } => LawSampler::Exponential(Exp::new(*rate).expect("validated rate")),
            Law::Normal { mean, sigma } => LawSampler::Normal(Normal::new(*mean, *sigma).expect("validated sigma")),
            Law::Lattice(l) => LawSampler::Lattice {
                values: l.values.clone(),
                index: WeightedIndex::new(&l.probs).expect("lattice has positive total weight"),
            },
        }
    }
}

/// A prepared sampler for one draw of a [`Law`] (optionally negated and
/// shifted).
#[derive(Debug, Clone)]
pub enum LawSampler {
    Bernoulli(f64),
    Exponential(Exp<f64>),
    Normal(Normal<f64>),
    Lattice {
        values: Vec<f64>,
        index: WeightedIndex<f64>,
    },
    Shifted {
        inner: Box<LawSampler>,
        negate: bool,
        shift: f64,
    },
}

impl LawSampler {
    pub fn draw(&self, rng: &mut StreamRng) -> f64 {
        match self {
            LawSampler::Bernoulli(p) => {
                if rng.random::<f64>() < *p {
                    1.0
                } else {
                    0.0
                }
            }
            LawSampler::Exponential(d) => d.sample(rng),
            LawSampler::Normal(d) => d.sample(rng),
            LawSampler::Lattice { values, index } => values[index.sample(rng)],
            LawSampler::Shifted { inner, negate, shift } => {
                let x = inner.draw(rng);
                if *negate {
                    shift - x
                } else {
                    x + shift
                }
            }
        }
    }
}

/// The law of `±X + shift` for a base law `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedLaw {
    pub(crate) law: Law,
    pub(crate) negate: bool,
    pub(crate) shift: f64,
}

impl ShiftedLaw {
    fn sign(&self) -> f64 {
        if self.negate {
            -1.0
        } else {
            1.0
        }
    }

    pub fn law(&self) -> &Law {
        &self.law
    }

    pub fn cgf(&self, h: f64) -> f64 {
        self.law.cgf(self.sign() * h) + self.shift * h
    }

    pub fn cgf_d1(&self, h: f64) -> f64 {
        self.sign() * self.law.cgf_d1(self.sign() * h) + self.shift
    }

    pub fn cgf_d2(&self, h: f64) -> f64 {
        self.law.cgf_d2(self.sign() * h)
    }

    pub fn strip(&self) -> Interval {
        if self.negate {
            self.law.strip().negated()
        } else {
            self.law.strip()
        }
    }

    pub fn support(&self) -> Interval {
        let base = self.law.support();
        let oriented = if self.negate { base.negated() } else { base };
        oriented.affine(1.0, self.shift)
    }

    pub fn tilt(&self, h: f64) -> ShiftedLaw {
        ShiftedLaw {
            law: self.law.tilt(self.sign() * h),
            ..self.clone()
        }
    }

    pub fn sampler(&self) -> LawSampler {
        let inner = self.law.sampler();
        if !self.negate && self.shift == 0.0 {
            inner
        } else {
            LawSampler::Shifted {
                inner: Box::new(inner),
                negate: self.negate,
                shift: self.shift,
            }
        }
    }
}

/// User-facing distribution families, as written in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// `B - p` for `B ~ Bernoulli(p)`: atoms `1 - p` and `-p`.
    CenteredBernoulli {
        p: f64,
    },
    /// `E - 1/rate` for `E ~ Exp(rate)`.
    CenteredExponential {
        rate: f64,
    },
    /// `1/rate - E`, the mirror image of the centered exponential.
    NegatedExponential {
        rate: f64,
    },
    Gaussian {
        sigma: f64,
    },
    /// Finite lattice law; atoms are recentered at construction.
    #[serde(rename = "lattice")]
    FiniteLattice {
        atoms: Vec<(f64, f64)>,
    },
}

/// A validated zero-mean, positive-variance law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Family", into = "Family")]
pub struct DistributionSpec {
    family: Family,
    repr: ShiftedLaw,
}

impl TryFrom<Family> for DistributionSpec {
    type Error = Error;

    fn try_from(family: Family) -> Result<Self> {
        DistributionSpec::new(family)
    }
}

impl From<DistributionSpec> for Family {
    fn from(spec: DistributionSpec) -> Family {
        spec.family
    }
}

impl DistributionSpec {
    pub fn new(family: Family) -> Result<Self> {
        let (family, repr) = match family {
            Family::CenteredBernoulli { p } => {
                let law = Law::Bernoulli { p };
                law.validate()?;
                (
                    family,
                    ShiftedLaw {
                        law,
                        negate: false,
                        shift: -p,
                    },
                )
            }
            Family::CenteredExponential { rate } | Family::NegatedExponential { rate } => {
                let law = Law::Exponential { rate };
                law.validate()?;
                let negate = matches!(family, Family::NegatedExponential { .. });
                let shift = if negate { 1.0 / rate } else { -1.0 / rate };
                (family, ShiftedLaw { law, negate, shift })
            }
            Family::Gaussian { sigma } => {
                let law = Law::Normal { mean: 0.0, sigma };
                law.validate()
                    .map_err(|_| Error::InvalidSpec(format!("Gaussian sigma {sigma} must be positive and finite")))?;
                (
                    family,
                    ShiftedLaw {
                        law,
                        negate: false,
                        shift: 0.0,
                    },
                )
            }
            Family::FiniteLattice { atoms } => {
                let lattice = Lattice::centered(&atoms)?;
                if lattice.values.len() < 2 {
                    return Err(Error::InvalidSpec(
                        "lattice law needs positive variance (two or more atoms)".into(),
                    ));
                }
                let family = Family::FiniteLattice { atoms: lattice.atoms() };
                (
                    family,
                    ShiftedLaw {
                        law: Law::Lattice(lattice),
                        negate: false,
                        shift: 0.0,
                    },
                )
            }
        };
        Ok(DistributionSpec { family, repr })
    }

    /// Convenience constructor for a lattice law.
    pub fn lattice(atoms: &[(f64, f64)]) -> Result<Self> {
        DistributionSpec::new(Family::FiniteLattice { atoms: atoms.to_vec() })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub(crate) fn repr(&self) -> &ShiftedLaw {
        &self.repr
    }

    /// Whether the law has an absolutely continuous component.
    pub fn has_density(&self) -> bool {
        matches!(
            self.family,
            Family::Gaussian { .. } | Family::CenteredExponential { .. } | Family::NegatedExponential { .. }
        )
    }

    /// Short identifier used in report rows, e.g. `centered_bernoulli[p=0.3]`.
    pub fn label(&self) -> String {
        match &self.family {
            Family::CenteredBernoulli { p } => format!("centered_bernoulli[p={p}]"),
            Family::CenteredExponential { rate } => format!("centered_exponential[rate={rate}]"),
            Family::NegatedExponential { rate } => format!("negated_exponential[rate={rate}]"),
            Family::Gaussian { sigma } => format!("gaussian[sigma={sigma}]"),
            Family::FiniteLattice { atoms } => format!("lattice[{} atoms]", atoms.len()),
        }
    }

    /// The law of `-Z`.
    pub fn negated(&self) -> DistributionSpec {
        let family = match &self.family {
            Family::CenteredBernoulli { p } => Family::CenteredBernoulli { p: 1.0 - p },
            Family::CenteredExponential { rate } => Family::NegatedExponential { rate: *rate },
            Family::NegatedExponential { rate } => Family::CenteredExponential { rate: *rate },
            Family::Gaussian { sigma } => Family::Gaussian { sigma: *sigma },
            Family::FiniteLattice { atoms } => Family::FiniteLattice {
                atoms: atoms.iter().map(|&(v, p)| (-v, p)).collect(),
            },
        };
        DistributionSpec::new(family).expect("negation preserves validity")
    }

    /// The same law expressed as a [`Family::FiniteLattice`], where possible.
    pub fn to_lattice(&self) -> Result<DistributionSpec> {
        match &self.family {
            Family::CenteredBernoulli { p } => DistributionSpec::lattice(&[(1.0 - p, *p), (-p, 1.0 - p)]),
            Family::FiniteLattice { .. } => Ok(self.clone()),
            _ => Err(Error::Unsupported(format!("{} is not a lattice law", self.label()))),
        }
    }

    /// The lattice behind a lattice-family spec.
    pub fn as_lattice(&self) -> Option<&Lattice> {
        match (&self.family, &self.repr.law) {
            (Family::FiniteLattice { .. }, Law::Lattice(l)) => Some(l),
            _ => None,
        }
    }

    /// Analytic cumulants `(sigma^2, gamma3, gamma4)` of the centered law.
    pub fn moments(&self) -> Cumulants {
        let mut c = self.repr.law.cumulants();
        if self.repr.negate {
            c.gamma3 = -c.gamma3;
        }
        c
    }

    pub fn variance(&self) -> f64 {
        self.moments().sigma2
    }

    pub fn sampler(&self) -> LawSampler {
        self.repr.sampler()
    }

    /// `n` independent draws.
    pub fn sample(&self, rng: &mut StreamRng, n: usize) -> Vec<f64> {
        let sampler = self.sampler();
        (0..n).map(|_| sampler.draw(rng)).collect()
    }

    /// Exact `P(Z_1 + ... + Z_n > threshold)`.
    ///
    /// Bernoulli sums use the binomial survival function, exponential sums
    /// the regularized incomplete gamma function, Gaussian sums the normal
    /// tail and lattice laws exact convolution. Thresholds that land on a
    /// lattice point within `1e-9` are snapped to it before the strict
    /// comparison.
    pub fn exact_sum_tail(&self, n: u64, threshold: f64) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidArgument("number of summands must be at least 1".into()));
        }
        if threshold.is_nan() {
            return Err(Error::InvalidArgument("threshold is NaN".into()));
        }
        let nf = n as f64;
        match &self.family {
            Family::CenteredBernoulli { p } => {
                // Z sum = K - n p with K ~ Binomial(n, p).
                let u = snap_to_integer(threshold + nf * p);
                let first = u.floor() + 1.0;
                Ok(binomial_sf(n, *p, first.clamp(-1.0, nf + 1.0) as i64))
            }
            Family::CenteredExponential { rate } => Ok(gamma_q(nf, nf + rate * threshold)),
            Family::NegatedExponential { rate } => Ok(gamma_p(nf, nf - rate * threshold)),
            Family::Gaussian { sigma } => Ok(normal_tail(threshold / (sigma * nf.sqrt()))),
            Family::FiniteLattice { .. } => {
                let lattice = self.as_lattice().expect("lattice family");
                lattice.sum_tail(n, threshold)
            }
        }
    }
}

/// Counts the atoms of a lattice sum of `n` terms by brute force. Exposed for
/// tests in downstream crates.
#[doc(hidden)]
pub fn enumerate_lattice_sum(lattice: &Lattice, n: u32) -> BTreeMap<u64, f64> {
    let mut dist = BTreeMap::new();
    dist.insert(0u64, 1.0);
    for _ in 0..n {
        let mut next = BTreeMap::new();
        for (&k, &p) in &dist {
            for (&o, &q) in lattice.offsets.iter().zip(&lattice.probs) {
                *next.entry(k + o).or_insert(0.0) += p * q;
            }
        }
        dist = next;
    }
    dist
}
