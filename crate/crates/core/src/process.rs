//! Homogeneous processes with a Brownian component and compound Poisson
//! jumps.
//!
//! `Z_t = sigma0 W_t + sum_{i <= N_t} J_i - rate * t * E[J]` where `N_t` is a
//! Poisson process of intensity `rate` and the jumps `J_i` are i.i.d. The
//! compensating drift makes `E[Z_t] = 0`. Per unit time the cumulant
//! generating function is
//!
//! `kappa(h) = sigma0^2 h^2 / 2 + rate * (M_J(h) - 1 - h E[J])`,
//!
//! so `Z_t` has the same large-deviation structure as a sum of `t` i.i.d.
//! summands, with `t` real.

use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::asymptotics::{ErrorNote, Method, Regime, RegimeCheck, Side, TailEstimate};
use crate::cgf::{Bound, CumulantFunction, Interval};
use crate::dist::{Cumulants, Lattice, Law, LawSampler, ShiftedLaw};
use crate::error::{Error, Result};
use crate::oracles::{binomial_std_error, check_samples, event_cutoff, run_chunked, SimulationReport};
use crate::rng::{substream, StreamRng};
use crate::saddle::solve_saddle;
use crate::special::{gamma_p, gamma_q, normal_tail, snap_to_integer};

/// Largest expected number of jumps per simulated path.
pub const MAX_MEAN_JUMPS: f64 = 1e6;

/// Jump-size laws, uncentered, as written in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpLaw {
    /// Deterministic jumps of the given size.
    Point {
        value: f64,
    },
    /// Jumps of size 1 with probability `p`, else 0.
    Bernoulli {
        p: f64,
    },
    Exponential {
        rate: f64,
    },
    Gaussian {
        mean: f64,
        sigma: f64,
    },
    Lattice {
        atoms: Vec<(f64, f64)>,
    },
}

impl JumpLaw {
    fn to_law(&self) -> Result<Law> {
        let law = match self {
            JumpLaw::Point { value } => Law::Lattice(Lattice::new(&[(*value, 1.0)])?),
            JumpLaw::Bernoulli { p } => Law::Bernoulli { p: *p },
            JumpLaw::Exponential { rate } => Law::Exponential { rate: *rate },
            JumpLaw::Gaussian { mean, sigma } => Law::Normal {
                mean: *mean,
                sigma: *sigma,
            },
            JumpLaw::Lattice { atoms } => Law::Lattice(Lattice::new(atoms)?),
        };
        law.validate()?;
        Ok(law)
    }

    fn has_density(&self) -> bool {
        matches!(self, JumpLaw::Exponential { .. } | JumpLaw::Gaussian { .. })
    }

    fn negated(&self) -> JumpLaw {
        match self {
            JumpLaw::Point { value } => JumpLaw::Point { value: -value },
            JumpLaw::Bernoulli { p } => JumpLaw::Lattice {
                atoms: vec![(0.0, 1.0 - p), (-1.0, *p)],
            },
            // Negated exponential jumps are carried by the `negate` flag of
            // the internal representation instead.
            JumpLaw::Exponential { .. } => unreachable!("handled by ProcessSpec::negated"),
            JumpLaw::Gaussian { mean, sigma } => JumpLaw::Gaussian {
                mean: -mean,
                sigma: *sigma,
            },
            JumpLaw::Lattice { atoms } => JumpLaw::Lattice {
                atoms: atoms.iter().map(|&(v, p)| (-v, p)).collect(),
            },
        }
    }
}

/// Configuration form of a [`ProcessSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessConfig {
    #[serde(default)]
    pub sigma0_sq: f64,
    #[serde(default)]
    pub jump_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jump_law: Option<JumpLaw>,
    /// Set by [`ProcessSpec::negated`] for exponential jump laws.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub negate_jumps: bool,
}

/// A validated diffusion plus compound Poisson process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProcessConfig", into = "ProcessConfig")]
pub struct ProcessSpec {
    config: ProcessConfig,
    jump: Option<ShiftedLaw>,
}

impl TryFrom<ProcessConfig> for ProcessSpec {
    type Error = Error;

    fn try_from(config: ProcessConfig) -> Result<Self> {
        ProcessSpec::new(config)
    }
}

impl From<ProcessSpec> for ProcessConfig {
    fn from(spec: ProcessSpec) -> ProcessConfig {
        spec.config
    }
}

impl ProcessSpec {
    pub fn new(config: ProcessConfig) -> Result<Self> {
        let ProcessConfig {
            sigma0_sq,
            jump_rate,
            ref jump_law,
            negate_jumps,
        } = config;
        if !(sigma0_sq >= 0.0 && sigma0_sq.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "sigma0_sq = {sigma0_sq} must be finite and non-negative"
            )));
        }
        if !(jump_rate >= 0.0 && jump_rate.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "jump_rate = {jump_rate} must be finite and non-negative"
            )));
        }
        let jump = match (jump_rate > 0.0, jump_law) {
            (true, None) => return Err(Error::InvalidSpec("jump_rate > 0 requires a jump_law".into())),
            (_, Some(law)) => Some(ShiftedLaw {
                law: law.to_law()?,
                negate: negate_jumps,
                shift: 0.0,
            }),
            (false, None) => None,
        };
        let spec = ProcessSpec { config, jump };
        if spec.variance() <= 0.0 {
            return Err(Error::InvalidSpec(
                "process needs sigma0_sq > 0 or jumps with a non-zero second moment".into(),
            ));
        }
        Ok(spec)
    }

    /// Pure Brownian motion with variance `sigma0_sq` per unit time.
    pub fn diffusion(sigma0_sq: f64) -> Result<Self> {
        ProcessSpec::new(ProcessConfig {
            sigma0_sq,
            jump_rate: 0.0,
            jump_law: None,
            negate_jumps: false,
        })
    }

    /// Diffusion plus compound Poisson jumps.
    pub fn jump_diffusion(sigma0_sq: f64, jump_rate: f64, jump_law: JumpLaw) -> Result<Self> {
        ProcessSpec::new(ProcessConfig {
            sigma0_sq,
            jump_rate,
            jump_law: Some(jump_law),
            negate_jumps: false,
        })
    }

    pub fn config(&self) -> &ProcessConfig {
        &self.config
    }

    pub fn sigma0_sq(&self) -> f64 {
        self.config.sigma0_sq
    }

    pub fn jump_rate(&self) -> f64 {
        if self.jump.is_some() {
            self.config.jump_rate
        } else {
            0.0
        }
    }

    /// `E[J^k]` of the jump law, 0 without jumps.
    fn jump_moment(&self, k: u32) -> f64 {
        match &self.jump {
            Some(j) => {
                let sign = if j.negate && k % 2 == 1 { -1.0 } else { 1.0 };
                sign * j.law.raw_moment(k)
            }
            None => 0.0,
        }
    }

    /// Compensating drift `-rate * E[J]` per unit time.
    pub fn drift_comp(&self) -> f64 {
        -self.jump_rate() * self.jump_moment(1)
    }

    /// `sigma^2 = sigma0^2 + rate * E[J^2]`, the variance per unit time.
    pub fn variance(&self) -> f64 {
        self.sigma0_sq() + self.jump_rate() * self.jump_moment(2)
    }

    /// Whether `Z_t` has an absolutely continuous component.
    pub fn has_density(&self) -> bool {
        self.sigma0_sq() > 0.0
            || (self.jump_rate() > 0.0 && self.config.jump_law.as_ref().is_some_and(JumpLaw::has_density))
    }

    /// Short identifier used in report rows.
    pub fn label(&self) -> String {
        let jumps = match &self.config.jump_law {
            Some(JumpLaw::Point { value }) => format!("point[{value}]"),
            Some(JumpLaw::Bernoulli { p }) => format!("bernoulli[p={p}]"),
            Some(JumpLaw::Exponential { rate }) if self.config.negate_jumps => {
                format!("negated_exponential[rate={rate}]")
            }
            Some(JumpLaw::Exponential { rate }) => format!("exponential[rate={rate}]"),
            Some(JumpLaw::Gaussian { mean, sigma }) => format!("gaussian[mean={mean},sigma={sigma}]"),
            Some(JumpLaw::Lattice { atoms }) => format!("lattice[{} atoms]", atoms.len()),
            None => "none".into(),
        };
        format!(
            "process[sigma0_sq={},jump_rate={},jumps={jumps}]",
            self.sigma0_sq(),
            self.jump_rate()
        )
    }

    /// The process `-Z_t`.
    pub fn negated(&self) -> ProcessSpec {
        let mut config = self.config.clone();
        match &config.jump_law {
            Some(JumpLaw::Exponential { .. }) => config.negate_jumps = !config.negate_jumps,
            Some(law) => config.jump_law = Some(law.negated()),
            None => {}
        }
        ProcessSpec::new(config).expect("negation preserves validity")
    }
}

/// CGF profile of a process per unit time.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessProfile {
    spec: ProcessSpec,
    strip: Interval,
    drift_limits: Interval,
    cumulants: Cumulants,
}

impl ProcessProfile {
    pub fn new(spec: ProcessSpec) -> Self {
        let rate = spec.jump_rate();
        let s0 = spec.sigma0_sq();
        let (strip, support) = match &spec.jump {
            Some(j) if rate > 0.0 => (j.strip(), j.support()),
            _ => (Interval::REAL_LINE, Interval::finite(0.0, 0.0)),
        };
        let comp = spec.drift_comp();
        let upper = match support.upper {
            Bound::Finite(m) if s0 == 0.0 && m <= 0.0 => Bound::Finite(comp),
            _ => Bound::Unbounded,
        };
        let lower = match support.lower {
            Bound::Finite(m) if s0 == 0.0 && m >= 0.0 => Bound::Finite(comp),
            _ => Bound::Unbounded,
        };
        let cumulants = Cumulants {
            sigma2: spec.variance(),
            gamma3: rate * spec.jump_moment(3),
            gamma4: rate * spec.jump_moment(4),
        };
        ProcessProfile {
            spec,
            strip,
            drift_limits: Interval::new(lower, upper),
            cumulants,
        }
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    pub fn negated(&self) -> ProcessProfile {
        ProcessProfile::new(self.spec.negated())
    }

    fn jump_terms(&self) -> Option<(f64, &ShiftedLaw)> {
        match &self.spec.jump {
            Some(j) if self.spec.jump_rate() > 0.0 => Some((self.spec.jump_rate(), j)),
            _ => None,
        }
    }
}

impl CumulantFunction for ProcessProfile {
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
        let diffusion = 0.5 * self.spec.sigma0_sq() * h * h;
        match self.jump_terms() {
            Some((rate, j)) => diffusion + rate * (j.cgf(h).exp_m1() - h * self.spec.jump_moment(1)),
            None => diffusion,
        }
    }

    fn mbar_unchecked(&self, h: f64) -> f64 {
        let diffusion = self.spec.sigma0_sq() * h;
        match self.jump_terms() {
            Some((rate, j)) => diffusion + rate * (j.cgf(h).exp() * j.cgf_d1(h) - self.spec.jump_moment(1)),
            None => diffusion,
        }
    }

    fn sigbar2_unchecked(&self, h: f64) -> f64 {
        let diffusion = self.spec.sigma0_sq();
        match self.jump_terms() {
            Some((rate, j)) => {
                let d1 = j.cgf_d1(h);
                diffusion + rate * j.cgf(h).exp() * (j.cgf_d2(h) + d1 * d1)
            }
            None => diffusion,
        }
    }
}

/// `kappa(h)` per unit time.
pub fn process_kappa(spec: &ProcessSpec, h: f64) -> Result<f64> {
    ProcessProfile::new(spec.clone()).kappa(h)
}

/// `mbar(h) = kappa'(h)` per unit time.
pub fn process_mbar(spec: &ProcessSpec, h: f64) -> Result<f64> {
    ProcessProfile::new(spec.clone()).mbar(h)
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "time t = {t} must be positive and finite"
        )))
    }
}

/// Large-deviation approximation `(b0 / sqrt(t)) e^{-alpha t}` of
/// `P(Z_t > sigma c t)` for `c > 0`, or of the lower tail for `c < 0`.
pub fn process_tail(profile: &ProcessProfile, c: f64, t: f64) -> Result<TailEstimate> {
    check_time(t)?;
    if c == 0.0 {
        return Err(Error::Degenerate("c = 0 gives h = 0 and an unbounded b0".into()));
    }
    if c < 0.0 {
        let mut est = process_tail(&profile.negated(), -c, t)?;
        est.side = Side::Lower;
        return Ok(est);
    }
    let sol = solve_saddle(profile, c)?;
    let b0 = sol.b0.expect("non-zero target");
    let mut warnings = Vec::new();
    if !profile.spec().has_density() {
        warnings
            .push("process has no absolutely continuous component; reported without a validity guarantee".to_string());
    }
    Ok(TailEstimate {
        value: b0 / t.sqrt() * (-sol.alpha * t).exp(),
        method: Method::Thm6,
        side: Side::Upper,
        error_note: ErrorNote::Order("relative O(1/t)".into()),
        regime: Some(RegimeCheck {
            regime: Regime::LinearScale,
            satisfied: true,
        }),
        warnings,
    })
}

/// Exact `P(Z_t > sigma c t)` where a closed form exists: pure diffusion
/// (normal tail) and compound Poisson with deterministic jumps and no
/// diffusion (Poisson survival function, with the 1e-9 snapping used for
/// lattice thresholds).
pub fn process_exact_tail(profile: &ProcessProfile, c: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    let spec = profile.spec();
    let sigma = profile.sigma();
    if spec.jump_rate() == 0.0 {
        return Ok(normal_tail(c * t.sqrt()));
    }
    let value = match &spec.config.jump_law {
        Some(JumpLaw::Point { value }) if spec.sigma0_sq() == 0.0 => *value,
        _ => {
            return Err(Error::Unsupported(format!(
                "no exact tail for {}; only pure diffusion and point-jump Poisson processes",
                spec.label()
            )))
        }
    };
    let mean_jumps = spec.jump_rate() * t;
    // Z_t = value * (N_t - rate t).
    let u = snap_to_integer(mean_jumps + sigma * c * t / value);
    if value > 0.0 {
        // N > u, i.e. N >= floor(u) + 1.
        let first = u.floor() + 1.0;
        Ok(if first <= 0.0 { 1.0 } else { gamma_p(first, mean_jumps) })
    } else {
        // N < u, i.e. N <= ceil(u) - 1.
        let last = u.ceil() - 1.0;
        Ok(if last < 0.0 {
            0.0
        } else {
            gamma_q(last + 1.0, mean_jumps)
        })
    }
}

/// A sampler for `Z_t` under the process tilted by `h`: diffusion drift
/// `sigma0^2 h`, jump intensity `rate * M_J(h)` and `h`-tilted jump sizes.
/// The compensator of the untilted process is kept.
struct PathSampler {
    sd: f64,
    drift: f64,
    jumps: Option<(Poisson<f64>, LawSampler)>,
}

impl PathSampler {
    fn new(profile: &ProcessProfile, t: f64, h: f64) -> Result<Self> {
        let spec = profile.spec();
        let mut drift = spec.drift_comp() * t;
        if h != 0.0 {
            drift += spec.sigma0_sq() * h * t;
        }
        let jumps = match profile.jump_terms() {
            Some((rate, j)) => {
                let (rate, law) = if h == 0.0 {
                    (rate, j.clone())
                } else {
                    (rate * j.cgf(h).exp(), j.tilt(h))
                };
                let mean = rate * t;
                if mean > MAX_MEAN_JUMPS {
                    return Err(Error::InvalidArgument(format!(
                        "expected {mean} jumps per path exceeds the limit of {MAX_MEAN_JUMPS}"
                    )));
                }
                let poisson = Poisson::new(mean).map_err(|e| Error::InvalidArgument(format!("jump count law: {e}")))?;
                Some((poisson, law.sampler()))
            }
            None => None,
        };
        Ok(PathSampler {
            sd: (spec.sigma0_sq() * t).sqrt(),
            drift,
            jumps,
        })
    }

    fn draw(&self, rng: &mut StreamRng) -> f64 {
        let mut z = self.drift;
        if self.sd > 0.0 {
            let g: f64 = rng.sample(StandardNormal);
            z += self.sd * g;
        }
        if let Some((poisson, sampler)) = &self.jumps {
            let count = poisson.sample(rng) as u64;
            for _ in 0..count {
                z += sampler.draw(rng);
            }
        }
        z
    }
}

/// `n_samples` independent draws of `Z_t` under the untilted process.
pub fn simulate_increments(profile: &ProcessProfile, t: f64, n_samples: u64, seed: u64) -> Result<Vec<f64>> {
    check_time(t)?;
    let sampler = PathSampler::new(profile, t, 0.0)?;
    let mut out = Vec::with_capacity(n_samples as usize);
    for (index, count) in crate::rng::chunks(n_samples) {
        let mut rng = substream(seed, index);
        out.extend((0..count).map(|_| sampler.draw(&mut rng)));
    }
    Ok(out)
}

/// Importance-sampling estimate of `P(Z_t > sigma c t)` with the tilt
/// chosen by the saddle root at `c`. A non-positive `c` falls back to plain
/// path simulation with a warning.
pub fn process_simulate_tail(
    profile: &ProcessProfile,
    c: f64,
    t: f64,
    n_samples: u64,
    seed: u64,
) -> Result<SimulationReport> {
    check_time(t)?;
    if c <= 0.0 {
        let mut report = process_simulate_tail_at(profile, c, t, 0.0, n_samples, seed)?;
        report
            .warnings
            .push(format!("c = {c} is not positive; fell back to plain path simulation"));
        return Ok(report);
    }
    let sol = solve_saddle(profile, c)?;
    process_simulate_tail_at(profile, c, t, sol.h, n_samples, seed)
}

/// Importance-sampling estimate with a caller-chosen tilt; each path
/// contributes `1{Z_t > sigma c t} exp(-h Z_t + t kappa(h))`. With `h = 0`
/// this is plain path simulation with weights exactly 1.
pub fn process_simulate_tail_at(
    profile: &ProcessProfile,
    c: f64,
    t: f64,
    h: f64,
    n_samples: u64,
    seed: u64,
) -> Result<SimulationReport> {
    check_time(t)?;
    check_samples(n_samples)?;
    profile.check_strip(h)?;
    let start = Instant::now();
    let threshold = profile.sigma() * c * t;
    let cutoff = event_cutoff(threshold, profile.sigma() * t);
    let sampler = PathSampler::new(profile, t, h)?;
    let t_kappa = if h == 0.0 { 0.0 } else { t * profile.kappa_unchecked(h) };
    let stats = run_chunked(seed, n_samples, |rng| {
        let z = sampler.draw(rng);
        if z > cutoff {
            if h == 0.0 {
                1.0
            } else {
                (t_kappa - h * z).exp()
            }
        } else {
            0.0
        }
    });
    let (method, std_error) = if h == 0.0 {
        (Method::Mc, binomial_std_error(stats.mean(), n_samples))
    } else {
        (Method::Is, stats.std_error())
    };
    Ok(SimulationReport {
        estimate: stats.mean(),
        std_error,
        n_samples,
        method,
        seed,
        tilt: h,
        elapsed: start.elapsed().as_secs_f64(),
        warnings: Vec::new(),
    })
}
