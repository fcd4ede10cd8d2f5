//! Closed-form tail approximations.
//!
//! Notation: `F_n(x) = P(Z_1 + ... + Z_n <= sigma * x * sqrt(n))` is the law
//! of the standardized sum, `z = x / sqrt(n)` and `c` is the standardized
//! per-summand mean of a large deviation, so that `x = c * sqrt(n)`.
//!
//! Raw formula values are reported as computed, even where they exceed 1.
//! Asymptotic regimes are not enforced; each estimate instead carries a named
//! [`RegimeCheck`] saying whether `(x, n)` sits inside the regime the
//! approximation is meant for. The only hard domain condition is `x > 1` for
//! the ratio forms.
//!
//! Lower-tail variants evaluate the upper-tail machinery on the negated law.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cgf::{CgfProfile, CumulantFunction};
use crate::error::{Error, Result};
use crate::saddle::{lambda_coeffs, solve_saddle};
use crate::special::log_normal_tail;

pub use crate::special::{normal_cdf, normal_tail};

/// Estimation method tags shared by asymptotic and simulation outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Normal,
    Thm1,
    Thm2,
    Thm3,
    Thm6,
    Exact,
    Mc,
    Is,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Normal,
        Method::Thm1,
        Method::Thm2,
        Method::Thm3,
        Method::Thm6,
        Method::Exact,
        Method::Mc,
        Method::Is,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Normal => "normal",
            Method::Thm1 => "thm1",
            Method::Thm2 => "thm2",
            Method::Thm3 => "thm3",
            Method::Thm6 => "thm6",
            Method::Exact => "exact",
            Method::Mc => "mc",
            Method::Is => "is",
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, Method::Mc | Method::Is)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown method tag `{s}`")))
    }
}

/// Which tail an estimate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[default]
    Upper,
    Lower,
}

/// Order-of-error annotation or a numeric standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorNote {
    Order(String),
    StdError(f64),
}

impl fmt::Display for ErrorNote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorNote::Order(s) => f.write_str(s),
            ErrorNote::StdError(se) => write!(f, "se={se:.16e}"),
        }
    }
}

/// The asymptotic regimes the approximations are stated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `x = o(sqrt(n) / log n)`; flagged once `x log n / sqrt(n)` exceeds 1.
    ModerateDeviation,
    /// `x = O(n^{1/6})`; flagged once `x / n^{1/6}` exceeds 3.
    CubeRoot,
    /// `x = c sqrt(n)` with `c` fixed inside the drift limits.
    LinearScale,
}

impl Regime {
    pub fn holds(self, x: f64, n: f64) -> bool {
        match self {
            Regime::ModerateDeviation => x * n.ln() / n.sqrt() <= 1.0,
            Regime::CubeRoot => x / n.powf(1.0 / 6.0) <= 3.0,
            Regime::LinearScale => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeCheck {
    pub regime: Regime,
    pub satisfied: bool,
}

impl RegimeCheck {
    fn new(regime: Regime, x: f64, n: f64) -> Self {
        RegimeCheck {
            regime,
            satisfied: regime.holds(x, n),
        }
    }
}

/// A probability (or ratio) estimate with its error annotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub value: f64,
    pub method: Method,
    pub side: Side,
    pub error_note: ErrorNote,
    pub regime: Option<RegimeCheck>,
    pub warnings: Vec<String>,
}

fn ratio_order(profile: &CgfProfile) -> ErrorNote {
    ErrorNote::Order(if profile.spec().has_density() {
        "1+O(x/sqrt(n))".into()
    } else {
        "1+O(x*log(n)/sqrt(n))".into()
    })
}

fn check_x(x: f64, min_exclusive: f64) -> Result<()> {
    if x > min_exclusive {
        Ok(())
    } else if min_exclusive == 1.0 {
        Err(Error::XTooSmall { x })
    } else {
        Err(Error::InvalidArgument(format!("x = {x} must be positive")))
    }
}

fn check_n(n: u64) -> Result<f64> {
    if n == 0 {
        Err(Error::InvalidArgument("number of summands must be at least 1".into()))
    } else {
        Ok(n as f64)
    }
}

fn orient(profile: &CgfProfile, side: Side) -> std::borrow::Cow<'_, CgfProfile> {
    match side {
        Side::Upper => std::borrow::Cow::Borrowed(profile),
        Side::Lower => std::borrow::Cow::Owned(profile.negated()),
    }
}

/// Leading factor `exp((x^3/sqrt(n)) lambda(x/sqrt(n)))` of
/// `(1 - F_n(x)) / (1 - Phi(x))`.
pub fn thm1_upper_ratio(profile: &CgfProfile, x: f64, n: u64) -> Result<TailEstimate> {
    check_x(x, 1.0)?;
    let nf = check_n(n)?;
    let z = x / nf.sqrt();
    let sol = solve_saddle(profile, z)?;
    Ok(TailEstimate {
        value: (nf * z * z * z * sol.lambda_z).exp(),
        method: Method::Thm1,
        side: Side::Upper,
        error_note: ratio_order(profile),
        regime: Some(RegimeCheck::new(Regime::ModerateDeviation, x, nf)),
        warnings: Vec::new(),
    })
}

/// Leading factor `exp(-(x^3/sqrt(n)) lambda(-x/sqrt(n)))` of
/// `F_n(-x) / Phi(-x)`.
pub fn thm1_lower_ratio(profile: &CgfProfile, x: f64, n: u64) -> Result<TailEstimate> {
    let mut est = thm1_upper_ratio(&profile.negated(), x, n)?;
    est.side = Side::Lower;
    Ok(est)
}

/// `exp(±c0 x^3 / sqrt(n))`, the first-order ratio to the normal tail.
pub fn thm2_ratio(profile: &CgfProfile, x: f64, n: u64, side: Side) -> Result<TailEstimate> {
    check_x(x, 1.0)?;
    let nf = check_n(n)?;
    let oriented = orient(profile, side);
    let (c0, _) = lambda_coeffs(oriented.as_ref());
    Ok(TailEstimate {
        value: (c0 * x * x * x / nf.sqrt()).exp(),
        method: Method::Thm2,
        side,
        error_note: ErrorNote::Order("+O(x*log(n)/sqrt(n))".into()),
        regime: Some(RegimeCheck::new(Regime::CubeRoot, x, nf)),
        warnings: Vec::new(),
    })
}

/// `[1 - Phi(x)] exp(c0 x^3 / sqrt(n))` (upper) or
/// `Phi(-x) exp(-c0 x^3 / sqrt(n))` (lower).
pub fn thm3_tail(profile: &CgfProfile, x: f64, n: u64, side: Side) -> Result<TailEstimate> {
    check_x(x, 0.0)?;
    let nf = check_n(n)?;
    let oriented = orient(profile, side);
    let (c0, _) = lambda_coeffs(oriented.as_ref());
    Ok(TailEstimate {
        value: normal_tail(x) * (c0 * x * x * x / nf.sqrt()).exp(),
        method: Method::Thm3,
        side,
        error_note: ErrorNote::Order("+O(log(n)/sqrt(n)*exp(-x^2/2))".into()),
        regime: Some(RegimeCheck::new(Regime::CubeRoot, x, nf)),
        warnings: Vec::new(),
    })
}

/// Common limit `1 - e^{-c}` of the conditional overshoot probabilities.
pub fn thm4_limit(c: f64) -> Result<f64> {
    if c.is_nan() || c <= 0.0 {
        return Err(Error::InvalidArgument(format!("c = {c} must be positive")));
    }
    Ok(-(-c).exp_m1())
}

/// Gaussian reference quantity `[Phi(x + c/x) - Phi(x)] / [1 - Phi(x)]`,
/// evaluated in log space so that it stays accurate where `1 - Phi(x)`
/// underflows.
pub fn thm4_gaussian_reference(x: f64, c: f64) -> Result<f64> {
    if !(x > 0.0 && c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need x > 0 and c > 0, got x = {x}, c = {c}"
        )));
    }
    let log_ratio = log_normal_tail(x + c / x) - log_normal_tail(x);
    Ok(-log_ratio.exp_m1())
}

/// Large-deviation tail `(b0 / sqrt(n)) e^{-alpha n}` for `1 - F_n(c sqrt(n))`
/// when `c > 0`, or for `F_n(c sqrt(n))` when `c < 0`.
pub fn thm6_tail(profile: &CgfProfile, c: f64, n: u64) -> Result<TailEstimate> {
    if c == 0.0 {
        return Err(Error::Degenerate("c = 0 gives h = 0 and an unbounded b0".into()));
    }
    if c < 0.0 {
        let mut est = thm6_tail(&profile.negated(), -c, n)?;
        est.side = Side::Lower;
        return Ok(est);
    }
    let nf = check_n(n)?;
    let sol = solve_saddle(profile, c)?;
    let b0 = sol.b0.expect("non-zero target");
    let mut warnings = Vec::new();
    if !profile.spec().has_density() {
        warnings.push("law has no absolutely continuous component; the expansion's hypotheses do not hold".to_string());
    }
    Ok(TailEstimate {
        value: b0 / nf.sqrt() * (-sol.alpha * nf).exp(),
        method: Method::Thm6,
        side: Side::Upper,
        error_note: ErrorNote::Order("relative O(1/n)".into()),
        regime: Some(RegimeCheck::new(Regime::LinearScale, c * nf.sqrt(), nf)),
        warnings,
    })
}

/// `2 alpha(c) / c^2`: the factor by which `log[1 - F_n(c sqrt n)]` departs
/// from the Gaussian log-tail.
pub fn log_asymptote_factor<C: CumulantFunction + ?Sized>(profile: &C, c: f64) -> Result<f64> {
    if c == 0.0 {
        return Err(Error::Degenerate("the factor is a limit at c = 0".into()));
    }
    let sol = solve_saddle(profile, c)?;
    Ok(2.0 * sol.alpha / (c * c))
}
