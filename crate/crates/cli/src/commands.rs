//! The `rate`, `tail`, `simulate` and `series` commands.
//!
//! Each command expands its grids into independent points, evaluates them in
//! parallel and returns rows in grid order.

use ldtail::asymptotics::{normal_tail, thm1_upper_ratio, thm2_ratio, thm3_tail, thm6_tail};
use ldtail::oracles::{naive_mc_tail, tilted_is_tail};
use ldtail::process::{process_exact_tail, process_simulate_tail, process_simulate_tail_at, process_tail};
use ldtail::report::{stochastic_note, ResultRow};
use ldtail::saddle::{lambda_coeffs, solve_saddle};
use ldtail::{
    CgfProfile, CumulantFunction, DistributionSpec, Error, Family, Method, ProcessProfile, Side, SimulationReport,
    TailEstimate,
};
use rayon::prelude::*;

use crate::config::{CliConfig, Model};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Rate,
    Tail,
    Simulate,
    Series,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Rate => "rate",
            Command::Tail => "tail",
            Command::Simulate => "simulate",
            Command::Series => "series",
        }
    }
}

pub fn run(command: Command, cfg: &CliConfig) -> Result<Vec<ResultRow>, CliError> {
    match command {
        Command::Rate => cmd_rate(cfg),
        Command::Tail => cmd_tail(cfg),
        Command::Simulate => cmd_simulate(cfg),
        Command::Series => cmd_series(cfg),
    }
}

/// A CGF profile of either kind, oriented for the requested side.
enum Profile {
    Distribution(CgfProfile),
    Process(ProcessProfile),
}

impl Profile {
    fn new(cfg: &CliConfig, side: Side) -> Result<(Profile, String), CliError> {
        let suffix = if side == Side::Lower { ":lower" } else { "" };
        Ok(match cfg.model()? {
            Model::Distribution(d) => {
                let oriented = if side == Side::Lower { d.negated() } else { d.clone() };
                (
                    Profile::Distribution(CgfProfile::new(oriented)),
                    format!("{}{suffix}", d.label()),
                )
            }
            Model::Process(p) => {
                let oriented = if side == Side::Lower { p.negated() } else { p.clone() };
                (
                    Profile::Process(ProcessProfile::new(oriented)),
                    format!("{}{suffix}", p.label()),
                )
            }
        })
    }

    fn cgf(&self) -> &dyn CumulantFunction {
        match self {
            Profile::Distribution(p) => p,
            Profile::Process(p) => p,
        }
    }
}

/// `rate`: the saddle root and derived quantities at each `c`.
pub fn cmd_rate(cfg: &CliConfig) -> Result<Vec<ResultRow>, CliError> {
    let (profile, family) = Profile::new(cfg, Side::Upper)?;
    let cs = cfg.grid(&cfg.c, "c")?.values("c")?;
    let rows: Vec<Vec<ResultRow>> = cs
        .par_iter()
        .map(|&c| {
            let names = ["h", "alpha", "lambda", "b0"];
            match solve_saddle(profile.cgf(), c) {
                Ok(sol) => {
                    let mut rows: Vec<ResultRow> = [sol.h, sol.alpha, sol.lambda_z]
                        .into_iter()
                        .zip(names)
                        .map(|(v, name)| ResultRow::new(&family, 0.0, c, name, v, ""))
                        .collect();
                    rows.push(match sol.b0 {
                        Some(b0) => ResultRow::new(&family, 0.0, c, "b0", b0, ""),
                        None => ResultRow::failed(
                            &family,
                            0.0,
                            c,
                            "b0",
                            &Error::Degenerate("b0 is unbounded at c = 0".into()),
                        ),
                    });
                    rows
                }
                Err(e) => names
                    .iter()
                    .map(|name| ResultRow::failed(&family, 0.0, c, *name, &e))
                    .collect(),
            }
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// `series`: the coefficients `c0`, `c1` and `lambda` on the `z` grid.
pub fn cmd_series(cfg: &CliConfig) -> Result<Vec<ResultRow>, CliError> {
    let (profile, family) = Profile::new(cfg, Side::Upper)?;
    let (c0, c1) = lambda_coeffs(profile.cgf());
    let mut rows = vec![
        ResultRow::new(&family, 0.0, 0.0, "c0", c0, ""),
        ResultRow::new(&family, 0.0, 0.0, "c1", c1, ""),
    ];
    if let Some(grid) = &cfg.z {
        let zs = grid.values("z")?;
        let lambdas: Vec<ResultRow> = zs
            .par_iter()
            .map(|&z| match solve_saddle(profile.cgf(), z) {
                Ok(sol) => ResultRow::new(&family, 0.0, z, "lambda", sol.lambda_z, ""),
                Err(e) => ResultRow::failed(&family, 0.0, z, "lambda", &e),
            })
            .collect();
        rows.extend(lambdas);
    }
    Ok(rows)
}

const DISTRIBUTION_DEFAULT_METHODS: [Method; 6] = [
    Method::Normal,
    Method::Thm1,
    Method::Thm2,
    Method::Thm3,
    Method::Thm6,
    Method::Exact,
];
const PROCESS_DEFAULT_METHODS: [Method; 2] = [Method::Normal, Method::Thm6];

/// `tail`: one row per `(n or t, x or c, method)`.
pub fn cmd_tail(cfg: &CliConfig) -> Result<Vec<ResultRow>, CliError> {
    let (profile, _) = Profile::new(cfg, cfg.side())?;
    let methods = match &cfg.methods {
        Some(m) if m.is_empty() => return Err(CliError::config("methods", "method list is empty")),
        Some(m) => m.clone(),
        None => match profile {
            Profile::Distribution(_) => DISTRIBUTION_DEFAULT_METHODS.to_vec(),
            Profile::Process(_) => PROCESS_DEFAULT_METHODS.to_vec(),
        },
    };
    tail_rows(cfg, &methods, 1)
}

/// `simulate`: Monte Carlo and importance-sampling rows, optionally
/// replicated with consecutive seeds.
pub fn cmd_simulate(cfg: &CliConfig) -> Result<Vec<ResultRow>, CliError> {
    let methods = cfg.methods.clone().unwrap_or_else(|| vec![Method::Is]);
    if methods.is_empty() {
        return Err(CliError::config("methods", "method list is empty"));
    }
    if let Some(i) = methods.iter().position(|m| !m.is_stochastic()) {
        return Err(CliError::config(
            &format!("methods[{i}]"),
            format!("`{}` is not a simulation method (expected mc or is)", methods[i]),
        ));
    }
    let replicates = cfg.replicates.unwrap_or(1);
    if replicates == 0 {
        return Err(CliError::config("replicates", "must be at least 1"));
    }
    tail_rows(cfg, &methods, replicates)
}

/// A grid point of a tail sweep.
struct Point {
    /// `n` or `t`.
    size: f64,
    /// The grid value as given (`x` or `c`).
    given: f64,
    /// Standardized threshold `x`.
    x: f64,
}

fn points(cfg: &CliConfig, process: bool) -> Result<Vec<Point>, CliError> {
    let sizes: Vec<f64> = if process {
        let ts = cfg.grid(&cfg.t, "t")?.values("t")?;
        if let Some(t) = ts.iter().find(|t| **t <= 0.0) {
            return Err(CliError::config("t", format!("time {t} must be positive")));
        }
        ts
    } else {
        cfg.grid(&cfg.n, "n")?
            .counts("n")?
            .into_iter()
            .map(|n| n as f64)
            .collect()
    };
    let (values, by_c) = match (&cfg.x, &cfg.c) {
        (Some(x), None) => (x.values("x")?, false),
        (None, Some(c)) => (c.values("c")?, true),
        (Some(_), Some(_)) => return Err(CliError::config("", "give either an `x` or a `c` grid, not both")),
        (None, None) => {
            return Err(CliError::config(
                "",
                "an `x` or a `c` grid is required for this command",
            ))
        }
    };
    let mut out = Vec::with_capacity(sizes.len() * values.len());
    for &size in &sizes {
        for &given in &values {
            let x = if by_c { given * size.sqrt() } else { given };
            out.push(Point { size, given, x });
        }
    }
    Ok(out)
}

fn asymptotic_row(family: &str, p: &Point, method: Method, result: ldtail::Result<(f64, TailEstimate)>) -> ResultRow {
    match result {
        Ok((value, est)) => {
            let mut note = est.error_note.to_string();
            if let Some(check) = est.regime.filter(|c| !c.satisfied) {
                let regime = serde_json::to_value(check.regime).ok();
                note.push_str(&format!(
                    ";regime_violated={}",
                    regime.as_ref().and_then(|v| v.as_str()).unwrap_or("unknown")
                ));
            }
            for w in &est.warnings {
                note.push_str(&format!(";warning={w}"));
            }
            ResultRow::new(family, p.size, p.given, method.as_str(), value, note)
        }
        Err(e) => ResultRow::failed(family, p.size, p.given, method.as_str(), &e),
    }
}

fn simulation_row(family: &str, p: &Point, result: ldtail::Result<SimulationReport>, method: Method) -> ResultRow {
    match result {
        Ok(r) => {
            let mut note = stochastic_note(r.std_error, r.seed);
            for w in &r.warnings {
                note.push_str(&format!(";warning={w}"));
            }
            ResultRow::new(family, p.size, p.given, method.as_str(), r.estimate, note)
        }
        Err(e) => ResultRow::failed(family, p.size, p.given, method.as_str(), &e),
    }
}

/// Exact tail of the oriented law, evaluated at the standardized threshold
/// directly for the Gaussian family so that normal-based rows compare
/// without rounding.
fn exact_distribution_tail(spec: &DistributionSpec, n: u64, x: f64) -> ldtail::Result<f64> {
    if let Family::Gaussian { .. } = spec.family() {
        return Ok(normal_tail(x));
    }
    spec.exact_sum_tail(n, spec.variance().sqrt() * x * (n as f64).sqrt())
}

fn distribution_point(
    profile: &CgfProfile,
    family: &str,
    p: &Point,
    methods: &[Method],
    samples: u64,
    seeds: &[u64],
) -> Vec<ResultRow> {
    let n = p.size as u64;
    let nf = p.size;
    let threshold = profile.sigma() * p.x * nf.sqrt();
    let exact = exact_distribution_tail(profile.spec(), n, p.x);
    let mut rows = Vec::new();
    let mut stochastic = Vec::new();
    for &method in methods {
        let with_normal = |est: ldtail::Result<TailEstimate>| est.map(|e| (normal_tail(p.x) * e.value, e));
        let row = match method {
            Method::Normal => ResultRow::new(family, nf, p.given, "normal", normal_tail(p.x), "reference"),
            Method::Thm1 => asymptotic_row(family, p, method, with_normal(thm1_upper_ratio(profile, p.x, n))),
            Method::Thm2 => asymptotic_row(family, p, method, with_normal(thm2_ratio(profile, p.x, n, Side::Upper))),
            Method::Thm3 => asymptotic_row(
                family,
                p,
                method,
                thm3_tail(profile, p.x, n, Side::Upper).map(|e| (e.value, e)),
            ),
            Method::Thm6 => asymptotic_row(
                family,
                p,
                method,
                thm6_tail(profile, p.x / nf.sqrt(), n).map(|e| (e.value, e)),
            ),
            Method::Exact => match &exact {
                Ok(v) => ResultRow::new(family, nf, p.given, "exact", *v, ""),
                Err(e) => ResultRow::failed(family, nf, p.given, "exact", e),
            },
            Method::Mc | Method::Is => {
                for &seed in seeds {
                    let report = if method == Method::Mc {
                        naive_mc_tail(profile.spec(), n, threshold, samples, seed)
                    } else {
                        tilted_is_tail(profile, n, threshold, samples, seed)
                    };
                    stochastic.push((rows.len(), method, report));
                    rows.push(ResultRow::failed(
                        family,
                        nf,
                        p.given,
                        method.as_str(),
                        &Error::EmptyResult,
                    ));
                }
                continue;
            }
        };
        rows.push(row);
    }
    finish_point(family, p, rows, stochastic, exact.ok())
}

fn process_point(
    profile: &ProcessProfile,
    family: &str,
    p: &Point,
    methods: &[Method],
    samples: u64,
    seeds: &[u64],
) -> Vec<ResultRow> {
    let t = p.size;
    let c = p.x / t.sqrt();
    let exact = process_exact_tail(profile, c, t);
    let mut rows = Vec::new();
    let mut stochastic = Vec::new();
    for &method in methods {
        let row = match method {
            Method::Normal => ResultRow::new(family, t, p.given, "normal", normal_tail(p.x), "reference"),
            Method::Thm6 => asymptotic_row(family, p, method, process_tail(profile, c, t).map(|e| (e.value, e))),
            Method::Exact => match &exact {
                Ok(v) => ResultRow::new(family, t, p.given, "exact", *v, ""),
                Err(e) => ResultRow::failed(family, t, p.given, "exact", e),
            },
            Method::Mc | Method::Is => {
                for &seed in seeds {
                    let report = if method == Method::Mc {
                        process_simulate_tail_at(profile, c, t, 0.0, samples, seed)
                    } else {
                        process_simulate_tail(profile, c, t, samples, seed)
                    };
                    stochastic.push((rows.len(), method, report));
                    rows.push(ResultRow::failed(
                        family,
                        t,
                        p.given,
                        method.as_str(),
                        &Error::EmptyResult,
                    ));
                }
                continue;
            }
            Method::Thm1 | Method::Thm2 | Method::Thm3 => ResultRow::failed(
                family,
                t,
                p.given,
                method.as_str(),
                &Error::Unsupported(format!(
                    "{method} is defined for i.i.d. sums only; use thm6 for processes"
                )),
            ),
        };
        rows.push(row);
    }
    finish_point(family, p, rows, stochastic, exact.ok())
}

/// Fills in simulation rows and attaches the comparator: the exact tail
/// where one exists, else the first importance-sampling estimate, else the
/// first Monte Carlo estimate.
fn finish_point(
    family: &str,
    p: &Point,
    mut rows: Vec<ResultRow>,
    stochastic: Vec<(usize, Method, ldtail::Result<SimulationReport>)>,
    exact: Option<f64>,
) -> Vec<ResultRow> {
    let mut simulated: Vec<(Method, f64)> = Vec::new();
    for (index, method, report) in stochastic {
        if let Ok(r) = &report {
            simulated.push((method, r.estimate));
        }
        rows[index] = simulation_row(family, p, report, method);
    }
    let comparator = exact.or_else(|| {
        [Method::Is, Method::Mc]
            .iter()
            .find_map(|m| simulated.iter().find(|(sm, _)| sm == m).map(|(_, v)| *v))
    });
    if let Some(reference) = comparator {
        for row in rows.iter_mut() {
            let is_reference_row = row.method == "exact" || (exact.is_none() && row.is_stochastic());
            if !is_reference_row {
                *row = row.clone().with_exact(reference);
            }
        }
    }
    rows
}

fn tail_rows(cfg: &CliConfig, methods: &[Method], replicates: u64) -> Result<Vec<ResultRow>, CliError> {
    let side = cfg.side();
    let (profile, family) = Profile::new(cfg, side)?;
    let points = points(cfg, matches!(profile, Profile::Process(_)))?;
    let samples = cfg.samples();
    let seeds: Vec<u64> = (0..replicates).map(|r| cfg.seed().wrapping_add(r)).collect();
    let rows: Vec<Vec<ResultRow>> = points
        .par_iter()
        .map(|p| match &profile {
            Profile::Distribution(d) => distribution_point(d, &family, p, methods, samples, &seeds),
            Profile::Process(pr) => process_point(pr, &family, p, methods, samples, &seeds),
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}
