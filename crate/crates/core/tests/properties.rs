use ldtail::cgf::{Bound, CgfProfile, CumulantFunction};
use ldtail::dist::{DistributionSpec, Family};
use ldtail::process::{JumpLaw, ProcessProfile, ProcessSpec};
use ldtail::report::{emit, parse, Format, ResultRow, RunManifest};
use ldtail::saddle::solve_saddle;
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        (0.05f64..0.95).prop_map(|p| Family::CenteredBernoulli { p }),
        (0.2f64..5.0).prop_map(|rate| Family::CenteredExponential { rate }),
        (0.2f64..5.0).prop_map(|rate| Family::NegatedExponential { rate }),
        (0.1f64..4.0).prop_map(|sigma| Family::Gaussian { sigma }),
        prop::collection::vec((-5i32..6, 0.05f64..1.0), 2..6).prop_filter_map("needs two distinct atoms", |atoms| {
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            let atoms: Vec<(f64, f64)> = atoms.iter().map(|&(v, p)| (v as f64, p / total)).collect();
            let first = atoms[0].0;
            atoms
                .iter()
                .any(|a| a.0 != first)
                .then_some(Family::FiniteLattice { atoms })
        }),
    ]
}

fn process() -> impl Strategy<Value = ProcessSpec> {
    let law = prop_oneof![
        (-2.0f64..2.0)
            .prop_filter("nonzero", |v| v.abs() > 0.1)
            .prop_map(|value| JumpLaw::Point { value }),
        (0.1f64..0.9).prop_map(|p| JumpLaw::Bernoulli { p }),
        (0.5f64..3.0).prop_map(|rate| JumpLaw::Exponential { rate }),
        ((-1.0f64..1.0), (0.1f64..1.0)).prop_map(|(mean, sigma)| JumpLaw::Gaussian { mean, sigma }),
    ];
    ((0.0f64..2.0), (0.1f64..3.0), law)
        .prop_filter_map("valid process", |(s, r, l)| ProcessSpec::jump_diffusion(s, r, l).ok())
}

/// The point at fraction `u` of the strip, pulled in from finite endpoints.
fn strip_point<C: CumulantFunction>(p: &C, u: f64) -> f64 {
    let s = p.strip();
    let lo = match s.lower {
        Bound::Finite(v) => 0.95 * v,
        Bound::Unbounded => -3.0,
    };
    let hi = match s.upper {
        Bound::Finite(v) => 0.95 * v,
        Bound::Unbounded => 3.0,
    };
    lo + (hi - lo) * u
}

fn shape_checks<C: CumulantFunction>(p: &C, u: f64, v: f64) -> Result<(), TestCaseError> {
    let (a, b) = (strip_point(p, u.min(v)), strip_point(p, u.max(v)));
    prop_assume!(b - a > 1e-6);
    let (ka, kb, km) = (
        p.kappa(a).unwrap(),
        p.kappa(b).unwrap(),
        p.kappa(0.5 * (a + b)).unwrap(),
    );
    let scale = ka.abs().max(kb.abs()).max(1.0);
    prop_assert!(
        km <= 0.5 * (ka + kb) + 1e-12 * scale,
        "midpoint convexity at ({a}, {b})"
    );
    prop_assert!(p.mbar(a).unwrap() < p.mbar(b).unwrap(), "mbar increasing at ({a}, {b})");
    prop_assert!(p.sigbar2(a).unwrap() > 0.0);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn distribution_cgf_is_convex_with_increasing_mean(f in family(), u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let p = CgfProfile::new(DistributionSpec::new(f).unwrap());
        prop_assert!(p.kappa(0.0).unwrap().abs() < 1e-15);
        shape_checks(&p, u, v)?;
    }

    #[test]
    fn process_cgf_is_convex_with_increasing_mean(spec in process(), u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let p = ProcessProfile::new(spec);
        prop_assert!(p.kappa(0.0).unwrap().abs() < 1e-15);
        prop_assert!(p.mbar(0.0).unwrap().abs() < 1e-12);
        shape_checks(&p, u, v)?;
    }

    #[test]
    fn saddle_identities(f in family(), u in 0.02f64..0.98) {
        let p = CgfProfile::new(DistributionSpec::new(f).unwrap());
        let limits = p.drift_limits();
        let lo = limits.lower.finite().map_or(-3.0, |v| 0.98 * v / p.sigma());
        let hi = limits.upper.finite().map_or(3.0, |v| 0.98 * v / p.sigma());
        let z = lo + (hi - lo) * u;
        prop_assume!(z.abs() > 1e-2);
        let sol = solve_saddle(&p, z).unwrap();
        prop_assert!(sol.h * z > 0.0, "tilt follows the sign of z");
        prop_assert!((sol.mbar - p.sigma() * z).abs() <= 1e-9 * p.sigma().max((p.sigma() * z).abs()));
        prop_assert!(sol.alpha >= 0.0);
        let identity = z * z / 2.0 - z.powi(3) * sol.lambda_z;
        prop_assert!((sol.alpha - identity).abs() <= 1e-10 * sol.alpha.max(1.0), "alpha {} vs {}", sol.alpha, identity);
    }

    #[test]
    fn exact_tail_is_monotone_in_threshold(f in family(), n in 1u64..40, a in -3.0f64..3.0, d in 0.0f64..2.0) {
        let spec = DistributionSpec::new(f).unwrap();
        let scale = spec.variance().sqrt() * (n as f64).sqrt();
        let lo = spec.exact_sum_tail(n, a * scale).unwrap();
        let hi = spec.exact_sum_tail(n, (a + d) * scale).unwrap();
        prop_assert!(hi <= lo + 1e-14, "{hi} > {lo}");
        prop_assert!((0.0..=1.0 + 1e-12).contains(&lo));
    }

    #[test]
    fn lattice_negation_mirrors_tails(f in family(), n in 1u64..30, x in -2.0f64..2.0) {
        let spec = DistributionSpec::new(f).unwrap();
        let neg = spec.negated();
        let t = x * spec.variance().sqrt() * (n as f64).sqrt();
        // P(-S > t) = P(S < -t) = 1 - P(S >= -t), and P(S >= -t) differs from
        // P(S > -t) only by an atom, so the sum is at least one.
        let mirrored = neg.exact_sum_tail(n, t).unwrap() + spec.exact_sum_tail(n, -t).unwrap();
        prop_assert!((1.0 - 1e-12..=2.0).contains(&mirrored));
        if spec.has_density() {
            prop_assert!((mirrored - 1.0).abs() < 1e-10, "continuous law: {mirrored}");
        }
    }

    #[test]
    fn csv_and_json_emissions_agree(values in prop::collection::vec(prop_oneof![
        any::<f64>(),
        Just(f64::INFINITY),
        Just(f64::NEG_INFINITY),
        Just(0.0),
        1e-300f64..1e300,
    ], 1..12)) {
        let rows: Vec<ResultRow> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let row = ResultRow::new("fam,\"quoted\"", 1.0 + i as f64, v, "thm6", v, "note; with, commas");
                if i % 2 == 0 { row.with_exact(1.5) } else { row }
            })
            .collect();
        let m = RunManifest::new("tail", &serde_json::json!({"k": 1}), 3, rows);
        let csv = parse(&emit(&m, Format::Csv).unwrap()).unwrap();
        let json = parse(&emit(&m, Format::Json).unwrap()).unwrap();
        prop_assert_eq!(&csv.header, &json.header);
        for (a, b) in csv.rows.iter().zip(&json.rows) {
            let same = |x: Option<f64>, y: Option<f64>| match (x, y) {
                (Some(x), Some(y)) => x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()),
                (None, None) => true,
                _ => false,
            };
            prop_assert!(same(a.value, b.value) && same(a.exact, b.exact) && same(a.ratio_to_exact, b.ratio_to_exact));
            prop_assert!(same(Some(a.x_or_c), Some(b.x_or_c)));
            prop_assert_eq!(&a.family, &b.family);
            prop_assert_eq!(&a.error_note, &b.error_note);
        }
    }
}
