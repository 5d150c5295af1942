#![allow(clippy::excessive_precision)]

use super::*;
use approx::assert_relative_eq;
use proptest::prelude::*;

fn cp(lambda: f64, jump_density: JumpDensity) -> LevyMeasure {
    LevyMeasure::CompoundPoisson { lambda, jump_density }
}

fn uniform01() -> JumpDensity {
    JumpDensity::Uniform { a: 0.0, b: 1.0 }
}

fn ts(alpha: f64, lambda_minus: f64, lambda_plus: f64) -> LevyMeasure {
    LevyMeasure::TemperedStable { c_minus: 1.0, c_plus: 1.0, lambda_minus, lambda_plus, alpha }
}

/// Composite midpoint rule in `u = ln y` over `[lo, hi]`.
fn log_riemann(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let (ul, uh) = (lo.ln(), hi.ln());
    let h = (uh - ul) / panels as f64;
    let mut s = crate::quadrature::Neumaier::default();
    for i in 0..panels {
        let y = (ul + (i as f64 + 0.5) * h).exp();
        s.add(f(y) * y);
    }
    s.total() * h
}

const ORACLE_PANELS: usize = 10_000_000;

#[test]
fn density_examples() {
    assert_relative_eq!(ts(0.5, 1.0, 1.0).density_at(1.0).unwrap(), (-1.0f64).exp(), max_relative = 1e-15);
    assert_eq!(cp(2.0, uniform01()).density_at(0.5).unwrap(), 2.0);
    assert_eq!(cp(2.0, uniform01()).density_at(-0.5).unwrap(), 0.0);
    assert_eq!(ts(0.5, 1.0, 1.0).density_at(0.0), Err(MeasureError::EvaluationAtZero));
    assert_eq!(LevyMeasure::Zero {}.density_at(1.0).unwrap(), 0.0);
}

#[test]
fn total_mass_examples() {
    assert_eq!(cp(3.0, JumpDensity::Exponential { rate: 2.0 }).total_mass().unwrap(), Quantity::Finite(3.0));
    assert_eq!(LevyMeasure::Zero {}.total_mass().unwrap(), Quantity::Finite(0.0));
    assert_eq!(ts(0.5, 1.0, 1.0).total_mass().unwrap(), Quantity::Infinite);
    // α < 0: finite activity, mass C λ^α Γ(-α) per side; Γ(0.5) = √π.
    let m = ts(-0.5, 1.0, 4.0).total_mass().unwrap().finite().unwrap();
    let pi_sqrt = std::f64::consts::PI.sqrt();
    assert_relative_eq!(m, pi_sqrt * (1.0 + 4f64.powf(-0.5)), max_relative = 1e-8);
    let heavy = TabulatedLevy::new(vec![0.01, 0.1, 1.0], vec![1e6, 1e3, 1.0]).unwrap();
    assert_eq!(LevyMeasure::Tabulated(heavy).total_mass().unwrap(), Quantity::Infinite);
}

#[test]
fn gamma_examples() {
    assert!(ts(0.5, 1.0, 1.0).gamma_nu().unwrap().abs() < 1e-10);
    assert_relative_eq!(cp(3.0, uniform01()).gamma_nu().unwrap(), 1.5, max_relative = 1e-12);
    assert!(matches!(ts(1.5, 1.0, 1.0).gamma_nu(), Err(MeasureError::DivergentIntegral(_))));
    assert!(matches!(ts(1.0, 1.0, 2.0).gamma_nu(), Err(MeasureError::DivergentIntegral(_))));
}

/// One-sided tempered stable density `y^{-1.5} e^{-y}` tabulated on a log grid.
fn one_sided_table() -> TabulatedLevy {
    let n = 400;
    let (lo, hi) = (1e-6f64.ln(), 50f64.ln());
    let grid: Vec<f64> = (0..n).map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()).collect();
    let values = grid.iter().map(|y| y.powf(-1.5) * (-y).exp()).collect();
    TabulatedLevy::new(grid, values).unwrap()
}

#[test]
fn gamma_of_tabulated_one_sided_matches_oracle() {
    let t = one_sided_table();
    let nu = LevyMeasure::Tabulated(t.clone());
    let oracle = log_riemann(|y| y * t.density(y), 1e-30, 1.0, ORACLE_PANELS);
    assert_relative_eq!(nu.gamma_nu().unwrap(), oracle, max_relative = 1e-6);
    // and close to the untabulated value ∫_0^1 y^{-0.5} e^{-y} dy
    assert_relative_eq!(nu.gamma_nu().unwrap(), 1.4936482656248540, max_relative = 1e-3);
}

#[test]
fn example3_pair_matches_oracles() {
    let nu1 = ts(0.5, 1.0, 2.0);
    let nu2 = ts(0.5, 1.0, 1.0);
    let l1_oracle =
        log_riemann(|y| ((-y).exp() * (-y).exp_m1()).abs() * y.powf(-1.5), 1e-30, 80.0, ORACLE_PANELS);
    let h2_oracle = log_riemann(
        |y| {
            let e = (-0.5 * y).exp() * (-0.5 * y).exp_m1();
            e * e * y.powf(-1.5)
        },
        1e-30,
        80.0,
        ORACLE_PANELS,
    );
    let l1 = l1_distance(&nu1, &nu2).unwrap().finite().unwrap();
    let h2 = hellinger_sq(&nu1, &nu2).unwrap().finite().unwrap();
    assert_relative_eq!(l1, l1_oracle, max_relative = 1e-6);
    assert_relative_eq!(h2, h2_oracle, max_relative = 1e-6);
    // high-precision references
    assert_relative_eq!(l1, 1.4683488474509690, max_relative = 1e-8);
    assert_relative_eq!(h2, 0.12505080362617885, max_relative = 1e-8);
    assert!(h2 <= l1);
}

#[test]
fn alpha_one_point_five_l1_diverges_hellinger_finite() {
    let nu1 = ts(1.5, 1.0, 2.0);
    let nu2 = ts(1.5, 1.0, 1.0);
    assert_eq!(l1_distance(&nu1, &nu2).unwrap(), Quantity::Infinite);
    let h2 = hellinger_sq(&nu1, &nu2).unwrap().finite().unwrap();
    assert_relative_eq!(h2, 0.36439881219081080, max_relative = 1e-7);
    assert_relative_eq!(small_jump_gap(&nu1, &nu2).unwrap(), -1.3327672061710655, max_relative = 1e-7);
}

#[test]
fn compound_poisson_identities() {
    for (l1, l2) in [(2.0, 1.0), (4.0, 1.0), (1.2, 1.0), (0.3, 2.7)] {
        for g in [uniform01(), JumpDensity::Exponential { rate: 1.5 }, JumpDensity::Normal { mean: 0.2, variance: 0.5 }] {
            let (a, b) = (cp(l1, g.clone()), cp(l2, g));
            let l1d = l1_distance(&a, &b).unwrap().finite().unwrap();
            let h2 = hellinger_sq(&a, &b).unwrap().finite().unwrap();
            assert!((l1d - (l1 - l2).abs()).abs() < 1e-9, "{l1d} vs {}", (l1 - l2).abs());
            assert!((h2 - (l1.sqrt() - l2.sqrt()).powi(2)).abs() < 1e-9);
            assert!(h2 <= l1d);
        }
    }
    let a = cp(2.0, uniform01());
    assert_eq!(l1_distance(&a, &a).unwrap(), Quantity::Finite(0.0));
    assert_eq!(hellinger_sq(&a, &a).unwrap(), Quantity::Finite(0.0));
}

#[test]
fn abs_continuity_examples() {
    assert!(check_abs_continuity(&cp(2.0, uniform01()), &cp(1.0, uniform01())).is_ok());
    let wide = cp(1.0, JumpDensity::Uniform { a: 0.0, b: 2.0 });
    let check = check_abs_continuity(&wide, &cp(1.0, uniform01()));
    assert!(!check.is_ok());
    assert!(check.violations.iter().all(|y| *y > 1.0 && *y <= 2.0));
    assert!(matches!(
        l1_distance(&wide, &cp(1.0, uniform01())),
        Err(MeasureError::NotAbsolutelyContinuous { .. })
    ));
    assert!(check_abs_continuity(&ts(0.5, 1.0, 3.0), &ts(0.5, 2.0, 1.0)).is_ok());
    // tails that underflow are still recognised as positive
    let e1 = cp(1.0, JumpDensity::Exponential { rate: 1.0 });
    let e10 = cp(1.0, JumpDensity::Exponential { rate: 10.0 });
    assert!(check_abs_continuity(&e1, &e10).is_ok());
    assert!(!check_abs_continuity(&ts(0.5, 1.0, 1.0), &LevyMeasure::Zero {}).is_ok());
    assert!(check_abs_continuity(&LevyMeasure::Zero {}, &ts(0.5, 1.0, 1.0)).is_ok());
}

#[test]
fn validate_levy_examples() {
    let d = validate_levy(&cp(2.0, JumpDensity::Uniform { a: -3.0, b: 3.0 })).unwrap();
    assert!(d.ok);
    // λ ∫ (y²∧1) g = 2 · (2/6 · 1/3 + 4/6)
    assert_relative_eq!(d.value.finite().unwrap(), 2.0 * (2.0 / 18.0 + 4.0 / 6.0), max_relative = 1e-10);
    assert!(d.value.finite().unwrap() <= 2.0);
    assert!(validate_levy(&ts(1.5, 1.0, 1.0)).unwrap().ok);
    let grid: Vec<f64> = (0..10).map(|i| 1e-3 * 2f64.powi(i)).collect();
    let values = grid.iter().map(|y| y.powi(-3)).collect();
    let cubic = LevyMeasure::Tabulated(TabulatedLevy::new(grid, values).unwrap());
    let diag = validate_levy(&cubic).unwrap();
    assert!(!diag.ok);
    assert_eq!(diag.value, Quantity::Infinite);
    assert!(validate_levy(&ts(2.5, 1.0, 1.0)).is_err());
}

#[test]
fn json_fragments() {
    let cases = [
        r#"{"type": "compound_poisson", "lambda": 2.0, "jump_density": {"family": "uniform", "a": 0.0, "b": 1.0}}"#,
        r#"{"type": "tempered_stable", "c_minus": 1.0, "c_plus": 1.0, "lambda_minus": 1.0, "lambda_plus": 2.0, "alpha": 0.5}"#,
        r#"{"type": "zero"}"#,
        r#"{"type": "tabulated", "grid": [-2.0, -1.0, 1.0, 2.0], "values": [1.0, 2.0, 2.0, 1.0]}"#,
    ];
    for c in cases {
        let nu: LevyMeasure = serde_json::from_str(c).unwrap();
        let back: LevyMeasure = serde_json::from_str(&serde_json::to_string(&nu).unwrap()).unwrap();
        assert_eq!(nu, back);
    }
    assert_eq!(serde_json::from_str::<LevyMeasure>(cases[0]).unwrap(), cp(2.0, uniform01()));
    assert!(serde_json::from_str::<LevyMeasure>(r#"{"type": "compound_poisson", "lamda": 2.0}"#).is_err());
    assert!(serde_json::from_str::<LevyMeasure>(r#"{"type": "zero", "lambda": 1.0}"#).is_err());
    assert_eq!(serde_json::to_string(&Quantity::Infinite).unwrap(), "\"infinite\"");
}

fn arb_cp() -> impl Strategy<Value = LevyMeasure> {
    (0.1..5.0f64, 0usize..3, 0.2..3.0f64).prop_map(|(lambda, fam, p)| {
        let g = match fam {
            0 => JumpDensity::Uniform { a: -p, b: 1.0 },
            1 => JumpDensity::Exponential { rate: p },
            _ => JumpDensity::Normal { mean: p - 1.0, variance: p },
        };
        cp(lambda, g)
    })
}

fn arb_ts() -> impl Strategy<Value = (LevyMeasure, LevyMeasure)> {
    (-0.5..0.95f64, 0.3..3.0f64, 0.3..3.0f64, 0.3..3.0f64, 0.3..3.0f64, 0.2..2.0f64).prop_map(
        |(alpha, lm1, lp1, lm2, lp2, c)| {
            let a = LevyMeasure::TemperedStable { c_minus: c, c_plus: 1.0, lambda_minus: lm1, lambda_plus: lp1, alpha };
            let b = LevyMeasure::TemperedStable { c_minus: c, c_plus: 1.0, lambda_minus: lm2, lambda_plus: lp2, alpha };
            (a, b)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hellinger_below_l1_and_l1_symmetric_ts((a, b) in arb_ts()) {
        let l1 = l1_distance(&a, &b).unwrap().finite().unwrap();
        let l1r = l1_distance(&b, &a).unwrap().finite().unwrap();
        let h2 = hellinger_sq(&a, &b).unwrap().finite().unwrap();
        let tol = 1e-10f64.max(1e-8 * l1);
        prop_assert!(h2 <= l1 + 2.0 * tol);
        prop_assert!((l1 - l1r).abs() <= 2.0 * tol, "{} vs {}", l1, l1r);
    }

    #[test]
    fn finite_activity_pairs(a in arb_cp(), b in arb_cp()) {
        // general pairs on ℝ may fail absolute continuity; only same-support families reach here
        if let (Ok(l1), Ok(h2)) = (l1_distance(&a, &b), hellinger_sq(&a, &b)) {
            let (l1, h2) = (l1.finite().unwrap(), h2.finite().unwrap());
            let mass = a.total_mass().unwrap().finite().unwrap() + b.total_mass().unwrap().finite().unwrap();
            let tol = 1e-10f64.max(1e-8 * l1);
            prop_assert!(h2 <= l1 + 2.0 * tol);
            prop_assert!(l1 <= mass + 2.0 * tol);
        }
    }

    #[test]
    fn gamma_of_symmetric_measures_vanishes(alpha in -0.5..0.95f64, lam in 0.2..4.0f64, c in 0.1..3.0f64, lambda in 0.1..5.0f64, s in 0.1..3.0f64) {
        let t = LevyMeasure::TemperedStable { c_minus: c, c_plus: c, lambda_minus: lam, lambda_plus: lam, alpha };
        prop_assert!(t.gamma_nu().unwrap().abs() <= 1e-9);
        let n = cp(lambda, JumpDensity::Normal { mean: 0.0, variance: s });
        prop_assert!(n.gamma_nu().unwrap().abs() <= 1e-10);
    }
}
