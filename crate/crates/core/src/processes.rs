//! Additive processes given by local characteristics `(f(·), σ²(·), ν)`,
//! paired problems, and the scalar quantities `η` and `ξ²`.

use std::cell::Cell;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measures::{small_jump_gap, validate_levy, LevyMeasure, MeasureError, Quantity};
use crate::quadrature::{IntegrationRequest, QuadratureError};

/// Points of the uniform probe grid on `[0, T]` used for functional
/// identities between time functions.
pub const PROBE_GRID_POINTS: usize = 2049;
/// Absolute tolerance for `σ1² ≡ σ2²` and the drift-match condition.
pub const IDENTITY_TOL: f64 = 1e-9;
/// `σ²` values below this count as zero.
pub const VOL_FLOOR: f64 = 1e-30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProcessError {
    #[error("invalid time function: {0}")]
    InvalidTimeFunction(String),
    #[error("horizon must be finite and positive (got {0})")]
    InvalidHorizon(f64),
    #[error("squared volatility must be strictly positive on [0, T] or identically zero")]
    MixedVolatility,
    #[error("squared volatility vanishes; xi^2 is undefined")]
    ZeroVolatility,
    #[error("Lévy integrability condition fails: ∫(y²∧1)ν(dy) = ∞")]
    NotLevyMeasure,
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// A deterministic function on `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeFunction {
    Constant { c: f64 },
    /// `Σ coeffs[k] t^k`.
    Polynomial { coeffs: Vec<f64> },
    /// `values[k]` on `[breaks[k-1], breaks[k])`, with `breaks[-1] = -∞`
    /// and `breaks[n] = +∞`.
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<f64> },
}

impl TimeFunction {
    pub fn constant(c: f64) -> Self {
        TimeFunction::Constant { c }
    }

    pub fn validate(&self) -> Result<(), ProcessError> {
        let bad = |m: &str| Err(ProcessError::InvalidTimeFunction(m.into()));
        match self {
            TimeFunction::Constant { c } if !c.is_finite() => bad("constant must be finite"),
            TimeFunction::Polynomial { coeffs } if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) => {
                bad("polynomial needs at least one finite coefficient")
            }
            TimeFunction::PiecewiseConstant { breaks, values } => {
                if values.len() != breaks.len() + 1 {
                    bad("piecewise constant needs one more value than breaks")
                } else if breaks.iter().chain(values).any(|v| !v.is_finite()) {
                    bad("piecewise constant breaks and values must be finite")
                } else if breaks.windows(2).any(|w| w[0] >= w[1]) {
                    bad("piecewise constant breaks must be strictly increasing")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeFunction::Constant { c } => *c,
            TimeFunction::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c),
            TimeFunction::PiecewiseConstant { breaks, values } => values[breaks.partition_point(|b| *b <= t)],
        }
    }

    /// `∫_0^t self(r) dr`.
    pub fn integral(&self, t: f64) -> f64 {
        match self {
            TimeFunction::Constant { c } => c * t,
            TimeFunction::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .rev()
                .fold(0.0, |acc, (k, c)| acc * t + c / (k + 1) as f64)
                * t,
            TimeFunction::PiecewiseConstant { breaks, values } => {
                let mut acc = 0.0;
                let mut left = 0.0;
                for (k, b) in breaks.iter().enumerate() {
                    if *b <= left {
                        continue;
                    }
                    let right = b.min(t);
                    acc += values[k] * (right - left);
                    left = right;
                    if left >= t {
                        return acc;
                    }
                }
                acc + values[breaks.len()] * (t - left)
            }
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        match self {
            TimeFunction::PiecewiseConstant { breaks, .. } => breaks,
            _ => &[],
        }
    }
}

/// Probe points on `[0, T]`: a uniform grid, every break inside the
/// interval, and the midpoint of every piece.
fn probe_points(horizon: f64, functions: &[&TimeFunction]) -> Vec<f64> {
    let n = PROBE_GRID_POINTS - 1;
    let mut pts: Vec<f64> = (0..=n).map(|i| horizon * i as f64 / n as f64).collect();
    let mut inner: Vec<f64> = functions
        .iter()
        .flat_map(|f| f.breakpoints().iter().copied())
        .filter(|b| *b > 0.0 && *b < horizon)
        .collect();
    inner.push(0.0);
    inner.push(horizon);
    inner.sort_by(f64::total_cmp);
    pts.extend(inner.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    pts.extend(inner);
    pts
}

/// Sign pattern of a squared volatility on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Volatility {
    Positive,
    Zero,
}

/// Local characteristics of one additive process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessSpec {
    pub drift: TimeFunction,
    pub vol_sq: TimeFunction,
    pub levy: LevyMeasure,
}

impl ProcessSpec {
    pub fn new(drift: TimeFunction, vol_sq: TimeFunction, levy: LevyMeasure) -> Self {
        ProcessSpec { drift, vol_sq, levy }
    }

    /// Checks the triple on `[0, horizon]` and classifies `σ²`.
    pub fn validate(&self, horizon: f64) -> Result<Volatility, ProcessError> {
        self.drift.validate()?;
        self.vol_sq.validate()?;
        if !validate_levy(&self.levy)?.ok {
            return Err(ProcessError::NotLevyMeasure);
        }
        let values: Vec<f64> = probe_points(horizon, &[&self.vol_sq])
            .into_iter()
            .map(|t| self.vol_sq.eval(t))
            .collect();
        if values.iter().all(|v| v.abs() < VOL_FLOOR) {
            Ok(Volatility::Zero)
        } else if values.iter().all(|v| *v >= VOL_FLOOR) {
            Ok(Volatility::Positive)
        } else {
            Err(ProcessError::MixedVolatility)
        }
    }
}

/// Two processes observed on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub p1: ProcessSpec,
    pub p2: ProcessSpec,
    pub horizon: f64,
}

impl ProblemSpec {
    pub fn new(p1: ProcessSpec, p2: ProcessSpec, horizon: f64) -> Self {
        ProblemSpec { p1, p2, horizon }
    }

    /// Validates both triples; returns the volatility class of the second
    /// process (the reference law).
    pub fn validate(&self) -> Result<Volatility, ProcessError> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(ProcessError::InvalidHorizon(self.horizon));
        }
        self.p1.validate(self.horizon)?;
        self.p2.validate(self.horizon)
    }

    /// `sup_t |σ1²(t) - σ2²(t)|` on the probe grid.
    pub fn vol_gap(&self) -> f64 {
        probe_points(self.horizon, &[&self.p1.vol_sq, &self.p2.vol_sq])
            .into_iter()
            .map(|t| (self.p1.vol_sq.eval(t) - self.p2.vol_sq.eval(t)).abs())
            .fold(0.0, f64::max)
    }

    /// True when `σ1² ≢ σ2²`, in which case the two laws are singular.
    pub fn sigma_mismatch(&self) -> bool {
        self.vol_gap() > IDENTITY_TOL
    }

    pub fn swapped(&self) -> ProblemSpec {
        ProblemSpec { p1: self.p2.clone(), p2: self.p1.clone(), horizon: self.horizon }
    }
}

/// `η = ∫_{|y|≤1} y (ν1 - ν2)(dy) = γ^{ν1} - γ^{ν2}`.
pub fn eta(nu1: &LevyMeasure, nu2: &LevyMeasure) -> Result<f64, ProcessError> {
    Ok(small_jump_gap(nu1, nu2)?)
}

/// `ξ² = ∫_0^T (f1 - f2 - η)² / σ² dr`.
pub fn xi_sq(spec: &ProblemSpec) -> Result<f64, ProcessError> {
    let eta = eta(&spec.p1.levy, &spec.p2.levy)?;
    let vanished = Cell::new(false);
    let (f1, f2, s2) = (&spec.p1.drift, &spec.p2.drift, &spec.p2.vol_sq);
    let integrand = |t: f64| {
        let s = s2.eval(t);
        if s < VOL_FLOOR {
            vanished.set(true);
            return 0.0;
        }
        let g = f1.eval(t) - f2.eval(t) - eta;
        g * g / s
    };
    let breaks: Vec<f64> = [f1, f2, s2].iter().flat_map(|f| f.breakpoints().iter().copied()).collect();
    let result = IntegrationRequest::new(integrand, 0.0, spec.horizon).breakpoints(breaks).integrate()?;
    if vanished.get() {
        return Err(ProcessError::ZeroVolatility);
    }
    result
        .finite()
        .ok_or_else(|| MeasureError::DivergentIntegral("ξ²".into()).into())
}

/// Outcome of [`drift_match_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftMatch {
    pub ok: bool,
    /// `sup_t |f1(t) - f2(t) - η|` on the probe grid; infinite when `η`
    /// could not be computed.
    pub sup: f64,
}

/// Checks `f1 - f2 ≡ η` on the probe grid, the condition under which two
/// pure-jump additive processes are not mutually singular.
pub fn drift_match_check(spec: &ProblemSpec) -> DriftMatch {
    let Ok(eta) = eta(&spec.p1.levy, &spec.p2.levy) else {
        return DriftMatch { ok: false, sup: f64::INFINITY };
    };
    let sup = probe_points(spec.horizon, &[&spec.p1.drift, &spec.p2.drift])
        .into_iter()
        .map(|t| (spec.p1.drift.eval(t) - spec.p2.drift.eval(t) - eta).abs())
        .fold(0.0, f64::max);
    DriftMatch { ok: sup <= IDENTITY_TOL, sup }
}

/// `x - sin x`, accurate for small `x`.
fn x_minus_sin(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0 * (1.0 - x2 / 110.0))))
    } else {
        x - x.sin()
    }
}

/// `∫ (1 - e^{iuy} + iuy 1_{|y|≤1}) ν(dy)`.
pub fn levy_exponent(nu: &LevyMeasure, u: f64) -> Result<Complex64, ProcessError> {
    if u == 0.0 || matches!(nu, LevyMeasure::Zero {}) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let finite = |q: Quantity, what: &str| {
        q.finite()
            .ok_or_else(|| ProcessError::from(MeasureError::DivergentIntegral(what.into())))
    };
    let re = finite(
        nu.integrate_weighted(
            |y| {
                let s = (0.5 * u * y).sin();
                2.0 * s * s
            },
            0.0,
            f64::INFINITY,
        )?,
        "∫(1 - cos uy)ν(dy)",
    )?;
    let im_small = finite(nu.integrate_weighted(|y| x_minus_sin(u * y), 0.0, 1.0)?, "∫(uy - sin uy)ν(dy)")?;
    let im_large = finite(nu.integrate_weighted(|y| -(u * y).sin(), 1.0, f64::INFINITY)?, "∫ sin(uy)ν(dy)")?;
    Ok(Complex64::new(re, im_small + im_large))
}

/// `E[e^{iuX_t}] = exp(iu∫_0^t f - (u²/2)∫_0^t σ² - t∫(1 - e^{iuy} + iuy 1_{|y|≤1})ν(dy))`.
pub fn char_function(p: &ProcessSpec, u: f64, t: f64) -> Result<Complex64, ProcessError> {
    let psi = levy_exponent(&p.levy, u)?;
    let exponent = Complex64::new(-0.5 * u * u * p.vol_sq.integral(t), u * p.drift.integral(t)) - psi * t;
    Ok(exponent.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::JumpDensity;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cp(lambda: f64, g: JumpDensity) -> LevyMeasure {
        LevyMeasure::CompoundPoisson { lambda, jump_density: g }
    }

    fn u01() -> JumpDensity {
        JumpDensity::Uniform { a: 0.0, b: 1.0 }
    }

    fn ts(lp: f64) -> LevyMeasure {
        LevyMeasure::TemperedStable { c_minus: 1.0, c_plus: 1.0, lambda_minus: 1.0, lambda_plus: lp, alpha: 0.5 }
    }

    fn proc(f: TimeFunction, s: TimeFunction, nu: LevyMeasure) -> ProcessSpec {
        ProcessSpec::new(f, s, nu)
    }

    #[test]
    fn time_function_eval_and_integral() {
        let p = TimeFunction::Polynomial { coeffs: vec![1.0, -2.0, 3.0] };
        assert_relative_eq!(p.eval(2.0), 1.0 - 4.0 + 12.0);
        assert_relative_eq!(p.integral(2.0), 2.0 - 4.0 + 8.0);
        let pc = TimeFunction::PiecewiseConstant { breaks: vec![0.5, 1.5], values: vec![1.0, 2.0, 4.0] };
        assert_eq!(pc.eval(0.0), 1.0);
        assert_eq!(pc.eval(0.5), 2.0);
        assert_eq!(pc.eval(3.0), 4.0);
        assert_relative_eq!(pc.integral(0.25), 0.25);
        assert_relative_eq!(pc.integral(1.0), 0.5 + 1.0);
        assert_relative_eq!(pc.integral(2.0), 0.5 + 2.0 + 2.0);
        let neg = TimeFunction::PiecewiseConstant { breaks: vec![-1.0, 0.5], values: vec![9.0, 1.0, 2.0] };
        assert_relative_eq!(neg.integral(1.0), 0.5 + 1.0);
    }

    #[test]
    fn time_function_validation_and_json() {
        assert!(TimeFunction::Polynomial { coeffs: vec![] }.validate().is_err());
        assert!(TimeFunction::PiecewiseConstant { breaks: vec![0.5], values: vec![1.0] }.validate().is_err());
        assert!(TimeFunction::PiecewiseConstant { breaks: vec![0.5, 0.2], values: vec![1.0; 3] }.validate().is_err());
        for s in [
            r#"{"form": "constant", "c": 1.0}"#,
            r#"{"form": "polynomial", "coeffs": [0.0, 1.0]}"#,
            r#"{"form": "piecewise_constant", "breaks": [0.5], "values": [1.0, 2.0]}"#,
        ] {
            let f: TimeFunction = serde_json::from_str(s).unwrap();
            f.validate().unwrap();
        }
        assert!(serde_json::from_str::<TimeFunction>(r#"{"form": "constant", "c": 1.0, "d": 2}"#).is_err());
    }

    #[test]
    fn volatility_classification() {
        let z = LevyMeasure::Zero {};
        let pos = proc(TimeFunction::constant(0.0), TimeFunction::constant(2.0), z.clone());
        assert_eq!(pos.validate(1.0).unwrap(), Volatility::Positive);
        let zero = proc(TimeFunction::constant(0.0), TimeFunction::constant(0.0), z.clone());
        assert_eq!(zero.validate(1.0).unwrap(), Volatility::Zero);
        let mixed = proc(
            TimeFunction::constant(0.0),
            TimeFunction::PiecewiseConstant { breaks: vec![0.5], values: vec![1.0, 0.0] },
            z.clone(),
        );
        assert_eq!(mixed.validate(1.0), Err(ProcessError::MixedVolatility));
        let crossing = proc(TimeFunction::constant(0.0), TimeFunction::Polynomial { coeffs: vec![1.0, -2.0] }, z);
        assert_eq!(crossing.validate(1.0), Err(ProcessError::MixedVolatility));
        // a mismatch confined to a short piece is still found
        let narrow = TimeFunction::PiecewiseConstant { breaks: vec![0.3, 0.3001], values: vec![1.0, 2.0, 1.0] };
        let spec = ProblemSpec::new(
            proc(TimeFunction::constant(0.0), narrow, LevyMeasure::Zero {}),
            proc(TimeFunction::constant(0.0), TimeFunction::constant(1.0), LevyMeasure::Zero {}),
            1.0,
        );
        assert!(spec.sigma_mismatch());
        spec.p2.validate(1.0).unwrap();
    }

    #[test]
    fn eta_examples() {
        assert_eq!(eta(&ts(2.0), &ts(2.0)).unwrap(), 0.0);
        assert_relative_eq!(eta(&cp(3.0, u01()), &cp(1.0, u01())).unwrap(), 1.0, max_relative = 1e-12);
        let e = eta(&ts(2.0), &ts(1.0)).unwrap();
        let g = ts(2.0).gamma_nu().unwrap() - ts(1.0).gamma_nu().unwrap();
        assert_relative_eq!(e, g, max_relative = 1e-8);
        assert_relative_eq!(e, -0.29736025230224585, max_relative = 1e-8);
    }

    #[test]
    fn xi_sq_examples() {
        let z = LevyMeasure::Zero {};
        let same = ProblemSpec::new(
            proc(TimeFunction::constant(0.3), TimeFunction::constant(1.0), z.clone()),
            proc(TimeFunction::constant(0.3), TimeFunction::constant(1.0), z.clone()),
            2.0,
        );
        assert_eq!(xi_sq(&same).unwrap(), 0.0);
        let consts = ProblemSpec::new(
            proc(TimeFunction::constant(1.5), TimeFunction::constant(0.25), cp(2.0, u01())),
            proc(TimeFunction::constant(0.5), TimeFunction::constant(0.25), cp(2.0, u01())),
            3.0,
        );
        assert_relative_eq!(xi_sq(&consts).unwrap(), 3.0 * 1.0 / 0.25, max_relative = 1e-12);
        let poly = ProblemSpec::new(
            proc(TimeFunction::Polynomial { coeffs: vec![0.0, 1.0] }, TimeFunction::constant(1.0), z.clone()),
            proc(TimeFunction::constant(0.0), TimeFunction::constant(1.0), z.clone()),
            1.0,
        );
        let n = 1_000_000;
        let riemann: f64 = (0..n).map(|i| ((i as f64 + 0.5) / n as f64).powi(2)).sum::<f64>() / n as f64;
        let x = xi_sq(&poly).unwrap();
        assert_relative_eq!(x, riemann, max_relative = 1e-10);
        assert_relative_eq!(x, 1.0 / 3.0, max_relative = 1e-12);
        let zero_vol = ProblemSpec::new(
            proc(TimeFunction::constant(1.0), TimeFunction::constant(0.0), z.clone()),
            proc(TimeFunction::constant(0.0), TimeFunction::constant(0.0), z),
            1.0,
        );
        assert_eq!(xi_sq(&zero_vol), Err(ProcessError::ZeroVolatility));
    }

    #[test]
    fn drift_match_examples() {
        let (n1, n2) = (cp(3.0, u01()), cp(1.0, u01()));
        let (g1, g2) = (n1.gamma_nu().unwrap(), n2.gamma_nu().unwrap());
        let zero = TimeFunction::constant(0.0);
        let matched = ProblemSpec::new(
            proc(TimeFunction::constant(g1), zero.clone(), n1.clone()),
            proc(TimeFunction::constant(g2), zero.clone(), n2.clone()),
            1.0,
        );
        let m = drift_match_check(&matched);
        assert!(m.ok && m.sup < 1e-12);
        let unmatched = ProblemSpec::new(proc(zero.clone(), zero.clone(), n1), proc(zero.clone(), zero.clone(), n2), 1.0);
        assert!(!drift_match_check(&unmatched).ok);
        let sym = JumpDensity::Uniform { a: -1.0, b: 1.0 };
        let symmetric = ProblemSpec::new(
            proc(zero.clone(), zero.clone(), cp(2.0, sym.clone())),
            proc(zero.clone(), zero, cp(2.0, JumpDensity::Normal { mean: 0.0, variance: 1.0 })),
            1.0,
        );
        assert!(drift_match_check(&symmetric).ok);
    }

    #[test]
    fn char_function_examples() {
        let p = proc(TimeFunction::constant(0.7), TimeFunction::constant(0.0), LevyMeasure::Zero {});
        assert_eq!(char_function(&p, 0.0, 1.0).unwrap(), Complex64::new(1.0, 0.0));
        let v = char_function(&p, 2.0, 1.5).unwrap();
        let expect = Complex64::new(0.0, 2.0 * 0.7 * 1.5).exp();
        assert_relative_eq!(v.re, expect.re, max_relative = 1e-14);
        assert_relative_eq!(v.im, expect.im, max_relative = 1e-14);
        // compound Poisson with uniform(0,1) jumps: ψ(u) = λ(1 - (e^{iu}-1)/(iu)) + iuλ/2
        let (lambda, u, t) = (1.5, 2.0, 1.0);
        let q = proc(TimeFunction::constant(0.0), TimeFunction::constant(0.0), cp(lambda, u01()));
        let i = Complex64::i();
        let phi_g = ((i * u).exp() - 1.0) / (i * u);
        let expect = (-t * lambda * (1.0 - phi_g) - t * i * u * lambda * 0.5).exp();
        let v = char_function(&q, u, t).unwrap();
        assert!((v - expect).norm() < 1e-12, "{v} vs {expect}");
    }

    #[test]
    fn char_function_tempered_stable_matches_closed_form() {
        // For α ∈ (0,1): ∫(1 - e^{iuy})C y^{-1-α}e^{-λy}dy = -CΓ(-α)[(λ-iu)^α - λ^α].
        let (alpha, lp, u) = (0.5f64, 2.0, 1.3);
        let nu = LevyMeasure::TemperedStable { c_minus: 0.0, c_plus: 1.0, lambda_minus: 1.0, lambda_plus: lp, alpha };
        let gamma_neg_half = -2.0 * std::f64::consts::PI.sqrt();
        let lap = -gamma_neg_half * (Complex64::new(lp, -u).powf(alpha) - lp.powf(alpha));
        let expect = lap + Complex64::i() * u * nu.gamma_nu().unwrap();
        let psi = levy_exponent(&nu, u).unwrap();
        assert!((psi - expect).norm() < 1e-8, "{psi} vs {expect}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn char_function_modulus_and_conjugacy(
            u in -8.0f64..8.0, t in 0.0f64..3.0, lambda in 0.1f64..4.0,
            c in -2.0f64..2.0, s in 0.0f64..2.0, lp in 0.5f64..3.0, use_ts: bool,
        ) {
            let nu = if use_ts { ts(lp) } else { cp(lambda, JumpDensity::Exponential { rate: lp }) };
            let p = proc(TimeFunction::constant(c), TimeFunction::constant(s), nu);
            let a = char_function(&p, u, t).unwrap();
            let b = char_function(&p, -u, t).unwrap();
            prop_assert!(a.norm() <= 1.0 + 1e-12);
            prop_assert!((a - b.conj()).norm() < 1e-9);
        }

        #[test]
        fn xi_sq_is_symmetric_and_nonnegative(
            c1 in -3.0f64..3.0, c2 in -3.0f64..3.0, k in -2.0f64..2.0,
            s in 0.1f64..3.0, l1 in 0.1f64..4.0, l2 in 0.1f64..4.0, t in 0.1f64..4.0,
        ) {
            let spec = ProblemSpec::new(
                proc(TimeFunction::Polynomial { coeffs: vec![c1, k] }, TimeFunction::constant(s), cp(l1, u01())),
                proc(TimeFunction::constant(c2), TimeFunction::constant(s), cp(l2, u01())),
                t,
            );
            let a = xi_sq(&spec).unwrap();
            let b = xi_sq(&spec.swapped()).unwrap();
            prop_assert!(a >= 0.0);
            prop_assert!((a - b).abs() <= 2e-8 * a.max(1e-10));
        }
    }
}
