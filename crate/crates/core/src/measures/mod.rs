//! Lévy measures on `ℝ \ {0}` and the functionals built on them.
//!
//! All measures carry a Lebesgue density, and every density ratio
//! `dν1/dν2` is taken as a ratio of Lebesgue densities. The pair
//! functionals are
//!
//! | function | value |
//! |----------|-------|
//! | [`l1_distance`] | `∫ |dν1/dν2 - 1| dν2` |
//! | [`hellinger_sq`] | `∫ (√(dν1/dν2) - 1)² dν2` |
//! | [`small_jump_gap`] | `∫_{|y|≤1} y (ν1 - ν2)(dy)` |
//!
//! Divergent integrals come back as [`Quantity::Infinite`]. For tempered
//! stable pairs with `α ∈ [1, 2)` and different tempering rates, the L1
//! integral diverges while the Hellinger integral stays finite.

mod jump_density;
mod tabulated;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::quadrature::{IntegrationRequest, QuadratureError};

pub use jump_density::{JumpDensity, TabulatedDensity};
pub use tabulated::TabulatedLevy;
pub(crate) use tabulated::CellShape;

/// Number of probe points per half-line used by [`check_abs_continuity`].
pub const PROBE_POINTS: usize = 4096;
const PROBE_MIN: f64 = 1e-8;
const PROBE_MAX_FLOOR: f64 = 1e2;
const MAX_REPORTED_VIOLATIONS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("Lévy density evaluated at 0")]
    EvaluationAtZero,
    #[error("invalid measure parameter: {0}")]
    InvalidParameter(String),
    #[error("divergent integral: {0}")]
    DivergentIntegral(String),
    #[error("nu1 is not absolutely continuous with respect to nu2 (e.g. at y = {:?})", .violations.first())]
    NotAbsolutelyContinuous { violations: Vec<f64> },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// A nonnegative-or-signed real that may have been found to diverge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantity {
    Finite(f64),
    Infinite,
}

impl Quantity {
    pub fn finite(self) -> Option<f64> {
        match self {
            Quantity::Finite(v) => Some(v),
            Quantity::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Quantity::Finite(_))
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Quantity::Finite(v) => s.serialize_f64(*v),
            Quantity::Infinite => s.serialize_str("infinite"),
        }
    }
}

/// A Lévy measure `ν`, described by its Lebesgue density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LevyMeasure {
    Zero {},
    /// `λ · G(dy)`.
    CompoundPoisson { lambda: f64, jump_density: JumpDensity },
    /// Density `C_- |y|^{-1-α} e^{-λ_- |y|}` for `y < 0` and
    /// `C_+ y^{-1-α} e^{-λ_+ y}` for `y > 0`.
    TemperedStable { c_minus: f64, c_plus: f64, lambda_minus: f64, lambda_plus: f64, alpha: f64 },
    Tabulated(TabulatedLevy),
}

/// One side of a tempered stable density.
#[derive(Debug, Clone, Copy, PartialEq)]
struct StableSide {
    c: f64,
    lambda: f64,
    alpha: f64,
}

impl StableSide {
    fn density(&self, r: f64) -> f64 {
        self.c * r.powf(-1.0 - self.alpha) * (-self.lambda * r).exp()
    }

    fn same_shape(&self, other: &StableSide) -> bool {
        self.c == other.c && self.alpha == other.alpha
    }
}

impl LevyMeasure {
    pub fn validate_params(&self) -> Result<(), MeasureError> {
        match self {
            LevyMeasure::Zero {} | LevyMeasure::Tabulated(_) => Ok(()),
            LevyMeasure::CompoundPoisson { lambda, jump_density } => {
                if !(lambda.is_finite() && *lambda > 0.0) {
                    return Err(MeasureError::InvalidParameter(format!(
                        "compound Poisson intensity must be positive (got {lambda})"
                    )));
                }
                jump_density.validate()
            }
            LevyMeasure::TemperedStable { c_minus, c_plus, lambda_minus, lambda_plus, alpha } => {
                for (name, v) in [
                    ("c_minus", c_minus),
                    ("c_plus", c_plus),
                    ("lambda_minus", lambda_minus),
                    ("lambda_plus", lambda_plus),
                ] {
                    if !(v.is_finite() && *v > 0.0) {
                        return Err(MeasureError::InvalidParameter(format!(
                            "tempered stable {name} must be positive (got {v})"
                        )));
                    }
                }
                if !(alpha.is_finite() && *alpha < 2.0) {
                    return Err(MeasureError::InvalidParameter(format!(
                        "tempered stable alpha must be below 2 (got {alpha})"
                    )));
                }
                Ok(())
            }
        }
    }

    fn stable_side(&self, positive: bool) -> Option<StableSide> {
        match *self {
            LevyMeasure::TemperedStable { c_minus, c_plus, lambda_minus, lambda_plus, alpha } => Some(if positive {
                StableSide { c: c_plus, lambda: lambda_plus, alpha }
            } else {
                StableSide { c: c_minus, lambda: lambda_minus, alpha }
            }),
            _ => None,
        }
    }

    /// Lebesgue density at `y`; zero at the origin and off the support.
    pub fn density(&self, y: f64) -> f64 {
        if y == 0.0 {
            return 0.0;
        }
        match self {
            LevyMeasure::Zero {} => 0.0,
            LevyMeasure::CompoundPoisson { lambda, jump_density } => lambda * jump_density.pdf(y),
            LevyMeasure::TemperedStable { .. } => {
                self.stable_side(y > 0.0).map_or(0.0, |s| s.density(y.abs()))
            }
            LevyMeasure::Tabulated(t) => t.density(y),
        }
    }

    pub fn density_at(&self, y: f64) -> Result<f64, MeasureError> {
        if y == 0.0 {
            return Err(MeasureError::EvaluationAtZero);
        }
        Ok(self.density(y))
    }

    /// `ln density(y)`, `-∞` off the support; finite wherever the density
    /// is positive even if it underflows.
    pub fn ln_density(&self, y: f64) -> f64 {
        if y == 0.0 {
            return f64::NEG_INFINITY;
        }
        match self {
            LevyMeasure::Zero {} => f64::NEG_INFINITY,
            LevyMeasure::CompoundPoisson { lambda, jump_density } => lambda.ln() + jump_density.ln_pdf(y),
            LevyMeasure::TemperedStable { .. } => {
                let s = self.stable_side(y > 0.0).expect("tempered stable side");
                let r = y.abs();
                s.c.ln() - (1.0 + s.alpha) * r.ln() - s.lambda * r
            }
            LevyMeasure::Tabulated(t) => t.density(y).ln(),
        }
    }

    /// Whether the density may blow up at the origin.
    pub fn singular_at_zero(&self) -> bool {
        match self {
            LevyMeasure::Zero {} | LevyMeasure::CompoundPoisson { .. } => false,
            LevyMeasure::TemperedStable { .. } => true,
            LevyMeasure::Tabulated(t) => t.reaches_origin(),
        }
    }

    /// Points where the density has kinks or jumps, plus the truncation
    /// points `±1`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = vec![-1.0, 1.0];
        match self {
            LevyMeasure::CompoundPoisson { jump_density, .. } => b.extend(jump_density.breakpoints()),
            LevyMeasure::Tabulated(t) => b.extend_from_slice(t.grid()),
            _ => {}
        }
        b.retain(|p| *p != 0.0);
        b
    }

    /// Largest `|y|` carrying mass (possibly infinite).
    pub fn support_bound(&self) -> f64 {
        match self {
            LevyMeasure::Zero {} => 0.0,
            LevyMeasure::CompoundPoisson { jump_density, .. } => {
                let (lo, hi) = jump_density.support();
                lo.abs().max(hi.abs())
            }
            LevyMeasure::TemperedStable { .. } => f64::INFINITY,
            LevyMeasure::Tabulated(t) => t.max_abs_knot(),
        }
    }

    fn knots(&self) -> Vec<f64> {
        match self {
            LevyMeasure::Tabulated(t) => t.grid().to_vec(),
            LevyMeasure::CompoundPoisson { jump_density: JumpDensity::Tabulated(d), .. } => d.grid().to_vec(),
            _ => Vec::new(),
        }
    }

    /// `∫ weight(y) ν(dy)` over `min_abs < |y| ≤ max_abs`.
    pub fn integrate_weighted(
        &self,
        weight: impl Fn(f64) -> f64,
        min_abs: f64,
        max_abs: f64,
    ) -> Result<Quantity, MeasureError> {
        if matches!(self, LevyMeasure::Zero {}) {
            return Ok(Quantity::Finite(0.0));
        }
        integrate_region(
            |y| {
                let d = self.density(y);
                if d == 0.0 {
                    0.0
                } else {
                    weight(y) * d
                }
            },
            self.singular_at_zero(),
            &self.breakpoints(),
            min_abs,
            max_abs,
        )
    }

    /// `ν(ℝ)`, or [`Quantity::Infinite`] for infinite-activity measures.
    pub fn total_mass(&self) -> Result<Quantity, MeasureError> {
        match self {
            LevyMeasure::Zero {} => Ok(Quantity::Finite(0.0)),
            LevyMeasure::CompoundPoisson { lambda, .. } => Ok(Quantity::Finite(*lambda)),
            LevyMeasure::TemperedStable { alpha, .. } if *alpha >= 0.0 => Ok(Quantity::Infinite),
            _ => self.integrate_weighted(|_| 1.0, 0.0, f64::INFINITY),
        }
    }

    pub fn is_finite_activity(&self) -> Result<bool, MeasureError> {
        Ok(self.total_mass()?.is_finite())
    }

    /// `ν(|y| > ε)`.
    pub fn restricted_mass(&self, epsilon: f64) -> Result<Quantity, MeasureError> {
        self.integrate_weighted(|_| 1.0, epsilon, f64::INFINITY)
    }

    /// `γ^ν = ∫_{|y|≤1} y ν(dy)`.
    pub fn gamma_nu(&self) -> Result<f64, MeasureError> {
        if let LevyMeasure::TemperedStable { alpha, .. } = self {
            if *alpha >= 1.0 {
                return Err(MeasureError::DivergentIntegral(format!(
                    "small-jump first moment of a tempered stable measure with alpha = {alpha} >= 1"
                )));
            }
        }
        if !self.integrate_weighted(f64::abs, 0.0, 1.0)?.is_finite() {
            return Err(MeasureError::DivergentIntegral("small-jump first moment ∫_{|y|≤1}|y|ν(dy)".into()));
        }
        self.integrate_weighted(|y| y, 0.0, 1.0)?
            .finite()
            .ok_or_else(|| MeasureError::DivergentIntegral("γ^ν".into()))
    }
}

/// Outcome of [`validate_levy`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevyDiagnostic {
    pub ok: bool,
    /// `∫ (y² ∧ 1) ν(dy)`.
    pub value: Quantity,
}

/// Checks the Lévy integrability condition `∫ (y² ∧ 1) ν(dy) < ∞`.
pub fn validate_levy(nu: &LevyMeasure) -> Result<LevyDiagnostic, MeasureError> {
    nu.validate_params()?;
    let value = nu.integrate_weighted(|y| (y * y).min(1.0), 0.0, f64::INFINITY)?;
    Ok(LevyDiagnostic { ok: value.is_finite(), value })
}

/// Outcome of [`check_abs_continuity`]: probe points where `ν1` has
/// positive density but `ν2` does not.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbsContinuity {
    pub violations: Vec<f64>,
}

impl AbsContinuity {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn probe_grid(nu1: &LevyMeasure, nu2: &LevyMeasure) -> Vec<f64> {
    let bound = [nu1.support_bound(), nu2.support_bound()]
        .into_iter()
        .filter(|b| b.is_finite())
        .fold(PROBE_MAX_FLOOR, f64::max);
    let (lo, hi) = (PROBE_MIN.ln(), bound.ln());
    let step = (hi - lo) / (PROBE_POINTS - 1) as f64;
    let mut pts = Vec::with_capacity(2 * PROBE_POINTS);
    for i in 0..PROBE_POINTS {
        let r = (lo + i as f64 * step).exp();
        pts.push(r);
        pts.push(-r);
    }
    pts.extend(nu1.knots().into_iter().chain(nu2.knots()).filter(|k| *k != 0.0));
    pts
}

/// Probes `density₁ > 0 ⟹ density₂ > 0` on a log-spaced grid in `|y|` from
/// `1e-8` to `max(support bound, 100)` on each side, plus all table knots.
pub fn check_abs_continuity(nu1: &LevyMeasure, nu2: &LevyMeasure) -> AbsContinuity {
    let mut violations: Vec<f64> = probe_grid(nu1, nu2)
        .into_iter()
        .filter(|&y| nu1.ln_density(y) > f64::NEG_INFINITY && nu2.ln_density(y) == f64::NEG_INFINITY)
        .collect();
    violations.sort_by(f64::total_cmp);
    if violations.len() > MAX_REPORTED_VIOLATIONS {
        let stride = violations.len().div_ceil(MAX_REPORTED_VIOLATIONS);
        violations = violations.into_iter().step_by(stride).collect();
    }
    AbsContinuity { violations }
}

fn require_abs_continuity(nu1: &LevyMeasure, nu2: &LevyMeasure) -> Result<(), MeasureError> {
    let check = check_abs_continuity(nu1, nu2);
    if check.is_ok() {
        Ok(())
    } else {
        Err(MeasureError::NotAbsolutelyContinuous { violations: check.violations })
    }
}

/// `density₁(y) - density₂(y)`, evaluated without cancellation for tempered
/// stable pairs sharing `C` and `α` on the side of `y`.
pub fn density_gap(nu1: &LevyMeasure, nu2: &LevyMeasure, y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    let positive = y > 0.0;
    if let (Some(a), Some(b)) = (nu1.stable_side(positive), nu2.stable_side(positive)) {
        let r = y.abs();
        if a.same_shape(&b) && ((a.lambda - b.lambda) * r).abs() < 1.0 {
            return b.density(r) * (-(a.lambda - b.lambda) * r).exp_m1();
        }
    }
    nu1.density(y) - nu2.density(y)
}

/// `(√density₁(y) - √density₂(y))²`, cancellation-safe like [`density_gap`].
pub fn root_gap_sq(nu1: &LevyMeasure, nu2: &LevyMeasure, y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    let positive = y > 0.0;
    if let (Some(a), Some(b)) = (nu1.stable_side(positive), nu2.stable_side(positive)) {
        let r = y.abs();
        if a.same_shape(&b) && ((a.lambda - b.lambda) * r).abs() < 1.0 {
            let e = (-0.5 * (a.lambda - b.lambda) * r).exp_m1();
            return b.density(r) * e * e;
        }
    }
    let d = nu1.density(y).sqrt() - nu2.density(y).sqrt();
    d * d
}

fn pair_breakpoints(nu1: &LevyMeasure, nu2: &LevyMeasure) -> Vec<f64> {
    let mut b = nu1.breakpoints();
    b.extend(nu2.breakpoints());
    b
}

fn integrate_pair(
    nu1: &LevyMeasure,
    nu2: &LevyMeasure,
    f: impl Fn(f64) -> f64,
    min_abs: f64,
    max_abs: f64,
) -> Result<Quantity, MeasureError> {
    integrate_region(
        f,
        nu1.singular_at_zero() || nu2.singular_at_zero(),
        &pair_breakpoints(nu1, nu2),
        min_abs,
        max_abs,
    )
}

/// `L1(ν1, ν2) = ∫ |dν1/dν2 - 1| dν2 = ∫ |density₁ - density₂| dy`.
pub fn l1_distance(nu1: &LevyMeasure, nu2: &LevyMeasure) -> Result<Quantity, MeasureError> {
    require_abs_continuity(nu1, nu2)?;
    integrate_pair(nu1, nu2, |y| density_gap(nu1, nu2, y).abs(), 0.0, f64::INFINITY)
}

/// `H²(ν1, ν2) = ∫ (√(dν1/dν2) - 1)² dν2`.
pub fn hellinger_sq(nu1: &LevyMeasure, nu2: &LevyMeasure) -> Result<Quantity, MeasureError> {
    require_abs_continuity(nu1, nu2)?;
    integrate_pair(nu1, nu2, |y| root_gap_sq(nu1, nu2, y), 0.0, f64::INFINITY)
}

/// Positive and negative parts of `ν1 - ν2` on `|y| > ε`:
/// `(∫ (d₁ - d₂)⁺, ∫ (d₂ - d₁)⁺)`. Their sum is the L1 distance restricted
/// to `|y| > ε`, their difference `ν1(|y|>ε) - ν2(|y|>ε)`.
pub fn l1_parts(nu1: &LevyMeasure, nu2: &LevyMeasure, epsilon: f64) -> Result<(Quantity, Quantity), MeasureError> {
    let plus = integrate_pair(nu1, nu2, |y| density_gap(nu1, nu2, y).max(0.0), epsilon, f64::INFINITY)?;
    let minus = integrate_pair(nu1, nu2, |y| (-density_gap(nu1, nu2, y)).max(0.0), epsilon, f64::INFINITY)?;
    Ok((plus, minus))
}

/// `∫_{|y|≤1} y (ν1 - ν2)(dy)`, the compensator drift gap. Finite whenever
/// `H²(ν1, ν2)` is, even when each `γ^{ν_j}` diverges on its own.
pub fn small_jump_gap(nu1: &LevyMeasure, nu2: &LevyMeasure) -> Result<f64, MeasureError> {
    if nu1 == nu2 {
        return Ok(0.0);
    }
    let abs = integrate_pair(nu1, nu2, |y| (y * density_gap(nu1, nu2, y)).abs(), 0.0, 1.0)?;
    if !abs.is_finite() {
        return Err(MeasureError::DivergentIntegral("∫_{|y|≤1} |y| |ν1 - ν2|(dy)".into()));
    }
    integrate_pair(nu1, nu2, |y| y * density_gap(nu1, nu2, y), 0.0, 1.0)?
        .finite()
        .ok_or_else(|| MeasureError::DivergentIntegral("∫_{|y|≤1} y (ν1 - ν2)(dy)".into()))
}

/// `∫ f` over `min_abs < |y| ≤ max_abs`.
fn integrate_region(
    f: impl Fn(f64) -> f64,
    singular: bool,
    breakpoints: &[f64],
    min_abs: f64,
    max_abs: f64,
) -> Result<Quantity, MeasureError> {
    if min_abs >= max_abs {
        return Ok(Quantity::Finite(0.0));
    }
    let pieces: Vec<(f64, f64, bool)> = if min_abs == 0.0 {
        vec![(-max_abs, max_abs, singular)]
    } else {
        vec![(-max_abs, -min_abs, false), (min_abs, max_abs, false)]
    };
    let mut total = 0.0;
    for (lo, hi, sing) in pieces {
        let r = IntegrationRequest::new(&f, lo, hi)
            .singular_at_zero(sing)
            .breakpoints(breakpoints.iter().copied())
            .integrate()?;
        match r.finite() {
            Some(v) => total += v,
            None => return Ok(Quantity::Infinite),
        }
    }
    Ok(Quantity::Finite(total))
}

#[cfg(test)]
mod tests;
