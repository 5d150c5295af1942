//! Closed-form upper bounds on the L1 distance between the laws of two
//! additive processes on `[0, T]`, and the exact distance in the purely
//! Gaussian case.
//!
//! | bound | `σ² > 0` | `σ² ≡ 0`, drift matched |
//! |-------|----------|--------------------------|
//! | Hellinger | `√(8(1 - exp(-ξ²/8 - T H²/2)))` | `√(8(1 - exp(-T H²/2)))` |
//! | sinh | `2 sinh(T L1) + 2[1 - 2φ(-ξ/2)]` | `2 sinh(T L1)` |
//! | square root | | `2 √(T L1)` |

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::measures::{check_abs_continuity, hellinger_sq, l1_distance, LevyMeasure, MeasureError, Quantity};
use crate::montecarlo::gaussian_gap;
use crate::processes::{drift_match_check, eta, xi_sq, DriftMatch, ProblemSpec, ProcessError, Volatility};

/// Trivial ceiling of the L1 distance between probability measures.
pub const L1_CEILING: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("sigma mismatch")]
    SigmaMismatch,
    #[error("nu1 is not absolutely continuous with respect to nu2")]
    NotAbsContinuous,
    #[error("H² infinite")]
    HellingerInfinite,
    #[error("L1 infinite")]
    L1Infinite,
    #[error("drift mismatch at σ = 0 (sup |f1 - f2 - η| = {0:e})")]
    DriftMismatch(f64),
    #[error("requires σ² ≡ 0")]
    NeedsZeroVolatility,
    #[error("requires ν1 = ν2 = 0")]
    NotGaussianCase,
    #[error("σ² vanishes; ξ² undefined")]
    ZeroVolatility,
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl From<MeasureError> for BoundError {
    fn from(e: MeasureError) -> Self {
        match e {
            MeasureError::NotAbsolutelyContinuous { .. } => BoundError::NotAbsContinuous,
            MeasureError::InvalidParameter(m) => BoundError::Invalid(m),
            other => BoundError::Numerical(other.to_string()),
        }
    }
}

impl From<ProcessError> for BoundError {
    fn from(e: ProcessError) -> Self {
        match e {
            ProcessError::ZeroVolatility => BoundError::ZeroVolatility,
            ProcessError::Measure(m) => m.into(),
            ProcessError::Quadrature(q) => BoundError::Numerical(q.to_string()),
            other => BoundError::Invalid(other.to_string()),
        }
    }
}

/// Everything the bounds are built from, computed once per problem.
#[derive(Debug, Clone)]
struct Ingredients {
    horizon: f64,
    volatility: Volatility,
    sigma_mismatch: bool,
    gaussian_case: bool,
    l1: Result<Quantity, BoundError>,
    h2: Result<Quantity, BoundError>,
    eta: Result<f64, BoundError>,
    /// `σ² > 0` only; `+∞` when the integral diverges.
    xi_sq: Option<Result<f64, BoundError>>,
    /// `σ² ≡ 0` only.
    drift_match: Option<DriftMatch>,
}

impl Ingredients {
    fn new(spec: &ProblemSpec) -> Result<Self, BoundError> {
        let volatility = spec.validate()?;
        let (nu1, nu2) = (&spec.p1.levy, &spec.p2.levy);
        let abs_ok = check_abs_continuity(nu1, nu2).is_ok();
        let pair = |f: fn(&LevyMeasure, &LevyMeasure) -> Result<Quantity, MeasureError>| {
            if abs_ok {
                f(nu1, nu2).map_err(BoundError::from)
            } else {
                Err(BoundError::NotAbsContinuous)
            }
        };
        let zero = |nu: &LevyMeasure| matches!(nu, LevyMeasure::Zero {});
        Ok(Ingredients {
            horizon: spec.horizon,
            volatility,
            sigma_mismatch: spec.sigma_mismatch(),
            gaussian_case: zero(nu1) && zero(nu2),
            l1: pair(l1_distance),
            h2: pair(hellinger_sq),
            eta: eta(nu1, nu2).map_err(BoundError::from),
            xi_sq: (volatility == Volatility::Positive).then(|| match xi_sq(spec) {
                Err(ProcessError::Measure(MeasureError::DivergentIntegral(_))) => Ok(f64::INFINITY),
                other => other.map_err(BoundError::from),
            }),
            drift_match: (volatility == Volatility::Zero).then(|| drift_match_check(spec)),
        })
    }

    fn same_volatility(&self) -> Result<(), BoundError> {
        if self.sigma_mismatch {
            Err(BoundError::SigmaMismatch)
        } else {
            Ok(())
        }
    }

    /// Common hypotheses; returns `ξ²` for `σ² > 0` and `None` for the
    /// drift-matched `σ² ≡ 0` case.
    fn regime(&self) -> Result<Option<f64>, BoundError> {
        self.same_volatility()?;
        match (&self.xi_sq, &self.drift_match) {
            (Some(x), _) => x.clone().map(Some),
            (None, Some(m)) if m.ok => Ok(None),
            (None, Some(m)) => Err(BoundError::DriftMismatch(m.sup)),
            (None, None) => unreachable!("volatility is either positive or zero"),
        }
    }

    fn finite(q: &Result<Quantity, BoundError>, infinite: BoundError) -> Result<f64, BoundError> {
        q.clone()?.finite().ok_or(infinite)
    }

    fn thm1(&self) -> Result<f64, BoundError> {
        self.same_volatility()?;
        let h2 = Self::finite(&self.h2, BoundError::HellingerInfinite)?;
        let xi2 = self.regime()?.unwrap_or(0.0);
        let x = xi2 / 8.0 + 0.5 * self.horizon * h2;
        Ok((-8.0 * (-x).exp_m1()).sqrt())
    }

    fn thm2(&self) -> Result<f64, BoundError> {
        self.same_volatility()?;
        let l1 = Self::finite(&self.l1, BoundError::L1Infinite)?;
        let xi2 = self.regime()?;
        let jump = 2.0 * (self.horizon * l1).sinh();
        Ok(match xi2 {
            Some(x) => jump + 2.0 * gaussian_gap(x.sqrt()),
            None => jump,
        })
    }

    fn simple_sqrt(&self) -> Result<f64, BoundError> {
        if self.volatility != Volatility::Zero {
            return Err(BoundError::NeedsZeroVolatility);
        }
        self.same_volatility()?;
        let l1 = Self::finite(&self.l1, BoundError::L1Infinite)?;
        self.regime()?;
        Ok(2.0 * (self.horizon * l1).sqrt())
    }

    fn gaussian_exact(&self) -> Result<f64, BoundError> {
        if !self.gaussian_case {
            return Err(BoundError::NotGaussianCase);
        }
        if self.volatility == Volatility::Zero {
            return Err(BoundError::ZeroVolatility);
        }
        let xi2 = self.regime()?.expect("positive volatility yields ξ²");
        Ok(2.0 * gaussian_gap(xi2.sqrt()))
    }
}

/// Exact L1 distance between two Gaussian additive processes:
/// `2(1 - 2φ(-½√∫(f1 - f2)²/σ²))`.
pub fn gaussian_tv_exact(spec: &ProblemSpec) -> Result<f64, BoundError> {
    let zero = |nu: &LevyMeasure| matches!(nu, LevyMeasure::Zero {});
    if !(zero(&spec.p1.levy) && zero(&spec.p2.levy)) {
        return Err(BoundError::NotGaussianCase);
    }
    Ingredients::new(spec)?.gaussian_exact()
}

/// Hellinger-type bound (raw value, in `[0, √8]`).
pub fn bound_thm1(spec: &ProblemSpec) -> Result<f64, BoundError> {
    Ingredients::new(spec)?.thm1()
}

/// sinh bound (raw value, may exceed 2 or be infinite).
pub fn bound_thm2(spec: &ProblemSpec) -> Result<f64, BoundError> {
    Ingredients::new(spec)?.thm2()
}

/// `2√(T L1(ν1, ν2))` for drift-matched pure-jump pairs.
pub fn bound_simple_sqrt(spec: &ProblemSpec) -> Result<f64, BoundError> {
    Ingredients::new(spec)?.simple_sqrt()
}

fn serialize_real<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str("infinite")
    }
}

/// One bound in a [`BoundReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BoundValue {
    Applicable {
        #[serde(serialize_with = "serialize_real")]
        raw: f64,
        clamped: f64,
    },
    NotApplicable {
        reason: String,
    },
}

impl BoundValue {
    fn from_result(r: Result<f64, BoundError>) -> Self {
        match r {
            Ok(raw) => BoundValue::Applicable { raw, clamped: raw.clamp(0.0, L1_CEILING) },
            Err(e) => BoundValue::NotApplicable { reason: e.to_string() },
        }
    }

    pub fn raw(&self) -> Option<f64> {
        match self {
            BoundValue::Applicable { raw, .. } => Some(*raw),
            BoundValue::NotApplicable { .. } => None,
        }
    }

    pub fn clamped(&self) -> Option<f64> {
        match self {
            BoundValue::Applicable { clamped, .. } => Some(*clamped),
            BoundValue::NotApplicable { .. } => None,
        }
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            BoundValue::Applicable { .. } => None,
            BoundValue::NotApplicable { reason } => Some(reason),
        }
    }
}

/// All ingredients and bounds for one problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub horizon: f64,
    pub volatility: Option<Volatility>,
    pub sigma_mismatch: bool,
    pub abs_continuous: bool,
    pub l1_nu: Option<Quantity>,
    pub hellinger_sq_nu: Option<Quantity>,
    pub xi_sq: Option<Quantity>,
    pub gamma1: Option<Quantity>,
    pub gamma2: Option<Quantity>,
    pub eta: Option<f64>,
    pub drift_match: Option<DriftMatch>,
    pub thm1: BoundValue,
    pub thm2: BoundValue,
    pub simple_sqrt: BoundValue,
    pub gaussian_exact: BoundValue,
    pub best: f64,
    /// Problem-level failure (invalid input), if any.
    pub error: Option<String>,
}

impl BoundReport {
    pub fn bounds(&self) -> [(&'static str, &BoundValue); 4] {
        [
            ("thm1", &self.thm1),
            ("thm2", &self.thm2),
            ("simple_sqrt", &self.simple_sqrt),
            ("gaussian_exact", &self.gaussian_exact),
        ]
    }

    /// True when at least one bound applies or the distance is known to be
    /// 2 because the volatilities differ.
    pub fn has_applicable_bound(&self) -> bool {
        self.sigma_mismatch || self.bounds().iter().any(|(_, b)| b.raw().is_some())
    }
}

fn gamma(nu: &LevyMeasure) -> Option<Quantity> {
    match nu.gamma_nu() {
        Ok(v) => Some(Quantity::Finite(v)),
        Err(MeasureError::DivergentIntegral(_)) => Some(Quantity::Infinite),
        Err(_) => None,
    }
}

/// Computes every ingredient and bound; failures of individual bounds are
/// recorded as [`BoundValue::NotApplicable`].
pub fn compute_report(spec: &ProblemSpec) -> BoundReport {
    let ing = match Ingredients::new(spec) {
        Ok(i) => i,
        Err(e) => {
            let na = || BoundValue::NotApplicable { reason: e.to_string() };
            return BoundReport {
                horizon: spec.horizon,
                volatility: None,
                sigma_mismatch: false,
                abs_continuous: false,
                l1_nu: None,
                hellinger_sq_nu: None,
                xi_sq: None,
                gamma1: None,
                gamma2: None,
                eta: None,
                drift_match: None,
                thm1: na(),
                thm2: na(),
                simple_sqrt: na(),
                gaussian_exact: na(),
                best: L1_CEILING,
                error: Some(e.to_string()),
            };
        }
    };
    let thm1 = BoundValue::from_result(ing.thm1());
    let thm2 = BoundValue::from_result(ing.thm2());
    let simple_sqrt = BoundValue::from_result(ing.simple_sqrt());
    let gaussian_exact = BoundValue::from_result(ing.gaussian_exact());
    let best = if ing.sigma_mismatch {
        L1_CEILING
    } else {
        [&thm1, &thm2, &simple_sqrt, &gaussian_exact]
            .iter()
            .filter_map(|b| b.clamped())
            .fold(L1_CEILING, f64::min)
    };
    BoundReport {
        horizon: spec.horizon,
        volatility: Some(ing.volatility),
        sigma_mismatch: ing.sigma_mismatch,
        abs_continuous: !matches!(ing.l1, Err(BoundError::NotAbsContinuous)),
        l1_nu: ing.l1.as_ref().ok().copied(),
        hellinger_sq_nu: ing.h2.as_ref().ok().copied(),
        xi_sq: ing.xi_sq.as_ref().and_then(|x| x.as_ref().ok()).map(|x| {
            if x.is_finite() {
                Quantity::Finite(*x)
            } else {
                Quantity::Infinite
            }
        }),
        gamma1: gamma(&spec.p1.levy),
        gamma2: gamma(&spec.p2.levy),
        eta: ing.eta.as_ref().ok().copied(),
        drift_match: ing.drift_match,
        thm1,
        thm2,
        simple_sqrt,
        gaussian_exact,
        best,
        error: None,
    }
}
