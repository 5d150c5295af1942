//! Adaptive one-dimensional quadrature.
//!
//! Every measure functional in this crate reduces to integrals of the form
//! `∫ g(y) dy` over a half line or the whole real line, where `g` may carry a
//! power singularity `|y|^{-β}` at the origin and an exponential tail. The
//! engine here combines three pieces:
//!
//! * a globally adaptive Gauss–Kronrod (10/21) bisection scheme on finite
//!   intervals,
//! * the substitution `y = a + t / (1 - t)` for semi-infinite pieces,
//! * a geometric (dyadic) refinement toward the origin for integrands flagged
//!   `singular_at_zero`, with divergence detection.
//!
//! Divergence is reported through [`IntegrationResult::diverged`] rather than
//! an error so callers can turn it into an "infinite" verdict.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

/// Default absolute tolerance.
pub const DEFAULT_ABS_TOL: f64 = 1e-10;
/// Default relative tolerance.
pub const DEFAULT_REL_TOL: f64 = 1e-8;
/// Partial sums beyond this magnitude are declared divergent.
pub const DIVERGENCE_CAP: f64 = 1e8;
/// Dyadic refinement toward a singular origin stops at this panel width.
pub const MIN_SINGULAR_WIDTH: f64 = 1e-30;

const MAX_SUBINTERVALS: usize = 2000;
/// Panel-ratio threshold above which a dyadic sequence is treated as non-summable.
const DIVERGENT_RATIO: f64 = 1.0 - 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("integrand returned a non-finite value at y = {0}")]
    NonFiniteIntegrand(f64),
    #[error("tolerance not met after {MAX_SUBINTERVALS} subdivisions (value {value}, error estimate {error})")]
    ToleranceNotMet { value: f64, error: f64 },
    #[error("invalid integration request: {0}")]
    InvalidRequest(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationResult {
    pub value: f64,
    pub error_estimate: f64,
    /// When set, `value` is the signed divergence cap and must not be trusted.
    pub diverged: bool,
}

impl IntegrationResult {
    fn divergent(sign: f64) -> Self {
        IntegrationResult {
            value: DIVERGENCE_CAP.copysign(sign),
            error_estimate: f64::INFINITY,
            diverged: true,
        }
    }

    /// The value when the integral converged, `None` otherwise.
    pub fn finite(&self) -> Option<f64> {
        (!self.diverged).then_some(self.value)
    }
}

/// An integration problem. Build with [`IntegrationRequest::new`] and the
/// chained setters, then call [`IntegrationRequest::integrate`].
#[derive(Clone)]
pub struct IntegrationRequest<F> {
    integrand: F,
    lower: f64,
    upper: f64,
    abs_tol: f64,
    rel_tol: f64,
    singular_at_zero: bool,
    breakpoints: Vec<f64>,
}

impl<F: Fn(f64) -> f64> IntegrationRequest<F> {
    /// `lower` and `upper` may be infinite.
    pub fn new(integrand: F, lower: f64, upper: f64) -> Self {
        IntegrationRequest {
            integrand,
            lower,
            upper,
            abs_tol: DEFAULT_ABS_TOL,
            rel_tol: DEFAULT_REL_TOL,
            singular_at_zero: false,
            breakpoints: Vec::new(),
        }
    }

    pub fn tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    /// Split at the origin and approach it by geometric refinement.
    pub fn singular_at_zero(mut self, singular: bool) -> Self {
        self.singular_at_zero = singular;
        self
    }

    /// Points where the integrand has kinks or jumps. Points outside the
    /// interval are ignored.
    pub fn breakpoints(mut self, points: impl IntoIterator<Item = f64>) -> Self {
        self.breakpoints.extend(points);
        self
    }

    pub fn integrate(&self) -> Result<IntegrationResult, QuadratureError> {
        integrate(self)
    }
}

/// Integrate `req.integrand` over `[req.lower, req.upper]`.
pub fn integrate<F: Fn(f64) -> f64>(
    req: &IntegrationRequest<F>,
) -> Result<IntegrationResult, QuadratureError> {
    if req.lower.is_nan() || req.upper.is_nan() || req.lower >= req.upper {
        return Err(QuadratureError::InvalidRequest("lower must be strictly below upper"));
    }
    if !(req.abs_tol >= 0.0 && req.rel_tol >= 0.0) || (req.abs_tol == 0.0 && req.rel_tol == 0.0) {
        return Err(QuadratureError::InvalidRequest(
            "tolerances must be nonnegative with at least one positive",
        ));
    }

    let mut cuts = vec![req.lower, req.upper];
    cuts.extend(
        req.breakpoints
            .iter()
            .copied()
            .filter(|p| p.is_finite() && *p > req.lower && *p < req.upper),
    );
    let straddles_zero = req.lower < 0.0 && req.upper > 0.0;
    if straddles_zero && (req.singular_at_zero || (req.lower.is_infinite() && req.upper.is_infinite())) {
        cuts.push(0.0);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let n_segments = cuts.len() - 1;
    let seg_abs = req.abs_tol / n_segments as f64;
    let f = &req.integrand;
    let mut sum = Neumaier::default();
    let mut error = 0.0;
    for w in cuts.windows(2) {
        let (l, u) = (w[0], w[1]);
        let piece = if req.singular_at_zero && l == 0.0 {
            toward_zero(f, u, seg_abs, req.rel_tol)?
        } else if req.singular_at_zero && u == 0.0 {
            toward_zero(&|y: f64| f(-y), -l, seg_abs, req.rel_tol)?
        } else {
            regular(f, l, u, seg_abs, req.rel_tol)?
        };
        if piece.diverged {
            return Ok(piece);
        }
        sum.add(piece.value);
        error += piece.error_estimate;
        if sum.total().abs() > DIVERGENCE_CAP {
            return Ok(IntegrationResult::divergent(sum.total()));
        }
    }
    Ok(IntegrationResult { value: sum.total(), error_estimate: error, diverged: false })
}

/// Finite or semi-infinite piece without a singular endpoint at zero.
fn regular<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    l: f64,
    u: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<IntegrationResult, QuadratureError> {
    match (l.is_finite(), u.is_finite()) {
        (true, true) => adaptive(f, l, u, abs_tol, rel_tol),
        (true, false) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                f(l + t / s) / (s * s)
            };
            adaptive(&g, 0.0, 1.0, abs_tol, rel_tol)
        }
        (false, true) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                f(u - t / s) / (s * s)
            };
            adaptive(&g, 0.0, 1.0, abs_tol, rel_tol)
        }
        (false, false) => {
            let left = regular(f, l, 0.0, abs_tol / 2.0, rel_tol)?;
            if left.diverged {
                return Ok(left);
            }
            let right = regular(f, 0.0, u, abs_tol / 2.0, rel_tol)?;
            if right.diverged {
                return Ok(right);
            }
            Ok(IntegrationResult {
                value: left.value + right.value,
                error_estimate: left.error_estimate + right.error_estimate,
                diverged: false,
            })
        }
    }
}

/// `∫_0^outer f(y) dy` for an integrand that may blow up at `0+`.
///
/// The piece `[s, outer]` with `s = min(1, outer)` is integrated normally.
/// `(0, s]` is cut into panels `[s 2^{-k-1}, s 2^{-k}]`. For a power law
/// `y^{-β}` consecutive panel values have the ratio `2^{β-1}`, so the panel
/// ratio tells convergence (ratio < 1) from divergence (ratio ≥ 1). The
/// remaining tail below the last panel is added as a geometric series.
fn toward_zero<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    outer: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<IntegrationResult, QuadratureError> {
    let s = outer.min(1.0);
    let mut sum = Neumaier::default();
    let mut error = 0.0;
    if outer > s {
        let r = regular(f, s, outer, abs_tol / 2.0, rel_tol)?;
        if r.diverged {
            return Ok(r);
        }
        sum.add(r.value);
        error += r.error_estimate;
    }

    let panel_abs = abs_tol / 256.0;
    let mut hi = s;
    let mut prev: Option<f64> = None;
    let mut ratios: Vec<f64> = Vec::new();
    let mut settled = 0;
    let mut last = 0.0;
    while hi > MIN_SINGULAR_WIDTH {
        let lo = 0.5 * hi;
        let panel = adaptive(f, lo, hi, panel_abs, rel_tol)?;
        if panel.diverged {
            return Ok(panel);
        }
        sum.add(panel.value);
        error += panel.error_estimate;
        if sum.total().abs() > DIVERGENCE_CAP {
            return Ok(IntegrationResult::divergent(sum.total()));
        }
        let v = panel.value;
        let ratio = match prev {
            Some(p) if p != 0.0 => (v / p).abs(),
            Some(_) if v == 0.0 => 0.0,
            Some(_) => f64::INFINITY,
            None => f64::NAN,
        };
        if ratio.is_finite() {
            ratios.push(ratio);
        }
        let tol = abs_tol.max(rel_tol * sum.total().abs());
        let tail = geometric_tail(v, ratio);
        if ratio.is_finite() && tail.abs() <= 0.01 * tol && v.abs() <= tol {
            settled += 1;
        } else {
            settled = 0;
        }
        prev = Some(v);
        last = v;
        hi = lo;
        if settled >= 3 {
            sum.add(tail);
            error += tail.abs();
            return Ok(IntegrationResult { value: sum.total(), error_estimate: error, diverged: false });
        }
    }

    // Floor reached: decide from the trend of the last few panel ratios.
    let recent: Vec<f64> = ratios.iter().rev().take(4).copied().collect();
    if recent.is_empty() {
        return Ok(IntegrationResult { value: sum.total(), error_estimate: error, diverged: false });
    }
    let r = recent[0];
    if r >= DIVERGENT_RATIO {
        return Ok(IntegrationResult::divergent(sum.total()));
    }
    let spread = recent.iter().fold(0.0_f64, |m, x| m.max((x - r).abs()));
    let tail = geometric_tail(last, r);
    sum.add(tail);
    error += tail.abs() * (spread / (1.0 - r)).min(1.0);
    Ok(IntegrationResult { value: sum.total(), error_estimate: error, diverged: false })
}

fn geometric_tail(last: f64, ratio: f64) -> f64 {
    if last == 0.0 {
        0.0
    } else if ratio < 1.0 {
        last * ratio / (1.0 - ratio)
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive bisection with a 21-point Gauss–Kronrod rule per panel.
fn adaptive<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<IntegrationResult, QuadratureError> {
    let first = gauss_kronrod_21(f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut value = first.value;
    let mut error = first.error;
    // Error mass of panels too narrow to split further.
    let mut frozen_error = 0.0;
    let mut frozen_value = Neumaier::default();

    loop {
        let tol = abs_tol.max(rel_tol * value.abs());
        if error + frozen_error <= tol {
            break;
        }
        if value.abs() > DIVERGENCE_CAP {
            return Ok(IntegrationResult::divergent(value));
        }
        if heap.len() >= MAX_SUBINTERVALS {
            return Err(QuadratureError::ToleranceNotMet { value, error: error + frozen_error });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            frozen_error += worst.error;
            frozen_value.add(worst.value);
            error -= worst.error;
            continue;
        }
        let left = gauss_kronrod_21(f, worst.a, mid)?;
        let right = gauss_kronrod_21(f, mid, worst.b)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    let mut sum = frozen_value;
    let mut err = frozen_error;
    for p in heap.iter() {
        sum.add(p.value);
        err += p.error;
    }
    let total = sum.total();
    if total.abs() > DIVERGENCE_CAP {
        return Ok(IntegrationResult::divergent(total));
    }
    Ok(IntegrationResult { value: total, error_estimate: err, diverged: false })
}

// Kronrod abscissae on [0, 1); odd indices are the 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208289202239,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

fn eval<F: Fn(f64) -> f64 + ?Sized>(f: &F, y: f64) -> Result<f64, QuadratureError> {
    let v = f(y);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(QuadratureError::NonFiniteIntegrand(y))
    }
}

fn gauss_kronrod_21<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> Result<Panel, QuadratureError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = eval(f, center)?;
    let mut res_k = WGK[10] * fc;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(f, center - dx)?;
        let f2 = eval(f, center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Panel { a, b, value, error })
}

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    compensation: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}
