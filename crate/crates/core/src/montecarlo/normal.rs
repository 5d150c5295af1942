use std::f64::consts::SQRT_2;

/// Standard normal CDF `φ(x)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// `1 - 2φ(-x/2)`, computed as `erf(x / (2√2))` to keep full precision
/// for small `x`.
pub fn gaussian_gap(x: f64) -> f64 {
    libm::erf(x / (2.0 * SQRT_2))
}

/// `E|1 - e^X|` for `X ~ N(m, s²)`.
///
/// Equals `erf(a/√2) + e^{m + s²/2} erf((s - a)/√2)` with `a = -m/s`. On the
/// unit-mean line `m = -s²/2` this is `2[φ(-m/s) - φ(-m/s - s)] = 2[1 - 2φ(-s/2)]`.
pub fn e_abs_one_minus_exp_normal(m: f64, s: f64) -> f64 {
    assert!(s >= 0.0, "standard deviation must be nonnegative");
    if s == 0.0 {
        return m.exp_m1().abs();
    }
    if m == -0.5 * s * s {
        return 2.0 * gaussian_gap(s);
    }
    let a = -m / s;
    libm::erf(a / SQRT_2) + (m + 0.5 * s * s).exp() * libm::erf((s - a) / SQRT_2)
}
