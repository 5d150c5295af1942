use serde::Serialize;

use super::MonteCarloError;
use crate::measures::{check_abs_continuity, l1_parts, LevyMeasure, MeasureError};
use crate::simulate::JumpRecord;

/// Pathwise log-likelihood pieces of one simulated path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LikelihoodTerms {
    /// Jump log-likelihood ratio `D_T`.
    pub d_t: f64,
    /// `A⁺ ≥ 0`.
    pub a_plus: f64,
    /// `A⁻ ≤ 0`, with `A⁺ + A⁻ = D_T`.
    pub a_minus: f64,
    /// Gaussian log-likelihood ratio `C_T`; `0` when `σ² ≡ 0`.
    pub c_t: f64,
}

impl LikelihoodTerms {
    /// `ln M_T = C_T + D_T`.
    pub fn log_m(&self) -> f64 {
        self.c_t + self.d_t
    }
}

/// Jump log-likelihood ratio of `ν1` against `ν2` for jumps of size
/// `|y| > ε`, with the positive and negative parts of `ν1 - ν2` on that
/// region precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpLikelihood {
    nu1: LevyMeasure,
    nu2: LevyMeasure,
    epsilon: f64,
    /// `∫_{|y|>ε} (d₁ - d₂)⁺`.
    plus: f64,
    /// `∫_{|y|>ε} (d₂ - d₁)⁺`.
    minus: f64,
}

impl JumpLikelihood {
    pub fn new(nu1: &LevyMeasure, nu2: &LevyMeasure, epsilon: f64) -> Result<Self, MonteCarloError> {
        let check = check_abs_continuity(nu1, nu2);
        if !check.is_ok() {
            return Err(MeasureError::NotAbsolutelyContinuous { violations: check.violations }.into());
        }
        let (plus, minus) = l1_parts(nu1, nu2, epsilon)?;
        let divergent = || MonteCarloError::HypothesisFailed(format!("L1 distance of the Lévy measures on |y| > {epsilon} is infinite"));
        Ok(JumpLikelihood {
            nu1: nu1.clone(),
            nu2: nu2.clone(),
            epsilon,
            plus: plus.finite().ok_or_else(divergent)?,
            minus: minus.finite().ok_or_else(divergent)?,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `L1(ν1, ν2)` restricted to `|y| > ε`.
    pub fn l1(&self) -> f64 {
        self.plus + self.minus
    }

    /// `ln(dν1/dν2)(y)`.
    pub fn log_ratio(&self, y: f64) -> Result<f64, MonteCarloError> {
        if self.nu1 == self.nu2 {
            return Ok(0.0);
        }
        let l2 = self.nu2.ln_density(y);
        if l2 == f64::NEG_INFINITY {
            return Err(MonteCarloError::RatioUndefined(y));
        }
        Ok(self.nu1.ln_density(y) - l2)
    }

    /// `D_T = Σ ln(dν1/dν2)(Δx) - T ∫_{|y|>ε} (ν1 - ν2)(dy)`.
    pub fn d_t(&self, jumps: &JumpRecord, horizon: f64) -> Result<f64, MonteCarloError> {
        let mut sum = 0.0;
        for y in &jumps.sizes {
            sum += self.log_ratio(*y)?;
        }
        Ok(sum - horizon * (self.plus - self.minus))
    }

    /// `(A⁺, A⁻)` with `A^± = Σ ln h^±(Δx) - T ∫ (h^∓ - 1) dν2`,
    /// `h⁺ = max(dν1/dν2, 1)` and `h⁻ = min(dν1/dν2, 1)`.
    pub fn split(&self, jumps: &JumpRecord, horizon: f64) -> Result<(f64, f64), MonteCarloError> {
        let (mut up, mut down) = (0.0, 0.0);
        for y in &jumps.sizes {
            let l = self.log_ratio(*y)?;
            if l > 0.0 {
                up += l;
            } else {
                down += l;
            }
        }
        Ok((up + horizon * self.minus, down - horizon * self.plus))
    }
}

/// `D_T` for one jump record, with the compensator on `|y| > ε` taken from
/// the record's truncation level.
pub fn jump_loglik_d(
    jumps: &JumpRecord,
    nu1: &LevyMeasure,
    nu2: &LevyMeasure,
    horizon: f64,
) -> Result<f64, MonteCarloError> {
    JumpLikelihood::new(nu1, nu2, jumps.truncation_epsilon)?.d_t(jumps, horizon)
}

/// `(A⁺, A⁻)` for one jump record.
pub fn split_a_pm(
    jumps: &JumpRecord,
    nu1: &LevyMeasure,
    nu2: &LevyMeasure,
    horizon: f64,
) -> Result<(f64, f64), MonteCarloError> {
    JumpLikelihood::new(nu1, nu2, jumps.truncation_epsilon)?.split(jumps, horizon)
}

/// Right-hand side of `|1 - e^{x+y}| ≤ ((1+e^x)/2)|1 - e^y| + ((1+e^y)/2)|1 - e^x|`.
pub fn splitting_rhs(x: f64, y: f64) -> f64 {
    0.5 * (1.0 + x.exp()) * y.exp_m1().abs() + 0.5 * (1.0 + y.exp()) * x.exp_m1().abs()
}

/// Left-hand side `|1 - e^{x+y}|`.
pub fn splitting_lhs(x: f64, y: f64) -> f64 {
    (x + y).exp_m1().abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{JumpDensity, TabulatedLevy};
    use crate::simulate::{JumpSampler, RngStream};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cp(lambda: f64) -> LevyMeasure {
        LevyMeasure::CompoundPoisson { lambda, jump_density: JumpDensity::Uniform { a: 0.0, b: 1.0 } }
    }

    fn record(sizes: Vec<f64>) -> JumpRecord {
        let times = (1..=sizes.len()).map(|i| i as f64 / (sizes.len() + 1) as f64).collect();
        JumpRecord { times, sizes, ..Default::default() }
    }

    #[test]
    fn identical_measures_give_zero() {
        let rec = record(vec![0.2, 0.9]);
        assert_eq!(jump_loglik_d(&rec, &cp(2.0), &cp(2.0), 1.0).unwrap(), 0.0);
        assert_eq!(split_a_pm(&rec, &cp(2.0), &cp(2.0), 1.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn intensity_scaled_pairs() {
        let (l1, l2, t) = (1.2, 1.0, 1.5);
        assert_relative_eq!(jump_loglik_d(&record(vec![]), &cp(l1), &cp(l2), t).unwrap(), -t * (l1 - l2), max_relative = 1e-12);
        let rec = record(vec![0.1, 0.5, 0.7]);
        let (ap, am) = split_a_pm(&rec, &cp(l1), &cp(l2), t).unwrap();
        assert_relative_eq!(ap, 3.0 * (l1 / l2).ln(), max_relative = 1e-12);
        assert_relative_eq!(am, -t * (l1 - l2), max_relative = 1e-12);
    }

    #[test]
    fn jump_outside_reference_support() {
        let wide = LevyMeasure::CompoundPoisson { lambda: 1.0, jump_density: JumpDensity::Uniform { a: 0.0, b: 2.0 } };
        let lk = JumpLikelihood::new(&cp(1.0), &wide, 0.0).unwrap();
        assert_eq!(lk.d_t(&record(vec![1.5]), 1.0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(lk.d_t(&record(vec![2.5]), 1.0), Err(MonteCarloError::RatioUndefined(2.5)));
        assert!(JumpLikelihood::new(&wide, &cp(1.0), 0.0).is_err());
    }

    #[test]
    fn tabulated_pairs_split_pathwise() {
        let t1 = TabulatedLevy::new(vec![-1.0, -0.2, 0.3, 1.0, 2.0], vec![0.5, 2.0, 3.0, 1.0, 0.1]).unwrap();
        let t2 = TabulatedLevy::new(vec![-1.0, -0.2, 0.3, 1.0, 2.0], vec![1.0, 1.0, 2.0, 2.0, 0.3]).unwrap();
        let (nu1, nu2) = (LevyMeasure::Tabulated(t1), LevyMeasure::Tabulated(t2));
        for eps in [0.05, 0.25] {
            let lk = JumpLikelihood::new(&nu1, &nu2, eps).unwrap();
            let sampler = JumpSampler::new(&nu2, eps).unwrap();
            for i in 0..200 {
                let rec = sampler.sample(2.0, &mut RngStream::new(4, i).rng());
                let (ap, am) = lk.split(&rec, 2.0).unwrap();
                let d = lk.d_t(&rec, 2.0).unwrap();
                assert!(ap >= 0.0 && am <= 0.0);
                let direct: f64 = rec.sizes.iter().map(|y| (nu1.density(*y) / nu2.density(*y)).ln()).sum::<f64>()
                    - 2.0 * (nu1.restricted_mass(eps).unwrap().finite().unwrap() - nu2.restricted_mass(eps).unwrap().finite().unwrap());
                assert!((ap + am - d).abs() <= 1e-10 * ap.max(-am).max(d.abs()));
                assert!((d - direct).abs() <= 1e-8 * (1.0 + direct.abs()), "{d} vs {direct}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn splitting_inequality(x in -20.0f64..20.0, y in -20.0f64..20.0) {
            prop_assert!(splitting_lhs(x, y) <= splitting_rhs(x, y) * (1.0 + 1e-12));
        }
    }
}
