//! Monte Carlo estimation of the L1 distance through the likelihood ratio
//! `M_T = exp(C_T + D_T)` of the first law against the second.
//!
//! Paths are simulated under the second process. Replication `i` draws its
//! jumps from stream `(seed, i)` and `C_T` from the companion stream, and the
//! per-path values are summed in index order with compensated summation, so
//! results do not depend on the number of worker threads.

mod likelihood;
mod normal;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::measures::{LevyMeasure, MeasureError};
use crate::processes::{drift_match_check, xi_sq, ProblemSpec, ProcessError, Volatility};
use crate::quadrature::Neumaier;
use crate::simulate::{sample_c_t, JumpSampler, RngStream, SimulateError, DEFAULT_EPSILON};

pub use likelihood::{jump_loglik_d, split_a_pm, splitting_lhs, splitting_rhs, JumpLikelihood, LikelihoodTerms};
pub use normal::{e_abs_one_minus_exp_normal, gaussian_gap, normal_cdf};

/// Half-width multiplier of a 95% normal confidence interval.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonteCarloError {
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("density ratio undefined at jump size {0}: the reference density vanishes there")]
    RatioUndefined(f64),
    #[error("number of paths must be positive")]
    NoPaths,
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Simulate(#[from] SimulateError),
}

/// Sample mean of a per-path functional with its 95% half-width.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateResult {
    pub mean: f64,
    /// `1.96 · sd / √n`.
    pub half_width_95: f64,
    pub n_paths: usize,
    /// `0` when jumps are simulated exactly.
    pub truncation_epsilon: f64,
    pub seed: u64,
    /// `"exact"`, or `"truncated proxy (ε = …)"`.
    pub target: String,
}

impl EstimateResult {
    /// True when `value` lies within `k` half-widths of the mean.
    pub fn brackets(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.half_width_95
    }
}

/// Run parameters of an estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorOptions {
    pub n_paths: usize,
    /// Truncation level for infinite-activity pairs; ignored for
    /// finite-activity pairs, which are simulated exactly.
    pub epsilon: f64,
    pub seed: u64,
    /// Worker threads; `None` uses rayon's global pool.
    pub threads: Option<usize>,
}

impl EstimatorOptions {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        EstimatorOptions { n_paths, epsilon: DEFAULT_EPSILON, seed, threads: None }
    }

    pub fn epsilon(self, epsilon: f64) -> Self {
        EstimatorOptions { epsilon, ..self }
    }

    pub fn threads(self, threads: Option<usize>) -> Self {
        EstimatorOptions { threads, ..self }
    }
}

/// Everything needed to simulate `(C_T, D_T)` under the second law.
#[derive(Debug, Clone)]
pub struct PathModel {
    horizon: f64,
    xi_sq: f64,
    finite_activity: bool,
    likelihood: JumpLikelihood,
    sampler: JumpSampler,
}

impl PathModel {
    /// Checks the hypotheses shared by all estimators and precomputes the
    /// likelihood and sampling tables.
    pub fn new(spec: &ProblemSpec, epsilon: f64) -> Result<Self, MonteCarloError> {
        let volatility = spec.validate()?;
        if spec.sigma_mismatch() {
            return Err(MonteCarloError::HypothesisFailed("sigma mismatch: the laws are mutually singular".into()));
        }
        let xi_sq = match volatility {
            Volatility::Positive => xi_sq(spec)?,
            Volatility::Zero => {
                let m = drift_match_check(spec);
                if !m.ok {
                    return Err(MonteCarloError::HypothesisFailed(format!(
                        "drift mismatch at σ = 0 (sup |f1 - f2 - η| = {:e})",
                        m.sup
                    )));
                }
                0.0
            }
        };
        let (nu1, nu2) = (&spec.p1.levy, &spec.p2.levy);
        let finite_activity = nu1.is_finite_activity()? && nu2.is_finite_activity()?;
        let epsilon = if finite_activity { 0.0 } else { epsilon };
        if !finite_activity && (epsilon.is_nan() || epsilon <= 0.0) {
            return Err(SimulateError::DivergentMass.into());
        }
        let sampler = JumpSampler::new(nu2, epsilon)?;
        let likelihood = JumpLikelihood::new(nu1, nu2, sampler.epsilon())?;
        Ok(PathModel { horizon: spec.horizon, xi_sq, finite_activity, likelihood, sampler })
    }

    pub fn epsilon(&self) -> f64 {
        self.sampler.epsilon()
    }

    pub fn is_exact(&self) -> bool {
        self.finite_activity
    }

    pub fn xi_sq(&self) -> f64 {
        self.xi_sq
    }

    pub fn likelihood(&self) -> &JumpLikelihood {
        &self.likelihood
    }

    /// Likelihood terms of replication `index`.
    pub fn terms(&self, seed: u64, index: u64) -> Result<LikelihoodTerms, MonteCarloError> {
        let stream = RngStream::new(seed, index);
        let jumps = self.sampler.sample(self.horizon, &mut stream.rng());
        let c_t = sample_c_t(self.xi_sq, &mut stream.continuous().rng());
        let d_t = self.likelihood.d_t(&jumps, self.horizon)?;
        let (a_plus, a_minus) = self.likelihood.split(&jumps, self.horizon)?;
        Ok(LikelihoodTerms { d_t, a_plus, a_minus, c_t })
    }

    /// Jump count of replication `index`, from the same stream as [`Self::terms`].
    pub fn jump_count(&self, seed: u64, index: u64) -> usize {
        self.sampler.sample(self.horizon, &mut RngStream::new(seed, index).rng()).len()
    }

    fn target(&self) -> String {
        if self.finite_activity {
            "exact".into()
        } else {
            format!("truncated proxy (ε = {})", self.epsilon())
        }
    }

    /// Mean and half-width of `f(terms)` over `opts.n_paths` replications.
    pub fn estimate<F>(&self, opts: &EstimatorOptions, f: F) -> Result<EstimateResult, MonteCarloError>
    where
        F: Fn(&LikelihoodTerms) -> f64 + Sync,
    {
        if opts.n_paths == 0 {
            return Err(MonteCarloError::NoPaths);
        }
        let run = || -> Result<Vec<f64>, MonteCarloError> {
            (0..opts.n_paths as u64)
                .into_par_iter()
                .map(|i| self.terms(opts.seed, i).map(|t| f(&t)))
                .collect()
        };
        let values = match opts.threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| MonteCarloError::ThreadPool(e.to_string()))?
                .install(run)?,
            None => run()?,
        };
        let (mean, half_width_95) = mean_half_width(&values);
        Ok(EstimateResult {
            mean,
            half_width_95,
            n_paths: opts.n_paths,
            truncation_epsilon: self.epsilon(),
            seed: opts.seed,
            target: self.target(),
        })
    }
}

/// Mean and `1.96 · sd / √n`, accumulated in index order.
pub fn mean_half_width(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mut s = Neumaier::default();
    values.iter().for_each(|v| s.add(*v));
    let mean = s.total() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let mut q = Neumaier::default();
    values.iter().for_each(|v| q.add((v - mean) * (v - mean)));
    let sd = (q.total() / (n - 1.0)).sqrt();
    (mean, Z_95 * sd / n.sqrt())
}

fn model(spec: &ProblemSpec, opts: &EstimatorOptions) -> Result<PathModel, MonteCarloError> {
    PathModel::new(spec, opts.epsilon)
}

/// Estimates `L1 = E|1 - exp(C_T + D_T)|` under the second law.
pub fn estimate_tv(spec: &ProblemSpec, opts: &EstimatorOptions) -> Result<EstimateResult, MonteCarloError> {
    model(spec, opts)?.estimate(opts, |t| t.log_m().exp_m1().abs())
}

/// Estimates `2 E(1 - exp(C_T + D_T))⁺`, equal to the L1 distance because
/// `E[M_T] = 1`.
pub fn estimate_tv_positive_part(spec: &ProblemSpec, opts: &EstimatorOptions) -> Result<EstimateResult, MonteCarloError> {
    model(spec, opts)?.estimate(opts, |t| 2.0 * (-t.log_m().exp_m1()).max(0.0))
}

/// Estimates `E[e^{A⁺} - e^{A⁻}]`, which equals `2 sinh(T L1(ν1, ν2))`.
/// Requires a finite-activity pair.
pub fn estimate_sinh_oracle(spec: &ProblemSpec, opts: &EstimatorOptions) -> Result<EstimateResult, MonteCarloError> {
    let m = model(spec, opts)?;
    if !m.is_exact() {
        return Err(MonteCarloError::HypothesisFailed("the sinh identity check needs finite-activity measures".into()));
    }
    m.estimate(opts, |t| t.a_plus.exp() - t.a_minus.exp())
}

/// Estimates `E[M_T]`, which is 1.
pub fn martingale_check(spec: &ProblemSpec, opts: &EstimatorOptions) -> Result<EstimateResult, MonteCarloError> {
    model(spec, opts)?.estimate(opts, |t| t.log_m().exp())
}

/// True when both measures have finite total mass.
pub fn is_finite_activity_pair(nu1: &LevyMeasure, nu2: &LevyMeasure) -> Result<bool, MeasureError> {
    Ok(nu1.is_finite_activity()? && nu2.is_finite_activity()?)
}
