use std::path::Path;

use serde::Serialize;

use super::config::{EstimatorConfig, ExperimentConfig, LoadedConfig, SweepConfig};
use super::CliError;
use crate::bounds::{compute_report, BoundReport};
use crate::measures::Quantity;
use crate::montecarlo::{
    estimate_sinh_oracle, estimate_tv, martingale_check, EstimateResult, EstimatorOptions, MonteCarloError,
};
use crate::processes::ProblemSpec;

pub const SCHEMA_VERSION: u32 = 1;

/// Header of the sweep CSV.
pub const SWEEP_HEADER: [&str; 10] = [
    "param_value",
    "l1_nu",
    "hellinger_sq",
    "xi_sq",
    "thm1",
    "thm2",
    "simple_sqrt",
    "gaussian_exact",
    "estimate",
    "half_width",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// `E|1 - M_T|`, the L1 distance.
    Tv,
    /// `E[M_T]`, which is 1.
    Martingale,
    /// `E[e^{A⁺} - e^{A⁻}]`, which is `2 sinh(T L1(ν1, ν2))`.
    Sinh,
}

/// Command-line overrides of the estimator block.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOverrides {
    pub n_paths: Option<usize>,
    pub seed: Option<u64>,
    pub epsilon: Option<f64>,
    pub threads: Option<usize>,
}

impl RunOverrides {
    fn options(&self, block: Option<EstimatorConfig>) -> Option<EstimatorOptions> {
        let n_paths = self.n_paths.or(block.map(|b| b.n_paths))?;
        let seed = self.seed.or(block.map(|b| b.seed)).unwrap_or(0);
        let mut opts = EstimatorOptions::new(n_paths, seed).threads(self.threads);
        if let Some(eps) = self.epsilon.or(block.map(|b| b.epsilon)) {
            opts = opts.epsilon(eps);
        }
        Some(opts)
    }
}

/// One bound set against an estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundMargin {
    pub name: &'static str,
    /// Unclamped bound, `null` when not applicable.
    pub bound: Option<f64>,
    /// `bound - estimate`.
    pub margin: Option<f64>,
    /// `bound / estimate`.
    pub ratio: Option<f64>,
}

fn margins(report: &BoundReport, estimate: f64) -> Vec<BoundMargin> {
    report
        .bounds()
        .iter()
        .map(|(name, b)| {
            let bound = b.raw().filter(|v| v.is_finite());
            BoundMargin {
                name,
                bound,
                margin: bound.map(|v| v - estimate),
                ratio: bound.filter(|_| estimate > 0.0).map(|v| v / estimate),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundOutput {
    pub schema_version: u32,
    pub report: BoundReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateOutput {
    pub schema_version: u32,
    pub check: Check,
    pub estimate: EstimateResult,
    /// Exact value of the estimated quantity when known.
    pub expected: Option<f64>,
    /// Present for `--check tv`.
    pub margins: Option<Vec<BoundMargin>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareOutput {
    pub schema_version: u32,
    pub report: BoundReport,
    pub estimate: EstimateResult,
    pub bounds: Vec<BoundMargin>,
    /// Applicable bound closest to the estimate.
    pub tightest: Option<&'static str>,
}

pub fn cmd_bound(config: &Path) -> Result<BoundOutput, CliError> {
    let loaded = LoadedConfig::read(config)?;
    Ok(BoundOutput { schema_version: SCHEMA_VERSION, report: compute_report(&loaded.config.spec()) })
}

fn run_check(spec: &ProblemSpec, check: Check, opts: &EstimatorOptions) -> Result<EstimateResult, MonteCarloError> {
    match check {
        Check::Tv => estimate_tv(spec, opts),
        Check::Martingale => martingale_check(spec, opts),
        Check::Sinh => estimate_sinh_oracle(spec, opts),
    }
}

fn estimator_options(config: &ExperimentConfig, run: &RunOverrides) -> Result<EstimatorOptions, CliError> {
    run.options(config.estimator).ok_or(CliError::MissingEstimator)
}

pub fn cmd_estimate(config: &Path, run: &RunOverrides, check: Check) -> Result<EstimateOutput, CliError> {
    let config = LoadedConfig::read(config)?.config;
    let opts = estimator_options(&config, run)?;
    let spec = config.spec();
    let estimate = run_check(&spec, check, &opts)?;
    let report = compute_report(&spec);
    let (expected, margins) = match check {
        Check::Tv => (report.gaussian_exact.raw(), Some(margins(&report, estimate.mean))),
        Check::Martingale => (Some(1.0), None),
        Check::Sinh => (report.l1_nu.and_then(Quantity::finite).map(|l1| 2.0 * (spec.horizon * l1).sinh()), None),
    };
    Ok(EstimateOutput { schema_version: SCHEMA_VERSION, check, estimate, expected, margins })
}

pub fn cmd_compare(config: &Path, run: &RunOverrides) -> Result<CompareOutput, CliError> {
    let config = LoadedConfig::read(config)?.config;
    let opts = estimator_options(&config, run)?;
    let spec = config.spec();
    let report = compute_report(&spec);
    let estimate = estimate_tv(&spec, &opts)?;
    let bounds = margins(&report, estimate.mean);
    let tightest = bounds
        .iter()
        .filter_map(|b| b.margin.map(|m| (b.name, m)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(name, _)| name);
    Ok(CompareOutput { schema_version: SCHEMA_VERSION, report, estimate, bounds, tightest })
}

/// Command-line overrides of the sweep block.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOverrides {
    pub param: Option<String>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub steps: Option<usize>,
}

impl SweepOverrides {
    fn resolve(&self, block: Option<&SweepConfig>) -> Result<SweepConfig, CliError> {
        let missing = |what: &str| CliError::InvalidSweep(format!("missing {what}: add a \"sweep\" block or pass --{what}"));
        let sweep = SweepConfig {
            param: self.param.clone().or(block.map(|b| b.param.clone())).ok_or_else(|| missing("param"))?,
            from: self.from.or(block.map(|b| b.from)).ok_or_else(|| missing("from"))?,
            to: self.to.or(block.map(|b| b.to)).ok_or_else(|| missing("to"))?,
            steps: self.steps.or(block.map(|b| b.steps)).ok_or_else(|| missing("steps"))?,
        };
        if sweep.steps == 0 {
            return Err(CliError::InvalidSweep("steps must be positive".into()));
        }
        Ok(sweep)
    }
}

/// Evenly spaced sweep values; a single step evaluates `from`.
pub fn sweep_values(from: f64, to: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![from];
    }
    let last = (steps - 1) as f64;
    (0..steps).map(|i| if i + 1 == steps { to } else { from + (to - from) * (i as f64 / last) }).collect()
}

fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x}"),
        Some(x) if x > 0.0 => "inf".into(),
        _ => String::new(),
    }
}

fn quantity_cell(q: Option<Quantity>) -> String {
    match q {
        Some(Quantity::Finite(x)) => cell(Some(x)),
        Some(Quantity::Infinite) => "inf".into(),
        None => String::new(),
    }
}

/// CSV with one row per sweep value. Estimates are included when an
/// estimator block or `--paths` is given; rows where the estimator's
/// hypotheses fail leave those cells empty.
pub fn cmd_sweep(config: &Path, sweep: &SweepOverrides, run: &RunOverrides) -> Result<String, CliError> {
    let loaded = LoadedConfig::read(config)?;
    let sweep = sweep.resolve(loaded.config.sweep.as_ref())?;
    let opts = run.options(loaded.config.estimator);
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Io { path: "<csv>".into(), message: e.to_string() };
    w.write_record(SWEEP_HEADER).map_err(csv_err)?;
    for value in sweep_values(sweep.from, sweep.to, sweep.steps) {
        let spec = loaded.with_param(&sweep.param, value)?.spec();
        let r = compute_report(&spec);
        let estimate = match &opts {
            Some(o) => match estimate_tv(&spec, o) {
                Ok(e) => Some(e),
                Err(e) if super::is_hypothesis_failure(&e) => None,
                Err(e) => return Err(e.into()),
            },
            None => None,
        };
        w.write_record([
            cell(Some(value)),
            quantity_cell(r.l1_nu),
            quantity_cell(r.hellinger_sq_nu),
            quantity_cell(r.xi_sq),
            cell(r.thm1.raw()),
            cell(r.thm2.raw()),
            cell(r.simple_sqrt.raw()),
            cell(r.gaussian_exact.raw()),
            cell(estimate.as_ref().map(|e| e.mean)),
            cell(estimate.as_ref().map(|e| e.half_width_95)),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io { path: "<csv>".into(), message: e.to_string() })?;
    Ok(String::from_utf8(bytes).expect("CSV cells are UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_grid() {
        assert_eq!(sweep_values(0.5, 9.0, 1), vec![0.5]);
        assert_eq!(sweep_values(0.0, 1.0, 5), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(*sweep_values(0.1, 5.0, 7).last().unwrap(), 5.0);
    }

    #[test]
    fn cells() {
        assert_eq!(cell(Some(0.25)), "0.25");
        assert_eq!(cell(Some(f64::INFINITY)), "inf");
        assert_eq!(cell(None), "");
        assert_eq!(quantity_cell(Some(Quantity::Infinite)), "inf");
    }

    #[test]
    fn overrides_take_precedence() {
        let block = EstimatorConfig { n_paths: 10, epsilon: 0.01, seed: 5 };
        let o = RunOverrides { n_paths: Some(20), ..Default::default() }.options(Some(block)).unwrap();
        assert_eq!((o.n_paths, o.seed, o.epsilon), (20, 5, 0.01));
        assert!(RunOverrides::default().options(None).is_none());
        let o = RunOverrides { n_paths: Some(3), ..Default::default() }.options(None).unwrap();
        assert_eq!((o.seed, o.epsilon), (0, crate::simulate::DEFAULT_EPSILON));
    }
}
