//! Path sampling of additive processes through the Lévy–Itô decomposition.
//!
//! The continuous part is never discretized: the only functional of it that
//! is needed, `C_T`, is Gaussian with known mean and variance and is drawn in
//! closed form. Jumps are simulated exactly for compound Poisson measures and
//! by truncation at `|y| > ε` with a compensating drift otherwise.

mod cells;

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson, StandardNormal};
use thiserror::Error;

use crate::measures::{JumpDensity, LevyMeasure, MeasureError, Quantity};
use crate::processes::ProcessSpec;

pub use cells::CELLS_PER_SIDE;
use cells::{CellTable, Side};

/// Default truncation level for infinite-activity measures.
pub const DEFAULT_EPSILON: f64 = 1e-4;
/// XORed with a replication index to obtain the stream of its continuous part.
pub const CONTINUOUS_STREAM_OFFSET: u64 = 1 << 63;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulateError {
    #[error("infinite jump intensity: truncation level must be positive for an infinite-activity measure")]
    DivergentMass,
    #[error("truncation level must be finite and nonnegative (got {0})")]
    InvalidEpsilon(f64),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// A reproducible random stream addressed by `(root_seed, stream_index)`.
///
/// Backed by ChaCha8 with the root seed as key and the index as stream id,
/// so streams are independent and any stream can be opened directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub root_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(root_seed: u64, stream_index: u64) -> Self {
        RngStream { root_seed, stream_index }
    }

    /// Stream for the continuous part of the same replication.
    pub fn continuous(self) -> Self {
        RngStream { stream_index: self.stream_index ^ CONTINUOUS_STREAM_OFFSET, ..self }
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Jumps of one path on `[0, T]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct JumpRecord {
    /// Strictly increasing, in `(0, T]`.
    pub times: Vec<f64>,
    /// One per time, each with `|size| > truncation_epsilon`.
    pub sizes: Vec<f64>,
    /// `0` for exact simulation.
    pub truncation_epsilon: f64,
    /// Drift per unit time compensating the recorded jumps:
    /// `-∫_{ε<|y|≤1} y ν(dy)`.
    pub compensator_shift: f64,
}

impl JumpRecord {
    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    /// Compensated jump part at the horizon: `Σ sizes + T · shift`.
    pub fn terminal_value(&self, horizon: f64) -> f64 {
        self.sizes.iter().sum::<f64>() + horizon * self.compensator_shift
    }
}

/// Draws one jump size from `d`.
pub fn sample_jump_size<R: Rng + ?Sized>(d: &JumpDensity, rng: &mut R) -> f64 {
    match d {
        JumpDensity::Normal { mean, variance } => {
            let z: f64 = StandardNormal.sample(rng);
            mean + variance.sqrt() * z
        }
        _ => d.quantile(rng.random::<f64>()).expect("inverse CDF available"),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum SizeLaw {
    Empty,
    Density(JumpDensity),
    Cells(CellTable),
}

/// Jump sampler for a Lévy measure restricted to `|y| > ε`, with the
/// restricted mass and compensator precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpSampler {
    intensity: f64,
    epsilon: f64,
    compensator_shift: f64,
    sizes: SizeLaw,
}

impl JumpSampler {
    /// Compound Poisson measures are always simulated exactly and ignore
    /// `epsilon`. Other measures are restricted to `|y| > epsilon`;
    /// `epsilon = 0` requires finite activity.
    pub fn new(nu: &LevyMeasure, epsilon: f64) -> Result<Self, SimulateError> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(SimulateError::InvalidEpsilon(epsilon));
        }
        nu.validate_params()?;
        let (epsilon, sizes) = match nu {
            LevyMeasure::Zero {} => (0.0, SizeLaw::Empty),
            LevyMeasure::CompoundPoisson { jump_density, .. } => (0.0, SizeLaw::Density(jump_density.clone())),
            LevyMeasure::TemperedStable { c_minus, c_plus, lambda_minus, lambda_plus, alpha } => {
                if epsilon == 0.0 && *alpha >= 0.0 {
                    return Err(SimulateError::DivergentMass);
                }
                let neg = |r: f64| nu.density(-r);
                let pos = |r: f64| nu.density(r);
                let mut sides: Vec<Side<'_>> = Vec::new();
                if *c_minus > 0.0 {
                    sides.push((-1.0, *lambda_minus, &neg));
                }
                if *c_plus > 0.0 {
                    sides.push((1.0, *lambda_plus, &pos));
                }
                (epsilon, SizeLaw::Cells(CellTable::smooth(&sides, epsilon, Some(-1.0 - alpha))?))
            }
            LevyMeasure::Tabulated(t) => {
                let table = CellTable::tabulated(t, epsilon).map_err(|e| match e {
                    MeasureError::DivergentIntegral(_) => SimulateError::DivergentMass,
                    other => other.into(),
                })?;
                (epsilon, SizeLaw::Cells(table))
            }
        };
        let intensity = match (&sizes, nu) {
            (SizeLaw::Cells(t), _) => t.total_mass(),
            (_, LevyMeasure::CompoundPoisson { lambda, .. }) => *lambda,
            _ => 0.0,
        };
        let compensator_shift = match nu.integrate_weighted(|y| y, epsilon, 1.0)? {
            Quantity::Finite(v) => -v,
            Quantity::Infinite => return Err(MeasureError::DivergentIntegral("∫_{ε<|y|≤1} y ν(dy)".into()).into()),
        };
        Ok(JumpSampler { intensity, epsilon, compensator_shift, sizes })
    }

    /// Mass of the restricted measure (jumps per unit time).
    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn compensator_shift(&self) -> f64 {
        self.compensator_shift
    }

    pub fn sample_size<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.sizes {
            SizeLaw::Empty => unreachable!("no jumps to size"),
            SizeLaw::Density(d) => sample_jump_size(d, rng),
            SizeLaw::Cells(t) => t.sample(rng),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, horizon: f64, rng: &mut R) -> JumpRecord {
        let mean = self.intensity * horizon;
        let n = if mean > 0.0 {
            Poisson::new(mean).expect("positive finite mean").sample(rng) as usize
        } else {
            0
        };
        let mut times: Vec<f64> = (0..n).map(|_| horizon * (1.0 - rng.random::<f64>())).collect();
        times.sort_by(f64::total_cmp);
        let sizes = (0..n).map(|_| self.sample_size(rng)).collect();
        JumpRecord { times, sizes, truncation_epsilon: self.epsilon, compensator_shift: self.compensator_shift }
    }
}

/// Exact simulation of a compound Poisson measure on `[0, T]`.
pub fn sample_compound_poisson<R: Rng + ?Sized>(
    nu: &LevyMeasure,
    horizon: f64,
    rng: &mut R,
) -> Result<JumpRecord, SimulateError> {
    if !nu.is_finite_activity()? {
        return Err(SimulateError::DivergentMass);
    }
    Ok(JumpSampler::new(nu, 0.0)?.sample(horizon, rng))
}

/// Jumps of size `|y| > ε` on `[0, T]`, with the compensator of the jumps in
/// `ε < |y| ≤ 1` recorded in the result.
pub fn sample_truncated_jumps<R: Rng + ?Sized>(
    nu: &LevyMeasure,
    epsilon: f64,
    horizon: f64,
    rng: &mut R,
) -> Result<JumpRecord, SimulateError> {
    Ok(JumpSampler::new(nu, epsilon)?.sample(horizon, rng))
}

/// Draws `C_T ~ N(-ξ²/2, ξ²)`, the Gaussian log-likelihood term under the
/// second law. Exactly `0` when `ξ² = 0`.
pub fn sample_c_t<R: Rng + ?Sized>(xi_sq: f64, rng: &mut R) -> f64 {
    if xi_sq == 0.0 {
        return 0.0;
    }
    let z: f64 = StandardNormal.sample(rng);
    -0.5 * xi_sq + xi_sq.sqrt() * z
}

/// Sampler of the terminal value `X_T` of one additive process.
#[derive(Debug, Clone)]
pub struct ProcessSampler {
    horizon: f64,
    mean: f64,
    gaussian: Option<Normal<f64>>,
    jumps: JumpSampler,
    small_jump_sd: f64,
}

impl ProcessSampler {
    /// With `small_jump_correction`, truncated jumps are replaced by an
    /// independent normal of variance `T ∫_{|y|≤ε} y² ν(dy)`.
    pub fn new(
        p: &ProcessSpec,
        horizon: f64,
        epsilon: f64,
        small_jump_correction: bool,
    ) -> Result<Self, SimulateError> {
        let jumps = JumpSampler::new(&p.levy, epsilon)?;
        let var = p.vol_sq.integral(horizon);
        let gaussian = (var > 0.0).then(|| Normal::new(0.0, var.sqrt()).expect("finite variance"));
        let small_jump_sd = if small_jump_correction && jumps.epsilon() > 0.0 {
            let v = p.levy.integrate_weighted(|y| y * y, 0.0, jumps.epsilon())?;
            (horizon * v.finite().ok_or(MeasureError::DivergentIntegral("∫ y² ν(dy)".into()))?).sqrt()
        } else {
            0.0
        };
        Ok(ProcessSampler { horizon, mean: p.drift.integral(horizon), gaussian, jumps, small_jump_sd })
    }

    pub fn jumps(&self) -> &JumpSampler {
        &self.jumps
    }

    pub fn sample_terminal<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut x = self.mean + self.jumps.sample(self.horizon, rng).terminal_value(self.horizon);
        if let Some(g) = &self.gaussian {
            x += g.sample(rng);
        }
        if self.small_jump_sd > 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            x += self.small_jump_sd * z;
        }
        x
    }
}

/// Writes jumps as CSV with header `path_id,jump_time,jump_size`.
pub fn write_paths_csv<W: Write>(mut out: W, records: &[JumpRecord]) -> io::Result<()> {
    writeln!(out, "path_id,jump_time,jump_size")?;
    for (id, rec) in records.iter().enumerate() {
        for (t, y) in rec.times.iter().zip(&rec.sizes) {
            writeln!(out, "{id},{t},{y}")?;
        }
    }
    Ok(())
}
