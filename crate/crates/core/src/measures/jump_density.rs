use serde::{Deserialize, Serialize};

use super::MeasureError;

/// Probability density of a single jump size (the `G` of a compound Poisson
/// measure `λ·G`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpDensity {
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
    Normal { mean: f64, variance: f64 },
    Tabulated(TabulatedDensity),
}

impl JumpDensity {
    pub fn validate(&self) -> Result<(), MeasureError> {
        match *self {
            JumpDensity::Uniform { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(MeasureError::InvalidParameter(format!(
                        "uniform jump density needs finite a < b (got a = {a}, b = {b})"
                    )));
                }
            }
            JumpDensity::Exponential { rate } => {
                if !(rate.is_finite() && rate > 0.0) {
                    return Err(MeasureError::InvalidParameter(format!(
                        "exponential rate must be positive (got {rate})"
                    )));
                }
            }
            JumpDensity::Normal { mean, variance } => {
                if !(mean.is_finite() && variance.is_finite() && variance > 0.0) {
                    return Err(MeasureError::InvalidParameter(format!(
                        "normal jump density needs finite mean and positive variance (got {mean}, {variance})"
                    )));
                }
            }
            JumpDensity::Tabulated(_) => {}
        }
        Ok(())
    }

    pub fn pdf(&self, y: f64) -> f64 {
        match self {
            JumpDensity::Uniform { a, b } => {
                if y >= *a && y <= *b {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            JumpDensity::Exponential { rate } => {
                if y > 0.0 {
                    rate * (-rate * y).exp()
                } else {
                    0.0
                }
            }
            JumpDensity::Normal { mean, variance } => {
                let z = y - mean;
                (-0.5 * z * z / variance).exp() / (2.0 * std::f64::consts::PI * variance).sqrt()
            }
            JumpDensity::Tabulated(t) => t.pdf(y),
        }
    }

    /// `ln pdf(y)`, `-∞` off the support. Stays finite far in the tails
    /// where `pdf` underflows.
    pub fn ln_pdf(&self, y: f64) -> f64 {
        match self {
            JumpDensity::Uniform { a, b } => {
                if y >= *a && y <= *b {
                    -(b - a).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            JumpDensity::Exponential { rate } => {
                if y > 0.0 {
                    rate.ln() - rate * y
                } else {
                    f64::NEG_INFINITY
                }
            }
            JumpDensity::Normal { mean, variance } => {
                let z = y - mean;
                -0.5 * z * z / variance - 0.5 * (2.0 * std::f64::consts::PI * variance).ln()
            }
            JumpDensity::Tabulated(t) => t.pdf(y).ln(),
        }
    }

    /// Smallest and largest point of the support (possibly infinite).
    pub fn support(&self) -> (f64, f64) {
        match self {
            JumpDensity::Uniform { a, b } => (*a, *b),
            JumpDensity::Exponential { .. } => (0.0, f64::INFINITY),
            JumpDensity::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            JumpDensity::Tabulated(t) => (t.grid[0], t.grid[t.grid.len() - 1]),
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            JumpDensity::Uniform { a, b } => vec![*a, *b],
            JumpDensity::Exponential { .. } => vec![0.0],
            JumpDensity::Normal { mean, variance } => {
                let sd = variance.sqrt();
                vec![mean - 8.0 * sd, *mean, mean + 8.0 * sd]
            }
            JumpDensity::Tabulated(t) => t.grid.clone(),
        }
    }

    /// Inverse CDF. `None` for the normal family, which is sampled by a
    /// standard transform instead.
    pub fn quantile(&self, u: f64) -> Option<f64> {
        match self {
            JumpDensity::Uniform { a, b } => Some(a + u * (b - a)),
            JumpDensity::Exponential { rate } => Some(-(-u).ln_1p() / rate),
            JumpDensity::Normal { .. } => None,
            JumpDensity::Tabulated(t) => Some(t.quantile(u)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    grid: Vec<f64>,
    values: Vec<f64>,
}

/// Piecewise-linear density through `(grid[i], values[i])`, renormalized to
/// unit mass, zero outside `[grid[0], grid[n-1]]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct TabulatedDensity {
    grid: Vec<f64>,
    values: Vec<f64>,
    /// Normalized cumulative mass at each knot.
    cdf: Vec<f64>,
}

impl PartialEq for TabulatedDensity {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

impl From<TabulatedDensity> for RawTable {
    fn from(t: TabulatedDensity) -> Self {
        RawTable { grid: t.grid, values: t.values }
    }
}

impl TryFrom<RawTable> for TabulatedDensity {
    type Error = MeasureError;
    fn try_from(raw: RawTable) -> Result<Self, Self::Error> {
        TabulatedDensity::new(raw.grid, raw.values)
    }
}

impl TabulatedDensity {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self, MeasureError> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(MeasureError::InvalidParameter(
                "tabulated density needs at least two knots and one value per knot".into(),
            ));
        }
        if grid.iter().any(|g| !g.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MeasureError::InvalidParameter(
                "tabulated density grid must be finite and strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(MeasureError::InvalidParameter(
                "tabulated density values must be finite and nonnegative".into(),
            ));
        }
        let mut cdf = Vec::with_capacity(grid.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for i in 1..grid.len() {
            acc += 0.5 * (values[i - 1] + values[i]) * (grid[i] - grid[i - 1]);
            cdf.push(acc);
        }
        if acc <= 0.0 {
            return Err(MeasureError::InvalidParameter("tabulated density has zero mass".into()));
        }
        let values: Vec<f64> = values.iter().map(|v| v / acc).collect();
        for c in cdf.iter_mut() {
            *c /= acc;
        }
        Ok(TabulatedDensity { grid, values, cdf })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn pdf(&self, y: f64) -> f64 {
        let n = self.grid.len();
        if y < self.grid[0] || y > self.grid[n - 1] {
            return 0.0;
        }
        let i = self.grid.partition_point(|g| *g <= y).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let w = (y - x0) / (x1 - x0);
        self.values[i] + w * (self.values[i + 1] - self.values[i])
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let n = self.grid.len();
        let u = u.clamp(0.0, 1.0);
        // Last cell whose cumulative mass at its left knot is below u.
        let i = self.cdf.partition_point(|c| *c < u).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        let h = x1 - x0;
        let m = u - self.cdf[i];
        // Solve v0 t + (v1 - v0) t² / (2h) = m for t in [0, h].
        let slope = (v1 - v0) / h;
        let disc = (v0 * v0 + 2.0 * slope * m).max(0.0);
        let denom = v0 + disc.sqrt();
        let t = if denom > 0.0 { 2.0 * m / denom } else { 0.0 };
        (x0 + t.clamp(0.0, h)).min(x1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::IntegrationRequest;
    use approx::assert_relative_eq;

    fn mass(d: &JumpDensity) -> f64 {
        let (lo, hi) = d.support();
        IntegrationRequest::new(|y| d.pdf(y), lo, hi)
            .breakpoints(d.breakpoints())
            .integrate()
            .unwrap()
            .value
    }

    #[test]
    fn families_have_unit_mass() {
        let tab = TabulatedDensity::new(vec![-1.0, 0.5, 2.0, 3.0], vec![0.0, 3.0, 1.0, 0.0]).unwrap();
        for d in [
            JumpDensity::Uniform { a: -0.5, b: 1.5 },
            JumpDensity::Exponential { rate: 2.5 },
            JumpDensity::Normal { mean: 0.3, variance: 0.04 },
            JumpDensity::Tabulated(tab),
        ] {
            d.validate().unwrap();
            assert_relative_eq!(mass(&d), 1.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn tabulated_quantile_inverts_cdf() {
        let t = TabulatedDensity::new(vec![0.0, 1.0, 2.0, 4.0], vec![0.0, 2.0, 1.0, 1.0]).unwrap();
        for k in 1..50 {
            let u = k as f64 / 50.0;
            let q = t.quantile(u);
            let cdf = IntegrationRequest::new(|y| t.pdf(y), 0.0, q)
                .breakpoints([1.0, 2.0])
                .integrate()
                .unwrap()
                .value;
            assert_relative_eq!(cdf, u, max_relative = 1e-9);
        }
    }

    #[test]
    fn ln_pdf_survives_underflow() {
        let d = JumpDensity::Exponential { rate: 10.0 };
        assert_eq!(d.pdf(100.0), 0.0);
        assert!(d.ln_pdf(100.0).is_finite());
        assert_eq!(d.ln_pdf(-1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(TabulatedDensity::new(vec![0.0], vec![1.0]).is_err());
        assert!(TabulatedDensity::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(TabulatedDensity::new(vec![0.0, 1.0], vec![-1.0, 1.0]).is_err());
        assert!(TabulatedDensity::new(vec![0.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(JumpDensity::Uniform { a: 1.0, b: 1.0 }.validate().is_err());
    }

    #[test]
    fn json_fragment() {
        let d: JumpDensity = serde_json::from_str(r#"{"family": "uniform", "a": 0.0, "b": 1.0}"#).unwrap();
        assert_eq!(d, JumpDensity::Uniform { a: 0.0, b: 1.0 });
        let d: JumpDensity =
            serde_json::from_str(r#"{"family": "tabulated", "grid": [0.0, 1.0], "values": [1.0, 1.0]}"#).unwrap();
        assert!(matches!(d, JumpDensity::Tabulated(_)));
        assert!(serde_json::from_str::<JumpDensity>(r#"{"family": "uniform", "a": 0.0, "b": 1.0, "c": 2}"#).is_err());
        assert!(serde_json::from_str::<JumpDensity>(
            r#"{"family": "tabulated", "grid": [0.0, 1.0], "values": [1.0, 1.0], "extra": 1}"#
        )
        .is_err());
    }
}
