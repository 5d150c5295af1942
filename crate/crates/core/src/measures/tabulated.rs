use serde::{Deserialize, Serialize};

use super::MeasureError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLevyTable {
    grid: Vec<f64>,
    values: Vec<f64>,
}

/// One half-line of a tabulated Lévy density, knots stored by `|y|`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct TableSide {
    pub(crate) knots: Vec<f64>,
    pub(crate) values: Vec<f64>,
    /// Power-law exponent used below the innermost knot, when both innermost
    /// values are positive.
    pub(crate) inner_exponent: Option<f64>,
}

/// Shape of the density on one cell `[a, b]` of a side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum CellShape {
    /// `density(r) = va · (r / a)^k`
    Power(f64),
    /// Linear between `va` and `vb`.
    Linear,
}

impl TableSide {
    fn new(knots: Vec<f64>, values: Vec<f64>) -> Self {
        let inner_exponent = if knots.len() >= 2 && values[0] > 0.0 && values[1] > 0.0 {
            Some((values[1] / values[0]).ln() / (knots[1] / knots[0]).ln())
        } else {
            None
        };
        TableSide { knots, values, inner_exponent }
    }

    pub(crate) fn shape(&self, i: usize) -> CellShape {
        let (va, vb) = (self.values[i], self.values[i + 1]);
        if va > 0.0 && vb > 0.0 {
            CellShape::Power((vb / va).ln() / (self.knots[i + 1] / self.knots[i]).ln())
        } else {
            CellShape::Linear
        }
    }

    pub(crate) fn density(&self, r: f64) -> f64 {
        let n = self.knots.len();
        if n == 0 || r > self.knots[n - 1] || r <= 0.0 {
            return 0.0;
        }
        if r < self.knots[0] {
            return match self.inner_exponent {
                Some(k) => self.values[0] * (r / self.knots[0]).powf(k),
                None => 0.0,
            };
        }
        if n == 1 {
            return self.values[0];
        }
        let i = self.knots.partition_point(|k| *k <= r).clamp(1, n - 1) - 1;
        let (a, b) = (self.knots[i], self.knots[i + 1]);
        let (va, vb) = (self.values[i], self.values[i + 1]);
        match self.shape(i) {
            CellShape::Power(k) => va * (r / a).powf(k),
            CellShape::Linear => va + (r - a) / (b - a) * (vb - va),
        }
    }
}

/// Lévy density given on knots, interpolated log-log between knots of the
/// same sign (linearly when a knot value is zero), extended toward the
/// origin by the power law of the innermost cell, and zero beyond the
/// outermost knot.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawLevyTable", into = "RawLevyTable")]
pub struct TabulatedLevy {
    grid: Vec<f64>,
    values: Vec<f64>,
    #[serde(skip)]
    positive: Option<TableSide>,
    #[serde(skip)]
    negative: Option<TableSide>,
}

impl PartialEq for TabulatedLevy {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

impl From<TabulatedLevy> for RawLevyTable {
    fn from(t: TabulatedLevy) -> Self {
        RawLevyTable { grid: t.grid, values: t.values }
    }
}

impl TryFrom<RawLevyTable> for TabulatedLevy {
    type Error = MeasureError;
    fn try_from(raw: RawLevyTable) -> Result<Self, Self::Error> {
        TabulatedLevy::new(raw.grid, raw.values)
    }
}

impl TabulatedLevy {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self, MeasureError> {
        if grid.len() != values.len() || grid.is_empty() {
            return Err(MeasureError::InvalidParameter(
                "tabulated Lévy measure needs one value per grid point".into(),
            ));
        }
        if grid.iter().any(|g| !g.is_finite() || *g == 0.0) {
            return Err(MeasureError::InvalidParameter(
                "tabulated Lévy grid must be finite and exclude 0".into(),
            ));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MeasureError::InvalidParameter(
                "tabulated Lévy grid must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(MeasureError::InvalidParameter(
                "tabulated Lévy density values must be finite and nonnegative".into(),
            ));
        }
        let (mut neg_k, mut neg_v, mut pos_k, mut pos_v) = (vec![], vec![], vec![], vec![]);
        for (g, v) in grid.iter().zip(&values) {
            if *g < 0.0 {
                neg_k.push(-g);
                neg_v.push(*v);
            } else {
                pos_k.push(*g);
                pos_v.push(*v);
            }
        }
        neg_k.reverse();
        neg_v.reverse();
        for (side, k) in [("negative", &neg_k), ("positive", &pos_k)] {
            if k.len() == 1 {
                return Err(MeasureError::InvalidParameter(format!(
                    "tabulated Lévy measure needs at least two knots on the {side} side"
                )));
            }
        }
        let side = |k: Vec<f64>, v: Vec<f64>| (!k.is_empty()).then(|| TableSide::new(k, v));
        Ok(TabulatedLevy {
            positive: side(pos_k, pos_v),
            negative: side(neg_k, neg_v),
            grid,
            values,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn side(&self, positive: bool) -> Option<&TableSide> {
        if positive {
            self.positive.as_ref()
        } else {
            self.negative.as_ref()
        }
    }

    pub fn density(&self, y: f64) -> f64 {
        match self.side(y > 0.0) {
            Some(s) if y != 0.0 => s.density(y.abs()),
            _ => 0.0,
        }
    }

    /// True when the density is extended to the origin on either side.
    pub fn reaches_origin(&self) -> bool {
        [&self.positive, &self.negative]
            .iter()
            .any(|s| s.as_ref().is_some_and(|s| s.inner_exponent.is_some()))
    }

    pub fn max_abs_knot(&self) -> f64 {
        self.grid.iter().fold(0.0, |m, g| m.max(g.abs()))
    }
}
