//! Inverse-CDF sampling of jump sizes from a Lévy density restricted to
//! `|y| > ε`, using a table of cells in `|y|` on each half-line.

use rand::Rng;

use crate::measures::{CellShape, MeasureError, TabulatedLevy};
use crate::quadrature::{IntegrationRequest, Neumaier};

/// Cells per half-line for parametric densities.
pub const CELLS_PER_SIDE: usize = 4096;
/// Tail cutoff: cells extend to `ε + TAIL_DECAY / λ`.
const TAIL_DECAY: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    /// Density proportional to `r^k` on the cell.
    Power(f64),
    /// Density linear from `va` to `vb`.
    Linear { va: f64, vb: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cell {
    sign: f64,
    a: f64,
    b: f64,
    shape: Shape,
}

impl Cell {
    /// Position of the `w`-quantile of the cell's normalized shape.
    fn quantile(&self, w: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        let r = match self.shape {
            Shape::Power(k) => {
                let s = k + 1.0;
                if a == 0.0 {
                    b * w.powf(1.0 / s)
                } else {
                    let l = (b / a).ln();
                    let sl = s * l;
                    if sl.abs() < 1e-12 {
                        a * (w * l).exp()
                    } else if sl < 0.0 {
                        a * ((w * sl.exp_m1()).ln_1p() / s).exp()
                    } else {
                        b * ((w + (1.0 - w) * (-sl).exp()).ln() / s).exp()
                    }
                }
            }
            Shape::Linear { va, vb } => {
                let h = b - a;
                let mass = 0.5 * (va + vb) * h;
                let m = w * mass;
                let slope = (vb - va) / h;
                let disc = (va * va + 2.0 * slope * m).max(0.0);
                let denom = va + disc.sqrt();
                a + if denom > 0.0 { 2.0 * m / denom } else { w * h }
            }
        };
        r.clamp(a, b)
    }
}

/// `∫_a^b va (r/a)^k dr`.
fn power_mass(va: f64, a: f64, b: f64, k: f64) -> f64 {
    let l = (b / a).ln();
    let sl = (k + 1.0) * l;
    if sl.abs() < 1e-12 {
        va * a * l
    } else {
        va * a * sl.exp_m1() / (k + 1.0)
    }
}

/// `(sign, λ_side, density on r > 0)` of one half-line.
pub(crate) type Side<'a> = (f64, f64, &'a dyn Fn(f64) -> f64);

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CellTable {
    cells: Vec<Cell>,
    /// Cumulative mass at the right end of each cell.
    cum: Vec<f64>,
    epsilon: f64,
}

impl CellTable {
    fn from_cells(cells: Vec<(Cell, f64)>, epsilon: f64) -> Self {
        let mut acc = Neumaier::default();
        let mut kept = Vec::with_capacity(cells.len());
        let mut cum = Vec::with_capacity(cells.len());
        for (cell, mass) in cells {
            if mass > 0.0 && cell.b > cell.a {
                acc.add(mass);
                kept.push(cell);
                cum.push(acc.total());
            }
        }
        CellTable { cells: kept, cum, epsilon }
    }

    pub(crate) fn total_mass(&self) -> f64 {
        self.cum.last().copied().unwrap_or(0.0)
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total = self.total_mass();
        let u = rng.random::<f64>() * total;
        let i = self.cum.partition_point(|c| *c <= u).min(self.cells.len() - 1);
        let cell = &self.cells[i];
        let mut r = cell.quantile(rng.random::<f64>());
        if r <= self.epsilon {
            r = self.epsilon.next_up();
        }
        cell.sign * r
    }

    /// Tabulated density restricted to `|y| > ε`; cells follow the knots and
    /// are sampled exactly.
    pub(crate) fn tabulated(t: &TabulatedLevy, epsilon: f64) -> Result<Self, MeasureError> {
        let mut cells = Vec::new();
        for positive in [false, true] {
            let Some(side) = t.side(positive) else { continue };
            let sign = if positive { 1.0 } else { -1.0 };
            let (knots, values) = (&side.knots, &side.values);
            if let Some(k) = side.inner_exponent {
                let (k0, v0) = (knots[0], values[0]);
                if epsilon == 0.0 {
                    if k <= -1.0 {
                        return Err(MeasureError::DivergentIntegral(
                            "mass of a tabulated Lévy measure near the origin".into(),
                        ));
                    }
                    cells.push((Cell { sign, a: 0.0, b: k0, shape: Shape::Power(k) }, v0 * k0 / (k + 1.0)));
                } else if epsilon < k0 {
                    let va = side.density(epsilon);
                    cells.push((Cell { sign, a: epsilon, b: k0, shape: Shape::Power(k) }, power_mass(va, epsilon, k0, k)));
                }
            }
            for i in 0..knots.len() - 1 {
                let (a0, b) = (knots[i], knots[i + 1]);
                if b <= epsilon {
                    continue;
                }
                let a = a0.max(epsilon);
                let (va, vb) = (side.density(a), values[i + 1]);
                let entry = match side.shape(i) {
                    CellShape::Power(k) => (Cell { sign, a, b, shape: Shape::Power(k) }, power_mass(va, a, b, k)),
                    CellShape::Linear => (Cell { sign, a, b, shape: Shape::Linear { va, vb } }, 0.5 * (va + vb) * (b - a)),
                };
                cells.push(entry);
            }
        }
        Ok(CellTable::from_cells(cells, epsilon))
    }

    /// Smooth density on both half-lines, tabulated on `CELLS_PER_SIDE`
    /// log-spaced cells per side from `ε` to `ε + 50/λ_side`. Cell masses come
    /// from quadrature; within a cell the density is taken as the power law
    /// through its endpoint values.
    ///
    /// `sides` holds `(sign, λ_side, density on r > 0)`; `inner` gives the
    /// exponent `k > -1` of the density near the origin when `ε = 0`.
    pub(crate) fn smooth(
        sides: &[Side<'_>],
        epsilon: f64,
        inner: Option<f64>,
    ) -> Result<Self, MeasureError> {
        let mut cells = Vec::new();
        for &(sign, lambda, density) in sides {
            let hi = epsilon + TAIL_DECAY / lambda;
            let lo = if epsilon > 0.0 {
                epsilon
            } else {
                let k = inner.ok_or_else(|| {
                    MeasureError::DivergentIntegral("mass of an infinite-activity measure with ε = 0".into())
                })?;
                let r0 = 1e-12 * hi;
                // Tempering is below 1e-12 relative on [0, r0].
                cells.push((Cell { sign, a: 0.0, b: r0, shape: Shape::Power(k) }, density(r0) * r0 / (k + 1.0)));
                r0
            };
            let ratio = (hi / lo).ln() / CELLS_PER_SIDE as f64;
            let mut a = lo;
            let mut da = density(a);
            for i in 1..=CELLS_PER_SIDE {
                let b = if i == CELLS_PER_SIDE { hi } else { lo * (ratio * i as f64).exp() };
                let db = density(b);
                let shape = if da > 0.0 && db > 0.0 {
                    Shape::Power((db / da).ln() / (b / a).ln())
                } else {
                    Shape::Linear { va: da, vb: db }
                };
                let mass = IntegrationRequest::new(density, a, b).integrate()?.value;
                cells.push((Cell { sign, a, b, shape }, mass));
                a = b;
                da = db;
            }
        }
        Ok(CellTable::from_cells(cells, epsilon))
    }
}
