//! Cost specifications: parametric power costs, explicit grids, and
//! affine-in-y shifts c(x,y) + u(y).

use crate::error::{MotError, Result};
use crate::pwl::PiecewiseLinear;

const LOOKUP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum CostSpec {
    /// c(x,y) = sign * |x - y|^exponent.
    Power { sign: f64, exponent: f64 },
    /// Explicit values over a fixed cross grid. `ys` may extend beyond
    /// supp(nu) when diagnostics evaluate the envelope off the support.
    Grid {
        xs: Vec<f64>,
        ys: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
    /// base(x,y) + u(y) for a piecewise-linear u.
    Shifted {
        base: Box<CostSpec>,
        shift: PiecewiseLinear,
    },
}

impl CostSpec {
    pub fn power(sign: f64, exponent: f64) -> Result<Self> {
        if !(sign == 1.0 || sign == -1.0) {
            return Err(MotError::BadParameters(format!("sign must be +-1, got {sign}")));
        }
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(MotError::BadParameters(format!(
                "exponent must be finite and positive, got {exponent}"
            )));
        }
        Ok(CostSpec::Power { sign, exponent })
    }

    pub fn abs_distance() -> Self {
        CostSpec::Power {
            sign: 1.0,
            exponent: 1.0,
        }
    }

    pub fn squared() -> Self {
        CostSpec::Power {
            sign: 1.0,
            exponent: 2.0,
        }
    }

    pub fn grid(xs: Vec<f64>, ys: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != xs.len() || values.iter().any(|row| row.len() != ys.len()) {
            return Err(MotError::DimensionMismatch(format!(
                "cost grid {}x{} does not match {} x-points and {} y-points",
                values.len(),
                values.first().map_or(0, Vec::len),
                xs.len(),
                ys.len()
            )));
        }
        Ok(CostSpec::Grid { xs, ys, values })
    }

    pub fn shifted(base: CostSpec, shift: PiecewiseLinear) -> Self {
        CostSpec::Shifted {
            base: Box::new(base),
            shift,
        }
    }

    /// Whether the cost is defined at arbitrary y (parametric family).
    pub fn is_parametric(&self) -> bool {
        match self {
            CostSpec::Power { .. } => true,
            CostSpec::Grid { .. } => false,
            CostSpec::Shifted { base, .. } => base.is_parametric(),
        }
    }

    pub fn supports_y(&self, y: f64) -> bool {
        match self {
            CostSpec::Power { .. } => true,
            CostSpec::Grid { ys, .. } => lookup(ys, y).is_some(),
            CostSpec::Shifted { base, .. } => base.supports_y(y),
        }
    }

    pub fn try_value(&self, x: f64, y: f64) -> Result<f64> {
        match self {
            CostSpec::Power { sign, exponent } => Ok(sign * (x - y).abs().powf(*exponent)),
            CostSpec::Grid { xs, ys, values } => {
                let i = lookup(xs, x).ok_or(MotError::CostUndefined { x, y })?;
                let j = lookup(ys, y).ok_or(MotError::CostUndefined { x, y })?;
                Ok(values[i][j])
            }
            CostSpec::Shifted { base, shift } => Ok(base.try_value(x, y)? + shift.eval(y)),
        }
    }

    /// Cost value; panics when a grid cost is queried off its grid.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.try_value(x, y)
            .unwrap_or_else(|e| panic!("cost evaluation: {e}"))
    }

    /// Midpoint subgradient of y -> c(x,y) at `y`. Parametric costs use
    /// symmetric finite differences with step 1e-6 * scale; grid costs
    /// average the adjacent grid slopes.
    pub fn y_slope_mid(&self, x: f64, y: f64, scale: f64) -> f64 {
        match self {
            CostSpec::Power { .. } => {
                let step = 1e-6 * scale.max(1.0);
                (self.value(x, y + step) - self.value(x, y - step)) / (2.0 * step)
            }
            CostSpec::Grid { xs, ys, values } => {
                let i = lookup(xs, x).expect("grid cost: unknown x");
                let j = lookup(ys, y).expect("grid cost: unknown y");
                let row = &values[i];
                let left = (j > 0)
                    .then(|| (row[j] - row[j - 1]) / (ys[j] - ys[j - 1]));
                let right = (j + 1 < ys.len())
                    .then(|| (row[j + 1] - row[j]) / (ys[j + 1] - ys[j]));
                match (left, right) {
                    (Some(l), Some(r)) => 0.5 * (l + r),
                    (Some(l), None) => l,
                    (None, Some(r)) => r,
                    (None, None) => 0.0,
                }
            }
            CostSpec::Shifted { base, shift } => {
                base.y_slope_mid(x, y, scale) + shift.slope_mid(y)
            }
        }
    }
}

fn lookup(sorted: &[f64], v: f64) -> Option<usize> {
    let p = sorted.partition_point(|&s| s < v - LOOKUP_TOL);
    (p < sorted.len() && (sorted[p] - v).abs() <= LOOKUP_TOL).then_some(p)
}
