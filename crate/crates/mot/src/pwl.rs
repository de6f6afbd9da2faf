//! Piecewise-linear functions on the line and the least concave majorant.

use crate::error::{MotError, Result};

/// Piecewise-linear function given by knots with strictly increasing
/// abscissae. Outside the knot range the boundary segments are extended
/// linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    xs: Vec<f64>,
    vs: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(xs: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        if xs.is_empty() || xs.len() != vs.len() {
            return Err(MotError::DimensionMismatch(format!(
                "piecewise-linear knots: {} abscissae, {} values",
                xs.len(),
                vs.len()
            )));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MotError::BadParameters(
                "piecewise-linear knots must be strictly increasing".into(),
            ));
        }
        if xs.iter().chain(vs.iter()).any(|v| !v.is_finite()) {
            return Err(MotError::BadParameters(
                "piecewise-linear knots must be finite".into(),
            ));
        }
        Ok(PiecewiseLinear { xs, vs })
    }

    pub fn constant(value: f64) -> Self {
        PiecewiseLinear {
            xs: vec![0.0],
            vs: vec![value],
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.vs.iter().copied())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if n == 1 {
            return self.vs[0];
        }
        // segment index: clamp to boundary segments for extrapolation
        let seg = match self.xs.partition_point(|&k| k <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let (x0, x1) = (self.xs[seg], self.xs[seg + 1]);
        let (v0, v1) = (self.vs[seg], self.vs[seg + 1]);
        v0 + (v1 - v0) * (x - x0) / (x1 - x0)
    }

    /// Midpoint of the interval of segment slopes at `x` (the
    /// super/subgradient selection used throughout).
    pub fn slope_mid(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if n == 1 {
            return 0.0;
        }
        let slope = |seg: usize| {
            (self.vs[seg + 1] - self.vs[seg]) / (self.xs[seg + 1] - self.xs[seg])
        };
        let p = self.xs.partition_point(|&k| k < x);
        if p < n && self.xs[p] == x {
            // knot: average adjacent segment slopes
            let left = if p == 0 { slope(0) } else { slope(p - 1) };
            let right = if p == n - 1 { slope(n - 2) } else { slope(p) };
            return 0.5 * (left + right);
        }
        match p {
            0 => slope(0),
            p if p >= n => slope(n - 2),
            p => slope(p - 1),
        }
    }

    /// Maximum absolute slope over the segments.
    pub fn max_abs_slope(&self) -> f64 {
        if self.xs.len() == 1 {
            return 0.0;
        }
        self.xs
            .windows(2)
            .zip(self.vs.windows(2))
            .map(|(x, v)| ((v[1] - v[0]) / (x[1] - x[0])).abs())
            .fold(0.0, f64::max)
    }
}

/// Least concave majorant of a finite point set, as a piecewise-linear
/// function whose knots are a subset of the input abscissae.
///
/// Upper-hull sweep; the input must be sorted with strictly increasing
/// abscissae.
pub fn concave_envelope(xs: &[f64], vs: &[f64]) -> Result<PiecewiseLinear> {
    if xs.is_empty() || xs.len() != vs.len() {
        return Err(MotError::DimensionMismatch(
            "concave envelope needs matching non-empty point lists".into(),
        ));
    }
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MotError::BadParameters(
            "concave envelope input must be strictly increasing in x".into(),
        ));
    }
    let mut hx: Vec<f64> = Vec::with_capacity(xs.len());
    let mut hv: Vec<f64> = Vec::with_capacity(xs.len());
    for (&x, &v) in xs.iter().zip(vs.iter()) {
        while hx.len() >= 2 {
            let (x1, v1) = (hx[hx.len() - 2], hv[hv.len() - 2]);
            let (x2, v2) = (hx[hx.len() - 1], hv[hv.len() - 1]);
            // drop the middle point unless it lies strictly above the chord
            if (v2 - v1) * (x - x1) <= (v - v1) * (x2 - x1) {
                hx.pop();
                hv.pop();
            } else {
                break;
            }
        }
        hx.push(x);
        hv.push(v);
    }
    PiecewiseLinear::new(hx, hv)
}
