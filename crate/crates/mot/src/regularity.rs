//! Lipschitz post-processing of dual triples via concave envelopes.
//!
//! On a compact interval J, a dual function g for the shifted cost
//! c~(x,y) = c(x,y) + u(y) is clamped at zero, regularized to the
//! Lipschitz modulus 2(L1 + L2) by inf-convolution with a cone, and
//! then f and h are regenerated from the upper concave envelope
//! H(x,.) = conc[g - c~(x,.)]: f(x) = H(x,x) and h(x) a midpoint
//! supergradient at x. The resulting triple is admissible for the
//! original cost by construction and its moduli obey the explicit
//! bounds Lip(f) <= L1 + 3(L1+L2), Lip(g) <= 2(L1+L2) + L2 and
//! sup|h| <= 3(L1+L2), which specialize to 7L, 5L, 6L when L1 = L2 = L.

use crate::config::Tolerances;
use crate::cost::CostSpec;
use crate::error::{MotError, Result};
use crate::measures::{DiscreteMeasure, Interval};
use crate::parallel::map_slice;
use crate::pwl::{concave_envelope, PiecewiseLinear};

/// Measured and guaranteed Lipschitz moduli of a post-processed triple.
#[derive(Debug, Clone, Copy)]
pub struct LipschitzCertificate {
    /// Modulus of the cost on J x J (max grid difference quotient).
    pub l1: f64,
    /// Modulus of the convexifier u on J.
    pub l2: f64,
    pub measured_lip_f: f64,
    pub measured_lip_g: f64,
    pub measured_sup_h: f64,
    /// L1 + 3(L1 + L2).
    pub bound_lip_f: f64,
    /// 2(L1 + L2) + L2.
    pub bound_lip_g: f64,
    /// 3(L1 + L2).
    pub bound_sup_h: f64,
    pub pass: bool,
}

impl LipschitzCertificate {
    /// Human-readable bounds; prints 7L / 5L / 6L when L1 = L2.
    pub fn describe_bounds(&self) -> String {
        if (self.l1 - self.l2).abs() <= 1e-12 * self.l1.abs().max(1.0) {
            let l = self.l1;
            format!(
                "Lip(f) <= 7L = {:.6}, Lip(g) <= 5L = {:.6}, sup|h| <= 6L = {:.6} (L = {:.6})",
                7.0 * l,
                5.0 * l,
                6.0 * l,
                l
            )
        } else {
            format!(
                "Lip(f) <= {:.6}, Lip(g) <= {:.6}, sup|h| <= {:.6}",
                self.bound_lip_f, self.bound_lip_g, self.bound_sup_h
            )
        }
    }
}

/// Post-processed triple on the grid restricted to J.
#[derive(Debug, Clone)]
pub struct SmoothedTriple {
    pub atoms: Vec<f64>,
    pub f: Vec<f64>,
    pub h: Vec<f64>,
    pub grid: Vec<f64>,
    /// g~ = regularized g minus u, the dual function for the original cost.
    pub g: Vec<f64>,
}

/// Regenerates (f, h) from g through per-atom concave envelopes and
/// certifies the Lipschitz constants. `g` is given on `grid` and must
/// satisfy the dual inequality for c~ = c + u with some (f, h); it is
/// clamped at zero and Lipschitz-regularized internally.
pub fn lipschitz_postprocess(
    grid: &[f64],
    g: &[f64],
    atoms: &[f64],
    cost: &CostSpec,
    u: &PiecewiseLinear,
    j: &Interval,
    _tols: &Tolerances,
) -> Result<(SmoothedTriple, LipschitzCertificate)> {
    if !j.is_bounded() {
        return Err(MotError::NotCompact(format!(
            "Lipschitz certification needs a compact interval, got [{}, {}]",
            j.lo, j.hi
        )));
    }
    if grid.len() != g.len() {
        return Err(MotError::DimensionMismatch(format!(
            "grid has {} points but g has {} values",
            grid.len(),
            g.len()
        )));
    }

    // restrict everything to J
    let keep: Vec<usize> = (0..grid.len())
        .filter(|&k| grid[k] >= j.lo - 1e-12 && grid[k] <= j.hi + 1e-12)
        .collect();
    if keep.len() < 2 {
        return Err(MotError::BadParameters(
            "fewer than two grid points inside J".into(),
        ));
    }
    let ys: Vec<f64> = keep.iter().map(|&k| grid[k]).collect();
    let xs: Vec<f64> = atoms
        .iter()
        .copied()
        .filter(|&x| x >= j.lo - 1e-12 && x <= j.hi + 1e-12)
        .collect();
    if xs.is_empty() {
        return Err(MotError::BadParameters("no atoms inside J".into()));
    }

    // moduli measured from the grid
    let l1 = cost_modulus(&xs, &ys, cost)?;
    let l2 = ys
        .windows(2)
        .map(|w| ((u.eval(w[1]) - u.eval(w[0])) / (w[1] - w[0])).abs())
        .fold(0.0, f64::max);
    let lam_g = 2.0 * (l1 + l2);

    // clamp at zero, then inf-convolve with the cone lam_g * |.|
    let g_clamped: Vec<f64> = keep.iter().map(|&k| g[k].min(0.0)).collect();
    let g_reg: Vec<f64> = ys
        .iter()
        .map(|&y| {
            ys.iter()
                .zip(&g_clamped)
                .map(|(&yp, &gp)| gp + lam_g * (y - yp).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();

    // per-atom concave envelope of y -> g_reg(y) - c~(x, y)
    let envelopes: Vec<Result<PiecewiseLinear>> = map_slice(&xs, |&x| {
        let vals: Vec<f64> = ys
            .iter()
            .zip(&g_reg)
            .map(|(&y, &gy)| Ok(gy - cost.try_value(x, y)? - u.eval(y)))
            .collect::<Result<_>>()?;
        concave_envelope(&ys, &vals)
    });
    let mut f = Vec::with_capacity(xs.len());
    let mut h = Vec::with_capacity(xs.len());
    for (env, &x) in envelopes.into_iter().zip(&xs) {
        let env = env?;
        f.push(env.eval(x));
        h.push(env.slope_mid(x));
    }

    let g_out: Vec<f64> = ys
        .iter()
        .zip(&g_reg)
        .map(|(&y, &gy)| gy - u.eval(y))
        .collect();

    let measured_lip_f = max_quotient(&xs, &f);
    let measured_lip_g = max_quotient(&ys, &g_out);
    let measured_sup_h = h.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let bound_lip_f = l1 + 3.0 * (l1 + l2);
    let bound_lip_g = 2.0 * (l1 + l2) + l2;
    let bound_sup_h = 3.0 * (l1 + l2);
    let slack = 1e-9;
    let pass = measured_lip_f <= bound_lip_f + slack
        && measured_lip_g <= bound_lip_g + slack
        && measured_sup_h <= bound_sup_h + slack;

    Ok((
        SmoothedTriple {
            atoms: xs,
            f,
            h,
            grid: ys,
            g: g_out,
        },
        LipschitzCertificate {
            l1,
            l2,
            measured_lip_f,
            measured_lip_g,
            measured_sup_h,
            bound_lip_f,
            bound_lip_g,
            bound_sup_h,
            pass,
        },
    ))
}

/// Quadratic convexifier u(y) = lambda * y^2 with lambda taken from the
/// largest negative second difference of the cost on the grid, so that
/// c + u has non-negative second differences for every atom.
pub fn auto_convexifier(atoms: &[f64], grid: &[f64], cost: &CostSpec) -> Result<PiecewiseLinear> {
    let mut lambda = 0.0f64;
    for &x in atoms {
        for w in grid.windows(3) {
            let (y0, y1, y2) = (w[0], w[1], w[2]);
            let c0 = cost.try_value(x, y0)?;
            let c1 = cost.try_value(x, y1)?;
            let c2 = cost.try_value(x, y2)?;
            // second difference normalized like a second derivative
            let dd = 2.0 * (c0 / ((y1 - y0) * (y2 - y0)) - c1 / ((y1 - y0) * (y2 - y1))
                + c2 / ((y2 - y0) * (y2 - y1)));
            if dd < 0.0 {
                lambda = lambda.max(-dd / 2.0);
            }
        }
    }
    let vs: Vec<f64> = grid.iter().map(|&y| lambda * y * y).collect();
    PiecewiseLinear::new(grid.to_vec(), vs)
}

fn cost_modulus(xs: &[f64], ys: &[f64], cost: &CostSpec) -> Result<f64> {
    let mut l1 = 0.0f64;
    for &y in ys {
        for w in xs.windows(2) {
            let q = ((cost.try_value(w[1], y)? - cost.try_value(w[0], y)?) / (w[1] - w[0])).abs();
            l1 = l1.max(q);
        }
    }
    for &x in xs {
        for w in ys.windows(2) {
            let q = ((cost.try_value(x, w[1])? - cost.try_value(x, w[0])?) / (w[1] - w[0])).abs();
            l1 = l1.max(q);
        }
    }
    Ok(l1)
}

fn max_quotient(xs: &[f64], vs: &[f64]) -> f64 {
    xs.windows(2)
        .zip(vs.windows(2))
        .filter(|(x, _)| x[1] > x[0])
        .map(|(x, v)| ((v[1] - v[0]) / (x[1] - x[0])).abs())
        .fold(0.0, f64::max)
}

/// Integral sequence nu_n(g_n) across a refining family, with a
/// divergence flag: monotone decrease without Cauchy behaviour over the
/// last three levels.
#[derive(Debug, Clone)]
pub struct IntegrabilityProbe {
    pub values: Vec<f64>,
    pub diverging: bool,
}

pub fn integrability_probe(
    levels: &[(DiscreteMeasure, Vec<f64>, Vec<f64>)],
    conv_tol: f64,
) -> Result<IntegrabilityProbe> {
    let mut values = Vec::with_capacity(levels.len());
    for (nu, grid, g) in levels {
        if grid.len() != g.len() {
            return Err(MotError::DimensionMismatch(
                "integrability probe: grid/g length mismatch".into(),
            ));
        }
        let mut total = 0.0;
        for (&y, &w) in nu.positions().iter().zip(nu.weights()) {
            let k = crate::dual::grid_index(grid, y).ok_or_else(|| {
                MotError::BadParameters(format!("nu atom {y} off the probe grid"))
            })?;
            total += w * g[k];
        }
        values.push(total);
    }
    let monotone = values.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let cauchy = values.len() >= 3 && {
        let tail = &values[values.len() - 3..];
        let lo = tail.iter().fold(f64::INFINITY, |a, &v| a.min(v));
        let hi = tail.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v));
        hi - lo <= conv_tol
    };
    Ok(IntegrabilityProbe {
        values,
        diverging: monotone && !cauchy,
    })
}
