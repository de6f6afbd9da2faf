//! Parametric divergence families: truncated instances whose dual
//! behaviour degenerates as the truncation level grows.
//!
//! Four generators are provided, each turning a known failure mode of
//! dual attainment into a finite, testable instance family:
//!
//! * `gen_linear_growth` — quadratically growing cost on a half-line;
//!   the truncation profile of the normalized duals is unbounded below.
//! * `gen_local_convexity` — cost convex only near the diagonal; the
//!   dual slopes must drop by at least one per atom, so the glued g
//!   diverges logarithmically at the accumulation point.
//! * `gen_cr_cost` — c(x,y) = -|x-y|^r with 1 < r < 2 on a compact
//!   grid with gaps 1/n^s; the chord slopes b_n of the dual g drift at
//!   the polynomial rate n^(s-sr) and their weighted sum diverges.
//! * `gen_nonintegrable` — c = -|x-y| with a concave, non-integrable
//!   g = xi: the dual maximizer exists pointwise but nu(g) diverges
//!   under refinement.

use crate::config::Tolerances;
use crate::cost::CostSpec;
use crate::dual::{halfinfinite_normalize, ComponentTag, DualTriple, NormalizationVerdict, TruncationDual};
use crate::error::{MotError, Result};
use crate::measures::DiscreteMeasure;
use crate::numeric::linear_fit;
use crate::parallel::map_slice;
use crate::primal::{solve_primal, Coupling};

/// One truncation level of an infinite construction.
#[derive(Debug, Clone)]
pub struct TruncatedFamily {
    pub level: usize,
    pub mu: DiscreteMeasure,
    pub nu: DiscreteMeasure,
    pub cost: CostSpec,
    /// Designated x_n sequence actually materialized.
    pub x_grid: Vec<f64>,
    /// Designated y_n sequence actually materialized.
    pub y_grid: Vec<f64>,
}

// ---------------------------------------------------------------------
// quadratic growth on a half-line
// ---------------------------------------------------------------------

/// v_n(y) = y^2 for y >= n-1 and (n-1) y for y <= n-1, realized as a
/// grid cost with the gauge f(n) = h(n) = 0, so c(n, y) = v_n(y).
fn linear_growth_v(n: usize, y: f64) -> f64 {
    let a = (n - 1) as f64;
    if y >= a {
        y * y
    } else {
        a * y
    }
}

/// Atoms x_n = n for n = 1..N, each splitting half-half to n -1 and
/// n + 1; the probe point y = -1 is kept on the grid so the envelope
/// can be read off the left of the domain.
pub fn gen_linear_growth(n: usize) -> Result<TruncatedFamily> {
    if n < 2 {
        return Err(MotError::BadParameters(format!(
            "linear growth family needs N >= 2, got {n}"
        )));
    }
    let xs: Vec<f64> = (1..=n).map(|k| k as f64).collect();
    let w = 1.0 / n as f64;
    let mu = DiscreteMeasure::probability(xs.iter().map(|&x| (x, w)).collect(), 1e-12)?;
    let mut nu_atoms: Vec<(f64, f64)> = Vec::new();
    for &x in &xs {
        nu_atoms.push((x - 1.0, 0.5 * w));
        nu_atoms.push((x + 1.0, 0.5 * w));
    }
    let nu = DiscreteMeasure::probability(nu_atoms, 1e-12)?;

    let ys: Vec<f64> = std::iter::once(-1.0)
        .chain((0..=n + 1).map(|k| k as f64))
        .collect();
    let values: Vec<Vec<f64>> = (1..=n)
        .map(|row| ys.iter().map(|&y| linear_growth_v(row, y)).collect())
        .collect();
    let cost = CostSpec::grid(xs.clone(), ys.clone(), values)?;
    Ok(TruncatedFamily {
        level: n,
        mu,
        nu,
        cost,
        x_grid: xs,
        y_grid: ys,
    })
}

/// Runs the half-infinite truncation profile across levels with the
/// designated gauge f = h = 0, and reads the envelope at the probe
/// point y = -1 per level (it equals -(N-1)).
pub fn linear_growth_profile(
    levels: &[usize],
    tols: &Tolerances,
) -> Result<(NormalizationVerdict, Vec<f64>)> {
    let truncations: Vec<TruncationDual> = levels
        .iter()
        .map(|&n| {
            let fam = gen_linear_growth(n)?;
            Ok(TruncationDual {
                f: vec![0.0; fam.x_grid.len()],
                h: vec![0.0; fam.x_grid.len()],
                atoms: fam.x_grid,
                cost: fam.cost,
                grid: fam.y_grid,
                domain_left: 0.0,
            })
        })
        .collect::<Result<_>>()?;
    let verdict = halfinfinite_normalize(&truncations, tols)?;
    let probes: Vec<f64> = truncations
        .iter()
        .map(|t| {
            let probe = t.grid[0];
            crate::dual::envelope_g(&t.atoms, &t.f, &t.h, &t.cost, &[probe]).map(|v| v[0])
        })
        .collect::<Result<_>>()?;
    Ok((verdict, probes))
}

// ---------------------------------------------------------------------
// local-convexity grid (gap exponent s, plateau cost or power cost)
// ---------------------------------------------------------------------

fn gap_grid(n: usize, s: f64) -> (Vec<f64>, Vec<f64>) {
    let mut ys = Vec::with_capacity(n + 1);
    ys.push(0.0);
    for k in 1..=n {
        ys.push(ys[k - 1] + (k as f64).powf(-s));
    }
    let xs: Vec<f64> = (1..=n).map(|k| 0.5 * (ys[k - 1] + ys[k])).collect();
    (xs, ys)
}

/// Shared marginal construction for the gap families: each x_n splits
/// half-half onto its neighbouring y's; the accumulation atom is
/// represented by its level-N proxy at y_N, transported to itself.
fn gap_marginals(xs: &[f64], ys: &[f64]) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    let n = xs.len();
    let w = 1.0 / (n + 1) as f64;
    let mut mu_atoms: Vec<(f64, f64)> = xs.iter().map(|&x| (x, w)).collect();
    mu_atoms.push((ys[n], w)); // proxy for the accumulation point
    let mut nu_atoms: Vec<(f64, f64)> = Vec::new();
    for k in 1..=n {
        nu_atoms.push((ys[k - 1], 0.5 * w));
        nu_atoms.push((ys[k], 0.5 * w));
    }
    nu_atoms.push((ys[n], w));
    Ok((
        DiscreteMeasure::probability(mu_atoms, 1e-12)?,
        DiscreteMeasure::probability(nu_atoms, 1e-12)?,
    ))
}

/// Cost convex only on the plateau [y_{n-1}, y_n] of each atom:
/// zero there, decreasing linearly with slope +-1 outside; the
/// accumulation row has cost identically zero.
pub fn gen_local_convexity(n: usize) -> Result<TruncatedFamily> {
    if n < 2 {
        return Err(MotError::BadParameters(format!(
            "local-convexity family needs N >= 2, got {n}"
        )));
    }
    let (xs, ys) = gap_grid(n, 2.0);
    let (mu, nu) = gap_marginals(&xs, &ys)?;
    let mut cost_xs = xs.clone();
    cost_xs.push(ys[n]);
    let mut values: Vec<Vec<f64>> = (1..=n)
        .map(|row| {
            ys.iter()
                .map(|&y| {
                    if y <= ys[row - 1] {
                        y - ys[row - 1]
                    } else if y >= ys[row] {
                        ys[row] - y
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    values.push(vec![0.0; ys.len()]); // accumulation row
    let cost = CostSpec::grid(cost_xs, ys.clone(), values)?;
    Ok(TruncatedFamily {
        level: n,
        mu,
        nu,
        cost,
        x_grid: xs,
        y_grid: ys,
    })
}

/// LP-dual diagnostic for the local-convexity family.
#[derive(Debug, Clone)]
pub struct SlopeDecreaseDiagnostic {
    /// Dual h at the interior atoms x_1..x_N.
    pub h: Vec<f64>,
    /// h(x_n) - h(x_{n+1}) for interior n (must be >= 1 up to 1e-6).
    pub slope_gaps: Vec<f64>,
    /// Chord-normalized g(y_N): gauge fixed so g(y_0) = 0 and the first
    /// chord slope vanishes; diverges like -log N.
    pub statistic: f64,
}

pub fn local_convexity_diagnostic(
    n: usize,
    tols: &Tolerances,
) -> Result<SlopeDecreaseDiagnostic> {
    let fam = gen_local_convexity(n)?;
    diagnose_gap_family(&fam, tols)
}

fn diagnose_gap_family(fam: &TruncatedFamily, tols: &Tolerances) -> Result<SlopeDecreaseDiagnostic> {
    let sol = solve_primal(&fam.mu, &fam.nu, &fam.cost, tols)?;
    let n = fam.x_grid.len();
    // mu positions are sorted; interior atoms precede the proxy at y_N
    let h: Vec<f64> = sol.certificate.bary_duals[..n].iter().map(|r| -r).collect();
    let slope_gaps: Vec<f64> = h.windows(2).map(|w| w[0] - w[1]).collect();

    let g = chord_slopes(fam, &sol.certificate.col_duals)?;
    let (b, g_vals) = g;
    let b1 = b[0];
    let statistic = g_vals[g_vals.len() - 1]
        - g_vals[0]
        - b1 * (fam.y_grid[fam.y_grid.len() - 1] - fam.y_grid[0]);
    Ok(SlopeDecreaseDiagnostic {
        h,
        slope_gaps,
        statistic,
    })
}

/// Chord slopes b_n = (g(y_n) - g(y_{n-1})) / (y_n - y_{n-1}) of the
/// dual g along the designated grid, plus g at the grid points.
fn chord_slopes(fam: &TruncatedFamily, col_duals: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let g_vals: Vec<f64> = fam
        .y_grid
        .iter()
        .map(|&y| {
            crate::dual::grid_index(fam.nu.positions(), y)
                .map(|j| col_duals[j])
                .ok_or_else(|| MotError::BadParameters(format!("grid point {y} not a nu atom")))
        })
        .collect::<Result<_>>()?;
    let b: Vec<f64> = fam
        .y_grid
        .windows(2)
        .zip(g_vals.windows(2))
        .map(|(y, g)| (g[1] - g[0]) / (y[1] - y[0]))
        .collect();
    Ok((b, g_vals))
}

// ---------------------------------------------------------------------
// C^r power cost on the gap grid
// ---------------------------------------------------------------------

/// Power cost -|x-y|^r on the gap grid with exponent s; requires
/// 1 < r < 2, s > 1 and s r < 2.
pub fn gen_cr_cost(r: f64, s: f64, n: usize) -> Result<TruncatedFamily> {
    if !(r > 1.0 && r < 2.0) {
        return Err(MotError::BadParameters(format!(
            "exponent r must lie in ]1, 2[, got {r}"
        )));
    }
    if !(s > 1.0) {
        return Err(MotError::BadParameters(format!("s must exceed 1, got {s}")));
    }
    if !(s * r < 2.0) {
        return Err(MotError::BadParameters(format!(
            "need s*r < 2, got s*r = {}",
            s * r
        )));
    }
    if n < 4 {
        return Err(MotError::BadParameters(format!(
            "power-cost family needs N >= 4, got {n}"
        )));
    }
    let (xs, ys) = gap_grid(n, s);
    let (mu, nu) = gap_marginals(&xs, &ys)?;
    let cost = CostSpec::power(-1.0, r)?;
    Ok(TruncatedFamily {
        level: n,
        mu,
        nu,
        cost,
        x_grid: xs,
        y_grid: ys,
    })
}

#[derive(Debug, Clone)]
pub struct ChordSlopeDiagnostic {
    /// Chord slopes b_n of the dual g, gauge-fixed so b_1 = 0.
    pub b: Vec<f64>,
    /// Log-log regression slope of (b_n - b_{n+1}) against n.
    pub loglog_slope: f64,
    /// Gauge-fixed cumulative sum of (y_n - y_{n-1}) b_n.
    pub cumulative: f64,
}

pub fn cr_diagnostic(r: f64, s: f64, n: usize, tols: &Tolerances) -> Result<ChordSlopeDiagnostic> {
    let fam = gen_cr_cost(r, s, n)?;
    let sol = solve_primal(&fam.mu, &fam.nu, &fam.cost, tols)?;
    let (b_raw, _) = chord_slopes(&fam, &sol.certificate.col_duals)?;
    let b1 = b_raw[0];
    let b: Vec<f64> = b_raw.iter().map(|v| v - b1).collect();

    // drops b_n - b_{n+1} ~ C n^(s - sr); regress on interior indices
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for k in 1..b.len().saturating_sub(2) {
        let drop = b[k - 1] - b[k];
        if drop > 0.0 {
            lx.push(((k + 1) as f64).ln()); // drop between b_{k} and b_{k+1} in 1-based terms
            ly.push(drop.ln());
        }
    }
    if lx.len() < 4 {
        return Err(MotError::BadParameters(
            "too few positive slope drops for regression".into(),
        ));
    }
    let (slope, _) = linear_fit(&lx, &ly);

    let cumulative: f64 = fam
        .y_grid
        .windows(2)
        .zip(&b)
        .map(|(y, &bn)| (y[1] - y[0]) * bn)
        .sum();
    Ok(ChordSlopeDiagnostic {
        b,
        loglog_slope: slope,
        cumulative,
    })
}

// ---------------------------------------------------------------------
// non-integrable dual: c = -|x-y|, g = xi
// ---------------------------------------------------------------------

/// The fixed concave profile xi(x) = 4 - 1/x - 1/(1-x) on ]0, 1[:
/// xi <= 0, xi(1/2) = 0, blows down at both endpoints and its uniform
/// average diverges.
pub fn xi(x: f64) -> f64 {
    4.0 - 1.0 / x - 1.0 / (1.0 - x)
}

fn xi_prime(y: f64) -> f64 {
    1.0 / (y * y) - 1.0 / ((1.0 - y) * (1.0 - y))
}

/// Inverse of the strictly decreasing xi' on ]0, 1[ by bisection.
fn inv_xi_prime(m: f64) -> f64 {
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if xi_prime(mid) > m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Value at `x` of the tangent line to xi with slope `m`.
fn tangent_at(m: f64, x: f64) -> f64 {
    let ym = inv_xi_prime(m);
    xi(ym) + m * (x - ym)
}

/// Tangency data of one atom: the tent v_x(y) = f + h (y-x) - |x-y|
/// (slopes h+1 left of x, h-1 right of x) is tangent to xi at
/// y_minus < x < y_plus.
#[derive(Debug, Clone, Copy)]
pub struct Tangency {
    pub f: f64,
    pub h: f64,
    pub y_minus: f64,
    pub y_plus: f64,
}

/// Solves the two-point tangency system for a single atom by bisection
/// in h: the left and right tangent values at x must agree.
pub fn solve_tangency(x: f64) -> Result<Tangency> {
    if !(x > 0.0 && x < 1.0) {
        return Err(MotError::RootFindFailed { x });
    }
    let centre = xi_prime(x);
    let (mut lo, mut hi) = (centre - 1.0 + 1e-9, centre + 1.0 - 1e-9);
    // phi(h) = left tangent value - right tangent value, increasing in h
    let phi = |h: f64| tangent_at(h + 1.0, x) - tangent_at(h - 1.0, x);
    if !(phi(lo) < 0.0 && phi(hi) > 0.0) {
        return Err(MotError::RootFindFailed { x });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let h = 0.5 * (lo + hi);
    let y_minus = inv_xi_prime(h + 1.0);
    let y_plus = inv_xi_prime(h - 1.0);
    if !(y_minus < x && x < y_plus) {
        return Err(MotError::RootFindFailed { x });
    }
    Ok(Tangency {
        f: tangent_at(h + 1.0, x),
        h,
        y_minus,
        y_plus,
    })
}

/// The generated instance, its martingale coupling, and the explicit
/// dual triple with g = xi on the nu grid.
#[derive(Debug, Clone)]
pub struct NonintegrableInstance {
    pub mu: DiscreteMeasure,
    pub nu: DiscreteMeasure,
    pub cost: CostSpec,
    pub coupling: Coupling,
    pub triple: DualTriple,
    /// nu(g) at this level; decreases like -log K under refinement.
    pub nu_g: f64,
}

/// mu uniform on the K midpoints of [0, 1]; each atom disintegrates
/// onto its two tangency points with the martingale weights, and
/// g = xi is an exact pointwise dual maximizer for c = -|x-y| whose
/// nu-integral diverges as K grows.
pub fn gen_nonintegrable(k: usize) -> Result<NonintegrableInstance> {
    if k < 8 {
        return Err(MotError::BadParameters(format!(
            "nonintegrable family needs K >= 8, got {k}"
        )));
    }
    let w = 1.0 / k as f64;
    let xs: Vec<f64> = (0..k).map(|i| (i as f64 + 0.5) / k as f64).collect();
    let tangencies: Vec<Result<Tangency>> = map_slice(&xs, |&x| solve_tangency(x));
    let tangencies: Vec<Tangency> = tangencies.into_iter().collect::<Result<_>>()?;

    let mu = DiscreteMeasure::probability(xs.iter().map(|&x| (x, w)).collect(), 1e-12)?;
    let mut nu_atoms: Vec<(f64, f64)> = Vec::new();
    for (t, &x) in tangencies.iter().zip(&xs) {
        let span = t.y_plus - t.y_minus;
        nu_atoms.push((t.y_minus, w * (t.y_plus - x) / span));
        nu_atoms.push((t.y_plus, w * (x - t.y_minus) / span));
    }
    let nu = DiscreteMeasure::probability(nu_atoms, 1e-9)?;
    let cost = CostSpec::power(-1.0, 1.0)?;

    let mut pi = vec![vec![0.0; nu.len()]; k];
    for (i, t) in tangencies.iter().enumerate() {
        let span = t.y_plus - t.y_minus;
        let jm = crate::dual::grid_index(nu.positions(), t.y_minus)
            .ok_or(MotError::RootFindFailed { x: xs[i] })?;
        let jp = crate::dual::grid_index(nu.positions(), t.y_plus)
            .ok_or(MotError::RootFindFailed { x: xs[i] })?;
        pi[i][jm] += w * (t.y_plus - xs[i]) / span;
        pi[i][jp] += w * (xs[i] - t.y_minus) / span;
    }
    let mut coupling = Coupling {
        row_positions: mu.positions().to_vec(),
        col_positions: nu.positions().to_vec(),
        pi,
        value: 0.0,
    };
    coupling.value = coupling.expectation(&cost)?;

    let grid = nu.positions().to_vec();
    let g: Vec<f64> = grid.iter().map(|&y| xi(y)).collect();
    let nu_g = nu.integrate(&g);
    let triple = DualTriple {
        atoms: xs,
        f: tangencies.iter().map(|t| t.f).collect(),
        h: tangencies.iter().map(|t| t.h).collect(),
        grid,
        g,
        component_tag: vec![ComponentTag::Component(0); k],
        normalization: Vec::new(),
    };
    Ok(NonintegrableInstance {
        mu,
        nu,
        cost,
        coupling,
        triple,
        nu_g,
    })
}
