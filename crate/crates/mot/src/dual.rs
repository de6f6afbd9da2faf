//! Pointwise dual maximizers: recovery from LP multipliers, the lower
//! envelope, affine normalization per component, the half-infinite
//! truncation profile, and cross-component gluing.
//!
//! A triple (f, g, h) is admissible when
//!     g(y) - f(x) - h(x)(y - x) <= c(x,y)  for all x, y,
//! with equality on the support of every optimal martingale coupling.
//! On a finite instance the LP multipliers of the marginal and
//! barycenter constraints deliver such a triple exactly, and the
//! normalization below reshapes g per irreducible component so that the
//! component triples can be glued into a global maximizer.

use crate::config::Tolerances;
use crate::cost::CostSpec;
use crate::decomposition::ComponentDecomposition;
use crate::error::{MotError, Result};
use crate::measures::{DiscreteMeasure, Interval};
use crate::parallel::map_slice;
use crate::primal::{Coupling, PrimalSolution};

const GRID_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentTag {
    Component(usize),
    Diagonal,
}

/// Affine gauge record subtracted from g during normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub slope: f64,
    pub intercept: f64,
}

impl Affine {
    pub fn zero() -> Self {
        Affine {
            slope: 0.0,
            intercept: 0.0,
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.intercept + self.slope * y
    }
}

/// Dual triple evaluated over supp(mu) and a y-grid containing supp(nu).
#[derive(Debug, Clone)]
pub struct DualTriple {
    pub atoms: Vec<f64>,
    pub f: Vec<f64>,
    pub h: Vec<f64>,
    pub grid: Vec<f64>,
    pub g: Vec<f64>,
    pub component_tag: Vec<ComponentTag>,
    /// Per-component affine normalization actually applied.
    pub normalization: Vec<Affine>,
}

impl DualTriple {
    pub fn g_at(&self, y: f64) -> Option<f64> {
        grid_index(&self.grid, y).map(|j| self.g[j])
    }

    pub fn atom_index(&self, x: f64) -> Option<usize> {
        grid_index(&self.atoms, x)
    }

    /// Applies the affine gauge (g - L, f - L(x), h - slope) in place.
    pub fn apply_gauge(&mut self, gauge: &Affine) {
        for (g, &y) in self.g.iter_mut().zip(&self.grid) {
            *g -= gauge.eval(y);
        }
        for (f, &x) in self.f.iter_mut().zip(&self.atoms) {
            *f -= gauge.eval(x);
        }
        for h in self.h.iter_mut() {
            *h -= gauge.slope;
        }
    }
}

pub fn grid_index(grid: &[f64], v: f64) -> Option<usize> {
    let p = grid.partition_point(|&s| s < v - GRID_MATCH_TOL);
    (p < grid.len() && (grid[p] - v).abs() <= GRID_MATCH_TOL).then_some(p)
}

/// Evaluation grid G_y: supp(nu), supp(mu), component endpoints, plus
/// optional uniform refinement between adjacent points (parametric
/// costs only). Points a grid cost cannot evaluate are dropped.
pub fn evaluation_grid(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    endpoints: &[f64],
    cost: &CostSpec,
    tols: &Tolerances,
) -> Vec<f64> {
    let mut grid: Vec<f64> = nu
        .positions()
        .iter()
        .chain(mu.positions())
        .chain(endpoints)
        .copied()
        .filter(|&y| cost.supports_y(y))
        .collect();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|a, b| (*a - *b).abs() <= GRID_MATCH_TOL);
    if tols.grid_refine > 0 && cost.is_parametric() {
        let mut refined = Vec::with_capacity(grid.len() * (tols.grid_refine + 1));
        for w in grid.windows(2) {
            refined.push(w[0]);
            for k in 1..=tols.grid_refine {
                refined.push(w[0] + (w[1] - w[0]) * k as f64 / (tols.grid_refine + 1) as f64);
            }
        }
        refined.extend(grid.last().copied());
        grid = refined;
    }
    grid
}

/// Lower envelope induced by (f, h):
/// g~(y) = min_x ( f(x) + h(x)(y - x) + c(x,y) ).
pub fn envelope_g(
    atoms: &[f64],
    f: &[f64],
    h: &[f64],
    cost: &CostSpec,
    grid: &[f64],
) -> Result<Vec<f64>> {
    assert_eq!(atoms.len(), f.len());
    assert_eq!(atoms.len(), h.len());
    if atoms.is_empty() {
        return Err(MotError::BadParameters("envelope over empty atom set".into()));
    }
    let values: Vec<Result<f64>> = map_slice(grid, |&y| {
        let mut best = f64::INFINITY;
        for (i, &x) in atoms.iter().enumerate() {
            let v = f[i] + h[i] * (y - x) + cost.try_value(x, y)?;
            if v < best {
                best = v;
            }
        }
        Ok(best)
    });
    values.into_iter().collect()
}

/// Extracts the raw dual triple from a component's LP certificate.
///
/// f and h are the negated multipliers of the row-marginal and
/// barycenter constraints; g takes the column multipliers on supp(nu)
/// and the envelope value elsewhere on the grid. Complementary
/// slackness is verified on the optimal support.
pub fn recover_component_dual(
    mu_k: &DiscreteMeasure,
    nu_k: &DiscreteMeasure,
    solution: &PrimalSolution,
    cost: &CostSpec,
    grid: &[f64],
    tols: &Tolerances,
) -> Result<DualTriple> {
    let cert = &solution.certificate;
    let atoms = mu_k.positions().to_vec();
    let f: Vec<f64> = cert.row_duals.iter().map(|p| -p).collect();
    let h: Vec<f64> = cert.bary_duals.iter().map(|r| -r).collect();

    // slackness on the optimal support
    for (i, j) in solution.coupling.support(tols.supp_tol) {
        let (x, y) = (atoms[i], nu_k.positions()[j]);
        let lhs = cert.col_duals[j] - f[i] - h[i] * (y - x);
        let residual = (lhs - cost.try_value(x, y)?).abs();
        if residual > tols.eq_tol {
            return Err(MotError::SlacknessViolated { i, j, residual });
        }
    }

    let env = envelope_g(&atoms, &f, &h, cost, grid)?;
    let g: Vec<f64> = grid
        .iter()
        .zip(&env)
        .map(|(&y, &e)| match grid_index(nu_k.positions(), y) {
            Some(j) => cert.col_duals[j],
            None => e,
        })
        .collect();

    let n = atoms.len();
    Ok(DualTriple {
        atoms,
        f,
        h,
        grid: grid.to_vec(),
        g,
        component_tag: vec![ComponentTag::Component(0); n],
        normalization: Vec::new(),
    })
}

/// Failure record of the post-normalization sign pattern. Expected on
/// costs that are not (semi)convex in y; reported, never panicked.
#[derive(Debug, Clone, Copy)]
pub struct ShapeViolation {
    /// max g over grid points strictly inside the component.
    pub max_inside: f64,
    /// min g over grid points outside the closed component.
    pub min_outside: f64,
    /// max |g| over endpoint atoms carrying nu-mass.
    pub endpoint_dev: f64,
    pub worst_point: f64,
}

/// Subtracts the chord of the envelope through the component endpoints
/// and checks the sign pattern: g <= 0 inside, g >= 0 outside, g = 0 at
/// endpoint atoms with nu-mass.
pub fn normalize_component(
    raw: &DualTriple,
    interval: &Interval,
    nu_k: &DiscreteMeasure,
    cost: &CostSpec,
    tols: &Tolerances,
) -> Result<(DualTriple, Option<ShapeViolation>)> {
    let (a, b) = (interval.lo, interval.hi);
    let env = envelope_g(&raw.atoms, &raw.f, &raw.h, cost, &raw.grid)?;
    let ga = grid_index(&raw.grid, a)
        .map(|j| env[j])
        .ok_or_else(|| MotError::BadParameters(format!("endpoint {a} not on grid")))?;
    let gb = grid_index(&raw.grid, b)
        .map(|j| env[j])
        .ok_or_else(|| MotError::BadParameters(format!("endpoint {b} not on grid")))?;
    let slope = (gb - ga) / (b - a);
    let gauge = Affine {
        slope,
        intercept: ga - slope * a,
    };

    let mut out = raw.clone();
    out.g = env;
    out.apply_gauge(&gauge);
    out.normalization = vec![gauge];

    // sign pattern at grid level
    let mut max_inside = f64::NEG_INFINITY;
    let mut min_outside = f64::INFINITY;
    let mut worst_point = a;
    for (&y, &g) in out.grid.iter().zip(&out.g) {
        if interval.interior_contains(y) {
            if g > max_inside {
                max_inside = g;
                if g > tols.viol_tol {
                    worst_point = y;
                }
            }
        } else if y < a || y > b {
            if g < min_outside {
                min_outside = g;
                if g < -tols.viol_tol {
                    worst_point = y;
                }
            }
        }
    }
    let mut endpoint_dev = 0.0f64;
    for &e in &[a, b] {
        if nu_k.weight_at(e) > 0.0 {
            if let Some(j) = grid_index(&out.grid, e) {
                endpoint_dev = endpoint_dev.max(out.g[j].abs());
            }
        }
    }
    let ok = max_inside <= tols.viol_tol
        && min_outside >= -tols.viol_tol
        && endpoint_dev <= tols.viol_tol;
    let violation = (!ok).then_some(ShapeViolation {
        max_inside: if max_inside.is_finite() { max_inside } else { 0.0 },
        min_outside: if min_outside.is_finite() { min_outside } else { 0.0 },
        endpoint_dev,
        worst_point,
    });
    Ok((out, violation))
}

/// One truncation level fed to the half-infinite profile.
#[derive(Debug, Clone)]
pub struct TruncationDual {
    pub atoms: Vec<f64>,
    pub f: Vec<f64>,
    pub h: Vec<f64>,
    pub cost: CostSpec,
    pub grid: Vec<f64>,
    /// Left endpoint of the half-infinite domain.
    pub domain_left: f64,
}

#[derive(Debug, Clone)]
pub struct NormalizationVerdict {
    pub converged: bool,
    /// Limit constant when converged (last profile value).
    pub limit: f64,
    /// Gauge-fixed envelope at the left probe, per truncation level.
    pub profile: Vec<f64>,
}

/// Monotone truncation profile for half-infinite components.
///
/// Each level is gauge-fixed so that the reference line v_{x1} has zero
/// value at the domain's left endpoint and zero slope over a fixed tail
/// window (taken from the first level, where linear growth would pin
/// the asymptotic slope). The profile records the gauge-fixed envelope
/// at the leftmost grid point; convergence means the last three levels
/// are within `conv_tol` of each other.
pub fn halfinfinite_normalize(
    truncations: &[TruncationDual],
    tols: &Tolerances,
) -> Result<NormalizationVerdict> {
    if truncations.is_empty() {
        return Err(MotError::BadParameters("no truncations supplied".into()));
    }
    let first = &truncations[0];
    let x1 = *first
        .atoms
        .first()
        .ok_or_else(|| MotError::BadParameters("truncation with no atoms".into()))?;
    let ng = first.grid.len();
    if ng < 2 {
        return Err(MotError::BadParameters("grid too small for tail window".into()));
    }
    let window = (first.grid[ng - 2], first.grid[ng - 1]);

    let mut profile = Vec::with_capacity(truncations.len());
    for level in truncations {
        let i1 = grid_index(&level.atoms, x1).ok_or_else(|| {
            MotError::BadParameters(format!("reference atom {x1} missing at a truncation level"))
        })?;
        let v1 = |y: f64| -> Result<f64> {
            Ok(level.f[i1] + level.h[i1] * (y - x1) + level.cost.try_value(x1, y)?)
        };
        let beta = (v1(window.1)? - v1(window.0)?) / (window.1 - window.0);
        let gauge = Affine {
            slope: beta,
            intercept: v1(level.domain_left)? - beta * level.domain_left,
        };
        let f_fixed: Vec<f64> = level
            .f
            .iter()
            .zip(&level.atoms)
            .map(|(f, &x)| f - gauge.eval(x))
            .collect();
        let h_fixed: Vec<f64> = level.h.iter().map(|h| h - beta).collect();
        let probe = *level
            .grid
            .first()
            .ok_or_else(|| MotError::BadParameters("truncation with empty grid".into()))?;
        let env = envelope_g(&level.atoms, &f_fixed, &h_fixed, &level.cost, &[probe])?;
        profile.push(env[0]);
    }

    let converged = profile.len() >= 3 && {
        let tail = &profile[profile.len() - 3..];
        let lo = tail.iter().fold(f64::INFINITY, |a, &v| a.min(v));
        let hi = tail.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v));
        hi - lo <= tols.conv_tol
    };
    Ok(NormalizationVerdict {
        converged,
        limit: *profile.last().unwrap(),
        profile,
    })
}

/// Worst cross-component equality failure at a support pair.
#[derive(Debug, Clone, Copy)]
pub struct GlueViolation {
    pub x: f64,
    pub y: f64,
    pub residual: f64,
}

/// Glues normalized component triples and the diagonal part into a
/// global triple: f and h are piecewise by component, g is the minimum
/// of the component envelopes (all evaluated on the full grid) and the
/// diagonal envelope.
///
/// `component_supports` lists, per component, the (x, y) pairs carrying
/// optimal mass; the glue is compatible when equality still holds there
/// after taking the global minimum.
pub fn glue(
    decomp: &ComponentDecomposition,
    triples: &[DualTriple],
    cost: &CostSpec,
    grid: &[f64],
    component_supports: &[Vec<(f64, f64)>],
    tols: &Tolerances,
) -> Result<(DualTriple, Option<GlueViolation>)> {
    assert_eq!(triples.len(), decomp.components.len());

    let mut atoms: Vec<f64> = Vec::new();
    let mut f = Vec::new();
    let mut h = Vec::new();
    let mut tags = Vec::new();
    let mut normalization = vec![Affine::zero(); decomp.components.len()];

    for (k, (comp, triple)) in decomp.components.iter().zip(triples).enumerate() {
        for (i, &x) in triple.atoms.iter().enumerate() {
            atoms.push(x);
            f.push(triple.f[i]);
            h.push(triple.h[i]);
            tags.push(ComponentTag::Component(k));
        }
        if let Some(gauge) = triple.normalization.first() {
            normalization[k] = *gauge;
        }
        let _ = comp;
    }
    let scale = grid
        .iter()
        .fold(0.0f64, |a, y| a.max(y.abs()))
        .max(1.0);
    for &x in decomp.diagonal.positions() {
        atoms.push(x);
        f.push(-cost.try_value(x, x)?);
        h.push(cost.y_slope_mid(x, x, scale));
        tags.push(ComponentTag::Diagonal);
    }
    if atoms.is_empty() {
        return Err(MotError::BadParameters("glue over empty decomposition".into()));
    }

    // global envelope over every contributing line
    let g = envelope_g(&atoms, &f, &h, cost, grid)?;

    // sort atoms (components are disjoint but diagonal atoms interleave)
    let mut order: Vec<usize> = (0..atoms.len()).collect();
    order.sort_by(|&i, &j| atoms[i].partial_cmp(&atoms[j]).unwrap());
    let triple = DualTriple {
        atoms: order.iter().map(|&i| atoms[i]).collect(),
        f: order.iter().map(|&i| f[i]).collect(),
        h: order.iter().map(|&i| h[i]).collect(),
        grid: grid.to_vec(),
        g,
        component_tag: order.iter().map(|&i| tags[i]).collect(),
        normalization,
    };

    // compatibility: equality must survive the global minimum on every
    // component support pair and on the diagonal
    let mut worst: Option<GlueViolation> = None;
    let mut check = |x: f64, y: f64| -> Result<()> {
        let i = triple
            .atom_index(x)
            .ok_or_else(|| MotError::BadParameters(format!("support atom {x} missing")))?;
        let gy = triple
            .g_at(y)
            .ok_or_else(|| MotError::BadParameters(format!("support point {y} off grid")))?;
        let v = triple.f[i] + triple.h[i] * (y - x) + cost.try_value(x, y)?;
        let residual = v - gy; // >= 0 by construction
        if residual > tols.viol_tol && worst.map_or(true, |w| residual > w.residual) {
            worst = Some(GlueViolation { x, y, residual });
        }
        Ok(())
    };
    for pairs in component_supports {
        for &(x, y) in pairs {
            check(x, y)?;
        }
    }
    for &x in decomp.diagonal.positions() {
        check(x, x)?;
    }
    Ok((triple, worst))
}

/// Exhaustive duality report.
#[derive(Debug, Clone, Copy)]
pub struct DualityReport {
    /// max over supp(mu) x grid of g(y) - f(x) - h(x)(y-x) - c(x,y).
    pub max_ineq_violation: f64,
    /// max |equality residual| over the coupling's support.
    pub max_support_residual: f64,
    /// | (nu(g) - mu(f)) - coupling value |.
    pub gap: f64,
}

pub fn verify_duality(
    triple: &DualTriple,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &CostSpec,
    coupling: &Coupling,
    tols: &Tolerances,
) -> Result<DualityReport> {
    let rows: Vec<(f64, f64, f64)> = mu
        .positions()
        .iter()
        .map(|&x| {
            let i = triple
                .atom_index(x)
                .ok_or_else(|| MotError::BadParameters(format!("mu atom {x} missing from triple")))?;
            Ok((x, triple.f[i], triple.h[i]))
        })
        .collect::<Result<_>>()?;

    let per_row: Vec<Result<f64>> = map_slice(&rows, |&(x, fx, hx)| {
        let mut worst = f64::NEG_INFINITY;
        for (&y, &gy) in triple.grid.iter().zip(&triple.g) {
            let lhs = gy - fx - hx * (y - x);
            let v = lhs - cost.try_value(x, y)?;
            if v > worst {
                worst = v;
            }
        }
        Ok(worst)
    });
    let mut max_ineq = f64::NEG_INFINITY;
    for r in per_row {
        max_ineq = max_ineq.max(r?);
    }

    let mut max_support = 0.0f64;
    for (i, j) in coupling.support(tols.supp_tol) {
        let (x, y) = (coupling.row_positions[i], coupling.col_positions[j]);
        let ai = triple
            .atom_index(x)
            .ok_or_else(|| MotError::BadParameters(format!("support atom {x} missing")))?;
        let gy = triple
            .g_at(y)
            .ok_or_else(|| MotError::BadParameters(format!("support point {y} off grid")))?;
        let lhs = gy - triple.f[ai] - triple.h[ai] * (y - x);
        max_support = max_support.max((lhs - cost.try_value(x, y)?).abs());
    }

    let nu_g = nu
        .positions()
        .iter()
        .zip(nu.weights())
        .map(|(&y, &w)| {
            triple
                .g_at(y)
                .map(|g| w * g)
                .ok_or_else(|| MotError::BadParameters(format!("nu atom {y} off grid")))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mu_f = mu
        .positions()
        .iter()
        .zip(mu.weights())
        .map(|(&x, &w)| {
            triple
                .atom_index(x)
                .map(|i| w * triple.f[i])
                .ok_or_else(|| MotError::BadParameters(format!("mu atom {x} missing")))
        })
        .collect::<Result<Vec<f64>>>()?;
    let dual_value =
        crate::numeric::kahan_sum(nu_g) - crate::numeric::kahan_sum(mu_f);
    Ok(DualityReport {
        max_ineq_violation: max_ineq,
        max_support_residual: max_support,
        gap: (dual_value - coupling.value).abs(),
    })
}

/// All (i, j) over supp(mu) x supp(nu) within `eq_tol` of equality.
pub fn contact_set(
    triple: &DualTriple,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &CostSpec,
    eq_tol: f64,
) -> Result<Vec<(usize, usize)>> {
    let mut pairs = Vec::new();
    for (i, &x) in mu.positions().iter().enumerate() {
        let ai = triple
            .atom_index(x)
            .ok_or_else(|| MotError::BadParameters(format!("mu atom {x} missing")))?;
        for (j, &y) in nu.positions().iter().enumerate() {
            let gy = triple
                .g_at(y)
                .ok_or_else(|| MotError::BadParameters(format!("nu atom {y} off grid")))?;
            let lhs = gy - triple.f[ai] - triple.h[ai] * (y - x);
            if (lhs - cost.try_value(x, y)?).abs() <= eq_tol {
                pairs.push((i, j));
            }
        }
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primal::solve_primal;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    fn canonical() -> (DiscreteMeasure, DiscreteMeasure, CostSpec) {
        let mu = DiscreteMeasure::dirac(0.0);
        let nu = DiscreteMeasure::probability(vec![(-1.0, 0.5), (1.0, 0.5)], 1e-12).unwrap();
        (mu, nu, CostSpec::squared())
    }

    #[test]
    fn envelope_single_atom_is_the_line() {
        let c = CostSpec::abs_distance();
        let grid = vec![-1.0, 0.0, 2.0];
        let env = envelope_g(&[0.5], &[1.0], &[2.0], &c, &grid).unwrap();
        for (k, &y) in grid.iter().enumerate() {
            let expect = 1.0 + 2.0 * (y - 0.5) + (0.5 - y).abs();
            assert_eq!(env[k], expect);
        }
    }

    #[test]
    fn recovered_triple_closes_duality_gap() {
        let (mu, nu, c) = canonical();
        let sol = solve_primal(&mu, &nu, &c, &tols()).unwrap();
        let grid = evaluation_grid(&mu, &nu, &[], &c, &tols());
        let raw = recover_component_dual(&mu, &nu, &sol, &c, &grid, &tols()).unwrap();
        let report = verify_duality(&raw, &mu, &nu, &c, &sol.coupling, &tols()).unwrap();
        assert!(report.gap <= 1e-10, "gap = {}", report.gap);
        assert!(report.max_ineq_violation <= 1e-10);
        assert!(report.max_support_residual <= 1e-10);
    }

    #[test]
    fn normalization_is_idempotent_and_recovers_injected_affine() {
        let (mu, nu, c) = canonical();
        let sol = solve_primal(&mu, &nu, &c, &tols()).unwrap();
        let grid = evaluation_grid(&mu, &nu, &[], &c, &tols());
        let raw = recover_component_dual(&mu, &nu, &sol, &c, &grid, &tols()).unwrap();
        let iv = Interval::open(-1.0, 1.0);
        let (norm, viol) = normalize_component(&raw, &iv, &nu, &c, &tols()).unwrap();
        assert!(viol.is_none());
        assert!(norm.g_at(-1.0).unwrap().abs() < 1e-12);
        assert!(norm.g_at(1.0).unwrap().abs() < 1e-12);

        // shift g by y + 2: normalization must recover the injected affine
        let mut shifted = raw.clone();
        let inject = Affine {
            slope: -1.0,
            intercept: -2.0,
        };
        shifted.apply_gauge(&inject); // g += y + 2 via the negated gauge
        let (norm2, viol2) = normalize_component(&shifted, &iv, &nu, &c, &tols()).unwrap();
        assert!(viol2.is_none());
        let total = norm2.normalization[0];
        // the recovered chord undoes the injection relative to the first run
        let base = norm.normalization[0];
        assert!((total.slope - (base.slope + 1.0)).abs() < 1e-9);
        assert!((total.intercept - (base.intercept + 2.0)).abs() < 1e-9);
        for (a, b) in norm.g.iter().zip(&norm2.g) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn gauge_invariance_of_residuals() {
        let (mu, nu, c) = canonical();
        let sol = solve_primal(&mu, &nu, &c, &tols()).unwrap();
        let grid = evaluation_grid(&mu, &nu, &[], &c, &tols());
        let mut triple = recover_component_dual(&mu, &nu, &sol, &c, &grid, &tols()).unwrap();
        let before = verify_duality(&triple, &mu, &nu, &c, &sol.coupling, &tols()).unwrap();
        triple.apply_gauge(&Affine {
            slope: 0.7,
            intercept: -3.2,
        });
        let after = verify_duality(&triple, &mu, &nu, &c, &sol.coupling, &tols()).unwrap();
        assert!((before.max_ineq_violation - after.max_ineq_violation).abs() < 1e-9);
        assert!((before.max_support_residual - after.max_support_residual).abs() < 1e-9);
        assert!((before.gap - after.gap).abs() < 1e-9);
    }

    #[test]
    fn corrupted_g_is_flagged() {
        let (mu, nu, c) = canonical();
        let sol = solve_primal(&mu, &nu, &c, &tols()).unwrap();
        let grid = evaluation_grid(&mu, &nu, &[], &c, &tols());
        let mut triple = recover_component_dual(&mu, &nu, &sol, &c, &grid, &tols()).unwrap();
        let j = grid_index(&triple.grid, 1.0).unwrap();
        triple.g[j] += 1.0;
        let report = verify_duality(&triple, &mu, &nu, &c, &sol.coupling, &tols()).unwrap();
        assert!(report.max_ineq_violation >= 1.0 - 1e-9);
    }

    #[test]
    fn contact_set_of_canonical_instance() {
        let (mu, nu, c) = canonical();
        let sol = solve_primal(&mu, &nu, &c, &tols()).unwrap();
        let grid = evaluation_grid(&mu, &nu, &[], &c, &tols());
        let triple = recover_component_dual(&mu, &nu, &sol, &c, &grid, &tols()).unwrap();
        let pairs = contact_set(&triple, &mu, &nu, &c, tols().eq_tol).unwrap();
        assert_eq!(pairs, vec![(0, 0), (0, 1)]);
    }
}
