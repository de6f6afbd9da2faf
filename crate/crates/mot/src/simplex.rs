//! Dense two-phase simplex over a generic ordered field.
//!
//! Instances here are small (at most a few hundred constraints), so a
//! full tableau with Dantzig pricing is the right trade: it is exact up
//! to rounding, yields dual multipliers for free, and runs identically
//! over `f64` and `BigRational`. Bland's rule takes over after a run of
//! degenerate pivots.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Scalar requirements for the tableau arithmetic.
pub trait LpScalar: Clone + PartialOrd + Zero + One + Signed + ToPrimitive {
    fn from_f64(v: f64) -> Self;
}

impl LpScalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
}

impl LpScalar for BigRational {
    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).unwrap_or_else(|| BigRational::from(BigInt::from(0)))
    }
}

/// Equality-form LP: minimize c'x subject to Ax = b, x >= 0.
pub struct LpProblem<T> {
    pub constraints: Vec<Vec<T>>,
    pub rhs: Vec<T>,
    pub objective: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct LpSolution<T> {
    pub x: Vec<T>,
    pub objective: T,
    /// One multiplier per constraint row (for the original row signs).
    pub duals: Vec<T>,
    /// Reduced costs of the structural variables at the optimum.
    pub reduced_costs: Vec<T>,
    pub basis: Vec<usize>,
}

#[derive(Debug, Clone)]
pub enum LpOutcome<T> {
    Optimal(LpSolution<T>),
    Infeasible { residual: f64 },
    Unbounded,
}

/// Consecutive degenerate Dantzig pivots before switching to Bland.
const DEGENERATE_PIVOT_LIMIT: usize = 50;

/// Degenerate pivots under Bland before the entering tolerance is
/// relaxed. In exact arithmetic Bland terminates on its own; in floating
/// point a stall this long means the remaining negative reduced costs
/// are rounding noise, so widening the tolerance is the honest exit.
const STALL_ESCAPE_LIMIT: usize = 2000;

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    obj: Vec<T>,
    basis: Vec<usize>,
    nvars: usize,
    nrows: usize,
    eps: T,
    /// Multiplier on `eps` for the entering test; grows on hard stalls.
    relax: T,
    /// Pristine copy of the initial tableau body (constraints, artificial
    /// identity, rhs) used to rebuild the working tableau from the
    /// current basis when floating-point error accumulates.
    rows0: Vec<Vec<T>>,
    /// Cost per column (structural then artificial) for the current
    /// phase, used to restore the reduced-cost row on refactorization.
    phase_cost: Vec<T>,
    degenerate_run: usize,
}

impl<T: LpScalar> Tableau<T> {
    fn rhs_col(&self) -> usize {
        self.nvars + self.nrows
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            *v = v.clone() / piv.clone();
        }
        for r in 0..self.nrows {
            if r == row {
                continue;
            }
            let factor = self.rows[r][col].clone();
            if factor.is_zero() {
                continue;
            }
            for j in 0..self.rows[r].len() {
                let delta = factor.clone() * self.rows[row][j].clone();
                self.rows[r][j] = self.rows[r][j].clone() - delta;
            }
        }
        let factor = self.obj[col].clone();
        if !factor.is_zero() {
            for j in 0..self.obj.len() {
                let delta = factor.clone() * self.rows[row][j].clone();
                self.obj[j] = self.obj[j].clone() - delta;
            }
        }
        self.basis[row] = col;
    }

    /// Entering column among `allowed`, or None at optimality.
    fn entering(&self, allowed: usize, bland: bool) -> Option<usize> {
        let threshold = -(self.eps.clone() * self.relax.clone());
        if bland {
            (0..allowed).find(|&j| self.obj[j] < threshold)
        } else {
            let mut best: Option<(usize, T)> = None;
            for j in 0..allowed {
                if self.obj[j] < threshold {
                    match &best {
                        Some((_, v)) if self.obj[j] >= *v => {}
                        _ => best = Some((j, self.obj[j].clone())),
                    }
                }
            }
            best.map(|(j, _)| j)
        }
    }

    /// Leaving row by the ratio test. In Bland mode exact ties are
    /// broken by the lowest basic index alone (required for
    /// anti-cycling). Otherwise a two-pass Harris-style rule is used:
    /// among rows whose ratio is within a small window of the minimum,
    /// the one with the largest pivot element wins, which keeps the
    /// tableau numerically sane on degenerate instances.
    fn leaving(&self, col: usize, bland: bool) -> Option<usize> {
        let rhs = self.rhs_col();
        if bland {
            let mut best: Option<(usize, T)> = None;
            for r in 0..self.nrows {
                if self.rows[r][col] <= self.eps {
                    continue;
                }
                let ratio = self.rows[r][rhs].clone() / self.rows[r][col].clone();
                let better = match &best {
                    None => true,
                    Some((br, bv)) => {
                        ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br])
                    }
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            return best.map(|(r, _)| r);
        }

        // pass 1: minimal ratio
        let mut min_ratio: Option<T> = None;
        for r in 0..self.nrows {
            if self.rows[r][col] <= self.eps {
                continue;
            }
            let ratio = self.rows[r][rhs].clone() / self.rows[r][col].clone();
            match &min_ratio {
                Some(m) if ratio >= *m => {}
                _ => min_ratio = Some(ratio),
            }
        }
        let min_ratio = min_ratio?;
        // pass 2: largest pivot inside the tie window; prefer kicking
        // out artificial basic variables when pivots compare equal
        let window = min_ratio.clone() + self.eps.clone() * (T::one() + min_ratio.abs());
        let mut best: Option<(usize, T)> = None;
        for r in 0..self.nrows {
            if self.rows[r][col] <= self.eps {
                continue;
            }
            let ratio = self.rows[r][rhs].clone() / self.rows[r][col].clone();
            if ratio > window {
                continue;
            }
            let piv = self.rows[r][col].clone();
            let better = match &best {
                None => true,
                Some((br, bp)) => {
                    piv > *bp || (piv == *bp && {
                        let cand_art = self.basis[r] >= self.nvars;
                        let best_art = self.basis[*br] >= self.nvars;
                        cand_art && !best_art
                            || (cand_art == best_art && self.basis[r] < self.basis[*br])
                    })
                }
            };
            if better {
                best = Some((r, piv));
            }
        }
        best.map(|(r, _)| r)
    }

    /// Rebuilds the working tableau from the pristine constraint data
    /// and the current basis via Gauss-Jordan elimination with partial
    /// pivoting, discarding accumulated floating-point error. Returns
    /// false (leaving the tableau untouched) if the recorded basis turns
    /// out to be numerically singular.
    fn refactorize(&mut self) -> bool {
        let rhs = self.rhs_col();
        let mut rows = self.rows0.clone();
        let mut new_basis = vec![usize::MAX; self.nrows];
        let mut done = vec![false; self.nrows];
        for &col in self.basis.iter() {
            let mut best: Option<(usize, T)> = None;
            for r in 0..self.nrows {
                if done[r] {
                    continue;
                }
                let mag = rows[r][col].abs();
                if best.as_ref().map_or(true, |(_, b)| mag > *b) {
                    best = Some((r, mag));
                }
            }
            let Some((r, mag)) = best else {
                return false;
            };
            if !(mag > self.eps) {
                return false;
            }
            let piv = rows[r][col].clone();
            for j in 0..=rhs {
                rows[r][j] = rows[r][j].clone() / piv.clone();
            }
            for rr in 0..self.nrows {
                if rr == r {
                    continue;
                }
                let f = rows[rr][col].clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..=rhs {
                    let d = f.clone() * rows[r][j].clone();
                    rows[rr][j] = rows[rr][j].clone() - d;
                }
            }
            done[r] = true;
            new_basis[r] = col;
        }
        let mut obj: Vec<T> = self.phase_cost.clone();
        obj.push(T::zero());
        for r in 0..self.nrows {
            let cb = self.phase_cost[new_basis[r]].clone();
            if cb.is_zero() {
                continue;
            }
            for j in 0..=rhs {
                let d = cb.clone() * rows[r][j].clone();
                obj[j] = obj[j].clone() - d;
            }
        }
        self.rows = rows;
        self.basis = new_basis;
        self.obj = obj;
        true
    }

    /// Runs pivots until optimality or unboundedness. `allowed` caps the
    /// entering-column range (phase 2 excludes artificials); `stop_below`
    /// short-circuits once the objective value drops to the known lower
    /// bound (used by phase 1, whose optimum is zero). In floating-point
    /// mode the tableau is refactorized periodically and whenever the
    /// objective regresses, which the exact algorithm never allows.
    fn optimize(&mut self, allowed: usize, stop_below: Option<T>) -> bool {
        const REFACTOR_INTERVAL: usize = 512;
        let rhs = self.rhs_col();
        let mut since_refactor = 0usize;
        let mut best_value: Option<T> = None;
        loop {
            if !self.eps.is_zero() {
                let value = -self.obj[rhs].clone();
                let slack = T::from_f64(1e-7) * (T::one() + value.abs());
                let regressed = best_value
                    .as_ref()
                    .map_or(false, |b| value > b.clone() + slack);
                if regressed || since_refactor >= REFACTOR_INTERVAL {
                    if self.refactorize() {
                        since_refactor = 0;
                        best_value = Some(-self.obj[rhs].clone());
                    }
                } else {
                    match &best_value {
                        Some(b) if value >= *b => {}
                        _ => best_value = Some(value),
                    }
                }
            }
            if let Some(bound) = &stop_below {
                let value = -self.obj[rhs].clone();
                if value <= *bound {
                    return true;
                }
            }
            let bland = self.degenerate_run >= DEGENERATE_PIVOT_LIMIT;
            if self.degenerate_run >= DEGENERATE_PIVOT_LIMIT + STALL_ESCAPE_LIMIT
                && !self.eps.is_zero()
            {
                self.relax = self.relax.clone() * T::from_f64(10.0);
                self.degenerate_run = DEGENERATE_PIVOT_LIMIT;
            }
            let Some(col) = self.entering(allowed, bland) else {
                return true;
            };
            let Some(row) = self.leaving(col, bland) else {
                return false;
            };
            let degenerate = {
                let ratio = self.rows[row][rhs].clone() / self.rows[row][col].clone();
                !(ratio > self.eps)
            };
            self.pivot(row, col);
            since_refactor += 1;
            if degenerate {
                self.degenerate_run += 1;
            } else {
                self.degenerate_run = 0;
            }
        }
    }
}

/// Solves the LP. `eps` is the pivot/zero threshold (pass 0.0 for exact
/// arithmetic); `feas_tol` bounds the residual artificial mass accepted
/// as feasible.
pub fn solve_lp<T: LpScalar>(problem: &LpProblem<T>, eps: f64, feas_tol: f64) -> LpOutcome<T> {
    let nrows = problem.constraints.len();
    let nvars = problem.objective.len();
    assert!(problem.constraints.iter().all(|r| r.len() == nvars));
    assert_eq!(problem.rhs.len(), nrows);

    let rhs_col = nvars + nrows;
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(nrows);
    let mut flipped = vec![false; nrows];
    for i in 0..nrows {
        let mut row: Vec<T> = Vec::with_capacity(rhs_col + 1);
        let flip = problem.rhs[i] < T::zero();
        flipped[i] = flip;
        for j in 0..nvars {
            let v = problem.constraints[i][j].clone();
            row.push(if flip { -v } else { v });
        }
        for k in 0..nrows {
            row.push(if k == i { T::one() } else { T::zero() });
        }
        let b = problem.rhs[i].clone();
        row.push(if flip { -b } else { b });
        rows.push(row);
    }

    // Phase 1: minimize the sum of artificials. With the artificial
    // basis, the reduced-cost row is the negated column sums.
    let mut obj = vec![T::zero(); rhs_col + 1];
    for j in 0..nvars {
        let mut s = T::zero();
        for row in rows.iter() {
            s = s + row[j].clone();
        }
        obj[j] = -s;
    }
    let mut s = T::zero();
    for row in rows.iter() {
        s = s + row[rhs_col].clone();
    }
    obj[rhs_col] = -s;

    let mut phase1_cost = vec![T::zero(); nvars + nrows];
    for c in phase1_cost[nvars..].iter_mut() {
        *c = T::one();
    }
    let mut tab = Tableau {
        rows0: rows.clone(),
        rows,
        obj,
        basis: (nvars..nvars + nrows).collect(),
        nvars,
        nrows,
        eps: T::from_f64(eps),
        relax: T::one(),
        degenerate_run: 0,
        phase_cost: phase1_cost,
    };

    // Phase 1 cannot be unbounded (objective bounded below by 0).
    tab.optimize(rhs_col, Some(T::from_f64(feas_tol)));
    let residual = (-tab.obj[rhs_col].clone()).to_f64().unwrap_or(f64::INFINITY);
    if residual > feas_tol {
        return LpOutcome::Infeasible { residual };
    }

    // Drive artificials out of the basis where a well-scaled structural
    // pivot exists; rows without one are (numerically) redundant and
    // keep their artificial at a negligible value.
    let drive_tol = if eps > 0.0 {
        T::from_f64(1e-6)
    } else {
        T::zero()
    };
    for r in 0..nrows {
        if tab.basis[r] < nvars {
            continue;
        }
        let mut best: Option<(usize, T)> = None;
        for j in 0..nvars {
            let mag = tab.rows[r][j].abs();
            if mag > drive_tol && best.as_ref().map_or(true, |(_, b)| mag > *b) {
                best = Some((j, mag));
            }
        }
        if let Some((col, _)) = best {
            tab.pivot(r, col);
        }
    }

    // Phase 2 objective: original costs reduced against the basis.
    let mut obj = vec![T::zero(); rhs_col + 1];
    obj[..nvars].clone_from_slice(&problem.objective);
    for r in 0..nrows {
        let cb = if tab.basis[r] < nvars {
            problem.objective[tab.basis[r]].clone()
        } else {
            T::zero()
        };
        if cb.is_zero() {
            continue;
        }
        for j in 0..=rhs_col {
            let delta = cb.clone() * tab.rows[r][j].clone();
            obj[j] = obj[j].clone() - delta;
        }
    }
    tab.obj = obj;
    tab.degenerate_run = 0;
    tab.relax = T::one();
    let mut phase2_cost = vec![T::zero(); rhs_col];
    phase2_cost[..nvars].clone_from_slice(&problem.objective);
    tab.phase_cost = phase2_cost;

    if !tab.optimize(nvars, None) {
        return LpOutcome::Unbounded;
    }

    let mut x = vec![T::zero(); nvars];
    for r in 0..nrows {
        if tab.basis[r] < nvars {
            x[tab.basis[r]] = tab.rows[r][rhs_col].clone();
        }
    }
    let objective = -tab.obj[rhs_col].clone();
    // Dual of row i is the negated reduced cost of its artificial,
    // undoing any sign flip applied to the row.
    let duals: Vec<T> = (0..nrows)
        .map(|i| {
            let y = -tab.obj[nvars + i].clone();
            if flipped[i] {
                -y
            } else {
                y
            }
        })
        .collect();
    let reduced_costs = tab.obj[..nvars].to_vec();
    LpOutcome::Optimal(LpSolution {
        x,
        objective,
        duals,
        reduced_costs,
        basis: tab.basis,
    })
}
