//! Exact solution of the discrete martingale transport LP.
//!
//! Variables are the coupling entries pi_ij over supp(mu) x supp(nu);
//! constraints are the row marginals, the column marginals, and one
//! barycenter (martingale) equation per mu-atom. The dual multipliers
//! of these three blocks are exactly the hedging triple (f, g, h) up to
//! sign, which is how the `dual` module recovers pointwise maximizers.

use crate::config::Tolerances;
use crate::cost::CostSpec;
use crate::error::{MotError, Result};
use crate::measures::{check_convex_order, DiscreteMeasure};
use crate::numeric::kahan_sum;
use crate::simplex::{solve_lp, LpOutcome, LpProblem, LpScalar};
use num_rational::BigRational;

/// Transport plan over supp(mu) x supp(nu).
#[derive(Debug, Clone)]
pub struct Coupling {
    pub row_positions: Vec<f64>,
    pub col_positions: Vec<f64>,
    /// pi[i][j]: mass moved from mu-atom i to nu-atom j.
    pub pi: Vec<Vec<f64>>,
    /// Objective value of the generating cost.
    pub value: f64,
}

impl Coupling {
    pub fn row_sum(&self, i: usize) -> f64 {
        kahan_sum(self.pi[i].iter().copied())
    }

    pub fn col_sum(&self, j: usize) -> f64 {
        kahan_sum(self.pi.iter().map(|row| row[j]))
    }

    /// Barycenter residual of row i: sum_j pi_ij (y_j - x_i).
    pub fn barycenter_residual(&self, i: usize) -> f64 {
        let x = self.row_positions[i];
        kahan_sum(
            self.pi[i]
                .iter()
                .zip(&self.col_positions)
                .map(|(&p, &y)| p * (y - x)),
        )
    }

    /// Worst violation of the marginal and martingale constraints.
    pub fn max_constraint_residual(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        let mut worst = 0.0f64;
        for (i, &w) in mu.weights().iter().enumerate() {
            worst = worst.max((self.row_sum(i) - w).abs());
            worst = worst.max(self.barycenter_residual(i).abs());
        }
        for (j, &w) in nu.weights().iter().enumerate() {
            worst = worst.max((self.col_sum(j) - w).abs());
        }
        worst
    }

    /// Expectation of a cost under this plan.
    pub fn expectation(&self, cost: &CostSpec) -> Result<f64> {
        let mut terms = Vec::new();
        for (i, &x) in self.row_positions.iter().enumerate() {
            for (j, &y) in self.col_positions.iter().enumerate() {
                if self.pi[i][j] != 0.0 {
                    terms.push(self.pi[i][j] * cost.try_value(x, y)?);
                }
            }
        }
        Ok(kahan_sum(terms))
    }

    /// Support pairs with mass above `supp_tol`.
    pub fn support(&self, supp_tol: f64) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for (i, row) in self.pi.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if p > supp_tol {
                    pairs.push((i, j));
                }
            }
        }
        pairs
    }
}

/// Optimal basis and dual multipliers retained for dual recovery.
#[derive(Debug, Clone)]
pub struct DualCertificate {
    /// Multipliers of the row-marginal equations (f = -row_duals).
    pub row_duals: Vec<f64>,
    /// Multipliers of the column-marginal equations (g = col_duals).
    pub col_duals: Vec<f64>,
    /// Multipliers of the barycenter equations (h = -bary_duals).
    pub bary_duals: Vec<f64>,
    pub basis: Vec<usize>,
    /// Most negative reduced cost at termination.
    pub min_reduced_cost: f64,
}

#[derive(Debug, Clone)]
pub struct PrimalSolution {
    pub coupling: Coupling,
    pub value: f64,
    pub certificate: DualCertificate,
}

/// Strassen: the martingale polytope is non-empty iff mu <= nu in
/// convex order.
pub fn feasible(mu: &DiscreteMeasure, nu: &DiscreteMeasure, tols: &Tolerances) -> bool {
    check_convex_order(mu, nu, tols).ordered
}

/// Solves min E[c(X,Y)] over martingale couplings of (mu, nu).
pub fn solve_primal(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &CostSpec,
    tols: &Tolerances,
) -> Result<PrimalSolution> {
    let costs = cost_matrix(mu, nu, cost)?;
    if tols.exact_mode {
        solve_generic::<BigRational>(mu, nu, &costs, 0.0, 0.0)
    } else {
        solve_generic::<f64>(mu, nu, &costs, 1e-9, 1e-9)
    }
}

/// A feasible martingale coupling found by the phase-1 LP alone (zero
/// cost); serves as an upper-bound witness in tests.
pub fn feasible_coupling(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    tols: &Tolerances,
) -> Result<Coupling> {
    let zero = vec![vec![0.0; nu.len()]; mu.len()];
    let sol = if tols.exact_mode {
        solve_generic::<BigRational>(mu, nu, &zero, 0.0, 0.0)?
    } else {
        solve_generic::<f64>(mu, nu, &zero, 1e-9, 1e-9)?
    };
    Ok(sol.coupling)
}

fn cost_matrix(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &CostSpec,
) -> Result<Vec<Vec<f64>>> {
    mu.positions()
        .iter()
        .map(|&x| {
            nu.positions()
                .iter()
                .map(|&y| cost.try_value(x, y))
                .collect()
        })
        .collect()
}

fn solve_generic<T: LpScalar>(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    costs: &[Vec<f64>],
    eps: f64,
    feas_tol: f64,
) -> Result<PrimalSolution> {
    let n = mu.len();
    let m = nu.len();
    let nvars = n * m;
    let nrows = 2 * n + m;
    let var = |i: usize, j: usize| i * m + j;

    let mut a = vec![vec![T::zero(); nvars]; nrows];
    let mut b = vec![T::zero(); nrows];
    for i in 0..n {
        for j in 0..m {
            a[i][var(i, j)] = T::one();
        }
        b[i] = T::from_f64(mu.weights()[i]);
    }
    for j in 0..m {
        for i in 0..n {
            a[n + j][var(i, j)] = T::one();
        }
        b[n + j] = T::from_f64(nu.weights()[j]);
    }
    for i in 0..n {
        let x = mu.positions()[i];
        for j in 0..m {
            let y = nu.positions()[j];
            a[n + m + i][var(i, j)] = T::from_f64(y) - T::from_f64(x);
        }
        // rhs stays zero
    }
    let objective: Vec<T> = (0..n)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| T::from_f64(costs[i][j]))
        .collect();

    let outcome = solve_lp(
        &LpProblem {
            constraints: a,
            rhs: b,
            objective,
        },
        eps,
        feas_tol,
    );
    let sol = match outcome {
        LpOutcome::Optimal(sol) => sol,
        LpOutcome::Infeasible { residual } => return Err(MotError::Infeasible { residual }),
        LpOutcome::Unbounded => return Err(MotError::Unbounded),
    };

    let pi: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..m)
                .map(|j| sol.x[var(i, j)].to_f64().unwrap_or(0.0))
                .collect()
        })
        .collect();
    let value = sol.objective.to_f64().unwrap_or(f64::NAN);
    let to_f64 = |t: &T| t.to_f64().unwrap_or(f64::NAN);
    let certificate = DualCertificate {
        row_duals: sol.duals[..n].iter().map(to_f64).collect(),
        col_duals: sol.duals[n..n + m].iter().map(to_f64).collect(),
        bary_duals: sol.duals[n + m..].iter().map(to_f64).collect(),
        basis: sol.basis.clone(),
        min_reduced_cost: sol
            .reduced_costs
            .iter()
            .map(|r| to_f64(r))
            .fold(f64::INFINITY, f64::min),
    };
    Ok(PrimalSolution {
        coupling: Coupling {
            row_positions: mu.positions().to_vec(),
            col_positions: nu.positions().to_vec(),
            pi,
            value,
        },
        value,
        certificate,
    })
}
