//! Discrete measures on the real line, potential functions, and the
//! convex-order and irreducibility predicates.
//!
//! The potential u_mu(x) = integral of |x - y| dmu(y) is convex and
//! piecewise linear with kinks exactly at the atoms; for equal-mean
//! probability measures, mu is dominated by nu in convex order iff
//! u_mu <= u_nu everywhere, which for discrete measures reduces to a
//! finite check at the union of atom positions.

use crate::config::Tolerances;
use crate::error::{MotError, Result};
use crate::numeric::kahan_sum;

/// Real interval with optionally infinite ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn open(lo: f64, hi: f64) -> Self {
        assert!(lo < hi, "interval endpoints out of order: [{lo}, {hi}]");
        Interval {
            lo,
            hi,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        assert!(lo < hi, "interval endpoints out of order: [{lo}, {hi}]");
        Interval {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let lo_ok = x > self.lo || (self.lo_closed && x == self.lo);
        let hi_ok = x < self.hi || (self.hi_closed && x == self.hi);
        lo_ok && hi_ok
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn interior_contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }
}

/// Finitely supported nonnegative measure on the line.
///
/// Atoms are kept sorted with strictly increasing positions; duplicate
/// positions are merged at construction. Probability measures are the
/// common case, but sub-probability restrictions produced by the
/// decomposition carry their actual mass.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    positions: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Probability measure: total weight must be 1 within `mass_tol`.
    pub fn probability(atoms: Vec<(f64, f64)>, mass_tol: f64) -> Result<Self> {
        let m = Self::sub_measure(atoms)?;
        let mass = m.total_mass();
        if (mass - 1.0).abs() > mass_tol {
            return Err(MotError::InvalidMeasure(format!(
                "total mass {mass} differs from 1 beyond {mass_tol:e}"
            )));
        }
        Ok(m)
    }

    /// Measure with arbitrary nonnegative total mass (possibly zero).
    pub fn sub_measure(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms;
        for &(x, w) in &atoms {
            if !x.is_finite() || !w.is_finite() {
                return Err(MotError::InvalidMeasure("non-finite atom".into()));
            }
            if w < 0.0 {
                return Err(MotError::InvalidMeasure(format!(
                    "negative weight {w} at position {x}"
                )));
            }
        }
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut positions = Vec::with_capacity(atoms.len());
        let mut weights: Vec<f64> = Vec::with_capacity(atoms.len());
        for (x, w) in atoms {
            if w == 0.0 {
                continue;
            }
            match positions.last() {
                Some(&last) if last == x => *weights.last_mut().unwrap() += w,
                _ => {
                    positions.push(x);
                    weights.push(w);
                }
            }
        }
        Ok(DiscreteMeasure { positions, weights })
    }

    pub fn dirac(x: f64) -> Self {
        DiscreteMeasure {
            positions: vec![x],
            weights: vec![1.0],
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.positions
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        kahan_sum(self.weights.iter().copied())
    }

    pub fn first_moment(&self) -> f64 {
        kahan_sum(self.atoms().map(|(x, w)| w * x))
    }

    pub fn second_moment(&self) -> f64 {
        kahan_sum(self.atoms().map(|(x, w)| w * x * x))
    }

    /// Barycenter; 0 for the zero measure.
    pub fn mean(&self) -> f64 {
        let mass = self.total_mass();
        if mass == 0.0 {
            0.0
        } else {
            self.first_moment() / mass
        }
    }

    pub fn variance(&self) -> f64 {
        let mass = self.total_mass();
        if mass == 0.0 {
            return 0.0;
        }
        let mean = self.mean();
        kahan_sum(self.atoms().map(|(x, w)| w * (x - mean) * (x - mean))) / mass
    }

    pub fn support_min(&self) -> Option<f64> {
        self.positions.first().copied()
    }

    pub fn support_max(&self) -> Option<f64> {
        self.positions.last().copied()
    }

    pub fn weight_at(&self, x: f64) -> f64 {
        // nearest-atom lookup with a small positional tolerance, so that
        // arithmetically derived positions (an ulp off) still match
        const POS_TOL: f64 = 1e-9;
        let p = self.positions.partition_point(|&s| s < x - POS_TOL);
        if p < self.positions.len() && (self.positions[p] - x).abs() <= POS_TOL {
            self.weights[p]
        } else {
            0.0
        }
    }

    /// Potential function u(x) = sum_i w_i |x - x_i|, evaluated exactly
    /// with compensated summation.
    pub fn potential(&self, x: f64) -> f64 {
        kahan_sum(self.atoms().map(|(p, w)| w * (x - p).abs()))
    }

    /// Restriction to the open interior of `interval`.
    pub fn restrict_interior(&self, interval: &Interval) -> DiscreteMeasure {
        let (positions, weights) = self
            .atoms()
            .filter(|&(x, _)| interval.interior_contains(x))
            .unzip();
        DiscreteMeasure { positions, weights }
    }

    /// Atomwise difference `self - other`; weights below `tol` are dropped,
    /// negative weights beyond `tol` are an error.
    pub fn sub(&self, other: &DiscreteMeasure, tol: f64) -> Result<DiscreteMeasure> {
        // positions within this distance are the same atom (guards
        // against round-off when positions were derived arithmetically)
        const POS_TOL: f64 = 1e-9;
        let mut atoms: Vec<(f64, f64)> = self.atoms().collect();
        for (x, w) in other.atoms() {
            match atoms
                .iter()
                .position(|&(p, _)| (p - x).abs() <= POS_TOL)
            {
                Some(i) => atoms[i].1 -= w,
                None => atoms.push((x, -w)),
            }
        }
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for &(x, w) in &atoms {
            if w < -tol {
                return Err(MotError::InvalidMeasure(format!(
                    "subtraction yields negative weight {w:.3e} at {x}"
                )));
            }
        }
        DiscreteMeasure::sub_measure(
            atoms
                .into_iter()
                .filter(|&(_, w)| w > tol)
                .collect(),
        )
    }

    /// Integral of a grid function given at this measure's atoms.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.len());
        kahan_sum(self.weights.iter().zip(values).map(|(w, v)| w * v))
    }
}

/// Sorted union of the atom positions of the given measures.
pub fn union_grid(measures: &[&DiscreteMeasure]) -> Vec<f64> {
    let mut grid: Vec<f64> = measures
        .iter()
        .flat_map(|m| m.positions().iter().copied())
        .collect();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    grid
}

/// Outcome of the convex-order test.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderReport {
    pub ordered: bool,
    /// Point with the largest potential deficit u_mu - u_nu, and the
    /// deficit itself, when the order fails.
    pub witness: Option<(f64, f64)>,
}

/// Tests mu <= nu in convex order: equal means within `order_tol` and
/// u_mu <= u_nu + order_tol at every atom of either measure.
///
/// The finite check is sufficient because u_mu - u_nu is piecewise
/// linear with kinks only at atoms and vanishes at infinity once the
/// means agree.
pub fn check_convex_order(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    tols: &Tolerances,
) -> OrderReport {
    let mean_gap = (mu.mean() - nu.mean()).abs();
    let grid = union_grid(&[mu, nu]);
    let mut worst: Option<(f64, f64)> = None;
    for &y in &grid {
        let deficit = mu.potential(y) - nu.potential(y);
        if worst.map_or(true, |(_, d)| deficit > d) {
            worst = Some((y, deficit));
        }
    }
    let max_deficit = worst.map_or(0.0, |(_, d)| d);
    let ordered = mean_gap <= tols.order_tol && max_deficit <= tols.order_tol;
    OrderReport {
        ordered,
        witness: if ordered { None } else { worst },
    }
}

/// Maximal open intervals where u_nu - u_mu exceeds `gap_tol`, scanned
/// at the union atom grid. Under convex order the difference is
/// nonnegative with zeros at kinks, so interval endpoints land on atoms.
pub fn strict_order_components(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    tols: &Tolerances,
) -> Vec<Interval> {
    let grid = union_grid(&[mu, nu]);
    let diff: Vec<f64> = grid
        .iter()
        .map(|&y| nu.potential(y) - mu.potential(y))
        .collect();
    let mut components = Vec::new();
    let mut start: Option<usize> = None;
    for i in 0..=grid.len() {
        let inside = i < grid.len() && diff[i] > tols.gap_tol;
        match (start, inside) {
            (None, true) => start = Some(i),
            (Some(i0), false) => {
                let lo = component_endpoint(&grid, &diff, i0, true, tols.gap_tol);
                let hi = component_endpoint(&grid, &diff, i - 1, false, tols.gap_tol);
                components.push(Interval::open(lo, hi));
                start = None;
            }
            _ => {}
        }
    }
    components
}

fn component_endpoint(grid: &[f64], diff: &[f64], edge: usize, left: bool, gap_tol: f64) -> f64 {
    let neighbor = if left {
        edge.checked_sub(1)
    } else {
        (edge + 1 < grid.len()).then_some(edge + 1)
    };
    match neighbor {
        // equal means force the difference to vanish beyond the extreme
        // atoms; extend half a unit so the extreme atom stays interior
        None => {
            if left {
                grid[edge] - 0.5
            } else {
                grid[edge] + 0.5
            }
        }
        Some(j) => {
            if diff[j].abs() <= gap_tol {
                grid[j]
            } else {
                // linear interpolation of the sign change (only reachable
                // when convex order was not verified first)
                let t = diff[j] / (diff[j] - diff[edge]);
                grid[j] + t.clamp(0.0, 1.0) * (grid[edge] - grid[j])
            }
        }
    }
}

/// Irreducibility per the potential-gap criterion: the strict region is
/// a single open interval carrying all mu-mass.
pub fn is_irreducible(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    tols: &Tolerances,
) -> Result<(bool, Option<Interval>)> {
    let order = check_convex_order(mu, nu, tols);
    if !order.ordered {
        let (point, deficit) = order.witness.unwrap_or((f64::NAN, f64::NAN));
        return Err(MotError::NotInConvexOrder { point, deficit });
    }
    let components = strict_order_components(mu, nu, tols);
    match components.as_slice() {
        [only] => {
            let all_inside = mu
                .positions()
                .iter()
                .all(|&x| only.interior_contains(x));
            Ok((all_inside, Some(*only)))
        }
        [] => Ok((false, None)),
        _ => Ok((false, None)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    fn half_half(a: f64, b: f64) -> DiscreteMeasure {
        DiscreteMeasure::probability(vec![(a, 0.5), (b, 0.5)], 1e-12).unwrap()
    }

    #[test]
    fn potential_of_dirac() {
        let m = DiscreteMeasure::dirac(0.0);
        assert_eq!(m.potential(2.0), 2.0);
    }

    #[test]
    fn potential_symmetric_two_atoms() {
        let m = half_half(-1.0, 1.0);
        assert_eq!(m.potential(0.0), 1.0);
        assert_eq!(m.potential(3.0), 3.0); // outside support: |x - mean|
    }

    #[test]
    fn potential_shape() {
        // convex, kinks at atoms, asymptotic slopes -1 and +1
        let m = DiscreteMeasure::probability(vec![(-2.0, 0.25), (0.5, 0.5), (3.0, 0.25)], 1e-12)
            .unwrap();
        let far = m.positions().iter().fold(0.0f64, |a, x| a.max(x.abs())) + 1.0;
        let eps = 1e-6;
        let right = (m.potential(far + eps) - m.potential(far)) / eps;
        let left = (m.potential(-far) - m.potential(-far - eps)) / eps;
        assert!((right - 1.0).abs() < 1e-9);
        assert!((left + 1.0).abs() < 1e-9);
        for x in [-3.0, -1.0, 0.0, 1.0, 2.5, 4.0] {
            assert!(m.potential(x) + 1e-12 >= (x - m.mean()).abs());
        }
    }

    #[test]
    fn duplicate_atoms_merge() {
        let m =
            DiscreteMeasure::probability(vec![(1.0, 0.5), (1.0, 0.25), (0.0, 0.25)], 1e-12).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.weight_at(1.0), 0.75);
    }

    #[test]
    fn jensen_pair_is_ordered() {
        let mu = DiscreteMeasure::dirac(0.0);
        let nu = half_half(-1.0, 1.0);
        assert!(check_convex_order(&mu, &nu, &tols()).ordered);
        let rev = check_convex_order(&nu, &mu, &tols());
        assert!(!rev.ordered);
        let (point, deficit) = rev.witness.unwrap();
        assert!(deficit > 0.0);
        assert!([-1.0, 0.0, 1.0].contains(&point));
    }

    #[test]
    fn order_is_reflexive() {
        let m = DiscreteMeasure::probability(vec![(-0.3, 0.2), (0.1, 0.5), (2.0, 0.3)], 1e-12)
            .unwrap();
        assert!(check_convex_order(&m, &m, &tols()).ordered);
    }

    #[test]
    fn irreducible_canonical_pair() {
        let mu = DiscreteMeasure::dirac(0.0);
        let nu = half_half(-1.0, 1.0);
        let (irr, dom) = is_irreducible(&mu, &nu, &tols()).unwrap();
        assert!(irr);
        let dom = dom.unwrap();
        assert_eq!((dom.lo, dom.hi), (-1.0, 1.0));
    }

    #[test]
    fn identical_measures_not_irreducible() {
        let m = DiscreteMeasure::dirac(0.0);
        let (irr, dom) = is_irreducible(&m, &m, &tols()).unwrap();
        assert!(!irr);
        assert!(dom.is_none());
    }

    #[test]
    fn two_component_pair_detected() {
        let mu = half_half(-2.0, 2.0);
        let nu = DiscreteMeasure::probability(
            vec![(-3.0, 0.25), (-1.0, 0.25), (1.0, 0.25), (3.0, 0.25)],
            1e-12,
        )
        .unwrap();
        let comps = strict_order_components(&mu, &nu, &tols());
        assert_eq!(comps.len(), 2);
        assert_eq!((comps[0].lo, comps[0].hi), (-3.0, -1.0));
        assert_eq!((comps[1].lo, comps[1].hi), (1.0, 3.0));
        let (irr, _) = is_irreducible(&mu, &nu, &tols()).unwrap();
        assert!(!irr);
    }

    #[test]
    fn order_precondition_enforced() {
        let mu = half_half(-1.0, 1.0);
        let nu = DiscreteMeasure::dirac(0.0);
        assert!(matches!(
            is_irreducible(&mu, &nu, &tols()),
            Err(MotError::NotInConvexOrder { .. })
        ));
    }
}
