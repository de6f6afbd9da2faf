//! Canonical decomposition of a convex-ordered pair into irreducible
//! components plus a diagonal part.
//!
//! The component intervals are the maximal open intervals where the
//! potential gap u_nu - u_mu is strictly positive. Each component keeps
//! the mu-mass inside it; the matching nu-part is the interior
//! restriction plus endpoint masses solved from the mass/mean balance.
//! Whatever is left over on either side must agree atomwise: that is
//! the diagonal part, transported by the identity.

use crate::config::Tolerances;
use crate::error::{MotError, Result};
use crate::measures::{
    check_convex_order, strict_order_components, DiscreteMeasure, Interval,
};

#[derive(Debug, Clone)]
pub struct Component {
    pub interval: Interval,
    /// mu restricted to the open interval (sub-probability).
    pub mu: DiscreteMeasure,
    /// Matching nu-part with the same mass and mean.
    pub nu: DiscreteMeasure,
}

#[derive(Debug, Clone)]
pub struct ComponentDecomposition {
    pub components: Vec<Component>,
    /// mu_0 = nu_0: the identity-coupled remainder.
    pub diagonal: DiscreteMeasure,
}

/// Endpoint masses (alpha_lo, alpha_hi) solving the 2x2 mass/mean
/// system for a bounded component: the interior restriction of nu is
/// topped up at the interval endpoints until mass and first moment
/// match the targets.
pub fn endpoint_split(
    nu: &DiscreteMeasure,
    interval: &Interval,
    target_mass: f64,
    target_mean: f64,
) -> Result<(f64, f64)> {
    if !interval.is_bounded() {
        return Err(MotError::InconsistentSplit(
            "endpoint split needs a bounded interval".into(),
        ));
    }
    if target_mass <= 0.0 {
        return Err(MotError::InconsistentSplit(format!(
            "target mass must be positive, got {target_mass}"
        )));
    }
    let interior = nu.restrict_interior(interval);
    let mass_gap = target_mass - interior.total_mass();
    let moment_gap = target_mean * target_mass - interior.first_moment();
    let (lo, hi) = (interval.lo, interval.hi);
    let alpha_lo = (hi * mass_gap - moment_gap) / (hi - lo);
    let alpha_hi = mass_gap - alpha_lo;
    let neg_tol = 1e-9 * target_mass.max(1.0);
    if alpha_lo < -neg_tol || alpha_hi < -neg_tol {
        return Err(MotError::InconsistentSplit(format!(
            "negative endpoint mass: alpha_lo = {alpha_lo:.3e}, alpha_hi = {alpha_hi:.3e}"
        )));
    }
    Ok((alpha_lo.max(0.0), alpha_hi.max(0.0)))
}

/// Splits (mu, nu) into irreducible components and a diagonal part.
pub fn decompose(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    tols: &Tolerances,
) -> Result<ComponentDecomposition> {
    let order = check_convex_order(mu, nu, tols);
    if !order.ordered {
        let (point, deficit) = order.witness.unwrap_or((f64::NAN, f64::NAN));
        return Err(MotError::NotInConvexOrder { point, deficit });
    }
    let intervals = strict_order_components(mu, nu, tols);

    // Mutable remaining nu-weight per atom; endpoint atoms may be shared
    // between adjacent components and the diagonal, claimed left-to-right.
    let mut remaining: Vec<f64> = nu.weights().to_vec();
    let claim = |remaining: &mut Vec<f64>, pos: f64, amount: f64| -> Result<()> {
        if amount == 0.0 {
            return Ok(());
        }
        let idx = nu
            .positions()
            .iter()
            .position(|&p| p == pos)
            .ok_or_else(|| {
                MotError::InconsistentSplit(format!(
                    "endpoint mass {amount:.3e} required at {pos} where nu has no atom"
                ))
            })?;
        if remaining[idx] < amount - 1e-9 {
            return Err(MotError::InconsistentSplit(format!(
                "endpoint claim {amount:.3e} at {pos} exceeds available {:.3e}",
                remaining[idx]
            )));
        }
        remaining[idx] = (remaining[idx] - amount).max(0.0);
        Ok(())
    };

    let mut components = Vec::with_capacity(intervals.len());
    let mut mu_rest: Vec<f64> = mu.weights().to_vec();
    for interval in intervals {
        assert!(interval.lo < interval.hi);
        let mu_k = mu.restrict_interior(&interval);
        if mu_k.is_empty() {
            // a strict potential gap with no mu-mass inside cannot occur
            // for discrete pairs; treat as a tolerance artifact
            continue;
        }
        for (i, &x) in mu.positions().iter().enumerate() {
            if interval.interior_contains(x) {
                mu_rest[i] = 0.0;
            }
        }
        let (alpha_lo, alpha_hi) =
            endpoint_split(nu, &interval, mu_k.total_mass(), mu_k.mean())?;
        let interior = nu.restrict_interior(&interval);
        for (pos, w) in interior.atoms() {
            claim(&mut remaining, pos, w)?;
        }
        claim(&mut remaining, interval.lo, alpha_lo)?;
        claim(&mut remaining, interval.hi, alpha_hi)?;
        let mut nu_atoms: Vec<(f64, f64)> = interior.atoms().collect();
        nu_atoms.push((interval.lo, alpha_lo));
        nu_atoms.push((interval.hi, alpha_hi));
        let nu_k = DiscreteMeasure::sub_measure(nu_atoms)?;
        components.push(Component {
            interval,
            mu: mu_k,
            nu: nu_k,
        });
    }

    let mu_0 = DiscreteMeasure::sub_measure(
        mu.positions()
            .iter()
            .copied()
            .zip(mu_rest)
            .filter(|&(_, w)| w > 1e-15)
            .collect(),
    )?;
    let nu_0 = DiscreteMeasure::sub_measure(
        nu.positions()
            .iter()
            .copied()
            .zip(remaining)
            .filter(|&(_, w)| w > 1e-15)
            .collect(),
    )?;

    // Consistency: the leftovers must coincide atomwise.
    let diff = mu_0.sub(&nu_0, 1e-9).and_then(|d| {
        if d.total_mass() > 1e-9 {
            Err(MotError::InconsistentSplit("diagonal parts differ".into()))
        } else {
            Ok(())
        }
    });
    let rev = nu_0.sub(&mu_0, 1e-9).and_then(|d| {
        if d.total_mass() > 1e-9 {
            Err(MotError::InconsistentSplit("diagonal parts differ".into()))
        } else {
            Ok(())
        }
    });
    if diff.is_err() || rev.is_err() {
        return Err(MotError::InconsistentSplit(format!(
            "diagonal mismatch: mu_0 mass {:.12}, nu_0 mass {:.12}",
            mu_0.total_mass(),
            nu_0.total_mass()
        )));
    }

    Ok(ComponentDecomposition {
        components,
        diagonal: mu_0,
    })
}
