//! End-to-end acceptance suite. Each test prints one PASS/FAIL line for
//! its criterion; a FAIL line is followed by a panic with the details.

use std::time::Instant;

use mot::config::Tolerances;
use mot::cost::CostSpec;
use mot::counterexamples::{
    cr_diagnostic, gen_nonintegrable, linear_growth_profile, local_convexity_diagnostic,
};
use mot::decomposition::decompose;
use mot::dual::{envelope_g, evaluation_grid, normalize_component, recover_component_dual};
use mot::measures::{DiscreteMeasure, Interval};
use mot::pipeline::solve_instance;
use mot::primal::solve_primal;
use mot::pwl::{concave_envelope, PiecewiseLinear};
use mot::regularity::{lipschitz_postprocess, LipschitzCertificate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, failures: Vec<String>) {
    if failures.is_empty() {
        println!("acceptance {id:02} {name}: PASS");
    } else {
        println!("acceptance {id:02} {name}: FAIL ({} issue(s))", failures.len());
        panic!("{name} failed:\n{}", failures.join("\n"));
    }
}

/// Random strictly increasing positions with random weights, grouped
/// into consecutive blocks; the first marginal places each block's mass
/// at its barycenter, so the pair is convex-ordered by construction.
fn random_pair_with_parts(
    rng: &mut ChaCha8Rng,
    m: usize,
    parts: &[usize],
) -> (DiscreteMeasure, DiscreteMeasure) {
    assert_eq!(parts.iter().sum::<usize>(), m);
    let mut pos = Vec::with_capacity(m);
    let mut x = rng.gen_range(-3.0..-2.0);
    for _ in 0..m {
        x += rng.gen_range(0.05..1.0);
        pos.push(x);
    }
    let mut w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    for wi in &mut w {
        *wi /= total;
    }
    let mut mu_atoms = Vec::new();
    let mut i = 0;
    for &g in parts {
        let mass: f64 = w[i..i + g].iter().sum();
        let mean: f64 = pos[i..i + g]
            .iter()
            .zip(&w[i..i + g])
            .map(|(&p, &wi)| p * wi)
            .sum::<f64>()
            / mass;
        mu_atoms.push((mean, mass));
        i += g;
    }
    let nu_atoms: Vec<(f64, f64)> = pos.into_iter().zip(w).collect();
    (
        DiscreteMeasure::probability(mu_atoms, 1e-9).unwrap(),
        DiscreteMeasure::probability(nu_atoms, 1e-9).unwrap(),
    )
}

fn random_parts(rng: &mut ChaCha8Rng, m: usize, max_part: usize) -> Vec<usize> {
    let mut parts = Vec::new();
    let mut left = m;
    while left > 0 {
        let g = rng.gen_range(1..=max_part.min(left));
        parts.push(g);
        left -= g;
    }
    parts
}

fn random_convex_ordered(rng: &mut ChaCha8Rng, max_nu: usize) -> (DiscreteMeasure, DiscreteMeasure) {
    let m = rng.gen_range(4..=max_nu);
    let parts = random_parts(rng, m, 3);
    random_pair_with_parts(rng, m, &parts)
}

fn random_cost(rng: &mut ChaCha8Rng) -> CostSpec {
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let r = [1.0, 1.5, 2.0][rng.gen_range(0..3)];
    CostSpec::power(sign, r).unwrap()
}

#[test]
fn a01_strong_duality_on_random_instances() {
    let tols = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let start = Instant::now();
    let mut failures = Vec::new();
    for case in 0..200 {
        let (mu, nu) = random_convex_ordered(&mut rng, 20);
        let cost = random_cost(&mut rng);
        match solve_instance(&mu, &nu, &cost, &tols) {
            Ok(out) => {
                if out.report.gap > 1e-8 {
                    failures.push(format!("case {case}: gap {:.3e}", out.report.gap));
                }
                if out.report.max_ineq_violation > 1e-7 {
                    failures.push(format!(
                        "case {case}: inequality violation {:.3e}",
                        out.report.max_ineq_violation
                    ));
                }
            }
            Err(e) => failures.push(format!("case {case}: solve failed: {e}")),
        }
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() > 60.0 {
        failures.push(format!("runtime {:.1}s exceeds 60s", elapsed.as_secs_f64()));
    }
    report(1, "strong duality on 200 random instances", failures);
}

/// Row-reduces [A | b] in place with partial pivoting; returns the rank.
fn row_reduce(mat: &mut Vec<Vec<f64>>) -> usize {
    let nrows = mat.len();
    let ncols = mat[0].len();
    let mut rank = 0;
    for col in 0..ncols - 1 {
        let piv = (rank..nrows)
            .max_by(|&a, &b| mat[a][col].abs().partial_cmp(&mat[b][col].abs()).unwrap());
        let Some(piv) = piv else { break };
        if mat[piv][col].abs() < 1e-11 {
            continue;
        }
        mat.swap(rank, piv);
        let p = mat[rank][col];
        for j in 0..ncols {
            mat[rank][j] /= p;
        }
        for r in 0..nrows {
            if r != rank && mat[r][col] != 0.0 {
                let f = mat[r][col];
                for j in 0..ncols {
                    mat[r][j] -= f * mat[rank][j];
                }
            }
        }
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    rank
}

/// Brute-force optimum of min c.x s.t. Ax = b, x >= 0 by enumerating all
/// basic solutions of the row-reduced system.
fn vertex_enumeration_opt(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<f64> {
    let nv = c.len();
    let mut mat: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    let rank = row_reduce(&mut mat);
    mat.truncate(rank);
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << nv) {
        if mask.count_ones() as usize != rank {
            continue;
        }
        let cols: Vec<usize> = (0..nv).filter(|&j| mask & (1 << j) != 0).collect();
        // solve the rank x rank system restricted to `cols`
        let mut sys: Vec<Vec<f64>> = mat
            .iter()
            .map(|row| {
                let mut r: Vec<f64> = cols.iter().map(|&j| row[j]).collect();
                r.push(row[nv]);
                r
            })
            .collect();
        let r2 = row_reduce(&mut sys);
        if r2 < rank {
            continue; // singular basis
        }
        let mut x = vec![0.0; nv];
        let mut feasible = true;
        for (k, row) in sys.iter().enumerate() {
            // after full reduction row k reads x_{cols[pivot]} = rhs
            let pivot = (0..rank).find(|&j| (row[j] - 1.0).abs() < 1e-9);
            let Some(pivot) = pivot else {
                feasible = false;
                break;
            };
            let v = row[rank];
            if v < -1e-9 {
                feasible = false;
                break;
            }
            let _ = k;
            x[cols[pivot]] = v.max(0.0);
        }
        if !feasible {
            continue;
        }
        // check the full system (guards against dropped dependent rows)
        let ok = a
            .iter()
            .zip(b)
            .all(|(row, &bi)| (row.iter().zip(&x).map(|(aij, xj)| aij * xj).sum::<f64>() - bi).abs() < 1e-7);
        if !ok {
            continue;
        }
        let val: f64 = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
        best = Some(best.map_or(val, |b: f64| b.min(val)));
    }
    best
}

fn lp_data(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &CostSpec,
) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let n = mu.len();
    let m = nu.len();
    let nv = n * m;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..n {
        let mut row = vec![0.0; nv];
        for j in 0..m {
            row[i * m + j] = 1.0;
        }
        a.push(row);
        b.push(mu.weights()[i]);
    }
    for j in 0..m {
        let mut row = vec![0.0; nv];
        for i in 0..n {
            row[i * m + j] = 1.0;
        }
        a.push(row);
        b.push(nu.weights()[j]);
    }
    for i in 0..n {
        let mut row = vec![0.0; nv];
        for j in 0..m {
            row[i * m + j] = nu.positions()[j] - mu.positions()[i];
        }
        a.push(row);
        b.push(0.0);
    }
    let mut c = vec![0.0; nv];
    for i in 0..n {
        for j in 0..m {
            c[i * m + j] = cost.value(mu.positions()[i], nu.positions()[j]);
        }
    }
    (a, b, c)
}

#[test]
fn a02_primal_matches_vertex_enumeration_on_tiny_instances() {
    let tols = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let shapes: [(usize, usize); 5] = [(3, 1), (4, 2), (5, 2), (6, 2), (4, 3)];
    let mut failures = Vec::new();
    for case in 0..30 {
        let (m, n) = shapes[case % shapes.len()];
        // split m positions into n consecutive non-empty groups
        let mut parts = vec![1usize; n];
        for _ in 0..m - n {
            let k = rng.gen_range(0..n);
            parts[k] += 1;
        }
        let (mu, nu) = random_pair_with_parts(&mut rng, m, &parts);
        if mu.len() * nu.len() > 12 {
            failures.push(format!("case {case}: generator exceeded 12 LP variables"));
            continue;
        }
        let cost = random_cost(&mut rng);
        let (a, b, c) = lp_data(&mu, &nu, &cost);
        let Some(oracle) = vertex_enumeration_opt(&a, &b, &c) else {
            failures.push(format!("case {case}: enumeration found no feasible vertex"));
            continue;
        };
        match solve_primal(&mu, &nu, &cost, &tols) {
            Ok(sol) => {
                if (sol.value - oracle).abs() > 1e-9 {
                    failures.push(format!(
                        "case {case}: solver {:.12} vs enumeration {:.12}",
                        sol.value, oracle
                    ));
                }
            }
            Err(e) => failures.push(format!("case {case}: solver error: {e}")),
        }
    }
    report(2, "primal value matches vertex enumeration", failures);
}

#[test]
fn a03_quadratic_cost_value_is_variance_difference() {
    let tols = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let cost = CostSpec::squared();
    let mut failures = Vec::new();
    for case in 0..50 {
        let (mu, nu) = random_convex_ordered(&mut rng, 20);
        let expected = nu.variance() - mu.variance();
        match solve_primal(&mu, &nu, &cost, &tols) {
            Ok(sol) => {
                if (sol.value - expected).abs() > 1e-9 {
                    failures.push(format!(
                        "case {case}: value {:.12} vs variance difference {:.12}",
                        sol.value, expected
                    ));
                }
            }
            Err(e) => failures.push(format!("case {case}: solver error: {e}")),
        }
    }
    report(3, "quadratic value equals variance difference", failures);
}

fn engineered_multicomponent(rng: &mut ChaCha8Rng) -> (DiscreteMeasure, DiscreteMeasure) {
    let k = rng.gen_range(2..=4);
    let mut mu_atoms = Vec::new();
    let mut nu_atoms = Vec::new();
    for j in 0..k {
        let c = 6.0 * j as f64;
        let mass = rng.gen_range(0.5..1.0);
        let spread = rng.gen_range(0.5..1.5);
        mu_atoms.push((c, mass));
        nu_atoms.push((c - spread, mass / 2.0));
        nu_atoms.push((c + spread, mass / 2.0));
        // shared diagonal atom between components
        let d = rng.gen_range(0.1..0.3);
        mu_atoms.push((c + 3.0, d));
        nu_atoms.push((c + 3.0, d));
    }
    let total: f64 = mu_atoms.iter().map(|&(_, w)| w).sum();
    for a in mu_atoms.iter_mut().chain(nu_atoms.iter_mut()) {
        a.1 /= total;
    }
    (
        DiscreteMeasure::probability(mu_atoms, 1e-9).unwrap(),
        DiscreteMeasure::probability(nu_atoms, 1e-9).unwrap(),
    )
}

fn normalize(measure: &DiscreteMeasure) -> DiscreteMeasure {
    let mass = measure.total_mass();
    DiscreteMeasure::probability(
        measure.atoms().map(|(x, w)| (x, w / mass)).collect(),
        1e-9,
    )
    .unwrap()
}

#[test]
fn a04_decomposition_reassembles_and_is_idempotent() {
    let tols = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut failures = Vec::new();
    for case in 0..100 {
        let (mu, nu) = if case % 5 == 0 {
            engineered_multicomponent(&mut rng)
        } else {
            random_convex_ordered(&mut rng, 16)
        };
        let dec = match decompose(&mu, &nu, &tols) {
            Ok(d) => d,
            Err(e) => {
                failures.push(format!("case {case}: decompose failed: {e}"));
                continue;
            }
        };
        // reassembly: component parts plus the diagonal equal the inputs
        let mut points: Vec<f64> = mu.positions().iter().chain(nu.positions()).copied().collect();
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        points.dedup();
        for &p in &points {
            let mu_sum: f64 = dec.components.iter().map(|c| c.mu.weight_at(p)).sum::<f64>()
                + dec.diagonal.weight_at(p);
            let nu_sum: f64 = dec.components.iter().map(|c| c.nu.weight_at(p)).sum::<f64>()
                + dec.diagonal.weight_at(p);
            if (mu_sum - mu.weight_at(p)).abs() > 1e-9 {
                failures.push(format!("case {case}: first marginal mismatch at {p}"));
            }
            if (nu_sum - nu.weight_at(p)).abs() > 1e-9 {
                failures.push(format!("case {case}: second marginal mismatch at {p}"));
            }
        }
        // the diagonal part is literally shared (mu_0 = nu_0 atomwise by construction);
        // verify it sits where both inputs have mass
        for (x, w) in dec.diagonal.atoms() {
            if mu.weight_at(x) < w - 1e-9 || nu.weight_at(x) < w - 1e-9 {
                failures.push(format!("case {case}: diagonal atom at {x} exceeds input mass"));
            }
        }
        // idempotence: each component decomposes into itself
        for (k, comp) in dec.components.iter().enumerate() {
            let (mu_k, nu_k) = (normalize(&comp.mu), normalize(&comp.nu));
            match decompose(&mu_k, &nu_k, &tols) {
                Ok(again) => {
                    if again.components.len() != 1 {
                        failures.push(format!(
                            "case {case} component {k}: re-decomposition found {} parts",
                            again.components.len()
                        ));
                        continue;
                    }
                    if again.diagonal.total_mass() > 1e-9 {
                        failures.push(format!(
                            "case {case} component {k}: nonzero diagonal on re-decomposition"
                        ));
                    }
                    let inner = &again.components[0];
                    let same = mu_k
                        .atoms()
                        .all(|(x, w)| (inner.mu.weight_at(x) - w).abs() <= 1e-9)
                        && nu_k
                            .atoms()
                            .all(|(x, w)| (inner.nu.weight_at(x) - w).abs() <= 1e-9);
                    if !same {
                        failures.push(format!("case {case} component {k}: not idempotent"));
                    }
                }
                Err(e) => failures.push(format!(
                    "case {case} component {k}: re-decomposition failed: {e}"
                )),
            }
        }
    }
    report(4, "decomposition reassembly and idempotence", failures);
}

#[test]
fn a05_normalized_duals_have_the_required_sign_pattern() {
    let tols = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let costs = [CostSpec::squared(), CostSpec::power(1.0, 1.5).unwrap()];
    let mut failures = Vec::new();
    for case in 0..20 {
        let (mu, nu) = if case % 4 == 0 {
            engineered_multicomponent(&mut rng)
        } else {
            random_convex_ordered(&mut rng, 14)
        };
        let cost = &costs[case % 2];
        let dec = decompose(&mu, &nu, &tols).unwrap();
        let endpoints: Vec<f64> = dec
            .components
            .iter()
            .flat_map(|c| [c.interval.lo, c.interval.hi])
            .collect();
        let grid = evaluation_grid(&mu, &nu, &endpoints, cost, &tols);
        for (k, comp) in dec.components.iter().enumerate() {
            let sol = match solve_primal(&comp.mu, &comp.nu, cost, &tols) {
                Ok(s) => s,
                Err(e) => {
                    failures.push(format!("case {case} component {k}: solve failed: {e}"));
                    continue;
                }
            };
            let raw = recover_component_dual(&comp.mu, &comp.nu, &sol, cost, &grid, &tols).unwrap();
            let (norm, viol) = normalize_component(&raw, &comp.interval, &comp.nu, cost, &tols).unwrap();
            if viol.is_some() {
                failures.push(format!("case {case} component {k}: shape violation reported"));
            }
            // independent exhaustive sweep of the sign pattern
            for (j, &y) in norm.grid.iter().enumerate() {
                let g = norm.g[j];
                if comp.interval.interior_contains(y) {
                    if g > tols.viol_tol {
                        failures.push(format!(
                            "case {case} component {k}: g({y}) = {g:.3e} > 0 inside"
                        ));
                    }
                } else if g < -tols.viol_tol {
                    failures.push(format!(
                        "case {case} component {k}: g({y}) = {g:.3e} < 0 outside"
                    ));
                }
                let at_endpoint = (y - comp.interval.lo).abs() <= 1e-12
                    || (y - comp.interval.hi).abs() <= 1e-12;
                if at_endpoint && comp.nu.weight_at(y) > 0.0 && g.abs() > tols.viol_tol {
                    failures.push(format!(
                        "case {case} component {k}: |g| = {:.3e} at charged endpoint {y}",
                        g.abs()
                    ));
                }
            }
        }
    }
    report(5, "normalized duals keep the component sign pattern", failures);
}

#[test]
fn a06_lipschitz_certification_holds_with_stated_constants() {
    let tols = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut failures = Vec::new();
    for case in 0..50 {
        let (mu, nu) = random_convex_ordered(&mut rng, 12);
        let cost = CostSpec::squared();
        let out = match solve_instance(&mu, &nu, &cost, &tols) {
            Ok(o) => o,
            Err(e) => {
                failures.push(format!("case {case}: solve failed: {e}"));
                continue;
            }
        };
        let grid = &out.triple.grid;
        let j = Interval::closed(grid[0], grid[grid.len() - 1]);
        match lipschitz_postprocess(
            grid,
            &out.triple.g,
            &out.triple.atoms,
            &cost,
            &PiecewiseLinear::zero(),
            &j,
            &tols,
        ) {
            Ok((_, cert)) => {
                let slack = 1e-9;
                if cert.measured_lip_f > cert.bound_lip_f + slack
                    || cert.measured_lip_g > cert.bound_lip_g + slack
                    || cert.measured_sup_h > cert.bound_sup_h + slack
                    || !cert.pass
                {
                    failures.push(format!(
                        "case {case}: measured ({:.4}, {:.4}, {:.4}) vs bounds ({:.4}, {:.4}, {:.4})",
                        cert.measured_lip_f,
                        cert.measured_lip_g,
                        cert.measured_sup_h,
                        cert.bound_lip_f,
                        cert.bound_lip_g,
                        cert.bound_sup_h
                    ));
                }
            }
            Err(e) => failures.push(format!("case {case}: postprocess failed: {e}")),
        }
    }
    // equal moduli specialize the printed constants
    let l = 2.0;
    let cert = LipschitzCertificate {
        l1: l,
        l2: l,
        measured_lip_f: 0.0,
        measured_lip_g: 0.0,
        measured_sup_h: 0.0,
        bound_lip_f: l + 3.0 * (l + l),
        bound_lip_g: 2.0 * (l + l) + l,
        bound_sup_h: 3.0 * (l + l),
        pass: true,
    };
    let text = cert.describe_bounds();
    for needle in ["7L", "5L", "6L"] {
        if !text.contains(needle) {
            failures.push(format!("specialized description missing {needle}: {text}"));
        }
    }
    report(6, "Lipschitz bounds certified on 50 instances", failures);
}

#[test]
fn a07_linear_growth_family_diverges_with_exact_probes() {
    let tols = Tolerances::default();
    let mut failures = Vec::new();
    match linear_growth_profile(&[4, 8, 16], &tols) {
        Ok((verdict, probes)) => {
            if verdict.converged {
                failures.push("profile reported convergence".into());
            }
            let expected = [-3.0, -7.0, -15.0];
            if probes.len() != expected.len() {
                failures.push(format!("expected 3 probes, got {}", probes.len()));
            } else {
                for (k, (&got, &want)) in probes.iter().zip(&expected).enumerate() {
                    if got != want {
                        failures.push(format!("probe {k}: got {got}, want {want} exactly"));
                    }
                }
            }
        }
        Err(e) => failures.push(format!("profile failed: {e}")),
    }
    report(7, "linear-growth family has no normalized limit", failures);
}

#[test]
fn a08_local_convexity_family_slope_gaps_and_log_decrease() {
    let tols = Tolerances::default();
    let mut failures = Vec::new();
    match local_convexity_diagnostic(32, &tols) {
        Ok(d) => {
            for (n, &gap) in d.slope_gaps.iter().enumerate() {
                if gap < 1.0 - 1e-6 {
                    failures.push(format!("slope gap {gap:.8} < 1 at interior index {n}"));
                }
            }
        }
        Err(e) => failures.push(format!("diagnostic failed at level 32: {e}")),
    }
    // frozen regression: statistic tracks -ln N + C with C fitted once
    let frozen_c = 1.0;
    let mut stats = Vec::new();
    for n in [8usize, 16, 32, 64] {
        match local_convexity_diagnostic(n, &tols) {
            Ok(d) => {
                let model = -(n as f64).ln() + frozen_c;
                if (d.statistic - model).abs() > 0.25 * model.abs() {
                    failures.push(format!(
                        "level {n}: statistic {:.4} outside 25% of model {model:.4}",
                        d.statistic
                    ));
                }
                stats.push(d.statistic);
            }
            Err(e) => failures.push(format!("diagnostic failed at level {n}: {e}")),
        }
    }
    if stats.windows(2).any(|w| w[1] >= w[0]) {
        failures.push(format!("statistic is not strictly decreasing: {stats:?}"));
    }
    report(8, "local-convexity family: unit slope gaps, log decrease", failures);
}

#[test]
fn a09_chord_slope_family_matches_power_law_and_is_non_cauchy() {
    let tols = Tolerances::default();
    let (r, s) = (1.5, 1.2);
    let expected_slope = s - s * r; // -0.6
    let mut failures = Vec::new();
    match cr_diagnostic(r, s, 64, &tols) {
        Ok(d) => {
            if (d.loglog_slope - expected_slope).abs() > 0.3 {
                failures.push(format!(
                    "log-log slope {:.4} not within 0.3 of {expected_slope}",
                    d.loglog_slope
                ));
            }
        }
        Err(e) => failures.push(format!("diagnostic failed at level 64: {e}")),
    }
    let mut cumulative = Vec::new();
    for n in [16usize, 32, 64] {
        match cr_diagnostic(r, s, n, &tols) {
            Ok(d) => cumulative.push(d.cumulative),
            Err(e) => failures.push(format!("diagnostic failed at level {n}: {e}")),
        }
    }
    for w in cumulative.windows(2) {
        if (w[1] - w[0]).abs() < 1.0 {
            failures.push(format!(
                "cumulative sums look Cauchy: consecutive gap {:.3e}",
                (w[1] - w[0]).abs()
            ));
        }
    }
    report(9, "chord-slope family: power-law drops, divergent sums", failures);
}

#[test]
fn a10_nonintegrable_family_duality_and_log_decay() {
    let tols = Tolerances::default();
    // frozen regression values for nu(g) at levels 16, 64, 256
    let frozen: [(usize, f64); 3] = [(16, -5.478216), (64, -8.250500), (256, -11.023070)];
    let mut failures = Vec::new();
    let mut values = Vec::new();
    for &(k, frozen_v) in &frozen {
        match gen_nonintegrable(k) {
            Ok(inst) => {
                match mot::dual::verify_duality(
                    &inst.triple,
                    &inst.mu,
                    &inst.nu,
                    &inst.cost,
                    &inst.coupling,
                    &tols,
                ) {
                    Ok(rep) => {
                        if rep.gap > 1e-6 || rep.max_ineq_violation > 1e-6 {
                            failures.push(format!(
                                "level {k}: gap {:.3e}, violation {:.3e}",
                                rep.gap, rep.max_ineq_violation
                            ));
                        }
                    }
                    Err(e) => failures.push(format!("level {k}: verification failed: {e}")),
                }
                if (inst.nu_g - frozen_v).abs() > 0.25 * frozen_v.abs() {
                    failures.push(format!(
                        "level {k}: nu(g) = {:.4} outside 25% of frozen {frozen_v:.4}",
                        inst.nu_g
                    ));
                }
                values.push(inst.nu_g);
            }
            Err(e) => failures.push(format!("level {k}: generation failed: {e}")),
        }
    }
    // at least logarithmic decrease between consecutive levels (factor 4)
    let min_drop = 0.5 * 4.0f64.ln();
    for w in values.windows(2) {
        if w[0] - w[1] < min_drop {
            failures.push(format!(
                "nu(g) drop {:.4} smaller than logarithmic {min_drop:.4}",
                w[0] - w[1]
            ));
        }
    }
    report(10, "nonintegrable family: exact duality, log decay of nu(g)", failures);
}

#[test]
fn a11_envelope_oracles_match_brute_force_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let mut failures = Vec::new();
    // concave envelope vs. pairwise-chord maximum
    for case in 0..100 {
        let n = 20;
        let mut xs = Vec::with_capacity(n);
        let mut x = rng.gen_range(-5.0..-4.0);
        for _ in 0..n {
            x += rng.gen_range(0.1..1.0);
            xs.push(x);
        }
        let vs: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let env = concave_envelope(&xs, &vs).unwrap();
        for k in 0..n {
            let t = xs[k];
            let mut oracle = vs[k];
            for i in 0..n {
                for j in i + 1..n {
                    if xs[i] <= t && t <= xs[j] {
                        let chord = vs[i] + (vs[j] - vs[i]) * (t - xs[i]) / (xs[j] - xs[i]);
                        if chord > oracle {
                            oracle = chord;
                        }
                    }
                }
            }
            let got = env.eval(t);
            // the oracle scans all chords, so at interior points it can
            // exceed the hull-edge interpolation by a few ulps
            if (got - oracle).abs() > 1e-14 * (1.0 + oracle.abs()) {
                failures.push(format!(
                    "concave case {case}: value {got:.17} vs chord oracle {oracle:.17} at {t}"
                ));
            }
        }
    }
    // lower envelope of affine-plus-cost vs. double loop
    let cost = CostSpec::squared();
    for case in 0..100 {
        let na = rng.gen_range(2..=6);
        let atoms: Vec<f64> = {
            let mut a = Vec::with_capacity(na);
            let mut x = rng.gen_range(-2.0..-1.0);
            for _ in 0..na {
                x += rng.gen_range(0.2..1.0);
                a.push(x);
            }
            a
        };
        let f: Vec<f64> = (0..na).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let h: Vec<f64> = (0..na).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let grid: Vec<f64> = (0..30).map(|k| -3.0 + 0.2 * k as f64).collect();
        let got = envelope_g(&atoms, &f, &h, &cost, &grid).unwrap();
        for (idx, &y) in grid.iter().enumerate() {
            let mut best = f64::INFINITY;
            for (i, &x) in atoms.iter().enumerate() {
                let v = f[i] + h[i] * (y - x) + cost.value(x, y);
                if v < best {
                    best = v;
                }
            }
            if got[idx] != best {
                failures.push(format!(
                    "envelope case {case}: {:.17} vs double-loop {best:.17} at y = {y}",
                    got[idx]
                ));
            }
        }
    }
    report(11, "envelope routines match brute-force oracles exactly", failures);
}
