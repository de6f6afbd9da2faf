//! Batch front door for the martingale transport library: instance
//! ingestion, pipeline orchestration, machine-readable reports, and
//! plot-data emission.

mod formats;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use formats::{
    cost_from_file, coupling_from_support, coupling_to_support, instance_from_parts,
    solution_from_file, solution_to_file, CertificateFile, ComponentsReport, GlueViolationFile,
    InstanceFile, OptionsFile, RunReport, ShapeViolationFile, Timings, TolValues, Verdicts,
    FORMAT_VERSION,
};
use mot::config::Tolerances;
use mot::counterexamples::{
    cr_diagnostic, gen_cr_cost, gen_linear_growth, gen_local_convexity, gen_nonintegrable,
    linear_growth_profile, local_convexity_diagnostic,
};
use mot::decomposition::decompose;
use mot::dual::verify_duality;
use mot::error::MotError;
use mot::measures::{check_convex_order, union_grid, DiscreteMeasure, Interval};
use mot::pipeline::solve_instance;
use mot::pwl::PiecewiseLinear;
use mot::regularity::{auto_convexifier, lipschitz_postprocess};

/// One-dimensional martingale optimal transport on finitely supported
/// measures: primal LP, dual construction, verification, and
/// divergence diagnostics.
#[derive(Parser)]
#[command(name = "mot", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonOpts {
    /// Tolerance override as KEY=VALUE (repeatable); keys: mass_tol,
    /// order_tol, gap_tol, eq_tol, viol_tol, supp_tol, conv_tol.
    #[arg(long = "tol", value_name = "KEY=VALUE")]
    tol: Vec<String>,
    /// Solve LPs in exact rational arithmetic.
    #[arg(long)]
    exact: bool,
    /// Extra evaluation-grid points between adjacent nodes.
    #[arg(long, value_name = "N")]
    grid_refine: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Check whether the marginals are in convex order.
    CheckOrder {
        instance: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Split the pair into irreducible components and a diagonal part.
    Decompose {
        instance: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Solve the primal LP, build and verify a dual maximizer.
    Solve {
        instance: PathBuf,
        /// Write the full JSON report here (stdout otherwise).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Directory for potentials.csv, dual.csv, coupling.csv.
        #[arg(long, value_name = "DIR")]
        csv_out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Regularity post-process: regenerate (f, h) with certified
    /// Lipschitz constants.
    Smooth {
        instance: PathBuf,
        /// JSON file with convexifier knots [[y, value], ...].
        #[arg(long, value_name = "FILE", conflicts_with = "auto_u")]
        u: Option<PathBuf>,
        /// Derive a quadratic convexifier from the cost's second
        /// differences on the grid.
        #[arg(long)]
        auto_u: bool,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Generate a divergence-diagnostic family and run its check.
    Example {
        family: Family,
        /// Truncation level (linear, local-convexity, cr families).
        #[arg(long, default_value_t = 16)]
        n: usize,
        /// Atom count for the nonintegrable family.
        #[arg(long, default_value_t = 16)]
        k: usize,
        /// Cost exponent for the cr family.
        #[arg(long, default_value_t = 1.5)]
        r: f64,
        /// Grid-gap exponent for the cr family.
        #[arg(long, default_value_t = 1.2)]
        s: f64,
        /// Write the generated instance file here.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Re-verify a saved solve report.
    Report {
        saved: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Linear,
    LocalConvexity,
    Cr,
    Nonintegrable,
}

/// CLI failure with its exit code: 2 parse, 3 infeasible, 4 verification.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn infeasible(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }

    fn verification(message: impl Into<String>) -> Self {
        Failure {
            code: 4,
            message: message.into(),
        }
    }
}

impl From<MotError> for Failure {
    fn from(e: MotError) -> Self {
        match e {
            MotError::NotInConvexOrder { .. } => Failure::infeasible(e.to_string()),
            MotError::InvalidMeasure(_)
            | MotError::BadParameters(_)
            | MotError::DimensionMismatch(_) => Failure::parse(e.to_string()),
            other => Failure::verification(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::parse(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::parse(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::CheckOrder { instance, common } => cmd_check_order(&instance, &common),
        Command::Decompose {
            instance,
            out,
            common,
        } => cmd_decompose(&instance, out.as_deref(), &common),
        Command::Solve {
            instance,
            out,
            csv_out,
            common,
        } => cmd_solve(&instance, out.as_deref(), csv_out.as_deref(), &common),
        Command::Smooth {
            instance,
            u,
            auto_u,
            out,
            common,
        } => cmd_smooth(&instance, u.as_deref(), auto_u, out.as_deref(), &common),
        Command::Example {
            family,
            n,
            k,
            r,
            s,
            out,
            common,
        } => cmd_example(family, n, k, r, s, out.as_deref(), &common),
        Command::Report { saved, common } => cmd_report(&saved, &common),
    }
}

fn load_instance(path: &Path) -> Result<InstanceFile, Failure> {
    let text = std::fs::read_to_string(path)?;
    let file: InstanceFile = serde_json::from_str(&text)?;
    if file.format != FORMAT_VERSION {
        return Err(Failure::parse(format!(
            "unsupported format {} (expected {FORMAT_VERSION})",
            file.format
        )));
    }
    Ok(file)
}

/// Resolves tolerances with precedence: defaults < instance options <
/// MOT_TOL_OVERRIDES < command-line flags.
fn resolve_tolerances(
    options: Option<&OptionsFile>,
    common: &CommonOpts,
) -> Result<Tolerances, Failure> {
    let mut tols = Tolerances::default();
    if let Some(options) = options {
        options.apply(&mut tols);
    }
    if let Ok(env) = std::env::var("MOT_TOL_OVERRIDES") {
        let overrides: TolValues = serde_json::from_str(&env)
            .map_err(|e| Failure::parse(format!("MOT_TOL_OVERRIDES: {e}")))?;
        overrides.apply(&mut tols);
    }
    let mut flag_values = TolValues::default();
    for entry in &common.tol {
        let (key, value) = entry
            .split_once('=')
            .ok_or_else(|| Failure::parse(format!("--tol expects KEY=VALUE, got '{entry}'")))?;
        let value: f64 = value
            .parse()
            .map_err(|e| Failure::parse(format!("--tol {key}: {e}")))?;
        flag_values.set(key.trim(), value).map_err(Failure::parse)?;
    }
    flag_values.apply(&mut tols);
    if let Some(n) = common.grid_refine {
        tols.grid_refine = n;
    }
    if common.exact {
        tols.exact_mode = true;
    }
    Ok(tols)
}

fn build_measures(
    file: &InstanceFile,
    tols: &Tolerances,
) -> Result<(DiscreteMeasure, DiscreteMeasure), Failure> {
    let mu = DiscreteMeasure::probability(file.mu.clone(), tols.mass_tol)
        .map_err(|e| Failure::parse(format!("mu: {e}")))?;
    let nu = DiscreteMeasure::probability(file.nu.clone(), tols.mass_tol)
        .map_err(|e| Failure::parse(format!("nu: {e}")))?;
    Ok((mu, nu))
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_check_order(instance: &Path, common: &CommonOpts) -> Result<(), Failure> {
    let file = load_instance(instance)?;
    let tols = resolve_tolerances(file.options.as_ref(), common)?;
    let (mu, nu) = build_measures(&file, &tols)?;
    let report = check_convex_order(&mu, &nu, &tols);
    emit(
        &json!({
            "format": FORMAT_VERSION,
            "ordered": report.ordered,
            "witness": report.witness,
            "mean_mu": mu.mean(),
            "mean_nu": nu.mean(),
        }),
        None,
    )?;
    if report.ordered {
        Ok(())
    } else {
        Err(Failure::infeasible(
            "marginals are not in convex order".to_string(),
        ))
    }
}

fn cmd_decompose(
    instance: &Path,
    out: Option<&Path>,
    common: &CommonOpts,
) -> Result<(), Failure> {
    let file = load_instance(instance)?;
    let tols = resolve_tolerances(file.options.as_ref(), common)?;
    let (mu, nu) = build_measures(&file, &tols)?;
    let dec = decompose(&mu, &nu, &tols)?;
    emit(
        &json!({
            "format": FORMAT_VERSION,
            "components": components_report(&dec),
        }),
        out,
    )
}

fn components_report(dec: &mot::decomposition::ComponentDecomposition) -> ComponentsReport {
    ComponentsReport {
        count: dec.components.len(),
        intervals: dec
            .components
            .iter()
            .map(|c| (c.interval.lo, c.interval.hi))
            .collect(),
        diagonal_mass: dec.diagonal.total_mass(),
    }
}

fn cmd_solve(
    instance: &Path,
    out: Option<&Path>,
    csv_out: Option<&Path>,
    common: &CommonOpts,
) -> Result<(), Failure> {
    let total = Instant::now();
    let file = load_instance(instance)?;
    let tols = resolve_tolerances(file.options.as_ref(), common)?;
    let (mu, nu) = build_measures(&file, &tols)?;
    let cost = cost_from_file(&file.cost)?;

    let solve_start = Instant::now();
    let outcome = solve_instance(&mu, &nu, &cost, &tols)?;
    let solve_ms = solve_start.elapsed().as_secs_f64() * 1e3;

    let dual_value = nu.integrate(
        &nu.positions()
            .iter()
            .map(|&y| outcome.triple.g_at(y).unwrap_or(f64::NAN))
            .collect::<Vec<_>>(),
    ) - mu.integrate(&outcome.triple.f);

    let report = RunReport {
        format: FORMAT_VERSION,
        convex_order: true,
        components: components_report(&outcome.decomposition),
        primal_value: outcome.value,
        dual_value,
        gap: outcome.report.gap,
        max_ineq_violation: outcome.report.max_ineq_violation,
        max_support_residual: outcome.report.max_support_residual,
        lipschitz_certificate: None,
        verdicts: Verdicts {
            shape_violations: outcome
                .shape_violations
                .iter()
                .map(|(k, v)| ShapeViolationFile {
                    component: *k,
                    max_inside: v.max_inside,
                    min_outside: v.min_outside,
                    endpoint_dev: v.endpoint_dev,
                    worst_point: v.worst_point,
                })
                .collect(),
            glue_violation: outcome.glue_violation.as_ref().map(|v| GlueViolationFile {
                x: v.x,
                y: v.y,
                residual: v.residual,
            }),
            used_fallback: outcome.used_fallback,
        },
        timings: Timings {
            solve_ms,
            total_ms: total.elapsed().as_secs_f64() * 1e3,
        },
        instance: file,
        solution: solution_to_file(&outcome.triple),
        coupling: coupling_to_support(&outcome.coupling, tols.supp_tol),
    };
    emit(&report, out)?;

    if let Some(dir) = csv_out {
        write_csvs(dir, &mu, &nu, &outcome)?;
    }

    let scale = 1.0 + outcome.value.abs();
    if outcome.report.gap > tols.gap_tol * scale
        || outcome.report.max_ineq_violation > tols.viol_tol
    {
        return Err(Failure::verification(format!(
            "duality gap {:.3e} or violation {:.3e} beyond tolerance",
            outcome.report.gap, outcome.report.max_ineq_violation
        )));
    }
    Ok(())
}

fn write_csvs(
    dir: &Path,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    outcome: &mot::pipeline::SolveOutcome,
) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)?;
    let to_failure = |e: csv::Error| Failure::parse(e.to_string());

    let mut w = csv::Writer::from_path(dir.join("potentials.csv")).map_err(to_failure)?;
    w.write_record(["x", "u_mu", "u_nu"]).map_err(to_failure)?;
    for &x in &union_grid(&[mu, nu]) {
        w.write_record([
            format!("{x}"),
            format!("{}", mu.potential(x)),
            format!("{}", nu.potential(x)),
        ])
        .map_err(to_failure)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("dual.csv")).map_err(to_failure)?;
    w.write_record(["point", "f", "g", "h"]).map_err(to_failure)?;
    let triple = &outcome.triple;
    for (k, &y) in triple.grid.iter().enumerate() {
        let (f, h) = match triple.atom_index(y) {
            Some(i) => (format!("{}", triple.f[i]), format!("{}", triple.h[i])),
            None => (String::new(), String::new()),
        };
        w.write_record([format!("{y}"), f, format!("{}", triple.g[k]), h])
            .map_err(to_failure)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("coupling.csv")).map_err(to_failure)?;
    w.write_record(["i", "j", "x", "y", "pi"]).map_err(to_failure)?;
    for (i, row) in outcome.coupling.pi.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if p > 0.0 {
                w.write_record([
                    format!("{i}"),
                    format!("{j}"),
                    format!("{}", outcome.coupling.row_positions[i]),
                    format!("{}", outcome.coupling.col_positions[j]),
                    format!("{p}"),
                ])
                .map_err(to_failure)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_smooth(
    instance: &Path,
    u_file: Option<&Path>,
    auto_u: bool,
    out: Option<&Path>,
    common: &CommonOpts,
) -> Result<(), Failure> {
    if u_file.is_none() && !auto_u {
        return Err(Failure::parse(
            "smooth requires either --u FILE or --auto-u",
        ));
    }
    let file = load_instance(instance)?;
    let tols = resolve_tolerances(file.options.as_ref(), common)?;
    let (mu, nu) = build_measures(&file, &tols)?;
    let cost = cost_from_file(&file.cost)?;

    // base solve fixes the evaluation grid and the atoms
    let base = solve_instance(&mu, &nu, &cost, &tols)?;
    let u = match u_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let knots: Vec<(f64, f64)> = serde_json::from_str(&text)?;
            let (xs, vs): (Vec<f64>, Vec<f64>) = knots.into_iter().unzip();
            PiecewiseLinear::new(xs, vs)?
        }
        None => auto_convexifier(&base.triple.atoms, &base.triple.grid, &cost)?,
    };

    // solve for the shifted cost and post-process its dual
    let shifted = mot::cost::CostSpec::shifted(cost.clone(), u.clone());
    let outcome = solve_instance(&mu, &nu, &shifted, &tols)?;
    let grid = &outcome.triple.grid;
    let j = Interval::closed(grid[0], grid[grid.len() - 1]);
    let (smoothed, cert) = lipschitz_postprocess(
        grid,
        &outcome.triple.g,
        &outcome.triple.atoms,
        &cost,
        &u,
        &j,
        &tols,
    )?;

    emit(
        &json!({
            "format": FORMAT_VERSION,
            "u_knots": u.knots().collect::<Vec<_>>(),
            "certificate": CertificateFile {
                l1: cert.l1,
                l2: cert.l2,
                measured_lip_f: cert.measured_lip_f,
                measured_lip_g: cert.measured_lip_g,
                measured_sup_h: cert.measured_sup_h,
                bound_lip_f: cert.bound_lip_f,
                bound_lip_g: cert.bound_lip_g,
                bound_sup_h: cert.bound_sup_h,
                pass: cert.pass,
                description: cert.describe_bounds(),
            },
            "smoothed": {
                "atoms": smoothed.atoms,
                "f": smoothed.f,
                "h": smoothed.h,
                "grid": smoothed.grid,
                "g": smoothed.g,
            },
        }),
        out,
    )?;
    if cert.pass {
        Ok(())
    } else {
        Err(Failure::verification(
            "Lipschitz bounds not met by the post-processed triple".to_string(),
        ))
    }
}

fn cmd_example(
    family: Family,
    n: usize,
    k: usize,
    r: f64,
    s: f64,
    out: Option<&Path>,
    common: &CommonOpts,
) -> Result<(), Failure> {
    let tols = resolve_tolerances(None, common)?;
    match family {
        Family::Linear => {
            let fam = gen_linear_growth(n)?;
            if let Some(path) = out {
                emit(&instance_from_parts(&fam.mu, &fam.nu, &fam.cost), Some(path))?;
            }
            let levels: Vec<usize> = [4usize, 8, 16]
                .iter()
                .copied()
                .filter(|&l| l <= n.max(4))
                .collect();
            let (verdict, probes) = linear_growth_profile(&levels, &tols)?;
            emit(
                &json!({
                    "format": FORMAT_VERSION,
                    "family": "linear",
                    "levels": levels,
                    "converged": verdict.converged,
                    "profile": verdict.profile,
                    "probes": probes,
                }),
                None,
            )
        }
        Family::LocalConvexity => {
            let fam = gen_local_convexity(n)?;
            if let Some(path) = out {
                emit(&instance_from_parts(&fam.mu, &fam.nu, &fam.cost), Some(path))?;
            }
            let diag = local_convexity_diagnostic(n, &tols)?;
            let min_gap = diag
                .slope_gaps
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            emit(
                &json!({
                    "format": FORMAT_VERSION,
                    "family": "local-convexity",
                    "level": n,
                    "h": diag.h,
                    "slope_gaps": diag.slope_gaps,
                    "min_slope_gap": min_gap,
                    "slope_decrease_check": min_gap >= 1.0 - 1e-6,
                    "statistic": diag.statistic,
                }),
                None,
            )
        }
        Family::Cr => {
            let fam = gen_cr_cost(r, s, n)?;
            if let Some(path) = out {
                emit(&instance_from_parts(&fam.mu, &fam.nu, &fam.cost), Some(path))?;
            }
            let diag = cr_diagnostic(r, s, n, &tols)?;
            emit(
                &json!({
                    "format": FORMAT_VERSION,
                    "family": "cr",
                    "level": n,
                    "r": r,
                    "s": s,
                    "chord_slopes": diag.b,
                    "loglog_slope": diag.loglog_slope,
                    "cumulative": diag.cumulative,
                }),
                None,
            )
        }
        Family::Nonintegrable => {
            let inst = gen_nonintegrable(k)?;
            if let Some(path) = out {
                emit(&instance_from_parts(&inst.mu, &inst.nu, &inst.cost), Some(path))?;
            }
            let report =
                verify_duality(&inst.triple, &inst.mu, &inst.nu, &inst.cost, &inst.coupling, &tols)?;
            emit(
                &json!({
                    "format": FORMAT_VERSION,
                    "family": "nonintegrable",
                    "level": k,
                    "nu_g": inst.nu_g,
                    "gap": report.gap,
                    "max_ineq_violation": report.max_ineq_violation,
                    "max_support_residual": report.max_support_residual,
                }),
                None,
            )
        }
    }
}

fn cmd_report(saved: &Path, common: &CommonOpts) -> Result<(), Failure> {
    let text = std::fs::read_to_string(saved)?;
    let report: RunReport = serde_json::from_str(&text)?;
    if report.format != FORMAT_VERSION {
        return Err(Failure::parse(format!(
            "unsupported format {} (expected {FORMAT_VERSION})",
            report.format
        )));
    }
    let tols = resolve_tolerances(report.instance.options.as_ref(), common)?;
    let (mu, nu) = build_measures(&report.instance, &tols)?;
    let cost = cost_from_file(&report.instance.cost)?;
    let triple = solution_from_file(&report.solution);
    let coupling = coupling_from_support(&mu, &nu, &report.coupling, &cost)?;
    let verification = verify_duality(&triple, &mu, &nu, &cost, &coupling, &tols)?;

    let scale = 1.0 + coupling.value.abs();
    let agrees = (verification.gap - report.gap).abs() <= 1e-12 * scale
        && (verification.max_ineq_violation - report.max_ineq_violation).abs() <= 1e-12
        && (verification.max_support_residual - report.max_support_residual).abs() <= 1e-12;

    emit(
        &json!({
            "format": FORMAT_VERSION,
            "primal_value": coupling.value,
            "gap": verification.gap,
            "max_ineq_violation": verification.max_ineq_violation,
            "max_support_residual": verification.max_support_residual,
            "matches_saved_report": agrees,
        }),
        None,
    )?;

    if !agrees {
        return Err(Failure::verification(
            "re-verification differs from the saved report".to_string(),
        ));
    }
    if verification.gap > tols.gap_tol * scale
        || verification.max_ineq_violation > tols.viol_tol
    {
        return Err(Failure::verification(format!(
            "saved solution fails verification: gap {:.3e}, violation {:.3e}",
            verification.gap, verification.max_ineq_violation
        )));
    }
    Ok(())
}
