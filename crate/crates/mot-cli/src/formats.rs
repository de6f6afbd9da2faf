//! Versioned JSON file formats: instances, run reports, and the
//! tolerance-override blocks shared by files, environment, and flags.

use mot::config::Tolerances;
use mot::cost::CostSpec;
use mot::dual::{Affine, ComponentTag, DualTriple};
use mot::error::MotError;
use mot::measures::DiscreteMeasure;
use mot::primal::Coupling;
use mot::pwl::PiecewiseLinear;
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub format: u32,
    /// Atoms as [position, weight] pairs.
    pub mu: Vec<(f64, f64)>,
    pub nu: Vec<(f64, f64)>,
    pub cost: CostFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<OptionsFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CostFile {
    Power {
        sign: f64,
        exponent: f64,
    },
    Grid {
        xs: Vec<f64>,
        ys: Vec<f64>,
        /// Row-major: values[i][j] = c(xs[i], ys[j]).
        values: Vec<Vec<f64>>,
    },
    Shifted {
        base: Box<CostFile>,
        u_knots: Vec<(f64, f64)>,
    },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TolValues {
    pub mass_tol: Option<f64>,
    pub order_tol: Option<f64>,
    pub gap_tol: Option<f64>,
    pub eq_tol: Option<f64>,
    pub viol_tol: Option<f64>,
    pub supp_tol: Option<f64>,
    pub conv_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptionsFile {
    pub tolerances: Option<TolValues>,
    pub grid_refine: Option<usize>,
    pub exact_mode: Option<bool>,
}

impl TolValues {
    pub fn apply(&self, tols: &mut Tolerances) {
        if let Some(v) = self.mass_tol {
            tols.mass_tol = v;
        }
        if let Some(v) = self.order_tol {
            tols.order_tol = v;
        }
        if let Some(v) = self.gap_tol {
            tols.gap_tol = v;
        }
        if let Some(v) = self.eq_tol {
            tols.eq_tol = v;
        }
        if let Some(v) = self.viol_tol {
            tols.viol_tol = v;
        }
        if let Some(v) = self.supp_tol {
            tols.supp_tol = v;
        }
        if let Some(v) = self.conv_tol {
            tols.conv_tol = v;
        }
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<(), String> {
        let slot = match key {
            "mass_tol" => &mut self.mass_tol,
            "order_tol" => &mut self.order_tol,
            "gap_tol" => &mut self.gap_tol,
            "eq_tol" => &mut self.eq_tol,
            "viol_tol" => &mut self.viol_tol,
            "supp_tol" => &mut self.supp_tol,
            "conv_tol" => &mut self.conv_tol,
            other => return Err(format!("unknown tolerance key '{other}'")),
        };
        *slot = Some(value);
        Ok(())
    }
}

impl OptionsFile {
    pub fn apply(&self, tols: &mut Tolerances) {
        if let Some(t) = &self.tolerances {
            t.apply(tols);
        }
        if let Some(v) = self.grid_refine {
            tols.grid_refine = v;
        }
        if let Some(v) = self.exact_mode {
            tols.exact_mode = v;
        }
    }
}

pub fn cost_to_file(cost: &CostSpec) -> CostFile {
    match cost {
        CostSpec::Power { sign, exponent } => CostFile::Power {
            sign: *sign,
            exponent: *exponent,
        },
        CostSpec::Grid { xs, ys, values } => CostFile::Grid {
            xs: xs.clone(),
            ys: ys.clone(),
            values: values.clone(),
        },
        CostSpec::Shifted { base, shift } => CostFile::Shifted {
            base: Box::new(cost_to_file(base)),
            u_knots: shift.knots().collect(),
        },
    }
}

pub fn cost_from_file(file: &CostFile) -> Result<CostSpec, MotError> {
    match file {
        CostFile::Power { sign, exponent } => CostSpec::power(*sign, *exponent),
        CostFile::Grid { xs, ys, values } => {
            CostSpec::grid(xs.clone(), ys.clone(), values.clone())
        }
        CostFile::Shifted { base, u_knots } => {
            let (xs, vs): (Vec<f64>, Vec<f64>) = u_knots.iter().copied().unzip();
            Ok(CostSpec::shifted(
                cost_from_file(base)?,
                PiecewiseLinear::new(xs, vs)?,
            ))
        }
    }
}

pub fn measure_to_atoms(m: &DiscreteMeasure) -> Vec<(f64, f64)> {
    m.atoms().collect()
}

pub fn instance_from_parts(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &CostSpec,
) -> InstanceFile {
    InstanceFile {
        format: FORMAT_VERSION,
        mu: measure_to_atoms(mu),
        nu: measure_to_atoms(nu),
        cost: cost_to_file(cost),
        options: None,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub atoms: Vec<f64>,
    pub f: Vec<f64>,
    pub h: Vec<f64>,
    pub grid: Vec<f64>,
    pub g: Vec<f64>,
    /// Component index per grid point; -1 marks the diagonal part.
    pub component_tag: Vec<i64>,
    /// Affine normalizations applied per component, as (slope, intercept).
    pub normalization: Vec<(f64, f64)>,
}

pub fn solution_to_file(triple: &DualTriple) -> SolutionFile {
    SolutionFile {
        atoms: triple.atoms.clone(),
        f: triple.f.clone(),
        h: triple.h.clone(),
        grid: triple.grid.clone(),
        g: triple.g.clone(),
        component_tag: triple
            .component_tag
            .iter()
            .map(|t| match t {
                ComponentTag::Component(k) => *k as i64,
                ComponentTag::Diagonal => -1,
            })
            .collect(),
        normalization: triple
            .normalization
            .iter()
            .map(|a| (a.slope, a.intercept))
            .collect(),
    }
}

pub fn solution_from_file(file: &SolutionFile) -> DualTriple {
    DualTriple {
        atoms: file.atoms.clone(),
        f: file.f.clone(),
        h: file.h.clone(),
        grid: file.grid.clone(),
        g: file.g.clone(),
        component_tag: file
            .component_tag
            .iter()
            .map(|&t| {
                if t < 0 {
                    ComponentTag::Diagonal
                } else {
                    ComponentTag::Component(t as usize)
                }
            })
            .collect(),
        normalization: file
            .normalization
            .iter()
            .map(|&(slope, intercept)| Affine { slope, intercept })
            .collect(),
    }
}

pub fn coupling_to_support(coupling: &Coupling, supp_tol: f64) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for (i, row) in coupling.pi.iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            if w > supp_tol {
                out.push((i, j, w));
            }
        }
    }
    out
}

pub fn coupling_from_support(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    support: &[(usize, usize, f64)],
    cost: &CostSpec,
) -> Result<Coupling, MotError> {
    let mut pi = vec![vec![0.0; nu.len()]; mu.len()];
    for &(i, j, w) in support {
        if i >= mu.len() || j >= nu.len() {
            return Err(MotError::DimensionMismatch(format!(
                "coupling entry ({i}, {j}) outside {} x {}",
                mu.len(),
                nu.len()
            )));
        }
        pi[i][j] = w;
    }
    let mut coupling = Coupling {
        row_positions: mu.positions().to_vec(),
        col_positions: nu.positions().to_vec(),
        pi,
        value: 0.0,
    };
    coupling.value = coupling.expectation(cost)?;
    Ok(coupling)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentsReport {
    pub count: usize,
    pub intervals: Vec<(f64, f64)>,
    pub diagonal_mass: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeViolationFile {
    pub component: usize,
    pub max_inside: f64,
    pub min_outside: f64,
    pub endpoint_dev: f64,
    pub worst_point: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlueViolationFile {
    pub x: f64,
    pub y: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Verdicts {
    pub shape_violations: Vec<ShapeViolationFile>,
    pub glue_violation: Option<GlueViolationFile>,
    pub used_fallback: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub l1: f64,
    pub l2: f64,
    pub measured_lip_f: f64,
    pub measured_lip_g: f64,
    pub measured_sup_h: f64,
    pub bound_lip_f: f64,
    pub bound_lip_g: f64,
    pub bound_sup_h: f64,
    pub pass: bool,
    pub description: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timings {
    pub solve_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub format: u32,
    pub convex_order: bool,
    pub components: ComponentsReport,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub max_ineq_violation: f64,
    pub max_support_residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz_certificate: Option<CertificateFile>,
    pub verdicts: Verdicts,
    pub timings: Timings,
    pub instance: InstanceFile,
    pub solution: SolutionFile,
    /// Support entries of the optimal coupling as (i, j, mass).
    pub coupling: Vec<(usize, usize, f64)>,
}
