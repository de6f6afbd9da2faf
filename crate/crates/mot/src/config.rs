/// Tolerances and switches shared across the pipeline.
///
/// All fields are plain data so callers can tweak individual knobs;
/// `Default` gives the values the test suite is calibrated against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Total-mass check at measure construction.
    pub mass_tol: f64,
    /// Mean equality and potential comparison in the convex-order test.
    pub order_tol: f64,
    /// Strictness threshold for the irreducibility region u_mu < u_nu.
    pub gap_tol: f64,
    /// Equality residual on the support of an optimal coupling.
    pub eq_tol: f64,
    /// Pointwise dual inequality and normalization sign pattern.
    pub viol_tol: f64,
    /// Coupling entries below this are treated as off-support.
    pub supp_tol: f64,
    /// Cauchy threshold for truncation profiles.
    pub conv_tol: f64,
    /// Extra uniform points inserted between adjacent evaluation-grid
    /// points (parametric costs only).
    pub grid_refine: usize,
    /// Solve LPs in exact rational arithmetic.
    pub exact_mode: bool,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            mass_tol: 1e-12,
            order_tol: 1e-9,
            gap_tol: 1e-9,
            eq_tol: 1e-7,
            viol_tol: 1e-7,
            supp_tol: 1e-10,
            conv_tol: 1e-6,
            grid_refine: 0,
            exact_mode: false,
        }
    }
}

impl Tolerances {
    pub fn exact(mut self) -> Self {
        self.exact_mode = true;
        self
    }
}
