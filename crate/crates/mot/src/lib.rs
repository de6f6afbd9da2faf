//! One-dimensional martingale optimal transport on finitely supported
//! probability measures.
//!
//! Given marginals mu and nu in convex order and a cost c(x, y), the
//! library solves the primal transport LP over martingale couplings
//! (marginal constraints plus the barycenter condition E[Y | X] = X)
//! and constructs a pointwise dual maximizer: a triple (f, g, h) with
//!
//! ```text
//! g(y) - f(x) - h(x) (y - x) <= c(x, y)    for all x, y,
//! ```
//!
//! with equality on the support of the optimal coupling, so that the
//! dual value nu(g) - mu(f) matches the primal optimum. The
//! construction follows the irreducible-component route: decompose the
//! pair along the strict-inequality set of the potential functions,
//! recover per-component duals from LP multipliers, fix the affine
//! gauge per component, and glue. Supporting modules certify Lipschitz
//! regularity of the duals on compact intervals and generate the
//! divergence families that demarcate when dual attainment fails.
//!
//! The crate is data-parallel over components, atoms and grid points
//! via `rayon` (feature `parallel`, on by default); disabling the
//! feature yields a dependency-free sequential build with identical
//! results.

pub mod config;
pub mod cost;
pub mod counterexamples;
pub mod decomposition;
pub mod dual;
pub mod error;
pub mod measures;
pub mod numeric;
pub mod parallel;
pub mod pipeline;
pub mod primal;
pub mod pwl;
pub mod regularity;
pub mod simplex;

pub use config::Tolerances;
pub use cost::CostSpec;
pub use decomposition::{decompose, Component, ComponentDecomposition};
pub use dual::{
    contact_set, envelope_g, evaluation_grid, glue, halfinfinite_normalize,
    normalize_component, recover_component_dual, verify_duality, DualTriple, DualityReport,
    GlueViolation, ShapeViolation,
};
pub use error::{MotError, Result};
pub use measures::{check_convex_order, DiscreteMeasure, Interval, OrderReport};
pub use pipeline::{solve_instance, SolveOutcome};
pub use primal::{feasible, feasible_coupling, solve_primal, Coupling, PrimalSolution};
pub use pwl::{concave_envelope, PiecewiseLinear};
pub use regularity::{
    auto_convexifier, integrability_probe, lipschitz_postprocess, LipschitzCertificate,
};
