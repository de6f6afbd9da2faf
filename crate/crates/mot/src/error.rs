use thiserror::Error;

/// Errors produced by the transport pipeline.
///
/// Shape and glue defects on counterexample instances are *not* errors;
/// they are carried as reports inside the respective results.
#[derive(Debug, Clone, Error)]
pub enum MotError {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("marginals are not in convex order (worst deficit {deficit:.3e} at y = {point})")]
    NotInConvexOrder { point: f64, deficit: f64 },

    #[error("endpoint split is inconsistent: {0}")]
    InconsistentSplit(String),

    #[error("transport LP is infeasible (residual artificial mass {residual:.3e})")]
    Infeasible { residual: f64 },

    #[error("transport LP is unbounded; cost specification is malformed")]
    Unbounded,

    #[error("complementary slackness violated: residual {residual:.3e} at pair ({i}, {j})")]
    SlacknessViolated { i: usize, j: usize, residual: f64 },

    #[error("domain is not compact: {0}")]
    NotCompact(String),

    #[error("bad parameters: {0}")]
    BadParameters(String),

    #[error("tangency root find failed at x = {x}")]
    RootFindFailed { x: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("cost is not defined at ({x}, {y})")]
    CostUndefined { x: f64, y: f64 },
}

pub type Result<T> = std::result::Result<T, MotError>;
