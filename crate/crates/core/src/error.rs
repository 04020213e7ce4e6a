use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("entry ({row}, {col}) outside a {nrows}x{ncols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("singular saddle-point matrix: pivot {index} has magnitude {magnitude:e}")]
    SingularPivot { index: usize, magnitude: f64 },
    #[error("vector is not in ker B: |Bv| = {residual:e}")]
    NotInKernel { residual: f64 },
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("scheme not applicable: {0}")]
    SchemeNotApplicable(&'static str),
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("constraint drift at step {step}: |Bu - g| = {residual:e}")]
    ConstraintDrift { step: usize, residual: f64 },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("degenerate triangle {index} (area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },
    #[error("zero-length boundary edge {index}")]
    ZeroLengthEdge { index: usize },
}
