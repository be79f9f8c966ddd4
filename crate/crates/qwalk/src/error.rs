use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} out of range, expected 0..{bound}")]
    IndexOutOfRange {
        what: &'static str,
        value: i64,
        bound: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("cannot normalize a zero vector")]
    ZeroVector,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("DCA normalization violated: |eta1|^2 + |eta2|^2 = {value} (must equal 1 within 1e-12)")]
    DcaNormalization { value: f64 },

    #[error("eigenphase {phase} lies within {tol:e} of +-pi; principal logarithm is ambiguous")]
    BranchAmbiguity { phase: f64, tol: f64 },

    #[error("coin component ({q},{r}) is not supported; only q, r in {{0, 1}}")]
    UnsupportedIndex { q: usize, r: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible calibration: {reason}; minimal feasible step count is {min_steps}")]
    Infeasible { reason: String, min_steps: u64 },

    #[error("momentum window [{lo}, {hi}] contains no grid point")]
    EmptyWindow { lo: f64, hi: f64 },

    #[error("unknown scenario '{name}'; valid names: {valid}")]
    UnknownScenario { name: String, valid: String },

    #[error("{0}")]
    Config(String),

    #[error("expression error at column {col}: {msg}")]
    Expr { col: usize, msg: String },

    #[error("estimated memory {estimate} bytes exceeds the budget of {budget} bytes")]
    MemoryBudget { estimate: u64, budget: u64 },

    #[error("dimension {dim} exceeds the dense limit {limit}")]
    TooLarge { dim: usize, limit: usize },

    #[error("Richardson extrapolation did not converge: residual {residual:.3e} > {tol:.3e}")]
    NonConvergence { residual: f64, tol: f64 },

    #[error("structural violation: {0}")]
    StructuralViolation(String),

    #[error("engine {0} cannot act on this state")]
    UnsupportedEngine(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
