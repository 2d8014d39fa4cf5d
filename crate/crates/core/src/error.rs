use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty region")]
    EmptyRegion,

    #[error("site {site} outside lattice of {n} sites")]
    SiteOutOfLattice { site: usize, n: usize },

    #[error("region is not contained in the lattice")]
    RegionOutOfLattice,

    #[error("regions must be pairwise disjoint")]
    OverlappingRegions,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NonHermitian { deviation: f64 },

    #[error("not a valid density matrix: {0}")]
    NotAState(String),

    #[error("degenerate ground space (gap {gap:.3e} below tolerance {tol:.3e})")]
    DegenerateGroundSpace { gap: f64, tol: f64 },

    #[error("relative entropy infinite: support of first state not contained in second")]
    InfiniteRelativeEntropy,

    #[error("operator support violates the required region containment")]
    SupportViolation,

    #[error("dense simulation cap exceeded: {requested} qubits > cap {cap}")]
    DenseCapExceeded { requested: usize, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("root bracketing failed on [{lo:.6e}, {hi:.6e}]")]
    BracketingFailed { lo: f64, hi: f64 },

    #[error("optimizer did not converge within {iterations} iterations (last objective {objective:.6e}, projected gradient norm {grad_norm:.3e})")]
    NonConvergence {
        iterations: usize,
        objective: f64,
        grad_norm: f64,
    },

    #[error("coverage shortfall: only {found} training matches within gamma={gamma:.3e}, need {need}")]
    CoverageShortfall {
        found: usize,
        need: usize,
        gamma: f64,
    },

    #[error("degenerate minimizer: classical ground configuration is not unique")]
    DegenerateMinimizer,

    #[error("empty selection")]
    EmptySelection,

    #[error("unsupported distribution: {0}")]
    UnsupportedDistribution(String),

    #[error("model file: {0}")]
    ModelFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
