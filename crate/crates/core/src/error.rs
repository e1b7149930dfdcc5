use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{sites} sites exceed the dense limit of {limit}")]
    DimensionTooLarge { sites: usize, limit: usize },

    #[error("site {site} out of range for a {site_count}-site register")]
    SiteOutOfRange { site: usize, site_count: usize },

    #[error("site {0} appears more than once in a Pauli string")]
    DuplicateSite(usize),

    #[error("cannot keep {kept} sites in a reduced density matrix (limit {limit})")]
    TooManySitesKept { kept: usize, limit: usize },

    #[error("amplitude vector of length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    #[error("chain fields are not uniform across chains")]
    NonUniformFields,

    #[error("transform chain needs at least two sites, got {0}")]
    ChainTooShort(usize),

    #[error("the {axis:?} string on {m} sites only reduces for odd chain lengths")]
    EvenMForYZ { axis: crate::pauli::Axis, m: usize },

    #[error("sector shape does not match layout: {0}")]
    ShapeMismatch(String),

    #[error("{count} sectors exceed the cap of {cap}")]
    SectorCountTooLarge { count: u128, cap: u128 },

    #[error("Krylov propagation failed to reach residual {tol:e} (best {best:e})")]
    NoConvergence { tol: f64, best: f64 },

    #[error("no coupling convention reproduces the numerics (best deviation {best:e})")]
    NoConventionMatches { best: f64 },

    #[error("detuning {0} is nonzero")]
    NotResonant(f64),

    #[error("density matrix is not a physical state: {0}")]
    NotAState(String),

    #[error("index {index} out of range for {count} chains")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("ancilla outcome has probability {0:e}")]
    ImpossibleOutcome(f64),

    #[error("ancilla site is excluded from spin-pair concurrence")]
    AncillaNotAllowed,

    #[error("concurrence routes disagree by {0:e}")]
    PathMismatch(f64),

    #[error("trace does not cover t = {0}")]
    TraceDoesNotCover(f64),

    #[error("time samples must be finite, non-negative and nondecreasing")]
    InvalidTimes,

    #[error("invalid experiment config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

impl Error {
    /// Whether the error is a failed physics check (as opposed to bad input
    /// or an environment problem).
    pub fn is_physics_failure(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::NoConventionMatches { .. }
                | Error::NotResonant(_)
                | Error::NotAState(_)
                | Error::ImpossibleOutcome(_)
                | Error::PathMismatch(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
