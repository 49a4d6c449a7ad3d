use thiserror::Error;

/// Errors reported by construction, validation, and analysis entry points.
///
/// Cheap structural mistakes that can only arise from programmer error
/// (mixing elements of different groups, indexing out of range) panic
/// instead; everything reachable from user-supplied data goes through
/// this type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix entry ({row},{col}) does not define a homomorphism: {entry}*{col_modulus} is not divisible by {row_modulus}")]
    AutomorphismIllDefined {
        row: usize,
        col: usize,
        entry: u64,
        row_modulus: u64,
        col_modulus: u64,
    },

    #[error("matrix does not act bijectively: two elements map to the same image")]
    AutomorphismNotBijective,

    #[error("automorphism does not preserve the lattice")]
    LatticeNotPreserved,

    #[error("generator does not belong to the parent group")]
    ForeignGenerator,

    #[error("fibered signal is malformed: {0}")]
    MalformedFibers(String),

    #[error("operator is not shift preserving on the domain: fiber system residual {residual:.3e} exceeds {threshold:.3e}")]
    NotShiftPreserving { residual: f64, threshold: f64 },

    #[error("operator domain is not shift invariant")]
    DomainNotShiftInvariant,

    #[error("operator domain is not invariant under the automorphism group")]
    DomainNotGammaInvariant,

    #[error("range function is incompatible with the automorphism: the fiber spaces are not carried onto each other")]
    IncompatibleRangeFunction,

    #[error("invalid instance spec at {path}: {message}")]
    Spec { path: String, message: String },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn spec(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Spec {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
