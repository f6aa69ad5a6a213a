use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown potential family `{0}`")]
    UnknownFamily(String),

    #[error("missing parameter `{0}`")]
    MissingParameter(String),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: String,
        value: f64,
        reason: &'static str,
    },

    #[error("no bracket for h = {h}: {reason}")]
    Bracket { h: f64, reason: String },

    #[error("bisection did not converge within {0} iterations")]
    NoConvergence(u32),

    #[error("potential is not monotone on each side of its zero")]
    NonMonotone,

    #[error("potential is not even")]
    NotEven,

    #[error("potential does not have an isolated zero at the origin")]
    NotPointWell,

    #[error("no stored asymptotic well width for `{0}`")]
    NoAsymptoticForm(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("requested {k} eigenvalues of a {n}-dimensional problem")]
    EigenIndex { k: usize, n: usize },

    #[error("eigenvalue {k} = {value} decays over only {depth} Agmon lengths before the box edge; enlarge the box")]
    Truncation { k: usize, value: f64, depth: f64 },

    #[error("spectrum was computed without eigenvectors")]
    MissingVectors,

    #[error("unsupported dimension {0}")]
    Dimension(usize),

    #[error("angular momentum cap {cap} reached before the lowest {k} eigenvalues settled")]
    SectorCap { cap: usize, k: usize },

    #[error("invalid angular factor: {0}")]
    InvalidTheta(String),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("matrix is not positive definite (pivot {0})")]
    NotPositiveDefinite(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable tag, used in JSON error records and FFI codes.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::UnknownFamily(_) => "unknown_family",
            Error::MissingParameter(_) => "missing_parameter",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::Bracket { .. } => "bracket",
            Error::NoConvergence(_) => "no_convergence",
            Error::NonMonotone => "non_monotone",
            Error::NotEven => "not_even",
            Error::NotPointWell => "not_point_well",
            Error::NoAsymptoticForm(_) => "no_asymptotic_form",
            Error::InvalidGrid(_) => "invalid_grid",
            Error::EigenIndex { .. } => "eigen_index",
            Error::Truncation { .. } => "truncation",
            Error::MissingVectors => "missing_vectors",
            Error::Dimension(_) => "dimension",
            Error::SectorCap { .. } => "sector_cap",
            Error::InvalidTheta(_) => "invalid_theta",
            Error::GridTooCoarse(_) => "grid_too_coarse",
            Error::NotPositiveDefinite(_) => "not_positive_definite",
            Error::InvalidInput(_) => "invalid_input",
            Error::Json(_) => "json",
            Error::Io(_) => "io",
        }
    }

    /// True for errors caused by the caller's input rather than by the numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::UnknownFamily(_)
                | Error::MissingParameter(_)
                | Error::InvalidParameter { .. }
                | Error::InvalidGrid(_)
                | Error::InvalidTheta(_)
                | Error::InvalidInput(_)
                | Error::Json(_)
        )
    }
}
