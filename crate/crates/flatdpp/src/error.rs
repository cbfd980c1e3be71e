use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is rank deficient: {0}")]
    Rank(String),

    #[error("ambiguous numerical rank: eigenvalue {value:e} lies inside the tolerance band")]
    RankAmbiguity { value: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("L is not conditionally PSD with respect to V (projected eigenvalue {min_eig:e} < -{tol:e})")]
    NotConditionallyPsd { min_eig: f64, tol: f64 },

    #[error("invalid marginal kernel: eigenvalue {value} outside [0, 1]")]
    InvalidKernel { value: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("kernel smoothness r = {r} is too low for Wronskian order k = {k}")]
    InsufficientSmoothness { k: usize, r: usize },

    #[error("degenerate point configuration: {0}")]
    DegeneratePoints(String),

    #[error("ground set of size {n} exceeds the enumeration capacity ({max})")]
    Capacity { n: usize, max: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Whether the error reflects floating-point trouble rather than invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular(_)
                | Error::RankAmbiguity { .. }
                | Error::Numerical(_)
                | Error::DegeneratePoints(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
