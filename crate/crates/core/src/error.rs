use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error("shooting did not converge, slope bracket [{lo}, {hi}] at x = {x}")]
    Shooting { lo: f64, hi: f64, x: f64 },
    #[error("grid too short: phi(x_max) = {phi_max:e} above tolerance {tol:e}")]
    GridTooShort { phi_max: f64, tol: f64 },
    #[error("quadrature did not converge on [{a}, {b}] (error estimate {err:e})")]
    Quadrature { a: f64, b: f64, err: f64 },
    #[error("eigensolver failure: {0}")]
    Eigen(String),
    #[error("not converged: {0}")]
    NotConverged(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Exit status used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid(_) | Error::Constraint(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Invalid(_) => "invalid",
            Error::Constraint(_) => "constraint",
            Error::Shooting { .. } => "shooting",
            Error::GridTooShort { .. } => "grid_too_short",
            Error::Quadrature { .. } => "quadrature",
            Error::Eigen(_) => "eigen",
            Error::NotConverged(_) => "not_converged",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
