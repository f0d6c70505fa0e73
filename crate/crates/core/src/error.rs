use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("time step {dt} violates the stability bound dt * p_max^2 < 0.5 (dt must be below {bound})")]
    StepSize { dt: f64, bound: f64 },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("coverage error: truncated distribution holds {covered} of the mass, need at least {required}")]
    Coverage { covered: f64, required: f64 },

    #[error("config error{}: {msg}", .line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Config { line: Option<usize>, msg: String },

    #[error("unknown experiment id `{0}`")]
    UnknownExperiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn config(line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Config { line, msg: msg.into() }
    }

    /// True for errors a CLI should report as configuration problems.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::UnknownExperiment(_) | Error::InvalidParameter(_)
        )
    }
}
