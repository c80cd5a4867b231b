use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} out of domain: {value}")]
    Domain { name: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("model is fully censored (surviving mass {mass:e})")]
    FullyCensored { mass: f64 },

    #[error("calibration infeasible: {0}")]
    Infeasible(String),

    #[error("residuals are not finite at the initial point")]
    NonFiniteResiduals,

    #[error("fit initialization failed: {0}")]
    Initialization(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty data: {0}")]
    Empty(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain<T: num_traits::ToPrimitive>(name: &'static str, value: T) -> Self {
        Error::Domain {
            name,
            value: value.to_f64().unwrap_or(f64::NAN),
        }
    }
}
