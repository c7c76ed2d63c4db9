use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("startup failed: {0}")]
    Startup(String),

    #[error("integration failed at t = {t:e}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("near-tangential zero at t = {t:e} (|v| = {v:e}, |v'| = {dv:e})")]
    Tangency { t: f64, v: f64, dv: f64 },

    #[error("more than {max} zeros before t = {t:e}")]
    TooManyZeros { max: usize, t: f64 },

    #[error("oracle error: {0}")]
    Oracle(String),

    #[error("scan error: {0}")]
    Scan(String),

    #[error("no bracket for n = {n}: {reason}")]
    NotFound { n: usize, reason: String },

    #[error("unresolved count jump for n = {n} near a = {a:e}")]
    Unresolved { n: usize, a: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Numerical failures map to CLI exit status 2, configuration errors to 1.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::Config(_) | Error::InvalidParameter { .. } | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
