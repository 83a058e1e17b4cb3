use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid user configuration (sizes, probabilities, schemas).
    #[error("configuration error: {0}")]
    Config(String),

    /// A numerical procedure failed to converge. `lo..hi` is the worst
    /// subinterval or the final bracket.
    #[error("numeric error: {msg} (on [{lo}, {hi}])")]
    Numeric { msg: String, lo: f64, hi: f64 },

    /// A request that would move a process backwards in time.
    #[error("ordering error: {0}")]
    Ordering(String),

    #[error("statistics error: {0}")]
    Statistics(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn numeric(msg: impl Into<String>, lo: f64, hi: f64) -> Self {
        Error::Numeric {
            msg: msg.into(),
            lo,
            hi,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn ensure_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {v}")))
    }
}
