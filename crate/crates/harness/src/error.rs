use std::path::PathBuf;

/// Errors of the harness. Every variant is a configuration or input problem
/// and maps to exit code 2; failed inequalities are reported, not raised.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("format: {0}")]
    Format(String),
    #[error("{theorem}: {source}")]
    Core {
        theorem: String,
        #[source]
        source: sparse_poincare_core::Error,
    },
}

impl HarnessError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn core(theorem: impl Into<String>, source: sparse_poincare_core::Error) -> Self {
        Self::Core { theorem: theorem.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        2
    }
}

impl From<sparse_poincare_core::Error> for HarnessError {
    fn from(e: sparse_poincare_core::Error) -> Self {
        Self::Core { theorem: "core".into(), source: e }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

/// Attaches a theorem id to core errors.
pub trait Context<T> {
    fn theorem(self, id: &str) -> Result<T>;
}

impl<T> Context<T> for sparse_poincare_core::Result<T> {
    fn theorem(self, id: &str) -> Result<T> {
        self.map_err(|e| HarnessError::core(id, e))
    }
}
