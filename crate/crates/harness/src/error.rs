use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Numerics(#[from] so3_cubics::Error),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    /// Process exit code: 2 for configuration problems, 3 for numerical
    /// degeneracy, 1 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Numerics(e) if e.is_degeneracy() => 3,
            HarnessError::Numerics(_) => 2,
            HarnessError::Io { .. } => 1,
        }
    }
}
