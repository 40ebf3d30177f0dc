use std::path::{Path, PathBuf};

/// Errors from the file formats and commands. Core errors pass through.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error("checkpoint {}: {message}", path.display())]
    Checkpoint { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] kgns_core::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Process exit status for each error family.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const DATA: u8 = 2;
    pub const NUMERIC: u8 = 3;
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> u8 {
        use kgns_core::Error as C;
        match self {
            Error::Config(_) => exit::USAGE,
            Error::Core(C::Config(_) | C::ZeroDimension | C::UnsupportedExponent(_)) => exit::USAGE,
            Error::Core(C::NonFiniteGradient { .. } | C::NonFiniteLoss { .. }) => exit::NUMERIC,
            _ => exit::DATA,
        }
    }
}
