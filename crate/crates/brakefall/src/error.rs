use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    /// Scenario file that does not match the schema; `field` is the dotted
    /// path to the offending entry.
    #[error("{origin}: invalid scenario at `{field}`: {message}")]
    Spec { origin: String, field: String, message: String },

    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },

    #[error("invalid scenario `{name}`: {message}")]
    Invalid { name: String, message: String },

    #[error("unknown scenario `{0}` (try `list-scenarios`)")]
    UnknownScenario(String),

    #[error(transparent)]
    Core(#[from] brakefall_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
