//! Error type shared by all subcommands, with the process exit code each
//! failure maps to.

use feq_core::dsl::ParseError;
use feq_core::engine::EngineError;
use feq_core::DomainError;

use crate::args::exits;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Filesystem failure, annotated with the path involved.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// A grid file whose contents do not form finite numeric rows.
    #[error("{path}: {message}")]
    Grid { path: String, message: String },
    /// A `.feq` document that does not parse; carries the positioned
    /// diagnostic.
    #[error("{path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    /// Anything else: invalid flag combinations, empty grids, and so on.
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } => exits::PARSE,
            CliError::Engine(EngineError::NotContractive { .. }) => exits::NOT_CONTRACTIVE,
            _ => exits::FAILURE,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
