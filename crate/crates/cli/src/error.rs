use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] bintab_core::Error),
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error in {input}{}: {message}", .cell.map(|c| format!(" at cell {c}")).unwrap_or_default())]
    Parse {
        input: String,
        cell: Option<usize>,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn parse(input: &str, cell: Option<usize>, message: impl Into<String>) -> Self {
        CliError::Parse {
            input: input.to_string(),
            cell,
            message: message.into(),
        }
    }

    /// 2: infeasible or empty polytope, 3: unreadable input, 4: domain error.
    pub fn exit_code(&self) -> u8 {
        use bintab_core::Error as E;
        match self {
            CliError::Core(
                E::EmptyFeasibleSet { .. }
                | E::InfeasibleTargets(_)
                | E::NotInPolytope { .. }
                | E::InfeasibleStart { .. }
                | E::EmptyVertexSet,
            ) => 2,
            CliError::Core(E::Parse(_)) | CliError::Read { .. } | CliError::Parse { .. } => 3,
            CliError::Core(_) | CliError::Write { .. } | CliError::Usage(_) => 4,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
