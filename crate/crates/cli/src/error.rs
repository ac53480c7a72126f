use std::path::PathBuf;

use burgers_step::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] Error),

    #[error("{0}")]
    ConditionsFailed(String),

    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 2: configuration, 3: a condition of the construction fails,
    /// 4: numeric or output failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Read { .. } => 2,
            CliError::ConditionsFailed(_) => 3,
            CliError::Write { .. } => 4,
            CliError::Core(e) => match e {
                Error::Parse { .. }
                | Error::Config(_)
                | Error::MissingBackgroundTerm(_)
                | Error::RhoZero
                | Error::Unsupported(_) => 2,
                Error::DegenerateCoefficients { .. }
                | Error::GradientCatastrophe { .. }
                | Error::B0DependsOnX { .. }
                | Error::BlowupBeforeT { .. }
                | Error::FrameDegenerate { .. }
                | Error::Orientation { .. }
                | Error::SolvabilityViolated { .. } => 3,
                Error::Domain(_)
                | Error::CharacteristicsDoNotCover
                | Error::QuadratureFail { .. }
                | Error::CflCollapse { .. }
                | Error::NanDetected { .. } => 4,
            },
        }
    }
}
