use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, BossError>;

#[derive(Debug, Error)]
pub enum BossError {
    #[error("invalid code configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("unsupported dictionary dimension M={0} (need M >= 2)")]
    UnsupportedDimension(usize),

    #[error("dimension M={0} too large to materialize (limit {1})")]
    DimensionTooLarge(usize, usize),

    #[error("index {index} out of range (< {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("rank {rank} out of range (< {bound})")]
    RankOutOfRange { rank: u128, bound: u128 },

    #[error("wrong input length: expected {expected}, got {got}")]
    WrongLength { expected: usize, got: usize },

    #[error("invalid message: {0}")]
    InvalidMessage(String),

    #[error("message is not reachable by the encoder: {0}")]
    Unreachable(String),

    #[error("input too short for CRC check: {len} bits, width {width}")]
    InputTooShort { len: usize, width: usize },

    #[error("invalid channel geometry: {0}")]
    InvalidGeometry(String),

    #[error("unsupported configuration for this decoder: {0}")]
    UnsupportedConfig(String),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("config file error: {0}")]
    ConfigFile(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl BossError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BossError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by a bad experiment or code definition.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            BossError::InvalidConfig(_)
                | BossError::ConfigFile(_)
                | BossError::UnsupportedDimension(_)
                | BossError::UnsupportedConfig(_)
                | BossError::InvalidGeometry(_)
                | BossError::ParameterOutOfRange(_)
        )
    }
}
