use thiserror::Error;

/// Errors raised by the library. Guard and domain violations are distinct
/// from internal failures so the CLI can map them to different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("enumeration guard exceeded: s = {s}, n = {n} (limits s <= {max_s}, n <= {max_n})")]
    GuardExceeded {
        s: u32,
        n: u64,
        max_s: u32,
        max_n: u64,
    },

    #[error("rank deficiency: expected rank {expected}, found {found} ({context})")]
    RankDeficient {
        expected: usize,
        found: usize,
        context: String,
    },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("unresolved eigenvalue cluster: {0}")]
    UnresolvedCluster(String),

    #[error("ill-conditioned decomposition at k = {k}: residual {residual} after raising precision to {precision} bits")]
    IllConditioned {
        k: u32,
        residual: String,
        precision: u32,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by bad caller input rather than by a failed computation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_) | Error::GuardExceeded { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
