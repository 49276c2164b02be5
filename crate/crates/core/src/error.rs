use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A single corpus record could not be accepted. Readers keep going.
    #[error("line {line}: {reason}")]
    Record { line: usize, reason: String },

    #[error("duplicate document id `{id}` on line {line} (first seen on line {first_line})")]
    DuplicateId {
        id: String,
        line: usize,
        first_line: usize,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("score `{0}` is not present")]
    UnknownScore(String),

    #[error("rater `{0}` is not registered")]
    UnregisteredRater(String),

    #[error("rating {value} for `{rater}` on document `{doc_id}` is outside [{lo}, {hi}]")]
    RatingOutOfRange {
        doc_id: String,
        rater: String,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("bag models are incompatible: {0}")]
    ModelMismatch(String),

    #[error("trainer failed: {0}")]
    Trainer(String),

    #[error("campaign aborted: {failed} of {planned} experiments failed")]
    CampaignAborted { failed: usize, planned: usize },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// True when the error is caused by bad input rather than by the
    /// environment or an external process.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Io { .. } | Error::Trainer(_) | Error::CampaignAborted { .. }
        )
    }
}
