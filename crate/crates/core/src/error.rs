use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: parse error at {locus}: {message}")]
    Parse {
        path: PathBuf,
        locus: String,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("paper {citing} ({citing_year}) cites {cited} published later ({cited_year})")]
    TemporalOrder {
        citing: String,
        citing_year: i32,
        cited: String,
        cited_year: i32,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("design matrix is rank deficient; collinear columns: {}", columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("invalid design matrix: {0}")]
    InvalidDesign(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("correlation undefined: {0}")]
    CorrelationUndefined(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable snake_case name of the variant, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
            Error::Config(_) => "config",
            Error::TemporalOrder { .. } => "temporal_order",
            Error::Domain(_) => "domain",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::InvalidDesign(_) => "invalid_design",
            Error::InsufficientData(_) => "insufficient_data",
            Error::CorrelationUndefined(_) => "correlation_undefined",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(
        path: impl Into<PathBuf>,
        locus: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            path: path.into(),
            locus: locus.into(),
            message: message.into(),
        }
    }
}
