use std::fmt::Display;

use serde::Serialize;

/// A failed run: usage problems exit with 2, stage errors with 1.
#[derive(Debug, Serialize)]
pub struct Failure {
    pub stage: &'static str,
    pub kind: String,
    pub error: String,
    #[serde(skip)]
    pub usage: bool,
}

impl Failure {
    pub fn usage(stage: &'static str, error: impl Into<String>) -> Self {
        Failure {
            stage,
            kind: "usage".into(),
            error: error.into(),
            usage: true,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.usage {
            2
        } else {
            1
        }
    }
}

pub trait StageResult<T> {
    fn stage(self, stage: &'static str) -> Result<T, Failure>;
}

impl<T> StageResult<T> for citefit::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            stage,
            kind: e.kind().into(),
            error: e.to_string(),
            usage: false,
        })
    }
}

impl<T> StageResult<T> for std::io::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, Failure> {
        self.map_err(|e| io_failure(stage, e))
    }
}

impl<T> StageResult<T> for csv::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            stage,
            kind: "csv".into(),
            error: e.to_string(),
            usage: false,
        })
    }
}

pub fn io_failure(stage: &'static str, e: impl Display) -> Failure {
    Failure {
        stage,
        kind: "io".into(),
        error: e.to_string(),
        usage: false,
    }
}
