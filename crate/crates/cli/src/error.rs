use std::fmt;

use sentilogit::corpus::CorpusError;
use sentilogit::diagnostics::DiagnosticsError;
use sentilogit::logit::LogitError;
use sentilogit::resources::ResourceError;
use sentilogit::sentiment::SentimentError;
use sentilogit::tabulate::TabulateError;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Preprocess,
    Score,
    Join,
    Fit,
    Diagnose,
    Manifest,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Preprocess => "preprocess",
            Stage::Score => "score",
            Stage::Join => "join",
            Stage::Fit => "fit",
            Stage::Diagnose => "diagnose",
            Stage::Manifest => "manifest",
        })
    }
}

/// Failure class; decides the process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad or inconsistent input data, schema or flags.
    Input,
    /// The model cannot be estimated (separation, collinearity, ...).
    Estimation,
    /// Reading or writing files failed.
    Io,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Input => 2,
            ErrorClass::Estimation => 3,
            ErrorClass::Io => 4,
        }
    }
}

#[derive(Debug, Error)]
#[error("{stage} stage failed: {message}")]
pub struct PipelineError {
    pub stage: Stage,
    pub class: ErrorClass,
    pub message: String,
}

impl PipelineError {
    pub fn new(stage: Stage, class: ErrorClass, message: impl Into<String>) -> Self {
        PipelineError { stage, class, message: message.into() }
    }

    pub fn input(stage: Stage, message: impl Into<String>) -> Self {
        Self::new(stage, ErrorClass::Input, message)
    }

    pub fn io(stage: Stage, message: impl Into<String>) -> Self {
        Self::new(stage, ErrorClass::Io, message)
    }

    pub fn exit_code(&self) -> i32 {
        self.class.exit_code()
    }
}

/// Attaches a stage to a library error, classifying it on the way.
pub trait StageContext<T> {
    fn stage(self, stage: Stage) -> Result<T, PipelineError>;
}

pub trait Classify: fmt::Display {
    fn class(&self) -> ErrorClass;
}

impl<T, E: Classify> StageContext<T> for Result<T, E> {
    fn stage(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|e| PipelineError::new(stage, e.class(), e.to_string()))
    }
}

impl Classify for std::io::Error {
    fn class(&self) -> ErrorClass {
        ErrorClass::Io
    }
}

impl Classify for csv::Error {
    fn class(&self) -> ErrorClass {
        if self.is_io_error() {
            ErrorClass::Io
        } else {
            ErrorClass::Input
        }
    }
}

impl Classify for serde_json::Error {
    fn class(&self) -> ErrorClass {
        if self.is_io() {
            ErrorClass::Io
        } else {
            ErrorClass::Input
        }
    }
}

impl Classify for ResourceError {
    fn class(&self) -> ErrorClass {
        match self {
            ResourceError::Io { .. } => ErrorClass::Io,
            ResourceError::Malformed { .. } => ErrorClass::Input,
        }
    }
}

impl Classify for CorpusError {
    fn class(&self) -> ErrorClass {
        match self {
            CorpusError::Io { .. } => ErrorClass::Io,
            CorpusError::Resource(e) => e.class(),
            _ => ErrorClass::Input,
        }
    }
}

impl Classify for SentimentError {
    fn class(&self) -> ErrorClass {
        match self {
            SentimentError::Resource(e) => e.class(),
            _ => ErrorClass::Input,
        }
    }
}

impl Classify for TabulateError {
    fn class(&self) -> ErrorClass {
        match self {
            TabulateError::Io { .. } => ErrorClass::Io,
            TabulateError::Csv(e) => e.class(),
            _ => ErrorClass::Input,
        }
    }
}

impl Classify for LogitError {
    fn class(&self) -> ErrorClass {
        match self {
            LogitError::Collinear(_)
            | LogitError::PerfectSeparation { .. }
            | LogitError::NonIdentifiable
            | LogitError::ConstantColumn(_)
            | LogitError::TooFewObservations { .. } => ErrorClass::Estimation,
            _ => ErrorClass::Input,
        }
    }
}

impl Classify for DiagnosticsError {
    fn class(&self) -> ErrorClass {
        match self {
            DiagnosticsError::DegeneratePattern { .. } => ErrorClass::Estimation,
            DiagnosticsError::Logit(e) => e.class(),
            _ => ErrorClass::Input,
        }
    }
}
