use std::path::PathBuf;

/// Errors shared by every stage of the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path} (line {line}, column {column}): {message}")]
    Json {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid document {doc_id}: {message}")]
    Document { doc_id: String, message: String },

    #[error("invalid corpus: {0}")]
    Corpus(String),

    #[error("resource file {path}: {message}")]
    Resource { path: PathBuf, message: String },

    #[error("arpa parse error at line {line}: {message}")]
    ArpaParse { line: usize, message: String },

    #[error("language model error: {0}")]
    Lm(String),

    #[error("perfect-hash construction failed after {attempts} attempts; retry with a different seed")]
    MphConstruction { attempts: u64 },

    #[error("bad model file {path}: {message}")]
    ModelFormat { path: PathBuf, message: String },

    #[error("model was built for a different feature schema (found \"{found}\", expected \"{expected}\"); retrain with this version")]
    SchemaMismatch { expected: String, found: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn json(path: impl Into<PathBuf>, err: &serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}
