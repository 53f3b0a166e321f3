use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: file is empty or has no data rows")]
    EmptyFile { path: PathBuf },

    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: cannot parse {value:?} in column {column:?} as a number")]
    NonNumeric {
        line: u64,
        column: String,
        value: String,
    },

    #[error("line {line}: label {value:?} is not -1 or 1")]
    InvalidLabel { line: u64, value: String },

    #[error("missing required column {0:?}")]
    MissingColumn(String),

    #[error("feature {name:?} has zero variance")]
    ConstantFeature { name: String },

    #[error("bad fold specification: {0}")]
    BadFoldSpec(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("no eligible term has positive pheromone-heuristic weight")]
    NoEligibleTerm,

    #[error("ROC undefined: labels contain a single class")]
    DegenerateRoc,

    #[error("no prefault equilibrium found after {iterations} Newton iterations")]
    NoEquilibrium { iterations: usize },

    #[error("scenario space rejected {rejected} of {attempts} draws")]
    BadScenarioSpace { rejected: usize, attempts: usize },

    #[error("trajectory ends at {t_end}s, features need {needed}s")]
    HorizonTooShort { t_end: f64, needed: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable variant name, used by the CLI when reporting failures.
    pub fn name(&self) -> &'static str {
        match self {
            Error::EmptyFile { .. } => "EmptyFile",
            Error::RaggedRow { .. } => "RaggedRow",
            Error::NonNumeric { .. } => "NonNumeric",
            Error::InvalidLabel { .. } => "InvalidLabel",
            Error::MissingColumn(_) => "MissingColumn",
            Error::ConstantFeature { .. } => "ConstantFeature",
            Error::BadFoldSpec(_) => "BadFoldSpec",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NonFinite(_) => "NonFinite",
            Error::NoEligibleTerm => "NoEligibleTerm",
            Error::DegenerateRoc => "DegenerateROC",
            Error::NoEquilibrium { .. } => "NoEquilibrium",
            Error::BadScenarioSpace { .. } => "BadScenarioSpace",
            Error::HorizonTooShort { .. } => "HorizonTooShort",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Io(_) => "Io",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
        }
    }
}
