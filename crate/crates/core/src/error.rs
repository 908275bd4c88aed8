use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("archive is empty: {0}")]
    EmptyArchive(&'static str),

    #[error(
        "fitness {value} lies outside the declared bounds [{min}, {max}]; \
         widen the task's fitness bounds"
    )]
    FitnessOutOfBounds { value: f64, min: f64, max: f64 },

    #[error("descriptor has {got} components, archive expects {expected}")]
    DescriptorDim { got: usize, expected: usize },

    #[error("genotype has {got} parameters, task expects {expected}")]
    GenotypeDim { got: usize, expected: usize },

    #[error("unknown metric '{name}' (valid: coverage, qd_score, max_fitness)")]
    UnknownMetric { name: String },

    #[error("fitness bounds differ across inputs: {0}")]
    MismatchedBounds(String),

    #[error("malformed data in {path}: {msg}")]
    Malformed { path: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
