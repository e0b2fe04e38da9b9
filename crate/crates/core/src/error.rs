use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A document could not be decoded; `path` locates the offending field.
    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },

    #[error("subset `{subset}` is not connected: qubit {qubit} is stranded")]
    DisconnectedSubset { subset: String, qubit: u32 },

    #[error("{qubits} qubits exceeds the configured limit of {limit}")]
    Capacity { qubits: usize, limit: usize },

    #[error("no {kind} error rate for {element}")]
    MissingRate { kind: &'static str, element: String },

    #[error("memory limit of {limit} bytes is below the largest gate tensor ({required} bytes)")]
    Infeasible { limit: u64, required: u64 },

    #[error("plan does not match network: {0}")]
    PlanMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Decode JSON, reporting the field path of the first failure.
    pub(crate) fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::parse(path, e.into_inner().to_string())
        })
    }

    /// True for errors caused by well-formed but unacceptable input.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Validation { .. }
                | Error::DisconnectedSubset { .. }
                | Error::MissingRate { .. }
                | Error::Infeasible { .. }
                | Error::PlanMismatch(_)
        )
    }

    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }
}
