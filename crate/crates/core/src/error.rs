use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("grid of {nodes} nodes needs {required_bytes} bytes, over the budget of {budget_bytes} bytes")]
    MemoryBudget {
        nodes: usize,
        required_bytes: usize,
        budget_bytes: usize,
    },

    #[error("non-finite energy in element {element}")]
    NonFiniteEnergy { element: usize },

    #[error("corrupt lamination tree: {0}")]
    CorruptTree(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
