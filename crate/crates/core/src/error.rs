use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate element {element}: measure {measure:e}")]
    Assembly { element: usize, measure: f64 },

    #[error("shape mismatch: expected length {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("quadrature did not converge on [{a}, {b}]")]
    Integration { a: f64, b: f64 },

    #[error("law `{0}` does not declare t -> tK(t^2) strictly increasing and onto")]
    UnsupportedLaw(String),

    #[error("no root for tK(t^2) = {target}: bracket exceeded {limit:e}")]
    NoRoot { target: f64, limit: f64 },

    #[error("no probe with J > 0 found on this mesh ({0}); refine the mesh or widen the probe library")]
    Feasibility(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("while evaluating {context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }

    /// Config and usage problems map to exit status 2, everything else to 1.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::Config(_) => true,
            Error::Context { source, .. } => source.is_usage(),
            _ => false,
        }
    }
}
