use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("mesh resolution must be at least 1, got {0}")]
    InvalidResolution(usize),

    #[error(
        "edge {edge} ({from} -> {to}) crosses the interface more than once at t = {time}; \
         refine the macro mesh"
    )]
    UnresolvedEdge {
        edge: usize,
        from: usize,
        to: usize,
        time: f64,
    },

    #[error("macro tetrahedron {macro_tet} has {cut_edges} cut edges; refine the macro mesh")]
    InconsistentCutPattern { macro_tet: usize, cut_edges: usize },

    #[error("degenerate sub-element in macro tetrahedron {macro_tet}: signed volume {volume:e}")]
    DegenerateCut { macro_tet: usize, volume: f64 },

    #[error("degenerate element: volume {0:e}")]
    DegenerateElement(f64),

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("matrix row {0} has no entries")]
    EmptyRow(usize),

    #[error("matrix has a zero diagonal entry in row {0}")]
    ZeroDiagonal(usize),

    #[error("vertex block {node} is singular")]
    SingularBlock { node: usize },

    #[error("A_VV is not block diagonal: entry ({row}, {col})")]
    NotBlockDiagonal { row: usize, col: usize },

    #[error("coarse-level factorization is singular")]
    SingularCoarse,

    #[error("{method} breakdown after {iterations} iterations (relative residual {residual:e})")]
    Breakdown {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("{method} did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
