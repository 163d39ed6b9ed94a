use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0}; expected 1, 2 or 3")]
    Dimension(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("element {element} has zero or non-finite volume")]
    DegenerateElement { element: usize },

    #[error("non-conforming mesh: facet {facet:?} is shared by {count} elements")]
    NonConforming { facet: Vec<usize>, count: usize },

    #[error("mesh boundary is not watertight: {0}")]
    OpenBoundary(String),

    #[error("vertex index {index} out of range in element {element}")]
    VertexIndex { element: usize, index: usize },

    #[error("vertex {0} is not used by any element")]
    UnusedVertex(usize),

    #[error("mesh has no interior vertices; the Dirichlet system is empty")]
    EmptySystem,

    #[error("point {0:?} lies outside the mesh")]
    PointOutside(Vec<f64>),

    #[error("element id {0} out of range")]
    ElementId(usize),

    #[error("diffusion matrix {0}")]
    InvalidDiffusion(String),

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("dimension mismatch: {0}")]
    Mismatch(String),

    #[error("exponent p = {p} outside the admissible interval ({lo}, {hi})")]
    ExponentRange { p: f64, lo: f64, hi: f64 },

    #[error("empty calibration series")]
    EmptySeries,

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
