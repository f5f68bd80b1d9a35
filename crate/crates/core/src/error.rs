use thiserror::Error;

#[derive(Debug, Error)]
pub enum StvemError {
    #[error("polynomial degree {0} is not allowed (need p >= 1)")]
    InvalidDegree(u32),

    #[error("invalid interval ({lo}, {hi})")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh layer of thickness {thickness:e} is degenerate")]
    DegenerateLayer { thickness: f64 },

    #[error("element {0} is not a leaf of the mesh")]
    NotALeaf(usize),

    #[error("singular local system on element {element}: {what}")]
    SingularLocal { element: usize, what: &'static str },

    #[error("space-like facet {facet} at t = {t} has no element below it")]
    MissingBelowNeighbor { facet: usize, t: f64 },

    #[error("sparse factorization failed on time slab {slab}")]
    SingularSlab { slab: usize },

    #[error("marking requires a non-empty mesh")]
    EmptyMesh,

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("rate fitting needs at least 3 rows, got {0}")]
    TooFewRows(usize),

    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<StvemError>,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = StvemError> = std::result::Result<T, E>;

impl StvemError {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
