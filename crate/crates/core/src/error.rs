use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("mesh topology error: {0}")]
    Topology(String),

    #[error("element {element} is not star-shaped with respect to its vertex mean")]
    StarShape { element: usize },

    #[error("polynomial of degree {requested} needs quadrature beyond the supported exactness {supported}")]
    QuadratureDeficit { requested: usize, supported: usize },

    #[error("quadrature of degree {0} is not supported")]
    UnsupportedDegree(usize),

    #[error("singular Gram matrix on element {element}")]
    SingularGram { element: usize },

    #[error("local saddle system on element {element} is rank-deficient (rank {rank} of {size})")]
    SaddleSingular { element: usize, rank: usize, size: usize },

    #[error("projector product norm {norm} is not a contraction")]
    ContractionFailure { norm: f64 },

    #[error("simplicial face {0} is not interior to its element")]
    NotInteriorFace(usize),

    #[error("transport field is not discretely divergence-free (max |D_T w| = {0:e})")]
    TransportNotDivergenceFree(f64),

    #[error("extrapolated transport is not discretely divergence-free (max |D_T w| = {0:e})")]
    ExtrapolantNotDivFree(f64),

    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),

    #[error("at least two completed time steps are required, got {0}")]
    InsufficientHistory(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
