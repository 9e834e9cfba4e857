use thiserror::Error;

/// Errors raised while validating fractal data or running the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("map {index} is not a contractive similarity: ratio {ratio}")]
    NonContractive { index: usize, ratio: f64 },

    #[error("map {index} is not a similarity: singular values range over [{min}, {max}]")]
    NotSimilarity { index: usize, min: f64, max: f64 },

    #[error("level-0 conductance graph on the boundary is not connected")]
    DisconnectedBase,

    #[error("generation-1 graph is not connected")]
    DisconnectedGraph,

    #[error("bad glue pair {pair}: {reason}")]
    BadGlue { pair: usize, reason: String },

    #[error("renormalisation factor r[{index}] = {value} is not in (0, 1)")]
    BadWeights { index: usize, value: f64 },

    #[error("bad conductance data: {0}")]
    BadConductance(String),

    #[error("bad measure weights: {0}")]
    BadMeasure(String),

    #[error("malformed fractal spec: {0}")]
    MalformedSpec(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("vertex {0} does not belong to the graph")]
    UnknownVertex(usize),

    #[error("fractal spec carries no geometry (maps absent)")]
    NoGeometry,

    #[error("glued addresses disagree geometrically by {distance:e} (tolerance {tolerance:e})")]
    GlueGeometryMismatch { distance: f64, tolerance: f64 },

    #[error("generation mismatch: expected {expected}, got {actual}")]
    GenerationMismatch { expected: usize, actual: usize },

    #[error("generation order violated: need {lower} < {upper}")]
    GenerationOrder { lower: usize, upper: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("interior block of the level-1 energy is singular")]
    SingularInterior,

    #[error("fixed point is not unique (null space dimension {0})")]
    NonUniqueFixedPoint(usize),

    #[error("mass matrix is not positive definite")]
    MassNotPD,

    #[error("Dirichlet problem has an empty interior")]
    EmptyInterior,

    #[error("requested {requested} eigenpairs but the problem has dimension {dimension}")]
    TooManyEigenpairs { requested: usize, dimension: usize },

    #[error("iterative eigensolver did not converge: residual {residual:e} > {tolerance:e}")]
    ConvergenceFailure { residual: f64, tolerance: f64 },

    #[error("problem size {size} exceeds the dense limit {limit}")]
    DenseLimitExceeded { size: usize, limit: usize },

    #[error("subsequent-generation factor undefined: denominator {denominator} <= 0")]
    FactorUndefined { denominator: f64 },

    #[error("eigenvalue {k} is not isolated: {detail}")]
    ClusterOverlap { k: usize, detail: String },

    #[error("linear algebra failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::MalformedSpec(e.to_string())
    }
}
