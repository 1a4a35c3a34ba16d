use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("generator index {index} outside alphabet of size {alphabet}")]
    GeneratorOutOfRange { index: usize, alphabet: usize },

    #[error("invalid word character {0:?}")]
    InvalidWordChar(char),

    #[error("counting pattern must be a nonempty reduced word")]
    EmptyPattern,

    #[error("quasi-morphism `{0}` has no defect bound")]
    MissingDefectBound(String),

    #[error("power must be at least 1")]
    InvalidPower,

    #[error("pushforward is not well defined: sections give {first} and {second} at `{witness}`")]
    NotWellDefined {
        witness: String,
        first: f64,
        second: f64,
    },

    #[error("quasi-morphism reaches {value} on kernel element `{witness}`, beyond bound {bound}")]
    UnboundedOnKernel {
        witness: String,
        value: f64,
        bound: f64,
    },

    #[error("section is not a right inverse at `{0}`")]
    SectionMismatch(String),

    #[error("vertex {vertex} has only {neighbors} neighbours")]
    DegenerateStar { vertex: usize, neighbors: usize },

    #[error("fields live on different meshes")]
    MeshMismatch,

    #[error("field has {got} values, mesh has {expected} vertices")]
    FieldLength { expected: usize, got: usize },

    #[error("non-finite field value at vertex {0}")]
    NonFinite(usize),

    #[error("integration step {0} is too small or not positive")]
    StepUnderflow(f64),

    #[error("time step {dt} does not divide the time grid spacing {spacing}")]
    StepGrid { dt: f64, spacing: f64 },

    #[error("point location failed for {0:?}")]
    LocateFailed([f64; 3]),

    #[error("path is nonzero ({value}) at vertex {vertex} outside the support mask")]
    SupportViolation { vertex: usize, value: f64 },

    #[error("cap of area {0} cannot be displaced by a rotation (needs area < 1/2)")]
    CapTooLarge(f64),

    #[error("displacement certificate failed: separation {0}")]
    Certification(f64),

    #[error("mesh is disconnected")]
    Disconnected,

    #[error("test function family violates F >= 1 on the closed set (member {0})")]
    InadmissibleFamily(usize),

    #[error("profile width eps = {0} outside (0, 1/2)")]
    EpsOutOfRange(f64),

    #[error("radius {0} too close to the boundary of the disk bundle")]
    NearBoundary(f64),

    #[error("seed at radius {r} lies outside r <= {limit}")]
    SeedOutsideCore { r: f64, limit: f64 },

    #[error("quasi-state of the profile is {0}, need a positive value")]
    ProfileNotPositive(f64),

    #[error("quasi-morphism oracle `{0}` has no stability constant")]
    NotStable(String),

    #[error("Hamiltonian slice {slice} has mean {mean}, expected 0")]
    NotNormalized { slice: usize, mean: f64 },

    #[error("normalizer must be positive, got {0}")]
    BadNormalizer(f64),

    #[error("require a < 1 - eps (a = {a}, eps = {eps})")]
    RadiusTooLarge { a: f64, eps: f64 },

    #[error("k must be at least 1")]
    InvalidK,

    #[error("class identity `{0}` failed")]
    ClassIdentity(String),

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("unknown oracle `{0}`")]
    UnknownOracle(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("expression error: {0}")]
    Expression(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
