use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("{0} is not a prime modulus")]
    NotPrime(u32),
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u32, u32),
    #[error("site count mismatch: {0} vs {1}")]
    SiteMismatch(usize, usize),
    #[error("site {site} out of range for a register of {n} sites")]
    SiteOutOfRange { site: usize, n: usize },
    #[error("gate sites must be distinct")]
    RepeatedSite,
    #[error("gate {0} is not Clifford")]
    NotClifford(String),
    #[error("gate {gate} is not defined for d = {d}")]
    GateUnsupported { gate: String, d: u32 },
    #[error("register of dimension {dim} exceeds the ceiling {ceiling}")]
    DimensionOverflow { dim: u128, ceiling: u64 },
    #[error("measurement branch has zero norm")]
    ZeroNormBranch,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("flow maps vertex {0} outside the non-input set")]
    FlowRange(usize),
    #[error("flow is not defined on vertex {0}")]
    FlowUndefined(usize),
    #[error("invalid flow: {0}")]
    InvalidFlow(String),
    #[error("vertex {0} depends on a vertex that has not been measured yet")]
    DependencyOrder(usize),
    #[error("gadgets are already attached")]
    GadgetsAttached,
    #[error("graph has no partition")]
    NoPartition,
    #[error("invalid role for this operation: {0}")]
    InvalidRole(String),
    #[error("malformed prover strategy: {0}")]
    MalformedStrategy(String),
    #[error("transcript violates message alternation: {0}")]
    Alternation(String),
    #[error("skeletons differ: {0}")]
    SkeletonMismatch(String),
    #[error("invalid code parameters: {0}")]
    CodeParams(String),
    #[error("malformed wiring: {0}")]
    Wiring(String),
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("unsupported on this backend: {0}")]
    Backend(String),
    #[error("serialization: {0}")]
    Serde(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
