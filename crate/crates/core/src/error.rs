use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("distance matrix row {row} has {len} entries, expected {expected}")]
    MalformedMatrix { row: usize, len: usize, expected: usize },
    #[error("{what}: expected {expected} entries, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("instance has no vertices")]
    EmptyInstance,
    #[error("fleet has no vehicle classes")]
    EmptyFleet,
    #[error("vehicle class {class}: {reason}")]
    InvalidClass { class: usize, reason: String },
    #[error("instance failed validation: {0}")]
    InvalidInstance(String),
    #[error("vertex subset does not contain the depot")]
    MissingDepot,
    #[error("vertex {0} is out of range")]
    VertexOutOfRange(usize),
    #[error("empty vertex set")]
    EmptyVertexSet,
    #[error("item for vertex {vertex} has size {size}, larger than every bin capacity")]
    InfeasibleItem { vertex: usize, size: f64 },
    #[error("vertex {vertex} lies at distance {distance} from the depot; a round trip does not fit in bound {bound}")]
    Unreachable { vertex: usize, distance: f64, bound: f64 },
    #[error("class {class} would need {needed} vehicles but only {available} are available")]
    FleetExhausted {
        class: usize,
        needed: usize,
        available: u32,
    },
    #[error("no feasible solution: {0}")]
    Infeasible(String),
    #[error("tours are not a feasible solution: {0}")]
    InfeasibleTours(String),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("instance generation failed after {attempts} attempts: {reason}")]
    GenerationFailed { attempts: usize, reason: String },
    #[error("oracle limit exceeded: {0}")]
    ResourceLimit(String),
}

impl Error {
    /// True when the error means "no feasible answer exists for this input",
    /// as opposed to malformed input or exhausted limits.
    pub fn is_infeasibility(&self) -> bool {
        matches!(
            self,
            Error::InvalidInstance(_)
                | Error::InfeasibleItem { .. }
                | Error::Unreachable { .. }
                | Error::FleetExhausted { .. }
                | Error::InfeasibleTours(_)
                | Error::Infeasible(_)
        )
    }
}
