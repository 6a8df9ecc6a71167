use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid alignment: {0}")]
    InvalidAlignment(String),

    #[error("vertex {vertex} out of range 1..={n}")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("self-loop {{{0}, {0}}} is not an edge")]
    SelfLoop(usize),

    #[error("state space too large: {states} alignments exceed the enumeration cap {cap}")]
    StateSpaceTooLarge { states: String, cap: u64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate temperature: rho = {0} must lie strictly between 0 and 1")]
    DegenerateTemperature(f64),

    #[error("{name} = {value} out of range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("precondition failed: permutation is not an automorphism of {0}")]
    NotAnAutomorphism(&'static str),

    #[error("size cap exceeded: {what} has size {size}, cap is {cap}")]
    SizeCap {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("outside the domain: {0}")]
    Domain(String),

    #[error("invalid annealing schedule: {0}")]
    InvalidSchedule(String),

    #[error("empty posterior table")]
    EmptyTable,
}
