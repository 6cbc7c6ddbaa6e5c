use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("generator index {index} out of range for rank {rank}")]
    GeneratorOutOfRange { index: i32, rank: usize },

    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("endomorphism is not injective")]
    NotInjective,

    #[error("endomorphism is surjective: automorphism case; use the fixed point class route")]
    SurjectiveInput,

    #[error("transition matrix is reducible; invariant edge subset {0:?}")]
    ReducibleMatrix(Vec<usize>),

    #[error("no fixed vertex to base the marking at; vertex orbits {0:?}")]
    NoFixedVertex(Vec<Vec<usize>>),

    #[error("edge {0} is collapsed; direction map undefined")]
    CollapsedEdge(usize),

    #[error("graph is not connected")]
    Disconnected,

    #[error("stable graph construction failed: {0}")]
    StableGraph(String),

    #[error("hypothesis not met: {0}")]
    Hypothesis(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
