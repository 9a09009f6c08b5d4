use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("incomplete policy: no action chosen at state {0}")]
    IncompletePolicy(String),

    #[error("singular regularized matrix")]
    SingularMatrix,

    #[error("no exact gradient for this objective")]
    NoExactGradient,

    #[error("marginal out of range: x[{index}] = {value}")]
    MarginalOutOfRange { index: usize, value: f64 },

    #[error("exact evaluation infeasible: {fractional} fractional coordinates exceed the limit of {limit}")]
    ExactInfeasible { fractional: usize, limit: usize },

    #[error("enumeration infeasible: more than {limit} paths")]
    EnumerationInfeasible { limit: u64 },

    #[error("SUB requires deterministic transitions")]
    StochasticTransitions,

    #[error("not a valid flow: {0}")]
    InvalidFlow(String),

    #[error("baseline requires matrix or additive rewards")]
    UnsupportedObjective,

    #[error("goal unreachable under R/D moves")]
    GoalUnreachable,

    #[error("ground set mismatch: mdp has {mdp} pairs, objective has {objective}")]
    GroundSetMismatch { mdp: usize, objective: usize },

    #[error("invalid mdp: {0}")]
    InvalidMdp(String),

    #[error("invalid objective: {0}")]
    InvalidObjective(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
