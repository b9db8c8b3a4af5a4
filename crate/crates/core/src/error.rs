use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("triangular factor is singular (zero diagonal at {index})")]
    Singular { index: usize },

    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("filter has no steps")]
    NoSteps,

    #[error("step 0 must begin with an observation, not an evolution")]
    EvolveBeforeObserve,

    #[error("step {0} has not been observed yet; call observe before evolving")]
    NotObserved(usize),

    #[error("step {0} has already been observed")]
    AlreadyObserved(usize),

    #[error("evolution has {rows} equations but the new state has only {n_new} components; an explicit H is required")]
    MissingEvolutionMatrix { rows: usize, n_new: usize },

    #[error("step {0} forgotten")]
    StepForgotten(usize),

    #[error("step {requested} is beyond the latest step {latest}")]
    FutureStep { requested: usize, latest: usize },

    #[error("step {0} has not been smoothed")]
    NotSmoothed(usize),

    #[error("cannot forget step {0}: at least the current step must be retained")]
    ForgetPending(usize),

    #[error("unobservable scenario: weighted coefficient matrix has rank {rank} < {cols} columns")]
    Unobservable { rank: usize, cols: usize },

    #[error("scenario: {0}")]
    Scenario(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("at step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Error {
        match self {
            e @ Error::AtStep { .. } => e,
            e => Error::AtStep {
                step,
                source: Box::new(e),
            },
        }
    }

    /// Step index attached by the scenario runner, if any.
    pub fn step(&self) -> Option<usize> {
        match self {
            Error::AtStep { step, .. } => Some(*step),
            _ => None,
        }
    }
}
