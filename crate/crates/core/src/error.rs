use thiserror::Error;

/// Every failure the toolkit can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("alternation violated at position {position}")]
    AlternationViolation { position: usize },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("first symbol has the wrong kind for the framework orientation")]
    OrientationMismatch,
    #[error("history has odd length {0}")]
    OddLength(usize),
    #[error("invalid universe: {0}")]
    InvalidUniverse(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid framework: {0}")]
    InvalidFramework(String),
    #[error("history is not a {expected} turn")]
    WrongTurn { expected: &'static str },
    #[error("policy orientation does not match the framework")]
    WrongOrientation,
    #[error("policy belongs to a different framework")]
    FrameworkMismatch,
    #[error("framework `{0}` is already randomized in that component")]
    AlreadyRandomized(String),
    #[error("policy violates framework constraint: {0}")]
    PolicyConstraint(String),
    #[error("no percept with reward 1 is available")]
    NoUnitRewardPercept,
    #[error("no percept with reward 0 is available")]
    NoZeroRewardPercept,
    #[error("action is not available at the cutoff history")]
    ActionUnavailable,
    #[error("histories {0} and {1} are prefix-related")]
    NotAnAntichain(usize, usize),
    #[error("reward alphabet cannot realize the descending rewards")]
    InsufficientRewardAlphabet,
    #[error("flexible environment condition C1 violated by entries {0} and {1}")]
    ConditionC1Violation(usize, usize),
    #[error("flexible environment condition C2 violated at entry {0}")]
    ConditionC2Violation(usize),
    #[error("flexible environment condition C3 violated at entry {0}")]
    ConditionC3Violation(usize),
    #[error("mixture weight must lie in [0, 1]")]
    WeightOutOfRange,
    #[error("policy is not deterministic at history of length {0}")]
    NotDeterministic(usize),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("translation has no environment map")]
    MissingEnvMap,
    #[error("translation specs do not line up: {0}")]
    SpecMismatch(String),
    #[error("cannot parse translation identifier `{0}`")]
    UnknownTranslation(String),
    #[error("audit does not apply to agent map `{0}`")]
    WrongAgentMapKind(String),
    #[error("universe needs a zero-reward and a nonzero-reward percept")]
    DegenerateRewards,
    #[error("chain stalled at step {step}: no perturbation disagrees past the current history")]
    ChainStalled { step: usize },
    #[error("chain length {k} cannot beat value range of size {range}")]
    RangeTooSmall { k: usize, range: usize },
    #[error("no agent disagreeing with the base agent was found")]
    NoDisagreementFound,
    #[error("environment map is not injective on the corpus")]
    NotWeak,
    #[error("framework lacks property prerequisite: {0}")]
    PropertyPrerequisiteFailed(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
