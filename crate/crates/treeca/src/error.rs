use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid arity {0}: must be at least 1")]
    InvalidArity(usize),

    #[error("invalid radius {0}: must be at least 1")]
    InvalidRadius(usize),

    #[error("alphabet size {0} out of range: must be between 1 and 256")]
    InvalidAlphabet(usize),

    #[error("invalid depth {0}: patterns must have depth at least 1")]
    InvalidDepth(usize),

    #[error("word digit {digit} out of range for arity {arity}")]
    InvalidWordDigit { digit: u8, arity: usize },

    #[error("letter {letter} out of range for alphabet size {alphabet}")]
    InvalidLetter { letter: usize, alphabet: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("pattern text invalid: {0}")]
    PatternText(String),

    #[error("rule file line {line}: {message}")]
    RuleParse { line: usize, message: String },

    #[error("enumeration of {required} states exceeds budget {budget} (raise TREECA_BUDGET or --budget)")]
    Budget { required: String, budget: u64 },

    #[error("rule is not permutive: {0}")]
    NotPermutive(String),

    #[error("block is not over-mean: {0} preimages, mean {1}")]
    NotOverMean(u64, u64),

    #[error("extension property does not hold at node {node}: {solutions} child tuples fit")]
    ExtensionFailure { node: String, solutions: u64 },

    #[error("no witness exists at these parameters: {0}")]
    NoWitness(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}
