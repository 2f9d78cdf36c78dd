use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("brick law is not critical: E[B] = {mean_bottom}, E[H] = {mean_top}")]
    NotCritical { mean_bottom: f64, mean_top: f64 },
    #[error("brick law is degenerate: every atom has equal bottom and top")]
    Degenerate,
    #[error("probabilities sum to {0}, expected 1")]
    NotAProbability(f64),
    #[error("invalid atom: {0}")]
    InvalidAtom(String),
    #[error("offspring law has no mass at 0, so the bottom law is undefined")]
    ZeroP0,
    #[error("invalid step count N = {n}: need 1 + lambda < N (lambda = {lambda})")]
    InvalidN { n: u64, lambda: f64 },
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("integer overflow while {0}")]
    Overflow(&'static str),
    #[error("too few samples: got {got}, need at least {min}")]
    TooFewSamples { got: usize, min: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
