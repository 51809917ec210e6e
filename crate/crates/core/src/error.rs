use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("momentum {0} is not on the {1}-point grid")]
    OffGrid(f64, usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
