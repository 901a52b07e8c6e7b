use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MrfError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unary strength is undefined: {0}")]
    UndefinedStrength(String),

    #[error("relative energy has a degenerate denominator")]
    DegenerateDenominator,

    #[error("edge set contains a cycle through node {0}")]
    Cyclic(usize),

    #[error("search space of {0:e} labelings exceeds the enumeration limit")]
    TooLarge(f64),

    #[error(
        "not enough offsets: wanted {wanted_submodular} submodular and {wanted_non_submodular} \
         non-submodular, found {found_submodular} and {found_non_submodular}"
    )]
    InsufficientOffsets {
        wanted_submodular: usize,
        wanted_non_submodular: usize,
        found_submodular: usize,
        found_non_submodular: usize,
    },

    #[error("image error: {0}")]
    Image(String),
}

pub type Result<T> = std::result::Result<T, MrfError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(MrfError::InvalidInput(msg.into()))
}
