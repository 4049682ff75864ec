use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("objects belong to different models")]
    ModelMismatch,

    #[error("invalid word {word:?}: {reason} at offset {offset}")]
    Alphabet {
        word: String,
        offset: usize,
        reason: String,
    },

    #[error("unsupported for this model: {0}")]
    Unsupported(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("subgroup is not elliptic or exceeds {cap} elements")]
    SubgroupTooLarge { cap: usize },

    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    #[error("enumeration of {estimate} words exceeds the cap of {cap}")]
    EnumerationCap { estimate: u128, cap: u128 },

    #[error("oracles disagree on word {word}")]
    OracleDisagreement { word: String },

    #[error("{0} is loxodromic; an elliptic model for it is required")]
    NeedsEllipticization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
