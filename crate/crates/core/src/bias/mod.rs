//! Language bias: mode declarations derived from parsed stories, and the
//! hypothesis space they define.

pub mod cache;
pub mod mode;
pub mod space;

use thiserror::Error;

pub use cache::{space_key, SpaceCache, SpaceCacheStats};
pub use mode::{generate_declarations, is_be_predicate, mode_fluent, ModeDecl, ModeFluent, Placement, Slot, SlotKind};
pub use space::{enumerate_space, is_compatible, BiasConfig, CandidateRule, HypothesisSpace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BiasError {
    #[error("cannot type argument `{arg}` of `{sentence}`")]
    Untypeable { sentence: String, arg: String },
    #[error("hypothesis space too large: more than {cap} rules ({found} found before stopping)")]
    SpaceTooLarge { found: usize, cap: usize },
    #[error("{0}")]
    Parse(String),
    #[error("space cache: {0}")]
    Io(String),
}
