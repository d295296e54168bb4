//! Preference-driven set similarity join.
//!
//! Given two collections of records, a set-based similarity function, and a
//! result-set preference, the engine finds the preference-optimal similarity
//! threshold and returns the corresponding join result. No labeled data and
//! no user-supplied threshold are needed: the preference score function ranks
//! whole join results, and the engine sweeps a small set of pivotal
//! thresholds in descending order, joining pairs incrementally and scoring
//! them incrementally, until the score upper bound proves the optimum has
//! been found.
//!
//! The crate is organized as:
//!
//! - [`model`]: records, token sets, exact similarity values, join results.
//! - [`tokenize`]: strings to token sets (words or q-grams, bag semantics,
//!   document-frequency global ordering).
//! - [`sim`]: the five set-based similarity measures, overlap thresholds,
//!   prefix lengths, and lazy min/max bound evaluation.
//! - [`index`]: inverted index over the right side and incremental
//!   prefix-filtered candidate generation.
//! - [`pivotal`]: per-record best matches and the pivotal threshold set.
//! - [`preference`]: the two preference scorers and their upper bounds.
//! - [`engine`]: the end-to-end sweep.
//! - [`oracle`]: a brute-force reference implementation used for testing and
//!   available for manual inspection.

pub mod engine;
pub mod index;
pub mod model;
pub mod oracle;
pub mod pivotal;
pub mod preference;
pub mod sim;
#[cfg(test)]
pub(crate) mod testdata;
pub mod tokenize;

pub use engine::{EngineConfig, EngineOutcome, PivotalMode};
pub use model::{Dataset, ExactSim, JoinResult, RecordId, Side, TokenSet};
pub use preference::PreferenceKind;
pub use sim::SimilarityMeasure;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),
    #[error("similarity of an empty token set is undefined")]
    EmptySet,
    #[error("threshold {0} was never evaluated")]
    UnknownThreshold(String),
    #[error("pair ({0}, {1}) was already joined")]
    DuplicatePair(u32, u32),
    #[error("token {0:?} (occurrence {1}) is not in the dictionary")]
    UnknownToken(String, u32),
    #[error("thresholds must be probed in descending order ({got} after {prev})")]
    ThresholdOrder { prev: String, got: String },
    #[error("both datasets must contain at least one non-empty record")]
    EmptyInput,
    #[error("no pair of records shares a token; the join is empty at every positive threshold")]
    NoCandidatePairs,
}

pub type Result<T> = std::result::Result<T, Error>;
