//! Coarserank: models, coarsening processes, and aggregation methods for
//! incomplete ranking data.
//!
//! The crate covers a two-stage generative pipeline — draw a complete
//! ranking from a parametric model, then coarsen it into a pairwise
//! preference whose selection may depend on the ranks involved — together
//! with exact small-K oracles for the induced observation distribution and
//! fifteen rank aggregation methods for recovering a central ranking from
//! the observed comparisons.

pub mod aggregate;
pub mod checks;
pub mod coarsening;
pub mod config;
pub mod error;
pub mod experiment;
pub mod models;
pub mod pairwise;
pub mod perm;

pub use aggregate::{
    aggregate, argsort_desc, AggregateOutcome, Diagnostics, MethodId, ScoreVector,
};
pub use coarsening::{CoarsenedObservation, CoarseningSpec, ExactQTable};
pub use error::{Error, Result};
pub use models::{MallowsParams, PlParams, RankingModel};
pub use pairwise::{ComparisonMatrix, PairwisePreference, ProbabilityMatrix, UndefinedPolicy};
pub use perm::{kendall_distance, normalized_kendall_distance, Ordering, Ranking};
