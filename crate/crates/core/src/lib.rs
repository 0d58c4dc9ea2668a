//! Offline evaluation of recommenders for dataset and algorithm sharing
//! platforms.
//!
//! Users run algorithms on datasets; those `(user, dataset, algorithm)`
//! triples are the only evidence. From them the crate builds six
//! recommendation scenarios (datasets or algorithms recommended to users,
//! to each other, and to themselves), runs Most Popular, user-based kNN
//! Collaborative Filtering and TF-IDF Content-based Filtering, and scores
//! the lists for accuracy and popularity bias.
//!
//! The usual flow is [`ingestion::ingest`] (or [`io::read_corpus_dir`]),
//! then [`scenario::build_scenario`], [`recommenders::prepare`] and
//! [`metrics::aggregate`]; [`runner::run_experiment`] wires these together.

pub mod corpus;
pub mod error;
pub mod ingestion;
pub mod io;
pub mod metrics;
pub mod recommenders;
pub mod runner;
pub mod scenario;
pub mod seed;
pub mod synthetic;
pub mod textindex;

pub use corpus::{
    corpus_stats, item_popularity, CbItemRepresentation, Corpus, EntityId, EntityKind, EvalConfig,
    Interaction, ItemDescription, StatsReport,
};
pub use error::{Error, Result};
pub use ingestion::{KneeResult, RawInteraction};
pub use metrics::{MetricsReport, PerTargetResult};
pub use recommenders::{MethodId, RecommendationList, RecommendedItem, Recommender};
pub use runner::{ExperimentOutcome, ExperimentPlan, InputSource, ReportFormat};
pub use scenario::{CollaborationNetwork, ScenarioData, ScenarioId, TargetData};
pub use textindex::{TfIdfIndex, TfIdfVector};
