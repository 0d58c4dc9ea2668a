//! Domain types shared by every stage of the pipeline.
//!
//! A [`Corpus`] holds the three entity catalogs (users, datasets,
//! algorithms), the merged usage triples linking them, and the optional
//! free-text descriptions of datasets and algorithms. It is immutable once
//! built; every later stage only reads from it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    User,
    Dataset,
    Algorithm,
}

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::User => "user",
            EntityKind::Dataset => "dataset",
            EntityKind::Algorithm => "algorithm",
        }
    }

    /// Datasets and algorithms are the recommendable items.
    pub fn is_item(self) -> bool {
        !matches!(self, EntityKind::User)
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "user" => Ok(EntityKind::User),
            "dataset" => Ok(EntityKind::Dataset),
            "algorithm" => Ok(EntityKind::Algorithm),
            other => Err(Error::Validation(format!("unknown entity kind `{other}`"))),
        }
    }
}

/// A typed identifier. Ordering is by kind, then by id string; every
/// "ascending id" tie-break in the crate relies on this order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EntityId {
    kind: EntityKind,
    id: String,
}

impl EntityId {
    pub fn new(kind: EntityKind, id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::Validation(format!("empty {kind} id")));
        }
        Ok(EntityId { kind, id })
    }

    /// Panics on an empty id; meant for literals and already-validated input.
    pub fn user(id: impl Into<String>) -> Self {
        Self::new(EntityKind::User, id).expect("non-empty user id")
    }

    /// Panics on an empty id.
    pub fn dataset(id: impl Into<String>) -> Self {
        Self::new(EntityKind::Dataset, id).expect("non-empty dataset id")
    }

    /// Panics on an empty id.
    pub fn algorithm(id: impl Into<String>) -> Self {
        Self::new(EntityKind::Algorithm, id).expect("non-empty algorithm id")
    }

    pub fn kind(&self) -> EntityKind {
        self.kind
    }

    pub fn id(&self) -> &str {
        &self.id
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

/// A merged `(user, dataset, algorithm)` usage triple.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Interaction {
    pub user: EntityId,
    pub dataset: EntityId,
    pub algorithm: EntityId,
    /// Number of raw repetitions merged into this triple. Informational only.
    pub count: u32,
}

impl Interaction {
    pub fn new(user: EntityId, dataset: EntityId, algorithm: EntityId, count: u32) -> Result<Self> {
        let interaction = Interaction {
            user,
            dataset,
            algorithm,
            count,
        };
        interaction.validate()?;
        Ok(interaction)
    }

    fn validate(&self) -> Result<()> {
        if self.user.kind() != EntityKind::User
            || self.dataset.kind() != EntityKind::Dataset
            || self.algorithm.kind() != EntityKind::Algorithm
        {
            return Err(Error::Validation(format!(
                "interaction ({}, {}, {}) has mistyped ids",
                self.user, self.dataset, self.algorithm
            )));
        }
        if self.count == 0 {
            return Err(Error::Validation(format!(
                "interaction ({}, {}, {}) has count 0",
                self.user, self.dataset, self.algorithm
            )));
        }
        Ok(())
    }

    /// The id this interaction names for `kind`.
    pub fn entity(&self, kind: EntityKind) -> &EntityId {
        match kind {
            EntityKind::User => &self.user,
            EntityKind::Dataset => &self.dataset,
            EntityKind::Algorithm => &self.algorithm,
        }
    }

    fn key(&self) -> (&EntityId, &EntityId, &EntityId) {
        (&self.user, &self.dataset, &self.algorithm)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemDescription {
    pub item: EntityId,
    /// Raw text; tokenization and stemming happen in [`crate::textindex`].
    pub text: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    users: BTreeSet<EntityId>,
    datasets: BTreeSet<EntityId>,
    algorithms: BTreeSet<EntityId>,
    interactions: Vec<Interaction>,
    descriptions: BTreeMap<EntityId, ItemDescription>,
    no_interaction_items: BTreeSet<EntityId>,
}

impl Corpus {
    /// Builds a corpus from interactions plus additional catalog entries.
    ///
    /// Catalogs are the union of everything named by `interactions` and
    /// `extra`. Items that no interaction mentions become zero-interaction
    /// items. Descriptions must refer to datasets or algorithms already in a
    /// catalog.
    pub fn new(
        interactions: Vec<Interaction>,
        extra: impl IntoIterator<Item = EntityId>,
        descriptions: impl IntoIterator<Item = ItemDescription>,
    ) -> Result<Self> {
        let mut corpus = Corpus::default();
        let mut seen = BTreeSet::new();
        for interaction in &interactions {
            interaction.validate()?;
            if !seen.insert(interaction.key()) {
                return Err(Error::Validation(format!(
                    "duplicate interaction ({}, {}, {})",
                    interaction.user, interaction.dataset, interaction.algorithm
                )));
            }
            corpus.users.insert(interaction.user.clone());
            corpus.datasets.insert(interaction.dataset.clone());
            corpus.algorithms.insert(interaction.algorithm.clone());
        }
        drop(seen);

        for id in extra {
            if !corpus.catalog(id.kind()).contains(&id) && id.kind().is_item() {
                corpus.no_interaction_items.insert(id.clone());
            }
            corpus.catalog_mut(id.kind()).insert(id);
        }

        for description in descriptions {
            let item = &description.item;
            if !item.kind().is_item() {
                return Err(Error::Validation(format!(
                    "description for `{item}` must reference a dataset or algorithm"
                )));
            }
            if !corpus.catalog(item.kind()).contains(item) {
                return Err(Error::UnknownEntity(item.clone()));
            }
            if corpus.descriptions.contains_key(item) {
                return Err(Error::Validation(format!("duplicate description for `{item}`")));
            }
            corpus.descriptions.insert(item.clone(), description);
        }

        let mut interactions = interactions;
        interactions.sort();
        corpus.interactions = interactions;
        Ok(corpus)
    }

    pub fn users(&self) -> &BTreeSet<EntityId> {
        &self.users
    }

    pub fn datasets(&self) -> &BTreeSet<EntityId> {
        &self.datasets
    }

    pub fn algorithms(&self) -> &BTreeSet<EntityId> {
        &self.algorithms
    }

    pub fn catalog(&self, kind: EntityKind) -> &BTreeSet<EntityId> {
        match kind {
            EntityKind::User => &self.users,
            EntityKind::Dataset => &self.datasets,
            EntityKind::Algorithm => &self.algorithms,
        }
    }

    fn catalog_mut(&mut self, kind: EntityKind) -> &mut BTreeSet<EntityId> {
        match kind {
            EntityKind::User => &mut self.users,
            EntityKind::Dataset => &mut self.datasets,
            EntityKind::Algorithm => &mut self.algorithms,
        }
    }

    pub fn contains(&self, id: &EntityId) -> bool {
        self.catalog(id.kind()).contains(id)
    }

    /// Sorted by `(user, dataset, algorithm)`, unique per triple.
    pub fn interactions(&self) -> &[Interaction] {
        &self.interactions
    }

    pub fn descriptions(&self) -> &BTreeMap<EntityId, ItemDescription> {
        &self.descriptions
    }

    pub fn description(&self, item: &EntityId) -> Option<&ItemDescription> {
        self.descriptions.get(item)
    }

    pub fn no_interaction_items(&self) -> &BTreeSet<EntityId> {
        &self.no_interaction_items
    }

    pub fn is_empty(&self) -> bool {
        self.interactions.is_empty()
    }
}

/// Descriptive statistics in the shape of a "dataset statistics" table.
///
/// Entity counts cover entities with at least one interaction; zero
/// interaction items are counted separately. Averages are rounded to two
/// decimals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub users: usize,
    pub algorithms: usize,
    pub datasets: usize,
    pub interactions: usize,
    pub avg_interactions_per_user: f64,
    pub avg_interactions_per_algorithm: f64,
    pub avg_interactions_per_dataset: f64,
    pub algorithms_without_interactions: usize,
    pub datasets_without_interactions: usize,
}

impl fmt::Display for StatsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Users                          {:>10}", self.users)?;
        writeln!(f, "Algorithms                     {:>10}", self.algorithms)?;
        writeln!(f, "Datasets                       {:>10}", self.datasets)?;
        writeln!(f, "Interactions                   {:>10}", self.interactions)?;
        writeln!(f, "Avg. Interactions / User       {:>10.2}", self.avg_interactions_per_user)?;
        writeln!(f, "Avg. Interactions / Algorithm  {:>10.2}", self.avg_interactions_per_algorithm)?;
        writeln!(f, "Avg. Interactions / Dataset    {:>10.2}", self.avg_interactions_per_dataset)?;
        writeln!(f, "Algorithms w/o Int.            {:>10}", self.algorithms_without_interactions)?;
        write!(f, "Datasets w/o Int.              {:>10}", self.datasets_without_interactions)
    }
}

fn round2(value: f64) -> f64 {
    (value * 100.0).round() / 100.0
}

fn average(total: usize, over: usize) -> f64 {
    if over == 0 {
        0.0
    } else {
        round2(total as f64 / over as f64)
    }
}

pub fn corpus_stats(corpus: &Corpus) -> StatsReport {
    let active = |kind: EntityKind| {
        corpus
            .catalog(kind)
            .iter()
            .filter(|id| !corpus.no_interaction_items.contains(*id))
            .count()
    };
    let zero = |kind: EntityKind| {
        corpus
            .no_interaction_items
            .iter()
            .filter(|id| id.kind() == kind)
            .count()
    };
    let users = corpus.users.len();
    let algorithms = active(EntityKind::Algorithm);
    let datasets = active(EntityKind::Dataset);
    let interactions = corpus.interactions.len();
    StatsReport {
        users,
        algorithms,
        datasets,
        interactions,
        avg_interactions_per_user: average(interactions, users),
        avg_interactions_per_algorithm: average(interactions, algorithms),
        avg_interactions_per_dataset: average(interactions, datasets),
        algorithms_without_interactions: zero(EntityKind::Algorithm),
        datasets_without_interactions: zero(EntityKind::Dataset),
    }
}

/// Number of distinct merged interactions naming each entity of `kind`.
///
/// Every catalog entity of `kind` is present in the result, with 0 when
/// `interactions` never mentions it. Repetition counts are ignored.
pub fn item_popularity<'a>(
    corpus: &Corpus,
    interactions: impl IntoIterator<Item = &'a Interaction>,
    kind: EntityKind,
) -> BTreeMap<EntityId, u64> {
    let mut popularity: BTreeMap<EntityId, u64> =
        corpus.catalog(kind).iter().map(|id| (id.clone(), 0)).collect();
    for interaction in interactions {
        *popularity.entry(interaction.entity(kind).clone()).or_insert(0) += 1;
    }
    popularity
}

/// How item targets are represented for content-based scoring.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CbItemRepresentation {
    /// The target item's own description vector.
    #[default]
    OwnDescription,
    /// The centroid of the target's profile items, as for user targets.
    ProfileCentroid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Recommendation list length, also the `k` of every `@k` metric.
    pub list_size: usize,
    /// Neighborhood size for collaborative filtering.
    pub neighbors: usize,
    /// Fraction of each target's interactions kept as profile data.
    pub split_ratio: f64,
    pub tfidf_min_tf: u32,
    pub tfidf_min_df: u32,
    /// Ground-truth size for the same-kind item scenarios.
    pub overlap_truth_size: usize,
    pub rng_seed: u64,
    pub knee_enabled: bool,
    pub cb_item_representation: CbItemRepresentation,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            list_size: 10,
            neighbors: 40,
            split_ratio: 0.8,
            tfidf_min_tf: 1,
            tfidf_min_df: 2,
            overlap_truth_size: 10,
            rng_seed: 0,
            knee_enabled: true,
            cb_item_representation: CbItemRepresentation::OwnDescription,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::Config(format!(
                "split_ratio must lie in (0, 1), got {}",
                self.split_ratio
            )));
        }
        for (name, value) in [
            ("list_size", self.list_size),
            ("neighbors", self.neighbors),
            ("overlap_truth_size", self.overlap_truth_size),
            ("tfidf_min_tf", self.tfidf_min_tf as usize),
            ("tfidf_min_df", self.tfidf_min_df as usize),
        ] {
            if value == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }
}
