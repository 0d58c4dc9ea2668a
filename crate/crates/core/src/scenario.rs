//! Profile and ground-truth construction for the six recommendation
//! scenarios.
//!
//! | id  | target    | candidates | profile                    | ground truth                 |
//! |-----|-----------|------------|----------------------------|------------------------------|
//! | SC1 | user      | datasets   | 80% of used datasets       | remaining 20%                |
//! | SC2 | user      | algorithms | 80% of used algorithms     | remaining 20%                |
//! | SC3 | algorithm | datasets   | 80% of co-used datasets    | remaining 20%                |
//! | SC4 | dataset   | algorithms | 80% of co-used algorithms  | remaining 20%                |
//! | SC5 | dataset   | datasets   | all co-used algorithms     | top user-overlap datasets    |
//! | SC6 | algorithm | algorithms | all co-used datasets       | top user-overlap algorithms  |

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{item_popularity, Corpus, EntityId, EntityKind, EvalConfig, Interaction};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ScenarioId {
    #[serde(rename = "SC1")]
    DatasetsToUsers,
    #[serde(rename = "SC2")]
    AlgorithmsToUsers,
    #[serde(rename = "SC3")]
    DatasetsToAlgorithms,
    #[serde(rename = "SC4")]
    AlgorithmsToDatasets,
    #[serde(rename = "SC5")]
    DatasetsToDatasets,
    #[serde(rename = "SC6")]
    AlgorithmsToAlgorithms,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 6] = [
        ScenarioId::DatasetsToUsers,
        ScenarioId::AlgorithmsToUsers,
        ScenarioId::DatasetsToAlgorithms,
        ScenarioId::AlgorithmsToDatasets,
        ScenarioId::DatasetsToDatasets,
        ScenarioId::AlgorithmsToAlgorithms,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ScenarioId::DatasetsToUsers => "SC1",
            ScenarioId::AlgorithmsToUsers => "SC2",
            ScenarioId::DatasetsToAlgorithms => "SC3",
            ScenarioId::AlgorithmsToDatasets => "SC4",
            ScenarioId::DatasetsToDatasets => "SC5",
            ScenarioId::AlgorithmsToAlgorithms => "SC6",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ScenarioId::DatasetsToUsers => "Datasets to Users",
            ScenarioId::AlgorithmsToUsers => "Algorithms to Users",
            ScenarioId::DatasetsToAlgorithms => "Datasets to Algorithms",
            ScenarioId::AlgorithmsToDatasets => "Algorithms to Datasets",
            ScenarioId::DatasetsToDatasets => "Datasets to Datasets",
            ScenarioId::AlgorithmsToAlgorithms => "Algorithms to Algorithms",
        }
    }

    /// Kind of the entity receiving recommendations.
    pub fn target_kind(self) -> EntityKind {
        match self {
            ScenarioId::DatasetsToUsers | ScenarioId::AlgorithmsToUsers => EntityKind::User,
            ScenarioId::DatasetsToAlgorithms | ScenarioId::AlgorithmsToAlgorithms => {
                EntityKind::Algorithm
            }
            ScenarioId::AlgorithmsToDatasets | ScenarioId::DatasetsToDatasets => {
                EntityKind::Dataset
            }
        }
    }

    /// Kind of the recommended items.
    pub fn candidate_kind(self) -> EntityKind {
        match self {
            ScenarioId::DatasetsToUsers
            | ScenarioId::DatasetsToAlgorithms
            | ScenarioId::DatasetsToDatasets => EntityKind::Dataset,
            ScenarioId::AlgorithmsToUsers
            | ScenarioId::AlgorithmsToDatasets
            | ScenarioId::AlgorithmsToAlgorithms => EntityKind::Algorithm,
        }
    }

    /// Kind of the items in a target's profile.
    pub fn profile_kind(self) -> EntityKind {
        match self {
            ScenarioId::DatasetsToDatasets => EntityKind::Algorithm,
            ScenarioId::AlgorithmsToAlgorithms => EntityKind::Dataset,
            other => other.candidate_kind(),
        }
    }

    /// SC5 and SC6 take their ground truth from the collaboration network.
    pub fn uses_overlap_truth(self) -> bool {
        matches!(
            self,
            ScenarioId::DatasetsToDatasets | ScenarioId::AlgorithmsToAlgorithms
        )
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioId::ALL
            .into_iter()
            .find(|sc| sc.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown scenario `{s}`")))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetData {
    pub profile: BTreeSet<EntityId>,
    pub ground_truth: BTreeSet<EntityId>,
}

/// Why targets were dropped while building a scenario.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    pub targets_considered: usize,
    pub targets_evaluated: usize,
    /// Fewer than two interactions to split (SC1-SC4) or an empty profile.
    pub excluded_too_few_interactions: usize,
    /// No collaboration-network neighbor (SC5/SC6).
    pub excluded_isolated: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioData {
    pub scenario: ScenarioId,
    /// Every recommendable item, including zero-interaction items.
    pub candidate_catalog: BTreeSet<EntityId>,
    pub targets: BTreeMap<EntityId, TargetData>,
    /// Candidate popularity measured on profile-side interactions.
    pub popularity: BTreeMap<EntityId, u64>,
    pub report: BuildReport,
}

impl ScenarioData {
    /// The items a target already knows: its profile and, for item targets,
    /// the target itself.
    pub fn known_items(&self, target: &EntityId) -> Result<BTreeSet<EntityId>> {
        let data = self
            .targets
            .get(target)
            .ok_or_else(|| Error::UnknownEntity(target.clone()))?;
        let mut known = data.profile.clone();
        known.insert(target.clone());
        Ok(known)
    }

    pub fn popularity_of(&self, item: &EntityId) -> u64 {
        self.popularity.get(item).copied().unwrap_or(0)
    }

    pub fn to_dump(&self) -> ScenarioDump {
        ScenarioDump {
            scenario: self.scenario,
            candidate_catalog_size: self.candidate_catalog.len(),
            report: self.report.clone(),
            targets: self
                .targets
                .iter()
                .map(|(target, data)| TargetDump {
                    target: target.id().to_string(),
                    profile: data.profile.iter().map(|i| i.id().to_string()).collect(),
                    ground_truth: data.ground_truth.iter().map(|i| i.id().to_string()).collect(),
                })
                .collect(),
        }
    }
}

/// JSON form of a built scenario, for inspection and reuse.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDump {
    pub scenario: ScenarioId,
    pub candidate_catalog_size: usize,
    pub report: BuildReport,
    pub targets: Vec<TargetDump>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetDump {
    pub target: String,
    pub profile: Vec<String>,
    pub ground_truth: Vec<String>,
}

fn require(corpus: &Corpus, id: &EntityId) -> Result<()> {
    if corpus.contains(id) {
        Ok(())
    } else {
        Err(Error::UnknownEntity(id.clone()))
    }
}

/// Items of `kind` a user interacted with.
pub fn direct_profile(corpus: &Corpus, target: &EntityId, kind: EntityKind) -> Result<BTreeSet<EntityId>> {
    if target.kind() != EntityKind::User {
        return Err(Error::Validation(format!("`{target}` is not a user")));
    }
    require(corpus, target)?;
    Ok(corpus
        .interactions()
        .iter()
        .filter(|i| &i.user == target)
        .map(|i| i.entity(kind).clone())
        .collect())
}

/// Items of the other kind co-occurring with a dataset or algorithm.
pub fn indirect_profile(corpus: &Corpus, target: &EntityId) -> Result<BTreeSet<EntityId>> {
    let other = match target.kind() {
        EntityKind::Dataset => EntityKind::Algorithm,
        EntityKind::Algorithm => EntityKind::Dataset,
        EntityKind::User => {
            return Err(Error::Validation(format!("`{target}` is not an item")));
        }
    };
    require(corpus, target)?;
    Ok(corpus
        .interactions()
        .iter()
        .filter(|i| i.entity(target.kind()) == target)
        .map(|i| i.entity(other).clone())
        .collect())
}

/// Number of held-out items for a target with `n` items. A small epsilon
/// keeps `(1 - 0.8) * 10` from flooring to 1.
pub fn ground_truth_size(n: usize, ratio: f64) -> usize {
    (((1.0 - ratio) * n as f64 + 1e-9).floor() as usize).max(1)
}

/// Random profile / ground-truth partition. `None` when there are fewer
/// than two items.
pub fn split_80_20<R: Rng + ?Sized>(
    items: &BTreeSet<EntityId>,
    ratio: f64,
    rng: &mut R,
) -> Option<(BTreeSet<EntityId>, BTreeSet<EntityId>)> {
    if items.len() < 2 {
        return None;
    }
    let ordered: Vec<&EntityId> = items.iter().collect();
    let truth_size = ground_truth_size(items.len(), ratio).min(items.len() - 1);
    let picked: BTreeSet<usize> = rand::seq::index::sample(rng, ordered.len(), truth_size)
        .into_iter()
        .collect();
    let mut profile = BTreeSet::new();
    let mut truth = BTreeSet::new();
    for (index, item) in ordered.into_iter().enumerate() {
        if picked.contains(&index) {
            truth.insert(item.clone());
        } else {
            profile.insert(item.clone());
        }
    }
    Some((profile, truth))
}

/// Same-kind items linked by shared users; edge weight is the number of
/// users who interacted with both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollaborationNetwork {
    kind: EntityKind,
    adjacency: BTreeMap<EntityId, BTreeMap<EntityId, u32>>,
}

impl CollaborationNetwork {
    pub fn kind(&self) -> EntityKind {
        self.kind
    }

    pub fn overlap(&self, a: &EntityId, b: &EntityId) -> u32 {
        self.adjacency
            .get(a)
            .and_then(|n| n.get(b))
            .copied()
            .unwrap_or(0)
    }

    pub fn neighbors(&self, item: &EntityId) -> Option<&BTreeMap<EntityId, u32>> {
        self.adjacency.get(item)
    }

    /// Each unordered pair once, as `(smaller, larger, overlap)`.
    pub fn pairs(&self) -> impl Iterator<Item = (&EntityId, &EntityId, u32)> {
        self.adjacency.iter().flat_map(|(a, nbrs)| {
            nbrs.iter()
                .filter(move |(b, _)| a < *b)
                .map(move |(b, &w)| (a, b, w))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.pairs().count()
    }
}

pub fn build_collaboration_network(corpus: &Corpus, kind: EntityKind) -> CollaborationNetwork {
    let mut per_user: BTreeMap<&EntityId, BTreeSet<&EntityId>> = BTreeMap::new();
    for interaction in corpus.interactions() {
        per_user
            .entry(&interaction.user)
            .or_default()
            .insert(interaction.entity(kind));
    }

    let mut index: HashMap<&EntityId, u32> = HashMap::new();
    let mut items: Vec<&EntityId> = Vec::new();
    let mut counts: HashMap<(u32, u32), u32> = HashMap::new();
    for used in per_user.values() {
        let ids: Vec<u32> = used
            .iter()
            .map(|&item| {
                *index.entry(item).or_insert_with(|| {
                    items.push(item);
                    (items.len() - 1) as u32
                })
            })
            .collect();
        for (pos, &a) in ids.iter().enumerate() {
            for &b in &ids[pos + 1..] {
                let key = if a < b { (a, b) } else { (b, a) };
                *counts.entry(key).or_insert(0) += 1;
            }
        }
    }

    let mut adjacency: BTreeMap<EntityId, BTreeMap<EntityId, u32>> = BTreeMap::new();
    for ((a, b), w) in counts {
        let (a, b) = (items[a as usize], items[b as usize]);
        adjacency.entry(a.clone()).or_default().insert(b.clone(), w);
        adjacency.entry(b.clone()).or_default().insert(a.clone(), w);
    }
    CollaborationNetwork { kind, adjacency }
}

/// The `m` neighbors with the largest user overlap, ties broken by
/// ascending id. `None` for an isolated target.
pub fn overlap_ground_truth(
    network: &CollaborationNetwork,
    target: &EntityId,
    m: usize,
) -> Option<BTreeSet<EntityId>> {
    let neighbors = network.neighbors(target).filter(|n| !n.is_empty())?;
    let mut ranked: Vec<(&EntityId, u32)> = neighbors.iter().map(|(id, &w)| (id, w)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    Some(ranked.into_iter().take(m).map(|(id, _)| id.clone()).collect())
}

/// Builds one scenario. Each target draws its split from its own substream
/// of `seed`, so the partition of one target does not depend on which
/// other targets exist.
pub fn build_scenario(
    corpus: &Corpus,
    scenario: ScenarioId,
    config: &EvalConfig,
    seed: u64,
) -> Result<ScenarioData> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    config.validate()?;

    let target_kind = scenario.target_kind();
    let profile_kind = scenario.profile_kind();
    let candidate_kind = scenario.candidate_kind();

    let mut projections: BTreeMap<&EntityId, BTreeSet<EntityId>> = BTreeMap::new();
    for interaction in corpus.interactions() {
        projections
            .entry(interaction.entity(target_kind))
            .or_default()
            .insert(interaction.entity(profile_kind).clone());
    }

    let network = scenario
        .uses_overlap_truth()
        .then(|| build_collaboration_network(corpus, target_kind));

    let mut report = BuildReport {
        targets_considered: corpus.catalog(target_kind).len(),
        ..BuildReport::default()
    };
    let empty = BTreeSet::new();
    let mut targets = BTreeMap::new();
    for target in corpus.catalog(target_kind) {
        let items = projections.get(target).unwrap_or(&empty);
        let data = match &network {
            None => {
                let mut rng = rng_from_seed(derive_seed(seed, &[target.id()]));
                match split_80_20(items, config.split_ratio, &mut rng) {
                    Some((profile, ground_truth)) => TargetData {
                        profile,
                        ground_truth,
                    },
                    None => {
                        report.excluded_too_few_interactions += 1;
                        continue;
                    }
                }
            }
            Some(network) => {
                if items.is_empty() {
                    report.excluded_too_few_interactions += 1;
                    continue;
                }
                match overlap_ground_truth(network, target, config.overlap_truth_size) {
                    Some(ground_truth) => TargetData {
                        profile: items.clone(),
                        ground_truth,
                    },
                    None => {
                        report.excluded_isolated += 1;
                        continue;
                    }
                }
            }
        };
        targets.insert(target.clone(), data);
    }
    report.targets_evaluated = targets.len();

    // Held-out (target, item) links never feed popularity.
    let is_held_out = |i: &Interaction| {
        targets
            .get(i.entity(target_kind))
            .is_some_and(|t: &TargetData| t.ground_truth.contains(i.entity(profile_kind)))
    };
    let popularity = item_popularity(
        corpus,
        corpus.interactions().iter().filter(|i| !is_held_out(i)),
        candidate_kind,
    );

    Ok(ScenarioData {
        scenario,
        candidate_catalog: corpus.catalog(candidate_kind).clone(),
        targets,
        popularity,
        report,
    })
}
