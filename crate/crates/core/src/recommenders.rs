//! Most Popular, user-based kNN Collaborative Filtering and TF-IDF
//! Content-based Filtering behind one [`Recommender`] contract.
//!
//! Every list is filtered of the target's known items (its profile, and the
//! target itself for item targets), holds at most `n` unique candidates, and
//! is ordered by score descending with ties broken by ascending item id.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{CbItemRepresentation, EntityId, EntityKind, EvalConfig};
use crate::error::{Error, Result};
use crate::scenario::{ScenarioData, TargetData};
use crate::textindex::{centroid, TfIdfIndex, TfIdfVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MethodId {
    MP,
    CF,
    CB,
}

impl MethodId {
    pub const ALL: [MethodId; 3] = [MethodId::MP, MethodId::CF, MethodId::CB];

    pub fn label(self) -> &'static str {
        match self {
            MethodId::MP => "MP",
            MethodId::CF => "CF",
            MethodId::CB => "CB",
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodId::ALL
            .into_iter()
            .find(|m| m.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecommendedItem {
    pub item: EntityId,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecommendationList {
    pub target: EntityId,
    pub entries: Vec<RecommendedItem>,
}

impl RecommendationList {
    pub fn items(&self) -> Vec<EntityId> {
        self.entries.iter().map(|e| e.item.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub trait Recommender: Sync {
    fn method(&self) -> MethodId;

    fn recommend(&self, target: &EntityId, n: usize) -> Result<RecommendationList>;
}

fn target_data<'s>(scenario: &'s ScenarioData, target: &EntityId) -> Result<&'s TargetData> {
    scenario
        .targets
        .get(target)
        .ok_or_else(|| Error::UnknownEntity(target.clone()))
}

fn is_known(data: &TargetData, target: &EntityId, item: &EntityId) -> bool {
    item == target || data.profile.contains(item)
}

fn by_score_then_id(a: &(&EntityId, f64), b: &(&EntityId, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0))
}

fn finish(target: &EntityId, mut scored: Vec<(&EntityId, f64)>, n: usize) -> RecommendationList {
    scored.sort_by(by_score_then_id);
    scored.truncate(n);
    RecommendationList {
        target: target.clone(),
        entries: scored
            .into_iter()
            .map(|(item, score)| RecommendedItem {
                item: item.clone(),
                score,
            })
            .collect(),
    }
}

/// Unpersonalized ranking by scenario popularity.
pub struct MostPopular<'a> {
    scenario: &'a ScenarioData,
    ranking: Vec<(&'a EntityId, u64)>,
}

impl<'a> MostPopular<'a> {
    pub fn new(scenario: &'a ScenarioData) -> Self {
        let mut ranking: Vec<(&EntityId, u64)> = scenario
            .candidate_catalog
            .iter()
            .map(|item| (item, scenario.popularity_of(item)))
            .collect();
        ranking.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        MostPopular { scenario, ranking }
    }
}

impl Recommender for MostPopular<'_> {
    fn method(&self) -> MethodId {
        MethodId::MP
    }

    fn recommend(&self, target: &EntityId, n: usize) -> Result<RecommendationList> {
        let data = target_data(self.scenario, target)?;
        let entries = self
            .ranking
            .iter()
            .filter(|(item, _)| !is_known(data, target, item))
            .take(n)
            .map(|&(item, pop)| RecommendedItem {
                item: item.clone(),
                score: pop as f64,
            })
            .collect();
        Ok(RecommendationList {
            target: target.clone(),
            entries,
        })
    }
}

/// User-based kNN over binary profile vectors with cosine similarity.
///
/// The neighbor pool is the other targets of the same scenario. In
/// SC1-SC4 a neighbor endorses the items of its own profile; in SC5/SC6 the
/// profile is of the other item kind, so a neighbor endorses itself.
/// An item's score is the sum of the similarities of its endorsers among
/// the `k` nearest neighbors, accumulated in neighbor rank order.
pub struct CollaborativeFiltering<'a> {
    scenario: &'a ScenarioData,
    k: usize,
    targets: Vec<&'a EntityId>,
    position: HashMap<&'a EntityId, u32>,
    profile_sizes: Vec<usize>,
    /// profile item -> positions of targets holding it
    holders: HashMap<&'a EntityId, Vec<u32>>,
    self_endorse: bool,
}

impl<'a> CollaborativeFiltering<'a> {
    pub fn new(scenario: &'a ScenarioData, k: usize) -> Self {
        let targets: Vec<&EntityId> = scenario.targets.keys().collect();
        let mut holders: HashMap<&EntityId, Vec<u32>> = HashMap::new();
        for (pos, data) in scenario.targets.values().enumerate() {
            for item in &data.profile {
                holders.entry(item).or_default().push(pos as u32);
            }
        }
        let self_endorse = scenario.scenario.target_kind() == scenario.scenario.candidate_kind();
        CollaborativeFiltering {
            scenario,
            k,
            position: targets.iter().enumerate().map(|(i, &t)| (t, i as u32)).collect(),
            profile_sizes: scenario.targets.values().map(|d| d.profile.len()).collect(),
            targets,
            holders,
            self_endorse,
        }
    }

    /// The `k` most similar other targets with positive similarity, most
    /// similar first, ties by ascending id.
    pub fn neighbors(&self, target: &EntityId) -> Result<Vec<(&'a EntityId, f64)>> {
        let data = target_data(self.scenario, target)?;
        let me = self.position[target] as usize;
        let mut overlap: BTreeMap<u32, u32> = BTreeMap::new();
        for item in &data.profile {
            for &other in self.holders.get(item).map(Vec::as_slice).unwrap_or(&[]) {
                if other as usize != me {
                    *overlap.entry(other).or_insert(0) += 1;
                }
            }
        }
        let my_norm = (data.profile.len() as f64).sqrt();
        let mut ranked: Vec<(&EntityId, f64)> = overlap
            .into_iter()
            .map(|(other, shared)| {
                let norm = my_norm * (self.profile_sizes[other as usize] as f64).sqrt();
                (self.targets[other as usize], shared as f64 / norm)
            })
            .filter(|&(_, sim)| sim > 0.0)
            .collect();
        ranked.sort_by(by_score_then_id);
        ranked.truncate(self.k);
        Ok(ranked)
    }
}

impl Recommender for CollaborativeFiltering<'_> {
    fn method(&self) -> MethodId {
        MethodId::CF
    }

    fn recommend(&self, target: &EntityId, n: usize) -> Result<RecommendationList> {
        let data = target_data(self.scenario, target)?;
        let catalog = &self.scenario.candidate_catalog;
        let mut scores: HashMap<&EntityId, f64> = HashMap::new();
        for (neighbor, sim) in self.neighbors(target)? {
            let endorse = |item: &'_ EntityId| catalog.contains(item) && !is_known(data, target, item);
            if self.self_endorse {
                if endorse(neighbor) {
                    *scores.entry(neighbor).or_insert(0.0) += sim;
                }
            } else {
                for item in &self.scenario.targets[neighbor].profile {
                    if endorse(item) {
                        *scores.entry(item).or_insert(0.0) += sim;
                    }
                }
            }
        }
        let scored = scores.into_iter().filter(|&(_, s)| s > 0.0).collect();
        Ok(finish(target, scored, n))
    }
}

/// Cosine between a target representation and candidate descriptions.
///
/// User targets are represented by the centroid of their described profile
/// items. Item targets use their own description, or the profile centroid
/// under [`CbItemRepresentation::ProfileCentroid`].
pub struct ContentBased<'a> {
    scenario: &'a ScenarioData,
    index: &'a TfIdfIndex,
    representation: CbItemRepresentation,
}

impl<'a> ContentBased<'a> {
    pub fn new(
        scenario: &'a ScenarioData,
        index: &'a TfIdfIndex,
        representation: CbItemRepresentation,
    ) -> Self {
        ContentBased {
            scenario,
            index,
            representation,
        }
    }

    pub fn representation(&self, target: &EntityId) -> Result<TfIdfVector> {
        let data = target_data(self.scenario, target)?;
        let use_profile = target.kind() == EntityKind::User
            || self.representation == CbItemRepresentation::ProfileCentroid;
        Ok(if use_profile {
            centroid(data.profile.iter().filter_map(|item| self.index.vector(item)))
        } else {
            self.index.vector(target).cloned().unwrap_or_default()
        })
    }
}

impl Recommender for ContentBased<'_> {
    fn method(&self) -> MethodId {
        MethodId::CB
    }

    fn recommend(&self, target: &EntityId, n: usize) -> Result<RecommendationList> {
        let data = target_data(self.scenario, target)?;
        let query = self.representation(target)?;
        let catalog = &self.scenario.candidate_catalog;
        let scored = self
            .index
            .scores(&query)
            .into_iter()
            .filter(|(item, _)| catalog.contains(*item) && !is_known(data, target, item))
            .collect();
        Ok(finish(target, scored, n))
    }
}

pub fn recommend_mp(scenario: &ScenarioData, target: &EntityId, n: usize) -> Result<RecommendationList> {
    MostPopular::new(scenario).recommend(target, n)
}

pub fn recommend_cf(
    scenario: &ScenarioData,
    target: &EntityId,
    k: usize,
    n: usize,
) -> Result<RecommendationList> {
    CollaborativeFiltering::new(scenario, k).recommend(target, n)
}

pub fn recommend_cb(
    scenario: &ScenarioData,
    target: &EntityId,
    index: &TfIdfIndex,
    representation: CbItemRepresentation,
    n: usize,
) -> Result<RecommendationList> {
    ContentBased::new(scenario, index, representation).recommend(target, n)
}

/// Builds the recommender for `method` once, for repeated per-target calls.
pub fn prepare<'a>(
    method: MethodId,
    scenario: &'a ScenarioData,
    config: &EvalConfig,
    index: &'a TfIdfIndex,
) -> Box<dyn Recommender + 'a> {
    match method {
        MethodId::MP => Box::new(MostPopular::new(scenario)),
        MethodId::CF => Box::new(CollaborativeFiltering::new(scenario, config.neighbors)),
        MethodId::CB => Box::new(ContentBased::new(scenario, index, config.cb_item_representation)),
    }
}

pub fn recommend(
    method: MethodId,
    scenario: &ScenarioData,
    target: &EntityId,
    config: &EvalConfig,
    index: &TfIdfIndex,
) -> Result<RecommendationList> {
    prepare(method, scenario, config, index).recommend(target, config.list_size)
}
