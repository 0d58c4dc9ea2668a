//! Seeded synthetic corpora with community structure, for tests, benches
//! and smoke runs.
//!
//! Every entity belongs to one of a few topical communities. Users mostly
//! pick datasets and algorithms from their own community, with a skew
//! towards low-index ("popular") items, and descriptions mostly draw words
//! from the community's topic. Optional bot users interact with many random
//! items and sit far above the knee of the per-user count curve.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::corpus::{Corpus, EntityId, EntityKind, ItemDescription};
use crate::error::Result;
use crate::ingestion::{ingest, RawInteraction};
use crate::seed::rng_from_seed;

const TOPICS: [&[&str]; 6] = [
    &["graph", "network", "node", "edge", "community", "link", "social"],
    &["image", "pixel", "vision", "convolution", "segmentation", "photo", "camera"],
    &["text", "token", "language", "sentiment", "corpus", "word", "translation"],
    &["time", "series", "forecast", "sensor", "signal", "temporal", "seasonal"],
    &["gene", "protein", "expression", "clinical", "patient", "tumor", "cell"],
    &["credit", "fraud", "transaction", "bank", "loan", "risk", "customer"],
];

const COMMON: [&str; 8] = [
    "data", "model", "classification", "regression", "benchmark", "feature", "training", "sample",
];

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticConfig {
    pub users: usize,
    pub datasets: usize,
    pub algorithms: usize,
    pub communities: usize,
    pub min_interactions_per_user: usize,
    pub max_interactions_per_user: usize,
    /// Probability that a pick stays inside the user's community.
    pub affinity: f64,
    pub zero_interaction_datasets: usize,
    pub zero_interaction_algorithms: usize,
    /// Every `n`-th item gets no description; 0 disables the gap.
    pub undescribed_every: usize,
    pub bots: usize,
    pub interactions_per_bot: usize,
    /// Upper bound on raw repetitions of a single triple.
    pub max_repetitions: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            users: 60,
            datasets: 48,
            algorithms: 72,
            communities: 4,
            min_interactions_per_user: 4,
            max_interactions_per_user: 24,
            affinity: 0.85,
            zero_interaction_datasets: 12,
            zero_interaction_algorithms: 20,
            undescribed_every: 9,
            bots: 0,
            interactions_per_bot: 0,
            max_repetitions: 3,
            seed: 7,
        }
    }
}

fn item_id(kind: EntityKind, index: usize) -> EntityId {
    let prefix = match kind {
        EntityKind::Dataset => "d",
        EntityKind::Algorithm => "a",
        EntityKind::User => "u",
    };
    EntityId::new(kind, format!("{prefix}{index:04}")).expect("non-empty id")
}

fn community_members(count: usize, communities: usize) -> Vec<Vec<usize>> {
    let mut members = vec![Vec::new(); communities];
    for i in 0..count {
        members[i % communities].push(i);
    }
    members
}

fn describe<R: Rng>(rng: &mut R, community: usize) -> String {
    let topic = TOPICS[community % TOPICS.len()];
    let len = rng.random_range(5..10);
    let words: Vec<&str> = (0..len)
        .map(|_| {
            if rng.random_bool(0.75) {
                topic[rng.random_range(0..topic.len())]
            } else {
                COMMON[rng.random_range(0..COMMON.len())]
            }
        })
        .collect();
    words.join(" ")
}

/// Raw (pre-merge) interactions and descriptions for the whole catalog,
/// including zero-interaction items.
pub fn generate_raw(config: &SyntheticConfig) -> (Vec<RawInteraction>, Vec<ItemDescription>) {
    let mut rng = rng_from_seed(config.seed);
    let communities = config.communities.max(1);
    let dataset_members = community_members(config.datasets, communities);
    let algorithm_members = community_members(config.algorithms, communities);
    // Zipf-like skew within a community.
    let skew = |n: usize| WeightedIndex::new((0..n).map(|r| 1.0 / (r as f64 + 1.0))).ok();
    let dataset_pickers: Vec<_> = dataset_members.iter().map(|m| skew(m.len())).collect();
    let algorithm_pickers: Vec<_> = algorithm_members.iter().map(|m| skew(m.len())).collect();

    let mut raw = Vec::new();
    let mut push = |rng: &mut _, user: &EntityId, d: usize, a: usize| {
        let repetitions = if config.max_repetitions > 1 {
            Rng::random_range(rng, 1..=config.max_repetitions)
        } else {
            1
        };
        for _ in 0..repetitions {
            raw.push(RawInteraction {
                user: user.clone(),
                dataset: item_id(EntityKind::Dataset, d),
                algorithm: item_id(EntityKind::Algorithm, a),
            });
        }
    };

    for u in 0..config.users {
        let user = EntityId::user(format!("u{u:04}"));
        let community = u % communities;
        let n = rng.random_range(config.min_interactions_per_user..=config.max_interactions_per_user);
        for _ in 0..n {
            let pick = |rng: &mut rand_chacha::ChaCha8Rng, members: &[Vec<usize>], pickers: &[Option<WeightedIndex<f64>>], total: usize| {
                match &pickers[community] {
                    Some(picker) if rng.random_bool(config.affinity) => members[community][picker.sample(rng)],
                    _ => rng.random_range(0..total),
                }
            };
            let d = pick(&mut rng, &dataset_members, &dataset_pickers, config.datasets);
            let a = pick(&mut rng, &algorithm_members, &algorithm_pickers, config.algorithms);
            push(&mut rng, &user, d, a);
        }
    }
    for b in 0..config.bots {
        let bot = EntityId::user(format!("bot{b:02}"));
        for _ in 0..config.interactions_per_bot {
            let d = rng.random_range(0..config.datasets);
            let a = rng.random_range(0..config.algorithms);
            push(&mut rng, &bot, d, a);
        }
    }

    let mut descriptions = Vec::new();
    for (kind, active, cold) in [
        (EntityKind::Dataset, config.datasets, config.zero_interaction_datasets),
        (EntityKind::Algorithm, config.algorithms, config.zero_interaction_algorithms),
    ] {
        for i in 0..active + cold {
            let text = describe(&mut rng, i % communities);
            if config.undescribed_every > 0 && i % config.undescribed_every == config.undescribed_every - 1 {
                continue;
            }
            descriptions.push(ItemDescription {
                item: item_id(kind, i),
                text,
            });
        }
    }
    (raw, descriptions)
}

/// A merged corpus from [`generate_raw`], without knee filtering.
pub fn generate_corpus(config: &SyntheticConfig) -> Result<Corpus> {
    let (raw, descriptions) = generate_raw(config);
    Ok(ingest(&raw, descriptions, false)?.0)
}
