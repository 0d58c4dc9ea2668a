//! Accuracy and popularity-bias metrics.
//!
//! The per-list metrics are generic over the item type so they can be
//! checked on plain integers. Relevance is binary.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::EntityId;
use crate::error::{Error, Result};
use crate::recommenders::{MethodId, RecommendationList};
use crate::scenario::ScenarioId;

fn hits_in_top<T: Ord>(list: &[T], truth: &BTreeSet<T>, k: usize) -> usize {
    list.iter().take(k).filter(|item| truth.contains(item)).count()
}

/// Hits in the top `k` over `min(k, |list|)`; 0 for an empty list.
pub fn precision_at_k<T: Ord>(list: &[T], truth: &BTreeSet<T>, k: usize) -> f64 {
    let shown = k.min(list.len());
    if shown == 0 {
        return 0.0;
    }
    hits_in_top(list, truth, k) as f64 / shown as f64
}

/// Hits in the top `k` over `|truth|`. Panics on empty `truth`; scenario
/// construction never produces a target without ground truth.
pub fn recall_at_k<T: Ord>(list: &[T], truth: &BTreeSet<T>, k: usize) -> f64 {
    assert!(!truth.is_empty(), "recall is undefined for empty ground truth");
    hits_in_top(list, truth, k) as f64 / truth.len() as f64
}

/// Mean reciprocal rank over the relevant items found in the top `k`.
pub fn mrr_at_k<T: Ord>(list: &[T], truth: &BTreeSet<T>, k: usize) -> f64 {
    let reciprocal: Vec<f64> = list
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, item)| truth.contains(item))
        .map(|(pos, _)| 1.0 / (pos + 1) as f64)
        .collect();
    if reciprocal.is_empty() {
        0.0
    } else {
        reciprocal.iter().sum::<f64>() / reciprocal.len() as f64
    }
}

/// Average precision at `k`, normalized by `min(|truth|, k)`.
pub fn map_at_k<T: Ord>(list: &[T], truth: &BTreeSet<T>, k: usize) -> f64 {
    let normalizer = truth.len().min(k);
    if normalizer == 0 {
        return 0.0;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (pos, item) in list.iter().take(k).enumerate() {
        if truth.contains(item) {
            hits += 1;
            sum += hits as f64 / (pos + 1) as f64;
        }
    }
    sum / normalizer as f64
}

fn discount(position: usize) -> f64 {
    1.0 / ((position + 1) as f64).log2()
}

/// Binary-gain nDCG with a `log2(p + 1)` discount (positions are 1-based).
pub fn ndcg_at_k<T: Ord>(list: &[T], truth: &BTreeSet<T>, k: usize) -> f64 {
    let ideal: f64 = (1..=truth.len().min(k)).map(discount).sum();
    if ideal == 0.0 {
        return 0.0;
    }
    let dcg: f64 = list
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, item)| truth.contains(item))
        .map(|(pos, _)| discount(pos + 1))
        .sum();
    dcg / ideal
}

/// Share of the catalog recommended to at least one target.
pub fn coverage_at_k(lists: &[RecommendationList], catalog: &BTreeSet<EntityId>, k: usize) -> f64 {
    if catalog.is_empty() {
        return 0.0;
    }
    let shown: BTreeSet<&EntityId> = lists
        .iter()
        .flat_map(|l| l.entries.iter().take(k).map(|e| &e.item))
        .filter(|item| catalog.contains(*item))
        .collect();
    shown.len() as f64 / catalog.len() as f64
}

/// Mean popularity over every recommended slot of every list.
pub fn recpop_at_k(lists: &[RecommendationList], popularity: &BTreeMap<EntityId, u64>, k: usize) -> f64 {
    let (sum, slots) = lists
        .iter()
        .flat_map(|l| l.entries.iter().take(k))
        .fold((0u64, 0u64), |(sum, slots), e| {
            (sum + popularity.get(&e.item).copied().unwrap_or(0), slots + 1)
        });
    if slots == 0 {
        0.0
    } else {
        sum as f64 / slots as f64
    }
}

/// Catalog items ordered by popularity (descending, ties by id), for
/// finding each target's most popular not-yet-known items.
pub struct PopularityRanking<'a> {
    ranked: Vec<&'a EntityId>,
}

impl<'a> PopularityRanking<'a> {
    pub fn new(catalog: &'a BTreeSet<EntityId>, popularity: &BTreeMap<EntityId, u64>) -> Self {
        let mut ranked: Vec<(&EntityId, u64)> = catalog
            .iter()
            .map(|item| (item, popularity.get(item).copied().unwrap_or(0)))
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        PopularityRanking {
            ranked: ranked.into_iter().map(|(item, _)| item).collect(),
        }
    }

    /// The `n_pop` most popular items not in `known`.
    pub fn popular_set(&self, known: &BTreeSet<EntityId>, n_pop: usize) -> BTreeSet<&'a EntityId> {
        self.ranked
            .iter()
            .copied()
            .filter(|item| !known.contains(*item))
            .take(n_pop)
            .collect()
    }

    /// Fraction of `list` drawn from the target's popular set.
    pub fn popular_fraction(&self, list: &[EntityId], known: &BTreeSet<EntityId>, n_pop: usize) -> f64 {
        if list.is_empty() {
            return 0.0;
        }
        let popular = self.popular_set(known, n_pop);
        list.iter().filter(|item| popular.contains(item)).count() as f64 / list.len() as f64
    }
}

/// See [`PopularityRanking::popular_fraction`]; this builds the ranking
/// from `popularity`'s keys on every call.
pub fn popular_fraction(
    list: &[EntityId],
    known: &BTreeSet<EntityId>,
    popularity: &BTreeMap<EntityId, u64>,
    n_pop: usize,
) -> f64 {
    let catalog: BTreeSet<EntityId> = popularity.keys().cloned().collect();
    PopularityRanking::new(&catalog, popularity).popular_fraction(list, known, n_pop)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerTargetResult {
    pub target: EntityId,
    pub p_at_1: f64,
    pub r_at_k: f64,
    pub mrr_at_k: f64,
    pub map_at_k: f64,
    pub ndcg_at_k: f64,
}

pub fn evaluate_target(list: &RecommendationList, truth: &BTreeSet<EntityId>, k: usize) -> PerTargetResult {
    let items = list.items();
    PerTargetResult {
        target: list.target.clone(),
        p_at_1: precision_at_k(&items, truth, 1),
        r_at_k: recall_at_k(&items, truth, k),
        mrr_at_k: mrr_at_k(&items, truth, k),
        map_at_k: map_at_k(&items, truth, k),
        ndcg_at_k: ndcg_at_k(&items, truth, k),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub scenario: ScenarioId,
    pub method: MethodId,
    pub k: usize,
    pub p_at_1: f64,
    pub r_at_k: f64,
    pub mrr_at_k: f64,
    pub map_at_k: f64,
    pub ndcg_at_k: f64,
    pub cov_at_k: f64,
    pub recpop_at_k: f64,
    pub n_targets_evaluated: usize,
    /// Targets for which the method produced no recommendation at all.
    pub n_empty_lists: usize,
}

pub const REPORT_CSV_HEADER: [&str; 10] = [
    "scenario", "method", "p1", "r10", "mrr10", "map10", "ndcg10", "cov10", "recpop10", "n_targets",
];

impl MetricsReport {
    pub fn csv_record(&self) -> [String; 10] {
        [
            self.scenario.label().to_string(),
            self.method.label().to_string(),
            format!("{:.4}", self.p_at_1),
            format!("{:.4}", self.r_at_k),
            format!("{:.4}", self.mrr_at_k),
            format!("{:.4}", self.map_at_k),
            format!("{:.4}", self.ndcg_at_k),
            format!("{:.4}", self.cov_at_k),
            format!("{:.2}", self.recpop_at_k),
            self.n_targets_evaluated.to_string(),
        ]
    }
}

/// Unweighted per-target means plus corpus-wide coverage and popularity.
pub fn aggregate(
    scenario: ScenarioId,
    method: MethodId,
    per_target: &[PerTargetResult],
    lists: &[RecommendationList],
    catalog: &BTreeSet<EntityId>,
    popularity: &BTreeMap<EntityId, u64>,
    k: usize,
) -> Result<MetricsReport> {
    if per_target.is_empty() {
        return Err(Error::NoTargets(format!("{scenario}/{method}")));
    }
    let n = per_target.len() as f64;
    let mean = |f: fn(&PerTargetResult) -> f64| per_target.iter().map(f).sum::<f64>() / n;
    Ok(MetricsReport {
        scenario,
        method,
        k,
        p_at_1: mean(|r| r.p_at_1),
        r_at_k: mean(|r| r.r_at_k),
        mrr_at_k: mean(|r| r.mrr_at_k),
        map_at_k: mean(|r| r.map_at_k),
        ndcg_at_k: mean(|r| r.ndcg_at_k),
        cov_at_k: coverage_at_k(lists, catalog, k),
        recpop_at_k: recpop_at_k(lists, popularity, k),
        n_targets_evaluated: per_target.len(),
        n_empty_lists: lists.iter().filter(|l| l.is_empty()).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recommenders::RecommendedItem;

    fn set(items: &[&'static str]) -> BTreeSet<&'static str> {
        items.iter().copied().collect()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-4
    }

    #[test]
    fn precision_cases() {
        assert_eq!(precision_at_k(&["a", "x"], &set(&["a"]), 1), 1.0);
        assert_eq!(precision_at_k(&["x", "a"], &set(&["a"]), 1), 0.0);
        assert_eq!(precision_at_k::<&str>(&[], &set(&["a"]), 1), 0.0);
        assert_eq!(precision_at_k(&["a", "x", "b"], &set(&["a", "b"]), 10), 2.0 / 3.0);
    }

    #[test]
    fn recall_cases() {
        let truth = set(&["a", "b", "c", "d"]);
        assert_eq!(recall_at_k(&["a", "x", "b"], &truth, 10), 0.5);
        assert_eq!(recall_at_k(&["d", "c", "b", "a"], &truth, 10), 1.0);
        assert_eq!(recall_at_k(&["x"], &truth, 10), 0.0);
    }

    #[test]
    #[should_panic]
    fn recall_rejects_empty_truth() {
        recall_at_k(&["a"], &BTreeSet::new(), 10);
    }

    #[test]
    fn mrr_cases() {
        assert_eq!(mrr_at_k(&["x", "a", "y", "b"], &set(&["a", "b"]), 10), 0.375);
        assert_eq!(mrr_at_k(&["a", "x"], &set(&["a"]), 10), 1.0);
        assert_eq!(mrr_at_k(&["x", "y"], &set(&["a"]), 10), 0.0);
    }

    #[test]
    fn map_cases() {
        assert!(close(map_at_k(&["a", "x", "b"], &set(&["a", "b"]), 10), 0.8333));
        assert_eq!(map_at_k(&["a", "b", "x"], &set(&["a", "b"]), 10), 1.0);
        assert_eq!(map_at_k(&["x", "y"], &set(&["a"]), 10), 0.0);
    }

    #[test]
    fn ndcg_cases() {
        let v = ndcg_at_k(&["x", "a", "y", "b", "z"], &set(&["a", "b"]), 10);
        assert!(close(v, 0.6509), "{v}");
        assert!((ndcg_at_k(&["b", "a", "x"], &set(&["a", "b"]), 10) - 1.0).abs() < 1e-12);
        assert_eq!(ndcg_at_k(&["x"], &set(&["a"]), 10), 0.0);
    }

    fn list(target: &str, items: &[&str]) -> RecommendationList {
        RecommendationList {
            target: EntityId::user(target),
            entries: items
                .iter()
                .map(|i| RecommendedItem {
                    item: EntityId::dataset(*i),
                    score: 1.0,
                })
                .collect(),
        }
    }

    fn catalog(n: usize) -> BTreeSet<EntityId> {
        (0..n).map(|i| EntityId::dataset(format!("i{i}"))).collect()
    }

    #[test]
    fn coverage_cases() {
        let lists = [list("u1", &["i0", "i1", "i2"]), list("u2", &["i2", "i3", "i4"])];
        assert_eq!(coverage_at_k(&lists, &catalog(20), 10), 0.25);
        let all: Vec<String> = (0..4).map(|i| format!("i{i}")).collect();
        let all: Vec<&str> = all.iter().map(String::as_str).collect();
        assert_eq!(coverage_at_k(&[list("u", &all)], &catalog(4), 10), 1.0);
    }

    #[test]
    fn recpop_cases() {
        let pop: BTreeMap<EntityId, u64> =
            [("i1", 3), ("i2", 1), ("i3", 2)].iter().map(|&(i, p)| (EntityId::dataset(i), p)).collect();
        assert_eq!(recpop_at_k(&[list("u", &["i1", "i2", "i3"])], &pop, 10), 2.0);
        assert_eq!(recpop_at_k(&[list("u", &["cold"])], &pop, 10), 0.0);
        assert_eq!(recpop_at_k(&[], &pop, 10), 0.0);
    }

    #[test]
    fn popular_fraction_cases() {
        let pop: BTreeMap<EntityId, u64> = (0..30)
            .map(|i| (EntityId::dataset(format!("i{i:02}")), 100 - i as u64))
            .collect();
        let known: BTreeSet<EntityId> = [EntityId::dataset("i00")].into();
        let top: Vec<EntityId> = (1..11).map(|i| EntityId::dataset(format!("i{i:02}"))).collect();
        assert_eq!(popular_fraction(&top, &known, &pop, 10), 1.0);

        let cold: Vec<EntityId> = (20..30).map(|i| EntityId::dataset(format!("i{i:02}"))).collect();
        assert_eq!(popular_fraction(&cold, &known, &pop, 10), 0.0);

        let mixed: Vec<EntityId> = top[..4].iter().chain(&cold[..6]).cloned().collect();
        assert!((popular_fraction(&mixed, &known, &pop, 10) - 0.4).abs() < 1e-12);
        assert_eq!(popular_fraction(&[], &known, &pop, 10), 0.0);
    }

    #[test]
    fn aggregate_means() {
        let r = |t: &str, v: f64| PerTargetResult {
            target: EntityId::user(t),
            p_at_1: v,
            r_at_k: v,
            mrr_at_k: v,
            map_at_k: v,
            ndcg_at_k: v,
        };
        let report = aggregate(
            ScenarioId::DatasetsToUsers,
            MethodId::MP,
            &[r("a", 1.0), r("b", 0.0)],
            &[],
            &catalog(3),
            &BTreeMap::new(),
            10,
        )
        .unwrap();
        assert_eq!(report.ndcg_at_k, 0.5);
        assert_eq!(report.n_targets_evaluated, 2);

        let single = aggregate(ScenarioId::DatasetsToUsers, MethodId::MP, &[r("a", 0.25)], &[], &catalog(3), &BTreeMap::new(), 10).unwrap();
        assert_eq!(single.map_at_k, 0.25);

        assert!(aggregate(ScenarioId::DatasetsToUsers, MethodId::MP, &[], &[], &catalog(3), &BTreeMap::new(), 10).is_err());
    }
}
