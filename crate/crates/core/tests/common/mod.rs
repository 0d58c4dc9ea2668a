//! Brute-force reference implementations. These are written from the metric
//! and algorithm definitions directly and share no code with the crate.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use dasrec_core::{EntityId, ScenarioData};

pub mod metric {
    /// Relevance vector of the first `k` positions.
    fn gains(list: &[u32], truth: &[u32], k: usize) -> Vec<f64> {
        let mut out = Vec::new();
        for p in 0..k {
            if p >= list.len() {
                break;
            }
            out.push(if truth.contains(&list[p]) { 1.0 } else { 0.0 });
        }
        out
    }

    pub fn precision(list: &[u32], truth: &[u32], k: usize) -> f64 {
        let g = gains(list, truth, k);
        if g.is_empty() {
            return 0.0;
        }
        g.iter().sum::<f64>() / g.len() as f64
    }

    pub fn recall(list: &[u32], truth: &[u32], k: usize) -> f64 {
        gains(list, truth, k).iter().sum::<f64>() / truth.len() as f64
    }

    pub fn mrr(list: &[u32], truth: &[u32], k: usize) -> f64 {
        let g = gains(list, truth, k);
        let mut total = 0.0;
        let mut found = 0.0;
        for (p, &gain) in g.iter().enumerate() {
            if gain == 1.0 {
                total += 1.0 / (p as f64 + 1.0);
                found += 1.0;
            }
        }
        if found == 0.0 {
            0.0
        } else {
            total / found
        }
    }

    pub fn average_precision(list: &[u32], truth: &[u32], k: usize) -> f64 {
        let g = gains(list, truth, k);
        let mut total = 0.0;
        for p in 1..=g.len() {
            if g[p - 1] == 1.0 {
                total += precision(list, truth, p);
            }
        }
        let denom = truth.len().min(k);
        if denom == 0 {
            0.0
        } else {
            total / denom as f64
        }
    }

    fn dcg(gains: &[f64]) -> f64 {
        let mut total = 0.0;
        for (i, g) in gains.iter().enumerate() {
            total += g / (i as f64 + 2.0).log2();
        }
        total
    }

    pub fn ndcg(list: &[u32], truth: &[u32], k: usize) -> f64 {
        let mut ideal = vec![1.0; truth.len()];
        ideal.truncate(k);
        let best = dcg(&ideal);
        if best == 0.0 {
            0.0
        } else {
            dcg(&gains(list, truth, k)) / best
        }
    }
}

/// Exhaustive kNN: dense binary vectors over every profile item in the
/// scenario, cosine against every other target, top-k, similarity-sum.
/// Returns `(item, score)` in rank order.
pub fn cf_exhaustive(scenario: &ScenarioData, target: &EntityId, k: usize, n: usize) -> Vec<(EntityId, f64)> {
    let universe: Vec<&EntityId> = scenario
        .targets
        .values()
        .flat_map(|t| t.profile.iter())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let vector = |who: &EntityId| -> Vec<f64> {
        let profile = &scenario.targets[who].profile;
        universe
            .iter()
            .map(|item| if profile.contains(*item) { 1.0 } else { 0.0 })
            .collect()
    };
    let me = vector(target);
    let my_norm = me.iter().map(|x| x * x).sum::<f64>().sqrt();

    let mut sims: Vec<(EntityId, f64)> = Vec::new();
    for other in scenario.targets.keys() {
        if other == target {
            continue;
        }
        let them = vector(other);
        let dot: f64 = me.iter().zip(&them).map(|(a, b)| a * b).sum();
        let their_norm = them.iter().map(|x| x * x).sum::<f64>().sqrt();
        let sim = dot / (my_norm * their_norm);
        if sim > 0.0 {
            sims.push((other.clone(), sim));
        }
    }
    sims.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    sims.truncate(k);

    let same_kind = scenario.scenario.target_kind() == scenario.scenario.candidate_kind();
    let own = &scenario.targets[target].profile;
    let mut scores: BTreeMap<EntityId, f64> = BTreeMap::new();
    for (neighbor, sim) in &sims {
        let endorsed: Vec<EntityId> = if same_kind {
            vec![neighbor.clone()]
        } else {
            scenario.targets[neighbor].profile.iter().cloned().collect()
        };
        for item in endorsed {
            if &item == target || own.contains(&item) || !scenario.candidate_catalog.contains(&item) {
                continue;
            }
            *scores.entry(item).or_insert(0.0) += sim;
        }
    }
    let mut ranked: Vec<(EntityId, f64)> = scores.into_iter().filter(|(_, s)| *s > 0.0).collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    ranked.truncate(n);
    ranked
}

/// Knee by exhaustive scan: point-to-line distance via the cross product on
/// the min-max normalized `(rank, ln count)` curve. Ties within 1e-12 go to
/// the smallest rank.
pub fn knee_exhaustive(counts_desc: &[u64]) -> usize {
    let n = counts_desc.len();
    let ys: Vec<f64> = counts_desc.iter().map(|&c| (c as f64).ln()).collect();
    let (lo, hi) = ys
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), &y| (lo.min(y), hi.max(y)));
    if hi == lo {
        return 0;
    }
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| (i as f64 / (n - 1) as f64, (ys[i] - lo) / (hi - lo)))
        .collect();
    let (x0, y0) = pts[0];
    let (x1, y1) = pts[n - 1];
    let len = ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();
    let dist: Vec<f64> = pts
        .iter()
        .map(|&(x, y)| ((x1 - x0) * (y0 - y) - (x0 - x) * (y1 - y0)).abs() / len)
        .collect();
    let best = dist.iter().cloned().fold(0.0, f64::max);
    dist.iter().position(|&d| d >= best - 1e-12).unwrap()
}

/// Pairwise user overlap by scanning every user for every pair.
pub fn overlap_exhaustive(
    interactions: &[dasrec_core::Interaction],
    kind: dasrec_core::EntityKind,
) -> BTreeMap<(EntityId, EntityId), u32> {
    let users: BTreeSet<&EntityId> = interactions.iter().map(|i| &i.user).collect();
    let items: BTreeSet<&EntityId> = interactions.iter().map(|i| i.entity(kind)).collect();
    let items: Vec<&EntityId> = items.into_iter().collect();
    let mut out = BTreeMap::new();
    for a in 0..items.len() {
        for b in a + 1..items.len() {
            let mut shared = 0;
            for user in &users {
                let used = |item: &EntityId| {
                    interactions
                        .iter()
                        .any(|i| &i.user == *user && i.entity(kind) == item)
                };
                if used(items[a]) && used(items[b]) {
                    shared += 1;
                }
            }
            if shared > 0 {
                out.insert((items[a].clone(), items[b].clone()), shared);
            }
        }
    }
    out
}
