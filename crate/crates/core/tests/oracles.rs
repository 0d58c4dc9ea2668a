mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use dasrec_core::ingestion::find_knee;
use dasrec_core::metrics::{map_at_k, mrr_at_k, ndcg_at_k, precision_at_k, recall_at_k};
use dasrec_core::recommenders::recommend_cf;
use dasrec_core::scenario::{build_collaboration_network, build_scenario};
use dasrec_core::synthetic::{generate_corpus, SyntheticConfig};
use dasrec_core::{EntityKind, EvalConfig, ScenarioId};

use common::{cf_exhaustive, knee_exhaustive, metric, overlap_exhaustive};

fn fixture() -> impl Strategy<Value = (Vec<u32>, Vec<u32>)> {
    (
        proptest::sample::subsequence((0u32..12).collect::<Vec<_>>(), 0..=5).prop_shuffle(),
        proptest::sample::subsequence((0u32..12).collect::<Vec<_>>(), 1..=3),
    )
}

proptest! {
    #[test]
    fn metrics_match_brute_force((list, truth) in fixture(), k in 1usize..=6) {
        let set: BTreeSet<u32> = truth.iter().copied().collect();
        let pairs = [
            (precision_at_k(&list, &set, k), metric::precision(&list, &truth, k)),
            (recall_at_k(&list, &set, k), metric::recall(&list, &truth, k)),
            (mrr_at_k(&list, &set, k), metric::mrr(&list, &truth, k)),
            (map_at_k(&list, &set, k), metric::average_precision(&list, &truth, k)),
            (ndcg_at_k(&list, &set, k), metric::ndcg(&list, &truth, k)),
        ];
        for (got, want) in pairs {
            prop_assert!((got - want).abs() <= 1e-12, "got {got}, want {want}");
        }
    }

    #[test]
    fn knee_matches_exhaustive_scan(mut counts in proptest::collection::vec(1u64..5000, 3..40)) {
        counts.sort_unstable_by(|a, b| b.cmp(a));
        prop_assert_eq!(find_knee(&counts).unwrap(), knee_exhaustive(&counts));
    }
}

fn small_config(seed: u64) -> SyntheticConfig {
    SyntheticConfig {
        users: 9,
        datasets: 7,
        algorithms: 9,
        communities: 2,
        min_interactions_per_user: 2,
        max_interactions_per_user: 8,
        zero_interaction_datasets: 2,
        zero_interaction_algorithms: 2,
        max_repetitions: 1,
        seed,
        ..SyntheticConfig::default()
    }
}

#[test]
fn cf_equals_exhaustive_enumeration() {
    let config = EvalConfig::default();
    for seed in 0..25 {
        let corpus = generate_corpus(&small_config(seed)).unwrap();
        for scenario_id in ScenarioId::ALL {
            let scenario = build_scenario(&corpus, scenario_id, &config, seed).unwrap();
            assert!(scenario.targets.len() <= 10);
            for k in [1, 2, 3, 40] {
                for target in scenario.targets.keys() {
                    let got = recommend_cf(&scenario, target, k, 10).unwrap();
                    let got: Vec<_> = got.entries.into_iter().map(|e| (e.item, e.score)).collect();
                    let want = cf_exhaustive(&scenario, target, k, 10);
                    assert_eq!(got, want, "seed {seed} {scenario_id} k={k} target {target}");
                }
            }
        }
    }
}

#[test]
fn collaboration_network_matches_pair_scan() {
    for seed in 0..10 {
        let corpus = generate_corpus(&small_config(seed)).unwrap();
        for kind in [EntityKind::Dataset, EntityKind::Algorithm] {
            let network = build_collaboration_network(&corpus, kind);
            let want = overlap_exhaustive(corpus.interactions(), kind);
            let got: std::collections::BTreeMap<_, _> = network
                .pairs()
                .map(|(a, b, w)| ((a.clone(), b.clone()), w))
                .collect();
            assert_eq!(got, want);
            for ((a, b), w) in &want {
                assert_eq!(network.overlap(a, b), *w);
                assert_eq!(network.overlap(b, a), *w);
            }
        }
    }
}

#[test]
fn flat_curve_knee_is_first_rank() {
    assert_eq!(find_knee(&[7; 12]).unwrap(), 0);
    assert_eq!(knee_exhaustive(&[7; 12]), 0);
}
