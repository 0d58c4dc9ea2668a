use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use dasrec_core::ingestion::{find_knee, merge_repetitions};
use dasrec_core::metrics::{map_at_k, ndcg_at_k};
use dasrec_core::recommenders::prepare;
use dasrec_core::runner::{content_index, run_cell, scenario_seed};
use dasrec_core::scenario::build_scenario;
use dasrec_core::synthetic::{generate_corpus, generate_raw, SyntheticConfig};
use dasrec_core::textindex::TfIdfIndex;
use dasrec_core::{EvalConfig, MethodId, ScenarioId};

fn corpus_config() -> SyntheticConfig {
    SyntheticConfig {
        users: 500,
        datasets: 600,
        algorithms: 900,
        zero_interaction_datasets: 400,
        zero_interaction_algorithms: 800,
        max_interactions_per_user: 40,
        ..SyntheticConfig::default()
    }
}

fn ingestion(c: &mut Criterion) {
    let (raw, _) = generate_raw(&corpus_config());
    c.bench_function("merge_repetitions", |b| b.iter(|| merge_repetitions(black_box(&raw))));

    let counts: Vec<u64> = (1..=5000u64).map(|r| 20_000 / r + 1).collect();
    c.bench_function("find_knee/5000", |b| b.iter(|| find_knee(black_box(&counts))));
}

fn text_index(c: &mut Criterion) {
    let corpus = generate_corpus(&corpus_config()).unwrap();
    c.bench_function("tfidf_build", |b| {
        b.iter(|| TfIdfIndex::from_corpus(black_box(&corpus), 1, 2).unwrap())
    });
}

fn recommenders(c: &mut Criterion) {
    let corpus = generate_corpus(&corpus_config()).unwrap();
    let config = EvalConfig::default();
    let index = content_index(&corpus, &config).unwrap();
    let mut group = c.benchmark_group("recommend");
    for scenario_id in [ScenarioId::DatasetsToUsers, ScenarioId::AlgorithmsToAlgorithms] {
        let scenario = build_scenario(&corpus, scenario_id, &config, scenario_seed(0, scenario_id)).unwrap();
        let targets: Vec<_> = scenario.targets.keys().take(50).collect();
        for method in MethodId::ALL {
            let recommender = prepare(method, &scenario, &config, &index);
            group.bench_with_input(
                BenchmarkId::new(method.label(), scenario_id.label()),
                &targets,
                |b, targets| {
                    b.iter(|| {
                        for target in targets {
                            black_box(recommender.recommend(target, 10).unwrap());
                        }
                    })
                },
            );
        }
    }
    group.finish();
}

fn evaluation(c: &mut Criterion) {
    let list: Vec<u32> = (0..10).collect();
    let truth = [1u32, 4, 7, 30].into_iter().collect();
    c.bench_function("ndcg_at_10", |b| b.iter(|| ndcg_at_k(black_box(&list), &truth, 10)));
    c.bench_function("map_at_10", |b| b.iter(|| map_at_k(black_box(&list), &truth, 10)));

    let corpus = generate_corpus(&corpus_config()).unwrap();
    let config = EvalConfig::default();
    let index = content_index(&corpus, &config).unwrap();
    let scenario = build_scenario(&corpus, ScenarioId::AlgorithmsToDatasets, &config, 1).unwrap();
    let mut group = c.benchmark_group("cell");
    group.sample_size(10);
    group.bench_function("SC4/CF", |b| {
        b.iter(|| run_cell(&scenario, MethodId::CF, &config, &index).unwrap())
    });
    group.finish();
}

criterion_group!(benches, ingestion, text_index, recommenders, evaluation);
criterion_main!(benches);
