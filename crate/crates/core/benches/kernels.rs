//! Data-parallel hot paths. Each benchmark id carries the backend it was built
//! with, so running once with default features and once with
//! `--no-default-features` puts the rayon and sequential numbers side by side
//! under `target/criterion`.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tempo_core::dataset::{generate_event_corpus, generate_timex_pairs, SyntheticEventCorpusConfig};
use tempo_core::distant::build_distant_dataset;
use tempo_core::experiments::bootstrap_compare;
use tempo_core::parallel;
use tempo_core::timex_model::{evaluate_timex, train_timex, TimexModel, TimexModelConfig};
use tempo_core::ReferenceAnchor;

fn backend() -> &'static str {
    if parallel::is_parallel() {
        "rayon"
    } else {
        "sequential"
    }
}

fn kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("kernels");
    g.sample_size(10).measurement_time(Duration::from_secs(10)).warm_up_time(Duration::from_secs(1));

    g.bench_function(BenchmarkId::new("generate_timex_pairs_8192", backend()), |b| {
        b.iter(|| generate_timex_pairs(black_box(8192), 1, 0.75))
    });

    let pairs = generate_timex_pairs(256, 2, 0.75);
    let cfg = TimexModelConfig { epochs: 1, ..Default::default() };
    g.bench_function(BenchmarkId::new("timex_train_epoch_256", backend()), |b| {
        b.iter(|| train_timex(black_box(&pairs), &pairs[..32], &cfg).unwrap())
    });

    let model = TimexModel::new(TimexModelConfig::default()).unwrap();
    g.bench_function(BenchmarkId::new("timex_evaluate_256", backend()), |b| {
        b.iter(|| evaluate_timex(&model, black_box(&pairs)).unwrap())
    });

    let docs = generate_event_corpus(&SyntheticEventCorpusConfig { n_examples: 1000, ..Default::default() }).unwrap();
    g.bench_function(BenchmarkId::new("distant_label_1000_docs", backend()), |b| {
        b.iter(|| build_distant_dataset(black_box(&docs), ReferenceAnchor::default()))
    });

    let gold: Vec<usize> = (0..1000).map(|i| i % 4).collect();
    let a: Vec<usize> = gold.iter().enumerate().map(|(i, &g)| if i % 7 == 0 { (g + 1) % 4 } else { g }).collect();
    let b_preds: Vec<usize> = gold.iter().enumerate().map(|(i, &g)| if i % 5 == 0 { (g + 1) % 4 } else { g }).collect();
    g.bench_function(BenchmarkId::new("bootstrap_1000_items_10000_resamples", backend()), |b| {
        b.iter(|| bootstrap_compare(black_box(&a), &b_preds, &gold, 10_000, 3).unwrap())
    });
    g.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
