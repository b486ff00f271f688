use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spellir_core::corpus::build_vocabulary;
use spellir_core::correct::{ConfusablePairs, Corrector, CorrectorConfig, Lexicon, Method};
use spellir_core::edit::{closest_candidates, levenshtein, levenshtein_within};
use spellir_core::synthetic::{SyntheticConfig, SyntheticData};
use std::hint::black_box;

fn edit_distance(c: &mut Criterion) {
    let mut g = c.benchmark_group("levenshtein");
    g.bench_function("full", |b| b.iter(|| levenshtein(black_box("hydrslazine"), black_box("hydralazine"))));
    g.bench_function("bounded_2", |b| {
        b.iter(|| levenshtein_within(black_box("hypertension"), black_box("hydralazine"), 2))
    });
    g.finish();
}

fn correction(c: &mut Criterion) {
    let data = SyntheticData::generate(&SyntheticConfig::large());
    let vocab = build_vocabulary(&data.passages, 2).unwrap();
    let lexicon = Lexicon::build(vocab, &data.passages).unwrap();
    let blacklist = ConfusablePairs::new();
    let queries: Vec<&str> = data.queries.iter().map(|q| q.original_text.as_str()).take(50).collect();

    c.bench_function("linear_scan_d2", |b| {
        b.iter(|| closest_candidates(black_box("stalonix"), &lexicon.vocab, 2))
    });
    c.bench_function("delete_index_d2", |b| b.iter(|| lexicon.index.lookup(black_box("stalonix"), 2)));

    let mut g = c.benchmark_group("correct_query");
    for m in Method::ALL {
        let corrector = Corrector::new(CorrectorConfig::for_method(m), &lexicon, &blacklist).unwrap();
        let cache = corrector.build_cache(queries.iter().copied());
        g.bench_with_input(BenchmarkId::new("cold", m), &queries, |b, qs| {
            b.iter(|| qs.iter().map(|q| corrector.correct_text(q).changes()).sum::<usize>())
        });
        g.bench_with_input(BenchmarkId::new("warm", m), &queries, |b, qs| {
            b.iter(|| qs.iter().map(|q| corrector.correct_text_cached(q, &cache).changes()).sum::<usize>())
        });
    }
    g.finish();
}

criterion_group!(benches, edit_distance, correction);
criterion_main!(benches);
