use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spellir_core::retrieval::{Retriever, RetrieverKind};
use spellir_core::synthetic::{SyntheticConfig, SyntheticData};

fn retrieval(c: &mut Criterion) {
    let data = SyntheticData::generate(&SyntheticConfig::large());
    let mut build = c.benchmark_group("index_build");
    build.sample_size(10);
    for kind in RetrieverKind::ALL {
        build.bench_function(kind.as_str(), |b| b.iter(|| Retriever::build(kind, &data.passages)));
    }
    build.finish();

    let mut rank = c.benchmark_group("rank_top20");
    for kind in RetrieverKind::ALL {
        let index = Retriever::build(kind, &data.passages);
        rank.bench_with_input(BenchmarkId::from_parameter(kind), &data.queries, |b, qs| {
            let mut i = 0;
            b.iter(|| {
                let q = &qs[i % qs.len()];
                i += 1;
                index.rank(&q.id, &q.original_text, 20)
            })
        });
    }
    rank.finish();
}

criterion_group!(benches, retrieval);
criterion_main!(benches);
