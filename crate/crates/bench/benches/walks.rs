use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use mto_core::generators::{latent_space, LatentSpaceConfig};
use mto_core::samplers::{SamplerConfig, Scheme, Walker};

fn steps(c: &mut Criterion) {
    let g = latent_space(&LatentSpaceConfig::standard(500, 2))
        .unwrap()
        .giant_component()
        .unwrap()
        .graph;
    let mut group = c.benchmark_group("walk_1000_steps");
    for scheme in [Scheme::Srw, Scheme::Mhrw, Scheme::Rj, Scheme::MTO_BOTH] {
        group.bench_function(scheme.name(), |b| {
            b.iter_batched(
                || {
                    Walker::on_graph(
                        &g,
                        SamplerConfig {
                            scheme,
                            seed: 7,
                            ..SamplerConfig::default()
                        },
                    )
                    .unwrap()
                },
                |mut w| w.walk(1000).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, steps);
criterion_main!(benches);
