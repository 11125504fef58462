use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kato_core::feynman_kac::{mc_kato_integral, PathConfig};
use kato_core::geometry::ModelSpace;
use kato_core::kato::{kato_eta, KatoSettings, Potential};
use kato_core::Exec;

fn modes() -> [(&'static str, Exec); 2] {
    [("sequential", Exec::reference()), ("parallel", Exec::default())]
}

fn mc_kato(c: &mut Criterion) {
    let space = ModelSpace::euclidean(3).unwrap();
    let v = Potential::coulomb(space, 1.0);
    let cfg = PathConfig::new(space, space.origin(), 0.01, 1e-5, 8192, 1);
    let mut g = c.benchmark_group("mc_kato_integral");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(mc_kato_integral(&v, &cfg, exec).unwrap()))
        });
    }
    g.finish();
}

fn eta_probes(c: &mut Criterion) {
    let space = ModelSpace::hyperbolic(3).unwrap();
    let v = Potential::coulomb(space, 1.0);
    let dir = [1.0, 0.0, 0.0];
    let probes: Vec<_> = (0..16).map(|i| space.point_at(&dir, 0.25 * i as f64).unwrap()).collect();
    let mut g = c.benchmark_group("kato_eta_16_probes");
    g.sample_size(10);
    for (name, exec) in modes() {
        let settings = KatoSettings {
            exec,
            ..KatoSettings::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(kato_eta(&v, &probes, 0.1, &settings).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, mc_kato, eta_probes);
criterion_main!(benches);
