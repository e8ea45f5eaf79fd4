use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use toflab::abk::{pi_ab, Line1DPacket};
use toflab::bohmian::{ks_distance, TrajectoryEnsemble};
use toflab::flux::{pi_qf, SurfacePatch};
use toflab::kijowski::{pi_kij, PlaneDetector};
use toflab::standard::{pi_std_magnetic, StdConfig, StdMethod};
use toflab::{GaugeGeometry, WavePacketSpec};

fn standard(c: &mut Criterion) {
    let mut g = c.benchmark_group("pi_std");
    for (name, m) in [("closed", StdMethod::ClosedForm), ("quad", StdMethod::DirectQuadrature)] {
        let cfg = StdConfig::new(GaugeGeometry::magnetic(0.5, 100.0), vec![]).with_method(m);
        g.bench_function(name, |b| b.iter(|| pi_std_magnetic(&cfg, black_box(120.0)).unwrap()));
    }
    g.finish();
}

fn free(c: &mut Criterion) {
    let line = Line1DPacket::gaussian(1.0, 0.5, 5.0).unwrap();
    c.bench_function("pi_ab", |b| b.iter(|| pi_ab(&line, black_box(3.0)).unwrap()));
    let spec = WavePacketSpec::free_gaussian(0.5, 1.0).unwrap();
    c.bench_function("pi_kij", |b| b.iter(|| pi_kij(&spec, PlaneDetector::new(5.0), black_box(3.0)).unwrap()));
}

fn flux(c: &mut Criterion) {
    let spec = WavePacketSpec::magnetic_gaussian(0.5);
    c.bench_function("pi_qf_plane", |b| b.iter(|| pi_qf(&spec, &SurfacePatch::plane(10.0), black_box(8.0)).unwrap()));
}

fn bohmian(c: &mut Criterion) {
    let mut g = c.benchmark_group("bohmian");
    g.sample_size(10);
    g.bench_function("ensemble_1e5_ks", |b| {
        b.iter(|| {
            let ens = TrajectoryEnsemble::sample(100_000, 1).unwrap();
            ks_distance(&ens.arrivals(100.0), 100.0)
        })
    });
    g.finish();
}

criterion_group!(benches, standard, free, flux, bohmian);
criterion_main!(benches);
