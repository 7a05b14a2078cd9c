use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use krrh2_core::genotypes::{simulate_hwe, GenotypeCoding, MafLaw};
use krrh2_core::harness::{build_mc_population, run_repetition, GenotypeSource, McConfig};
use krrh2_core::kernels::{build_kernels, KernelKind, DEFAULT_BANDWIDTH};
use krrh2_core::krr::{lambda_grid_fit, DEFAULT_NLAMBDA_GRID};
use krrh2_core::linalg::eigh;
use krrh2_core::presets::{preset, Scale};

fn hwe(c: &mut Criterion) {
    c.bench_function("simulate_hwe 1000x500", |b| {
        b.iter(|| simulate_hwe(black_box(1000), 500, MafLaw::default(), 1).unwrap())
    });
}

fn kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernels");
    for n in [200, 500] {
        let z = simulate_hwe(n, 500, MafLaw::default(), 2).unwrap().design(GenotypeCoding::Standardized);
        group.bench_with_input(BenchmarkId::new("all three", n), &z, |b, z| {
            b.iter(|| build_kernels(&KernelKind::BUILTIN, z, DEFAULT_BANDWIDTH).unwrap())
        });
    }
    group.finish();
}

fn spectra(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit");
    group.sample_size(20);
    for n in [200, 500] {
        let z = simulate_hwe(n, 500, MafLaw::default(), 3).unwrap().design(GenotypeCoding::Standardized);
        let k = build_kernels(&[KernelKind::Polynomial2], &z, DEFAULT_BANDWIDTH).unwrap().remove(0);
        let y: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() + 5.0).collect();
        group.bench_with_input(BenchmarkId::new("eigh", n), k.matrix(), |b, m| b.iter(|| eigh(m).unwrap()));
        group.bench_with_input(BenchmarkId::new("grid of 11, cold", n), &k, |b, k| {
            b.iter(|| lambda_grid_fit(&k.clone(), &y, &DEFAULT_NLAMBDA_GRID).unwrap())
        });
    }
    group.finish();
}

fn repetition(c: &mut Criterion) {
    let mut cfg = McConfig::from_preset(preset("hwe-linear-low").unwrap(), Scale::Desk);
    cfg.sample_sizes = vec![600];
    let pop = build_mc_population(&cfg, &GenotypeSource::Simulate).unwrap();
    let mut group = c.benchmark_group("harness");
    group.sample_size(10);
    group.bench_function("one repetition, n=600, 3 kernels x 3 values", |b| {
        b.iter(|| run_repetition(&cfg, &pop, black_box(0), 0).unwrap())
    });
    group.finish();
}

criterion_group!(benches, hwe, kernels, spectra, repetition);
criterion_main!(benches);
