use std::f64::consts::TAU;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rbcom::network::log_frequencies;
use rbcom::noise::{thermal_psd_output, ThermalConvention};
use rbcom::parallel;
use rbcom::system::{Case, SystemConfig};

fn spectra(c: &mut Criterion) {
    let cfg = SystemConfig::preset(Case::L120);
    let model = cfg.evaluate(0.2).unwrap().model;
    let mut group = c.benchmark_group("thermal_spectrum");
    for n in [2_000usize, 20_000] {
        let freqs = log_frequencies(1e5, 3e9, n);
        let point = |&f: &f64| {
            thermal_psd_output(TAU * f, &model, 298.15, ThermalConvention::Norton)
                .unwrap()
                .total
        };
        group.bench_with_input(BenchmarkId::new("seq", n), &freqs, |b, f| {
            b.iter(|| parallel::map_seq(f, point))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("par", n), &freqs, |b, f| {
            b.iter(|| parallel::map_par(f, point))
        });
    }
    group.finish();
}

fn power_sweep(c: &mut Criterion) {
    let mut cfg = SystemConfig::preset(Case::L10);
    cfg.run.frequency_grid.points = 400;
    let grid: Vec<f64> = (1..=24).map(|k| 0.025 * k as f64).collect();
    let point = |&p: &f64| cfg.evaluate(p).unwrap().report.total_capacity;
    let mut group = c.benchmark_group("power_sweep");
    group.sample_size(10);
    group.bench_function("seq", |b| b.iter(|| parallel::map_seq(&grid, point)));
    #[cfg(feature = "parallel")]
    group.bench_function("par", |b| b.iter(|| parallel::map_par(&grid, point)));
    group.finish();
}

criterion_group!(benches, spectra, power_sweep);
criterion_main!(benches);
