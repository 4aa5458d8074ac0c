use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, Criterion};
use ibi_bench::reference;
use ibi_core::cluster::{enumerate_connected_graphs, ClusterCoefficients};
use ibi_core::convolution::radial_convolve;
use ibi_core::forward::rdf_expansion;
use ibi_core::gcmc::{run_gcmc, GCMCConfig};
use ibi_core::potentials::{c_beta_bound, mayer_function, EnsembleParams};
use ibi_core::spaces::norm_linf_rho;

fn kernels(c: &mut Criterion) {
    let (u, grid) = reference();
    let f = mayer_function(&u, 1.0, &grid);

    c.bench_function("mayer_function", |b| b.iter(|| mayer_function(black_box(&u), 1.0, &grid)));
    c.bench_function("weighted_sup", |b| b.iter(|| norm_linf_rho(black_box(&f), 6.0)));
    c.bench_function("radial_convolve", |b| b.iter(|| radial_convolve(black_box(&f), &f).unwrap()));
    c.bench_function("connected_graphs_n5", |b| b.iter(|| enumerate_connected_graphs(black_box(5)).unwrap()));

    let beta = 0.2;
    let coeffs = ClusterCoefficients::new(&u, beta, &grid).unwrap();
    let ens = EnsembleParams::new(beta, 0.0, c_beta_bound(&coeffs.f).unwrap(), 6.2).unwrap();
    let ens = ens.with_z(0.25 * ens.z_max_gas).unwrap();
    c.bench_function("rdf_expansion_order3_cached_coefficients", |b| b.iter(|| rdf_expansion(black_box(&coeffs), &ens, 3, false).unwrap()));

    let cfg = GCMCConfig {
        box_side: 8.0,
        beta: 0.1,
        z: 0.02,
        n_equilibrate: 1_000,
        n_sample: 10_000,
        sample_interval: 10,
        r_cut: 4.0,
        n_chains: 1,
        n_blocks: 4,
        ..GCMCConfig::default()
    };
    c.bench_function("gcmc_11k_moves", |b| b.iter(|| run_gcmc(black_box(&u), &cfg).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10).measurement_time(Duration::from_secs(3));
    targets = kernels
}
criterion_main!(benches);
