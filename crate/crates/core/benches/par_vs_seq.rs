//! Rayon-vs-sequential comparison of the data-parallel inner loops.
//!
//! The `parallel` feature routes `par_map`/`par_map_indexed` through rayon;
//! the suite benchmarks each workload on a single-thread pool and on the
//! default pool, which makes the speedup (and any overhead on tiny inputs)
//! directly visible. Results are bit-identical either way, so only timing
//! differs.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gibbslab::bp::{bp_operator, BPKernel, BPMethod};
use gibbslab::lattice::{field_family, LatticeSpec};
use gibbslab::operators::gibbs_state;
use gibbslab::pauli::Pauli;
use gibbslab::shadows::{collect_snapshots, random_hermitian};
use gibbslab::wasserstein::{default_witnesses, w1_bounds};
use std::hint::black_box;

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let cores = std::thread::available_parallelism().map(|c| c.get()).unwrap_or(2);
    [1usize, cores]
        .iter()
        .map(|&threads| {
            (
                format!("{threads}-thread"),
                rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap(),
            )
        })
        .collect()
}

fn bench_snapshot_collection(c: &mut Criterion) {
    let fam = field_family(LatticeSpec::chain(4).unwrap(), Pauli::Z).unwrap();
    let x = fam.param(vec![0.4, -0.2, 0.7, 0.1]).unwrap();
    let sigma = gibbs_state(&fam.assemble(&x).unwrap(), 0.8).unwrap();
    let mut group = c.benchmark_group("collect_snapshots_n4_x2000");
    group.sample_size(10);
    for (label, pool) in pools() {
        group.bench_with_input(BenchmarkId::from_parameter(&label), &pool, |b, pool| {
            b.iter(|| pool.install(|| black_box(collect_snapshots(&sigma, 2000, 11, 0).unwrap())));
        });
    }
    group.finish();
}

fn bench_bp_quadrature(c: &mut Criterion) {
    let mut rng = gibbslab::rng::stream(77, 0, 0);
    let h = random_hermitian(8, 1.0, &mut rng);
    let v = random_hermitian(8, 1.0, &mut rng);
    let kernel = BPKernel::new(1.0).unwrap();
    let mut group = c.benchmark_group("bp_time_quadrature_3q");
    group.sample_size(10);
    for (label, pool) in pools() {
        group.bench_with_input(BenchmarkId::from_parameter(&label), &pool, |b, pool| {
            b.iter(|| pool.install(|| black_box(bp_operator(&h, &v, &kernel, BPMethod::Quadrature).unwrap())));
        });
    }
    group.finish();
}

fn bench_witness_sweep(c: &mut Criterion) {
    let n = 4;
    let fam = field_family(LatticeSpec::chain(n).unwrap(), Pauli::Z).unwrap();
    let witnesses = default_witnesses(n).unwrap();
    let pairs: Vec<_> = (0..8)
        .map(|k| {
            let a = fam.param(vec![0.1 * k as f64, -0.3, 0.2, 0.05]).unwrap();
            let b = fam.param(vec![-0.2, 0.1 * k as f64, -0.1, 0.6]).unwrap();
            (
                gibbs_state(&fam.assemble(&a).unwrap(), 1.0).unwrap(),
                gibbs_state(&fam.assemble(&b).unwrap(), 1.0).unwrap(),
            )
        })
        .collect();
    let mut group = c.benchmark_group("w1_witness_sweep_n4_x8");
    group.sample_size(10);
    for (label, pool) in pools() {
        group.bench_with_input(BenchmarkId::from_parameter(&label), &pool, |b, pool| {
            b.iter(|| {
                pool.install(|| {
                    let sums: Vec<f64> = gibbslab::parallel::par_map(&pairs, |(x, y)| {
                        w1_bounds(x, y, &witnesses, None).unwrap().lower
                    });
                    black_box(gibbslab::parallel::pairwise_sum_f64(&sums))
                })
            });
        });
    }
    group.finish();
}

criterion_group!(benches, bench_snapshot_collection, bench_bp_quadrature, bench_witness_sweep);
criterion_main!(benches);
