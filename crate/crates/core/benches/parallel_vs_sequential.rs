use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use lowlying::exactpoly::rat;
use lowlying::rmt::{abs_eigenangles, sample_haar_so, sample_rng, sample_z, EnsembleSpec, FmKernel};
use lowlying::sop::{class_sums, DEFAULT_ENUM_CAP};
use lowlying::testfn::TestFunction;

/// The same per-sample pipeline as `sample_z`, in a plain loop.
fn sample_z_sequential(tf: &TestFunction, spec: &EnsembleSpec) -> Vec<f64> {
    let kernel = FmKernel::new(tf, spec.m).unwrap();
    (0..spec.samples)
        .map(|i| {
            let u = sample_haar_so(spec.m, &mut sample_rng(spec.seed, i as u64)).unwrap();
            kernel.z(&abs_eigenangles(&u).unwrap())
        })
        .collect()
}

fn haar(c: &mut Criterion) {
    let tf = TestFunction::fejer(rat(3, 5)).unwrap();
    let mut g = c.benchmark_group("haar_z");
    g.sample_size(10);
    for m in [20usize, 60] {
        let spec = EnsembleSpec::new(m, 200, 42);
        g.bench_with_input(BenchmarkId::new("parallel", m), &spec, |b, s| b.iter(|| sample_z(&tf, s).unwrap()));
        g.bench_with_input(BenchmarkId::new("sequential", m), &spec, |b, s| b.iter(|| sample_z_sequential(&tf, s)));
    }
    g.finish();
}

fn classes(c: &mut Criterion) {
    let mut g = c.benchmark_group("class_sums_n7");
    g.sample_size(10);
    for shards in [1usize, 8] {
        g.bench_with_input(BenchmarkId::new("shards", shards), &shards, |b, &k| {
            b.iter(|| class_sums(7, 3, 3, k, DEFAULT_ENUM_CAP).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, haar, classes);
criterion_main!(benches);
