use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gevrey_bbm::analytics::defect::defect_rate_fourier;
use gevrey_bbm::evolution::picard_solve;
use gevrey_bbm::identities::{check_fab_bound, verify_factor_identity, TRIAD_RANGE, TRIAD_SEED};
use gevrey_bbm::initial::random_band_limited;
use gevrey_bbm::{GevreyWeight, Grid, InitialData, PicardOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Time `work` on a one-thread pool and on the full pool. Without the
/// `parallel` feature only the sequential path exists.
fn compare<F>(c: &mut Criterion, name: &str, samples: usize, work: F)
where
    F: Fn() + Sync + Send,
{
    let mut group = c.benchmark_group(name);
    group.sample_size(samples);
    #[cfg(feature = "parallel")]
    for threads in std::collections::BTreeSet::from([1, rayon::current_num_threads()]) {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        group.bench_function(BenchmarkId::new("rayon", threads), |b| {
            b.iter(|| pool.install(&work))
        });
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential", |b| b.iter(&work));
    group.finish();
}

fn trilinear_sum(c: &mut Criterion) {
    let grid = Grid::new(128, 64.0).unwrap();
    let field = random_band_limited(grid, 4.0, &mut ChaCha8Rng::seed_from_u64(7));
    compare(c, "trilinear_sum_n128", 20, || {
        black_box(defect_rate_fourier(black_box(&field), 0.1).unwrap());
    });
}

fn identity_check(c: &mut Criterion) {
    compare(c, "factor_identity_k12", 10, || {
        black_box(verify_factor_identity(12, 8).unwrap());
    });
}

fn fab_sampling(c: &mut Criterion) {
    compare(c, "fab_bound_2000", 20, || {
        black_box(check_fab_bound(2000, 0.1, TRIAD_SEED, TRIAD_RANGE).unwrap());
    });
}

fn picard(c: &mut Criterion) {
    let grid = Grid::new(256, 64.0).unwrap();
    let u0 = InitialData::DEFAULT.sample(&grid);
    let weight = GevreyWeight::cosh(0.3, 1.0);
    let opts = PicardOptions {
        tol: 1e-10,
        max_iter: 50,
        nodes: 64,
    };
    compare(c, "picard_n256", 10, || {
        black_box(picard_solve(&u0, 0.4, 2.0, &weight, &opts).unwrap());
    });
}

criterion_group!(benches, trilinear_sum, identity_check, fab_sampling, picard);
criterion_main!(benches);
