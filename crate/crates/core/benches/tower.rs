//! Tower arithmetic on the default rayon pool against a one-thread pool.
//! Build with `--no-default-features` to time the sequential code path.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use norms_lab::cyclotomic::{CycloElement, Tower};
use norms_lab::oortlift::{verify, KummerCoverSpec, LevelRange};
use norms_lab::padics::Prime;
use norms_lab::ramification::filtration;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let default = rayon::ThreadPoolBuilder::new().build().unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    vec![("default", default), ("1-thread", single)]
}

fn random_element(t: &Tower, m: u32, seed: u64) -> CycloElement {
    let lv = t.level(m).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<BigInt> = (0..lv.degree()).map(|_| BigInt::from(rng.gen::<i64>())).collect();
    CycloElement::from_signed(&lv, 0, &v, lv.precision()).unwrap()
}

fn multiplication(c: &mut Criterion) {
    let mut g = c.benchmark_group("mul");
    for (p, m) in [(3u64, 4u32), (5, 3)] {
        let t = Tower::new(Prime::new(p).unwrap(), 60).unwrap();
        let (x, y) = (random_element(&t, m, 1), random_element(&t, m, 2));
        for (name, pool) in pools() {
            g.bench_with_input(BenchmarkId::new(name, format!("p{p}-m{m}")), &(), |b, _| {
                pool.install(|| b.iter(|| black_box(&x).mul(black_box(&y)).unwrap()))
            });
        }
    }
    g.finish();
}

fn norms(c: &mut Criterion) {
    let mut g = c.benchmark_group("norm_down");
    let t = Tower::new(Prime::new(3).unwrap(), 60).unwrap();
    let x = random_element(&t, 4, 3);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new(name, "p3-m4"), |b| {
            pool.install(|| b.iter(|| black_box(&x).norm_down(&t).unwrap()))
        });
    }
    g.finish();
}

fn filtrations(c: &mut Criterion) {
    let mut g = c.benchmark_group("filtration");
    g.sample_size(10);
    let t = Tower::new(Prime::new(3).unwrap(), 60).unwrap();
    for level in 1..=4 {
        t.level(level).unwrap();
    }
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new(name, "p3-0..4"), |b| {
            pool.install(|| b.iter(|| filtration(&t, 0, 4).unwrap()))
        });
    }
    g.finish();
}

fn oort(c: &mut Criterion) {
    let mut g = c.benchmark_group("oort_verify");
    g.sample_size(10);
    let t = Tower::new(Prime::new(3).unwrap(), 60).unwrap();
    let spec = KummerCoverSpec::from_text(&t, 2, "1 + Z^4").unwrap();
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new(name, "p3-c2"), |b| {
            pool.install(|| b.iter(|| verify(&spec, LevelRange::Auto { extra: 2 }, 8, false).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, multiplication, norms, filtrations, oort);
criterion_main!(benches);
