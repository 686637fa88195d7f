use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use gasfc_bench::{random_seq, random_walk};
use gasfc_core::matrix_profile::{mp_bruteforce, mp_fast};
use gasfc_core::neural::builders::lstm_network;
use gasfc_core::neural::{batch_gradient, mse_loss, Network};
use gasfc_core::wavelets::{
    cwt_morlet, cwt_morlet_direct, default_scales, dwt_decompose, dwt_reconstruct, wavelet_coherence,
    CoherenceParams, WaveletFilterBank, WaveletName,
};
use std::hint::black_box;

fn bench_dwt(c: &mut Criterion) {
    let mut group = c.benchmark_group("dwt");
    for name in [WaveletName::Db4, WaveletName::Bior33] {
        let bank = WaveletFilterBank::new(name);
        let x = random_walk(8640, 1);
        group.throughput(Throughput::Elements(x.len() as u64));
        group.bench_with_input(BenchmarkId::new("round_trip", name), &x, |b, x| {
            b.iter(|| {
                let dec = dwt_decompose(black_box(x), &bank, 4).unwrap();
                dwt_reconstruct(&dec, &bank).unwrap()
            })
        });
    }
    group.finish();
}

fn bench_cwt(c: &mut Criterion) {
    let mut group = c.benchmark_group("cwt");
    group.sample_size(10);
    let x = random_walk(1024, 2);
    let scales = default_scales(x.len(), 1.0);
    group.bench_function("fft", |b| b.iter(|| cwt_morlet(black_box(&x), &scales, 6.0, 1.0).unwrap()));
    group.bench_function("direct", |b| b.iter(|| cwt_morlet_direct(black_box(&x), &scales, 6.0, 1.0).unwrap()));
    let y = random_walk(1024, 3);
    group.bench_function("coherence", |b| {
        b.iter(|| wavelet_coherence(black_box(&x), &y, &CoherenceParams::default()).unwrap())
    });
    group.finish();
}

fn bench_matrix_profile(c: &mut Criterion) {
    let mut group = c.benchmark_group("matrix_profile");
    group.sample_size(10);
    for n in [1000usize, 4000] {
        let x = random_walk(n, 4);
        group.bench_with_input(BenchmarkId::new("fast", n), &x, |b, x| b.iter(|| mp_fast(black_box(x), 50).unwrap()));
    }
    let x = random_walk(1000, 5);
    group.bench_function("brute/1000", |b| b.iter(|| mp_bruteforce(black_box(&x), 50).unwrap()));
    group.finish();
}

fn bench_lstm(c: &mut Criterion) {
    let mut group = c.benchmark_group("lstm");
    let net = Network::new(lstm_network(2, 24, &[16], 1), 6).unwrap();
    let x = random_seq(24, 2, 7);
    group.bench_function("forward", |b| b.iter(|| net.forward(black_box(&x)).unwrap()));
    group.bench_function("forward_backward", |b| {
        b.iter(|| {
            let cache = net.forward(black_box(&x)).unwrap();
            let (_, d) = mse_loss(&cache.output().data, &[0.5]);
            net.backward(&cache, &d).unwrap()
        })
    });
    let inputs: Vec<_> = (0..32).map(|k| random_seq(24, 2, 100 + k)).collect();
    let targets: Vec<Vec<f64>> = (0..32).map(|k| vec![(k as f64 / 16.0) - 1.0]).collect();
    group.bench_function("batch_gradient/32", |b| {
        b.iter(|| batch_gradient(&net, black_box(&inputs), &targets).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_dwt, bench_cwt, bench_matrix_profile, bench_lstm);
criterion_main!(benches);
