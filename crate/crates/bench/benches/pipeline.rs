//! End-to-end timings for the main pipeline stages.

use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::DMatrix;
use slsnet::sim::{rollout, DisturbanceSpec};
use slsnet::{dare_solve, synthesize, Controller};
use slsnet_bench::{chain_plant, chain_problem};
use std::hint::black_box;

fn bench_synthesize(c: &mut Criterion) {
    let mut group = c.benchmark_group("synthesize");
    for (label, d) in [("dense", None), ("one-hop", Some(1))] {
        let prob = chain_problem(10, 10, d);
        group.bench_function(label, |b| b.iter(|| synthesize(black_box(&prob)).unwrap()));
    }
    group.finish();
}

fn bench_dare(c: &mut Criterion) {
    let plant = chain_plant(10);
    let q = DMatrix::identity(10, 10);
    c.bench_function("dare_solve", |b| {
        b.iter(|| dare_solve(black_box(&plant.a), &plant.b, &q, &q, 100_000, 1e-12).unwrap())
    });
}

fn bench_rollout(c: &mut Criterion) {
    let prob = chain_problem(10, 10, Some(2));
    let phi = synthesize(&prob).unwrap();
    let dist = DisturbanceSpec::Gaussian {
        sigma_w: prob.plant.sigma_w.clone(),
        seed: 7,
    };
    c.bench_function("rollout_h100", |b| {
        b.iter(|| {
            let mut ctl = Controller::new(&prob.plant, phi.clone()).unwrap();
            rollout(black_box(&prob.plant), &mut ctl, &dist, 100).unwrap()
        })
    });
}

criterion_group!(benches, bench_synthesize, bench_dare, bench_rollout);
criterion_main!(benches);
