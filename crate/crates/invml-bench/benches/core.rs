//! Hot-path benchmarks: forward/inverse passes, the neighbor graph,
//! the SVD used for rank reporting, and one full training step.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use invml_core::autograd::ActivationSpec;
use invml_core::datasets::{gen_swiss_roll, knn_graph};
use invml_core::linalg::jacobi_svd;
use invml_core::losses::{default_push_radius, PairSet};
use invml_core::model::total_loss;
use invml_core::schedule::eval_schedules;
use invml_core::{InvMLEncoder, LossFlags, Matrix, ScheduleConfig};

fn encoder(m: usize, s_prime: usize, layers: usize, seed: u64) -> InvMLEncoder {
    InvMLEncoder::new(m, s_prime, layers, ActivationSpec { alpha: 0.1 }, seed).unwrap()
}

fn bench_forward_inverse(c: &mut Criterion) {
    let enc = encoder(101, 10, 8, 1);
    let ds = gen_swiss_roll(500, 2).unwrap();
    // Inflate to 101 dimensions by tiling coordinates.
    let x = Matrix::from_fn(500, 101, |i, j| ds.x.get(i, j % 3));
    c.bench_function("forward_500x101_L8", |b| b.iter(|| enc.forward(&x).unwrap()));
    let trace = enc.forward(&x).unwrap();
    let z = trace.z_last().clone();
    c.bench_function("inverse_body_500x101_L8", |b| b.iter(|| enc.inverse_body(&z).unwrap()));
}

fn bench_knn(c: &mut Criterion) {
    let ds = gen_swiss_roll(800, 3).unwrap();
    c.bench_function("knn_graph_800x3_k10", |b| b.iter(|| knn_graph(&ds.x, 10).unwrap()));
}

fn bench_svd(c: &mut Criterion) {
    let ds = gen_swiss_roll(200, 4).unwrap();
    let m = Matrix::from_fn(200, 32, |i, j| ds.x.get(i, j % 3) * (1.0 + j as f64 * 0.01));
    c.bench_function("jacobi_svd_200x32", |b| b.iter(|| jacobi_svd(&m)));
}

fn bench_loss_graph(c: &mut Criterion) {
    let ds = gen_swiss_roll(200, 5).unwrap();
    let enc = encoder(3, 2, 8, 7);
    let graph = knn_graph(&ds.x, 10).unwrap();
    let radius = default_push_radius(&graph);
    let pairs = PairSet::from_graph(&graph, false, None, 0);
    let config = ScheduleConfig { epochs_total: 2000, ..Default::default() };
    let snapshot = eval_schedules(1000, &config, 3, 2, 8, radius);
    c.bench_function("loss_graph_backward_200x3_L8", |b| {
        b.iter_batched(
            || (),
            |_| {
                let mut g =
                    total_loss(&enc, &ds.x, &pairs, &snapshot, LossFlags::default(), false)
                        .unwrap();
                g.tape.backward(g.loss).unwrap();
            },
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, bench_forward_inverse, bench_knn, bench_svd, bench_loss_graph);
criterion_main!(benches);
