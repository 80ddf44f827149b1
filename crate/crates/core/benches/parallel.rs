//! Sequential against parallel scheduling for the batch workloads.
//!
//! Built without the `parallel` feature both arms run sequentially.

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use memvac::capacity::registry::{CodeSource, Registry};
use memvac::capacity::{capacity_estimate, fidelity_matrix, sample_code, Clock, ThetaRange};
use memvac::fock::FockWorkspace;
use memvac::su11::ModeList;
use memvac::verify::oracle_point;
use memvac::Execution;

const ARMS: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn registry(k: usize, n: usize) -> Registry {
    let range = ThetaRange::new(0.0, 2.0).unwrap();
    let mut reg = Registry::new(Arc::new(ModeList::uniform(k, 1.0, 0.5).unwrap()));
    for i in 0..n {
        let code = sample_code(5, i as u64, k, range);
        reg = reg
            .print(&format!("m{i}"), &CodeSource::Thetas(code.thetas().to_vec()), 0.0)
            .unwrap();
    }
    reg
}

fn bench_fidelity(c: &mut Criterion) {
    let reg = registry(64, 200);
    let mut g = c.benchmark_group("fidelity_matrix_200x64");
    for (name, exec) in ARMS {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| fidelity_matrix(&reg, 1.5, Clock::Common, exec).unwrap())
        });
    }
    g.finish();
}

fn bench_capacity(c: &mut Criterion) {
    let modes = Arc::new(ModeList::uniform(16, 1.0, 1.0).unwrap());
    let range = ThetaRange::new(0.0, 3.0).unwrap();
    let mut g = c.benchmark_group("capacity_k16_500");
    g.sample_size(20);
    for (name, exec) in ARMS {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| capacity_estimate(&modes, range, 0.05, 500, 42, exec).unwrap())
        });
    }
    g.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let ws = FockWorkspace::build(32, 1.0, 1.0).unwrap();
    let points: Vec<(f64, f64)> = [0.1, 0.3, 0.5, 0.8].iter().flat_map(|&th| [(th, 0.0), (th, th)]).collect();
    let mut g = c.benchmark_group("oracle_points_d32");
    g.sample_size(10);
    for (name, exec) in ARMS {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| memvac::exec::map_slice(exec, &points, |&(th, t)| oracle_point(&ws, th, t).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, bench_fidelity, bench_capacity, bench_oracle);
criterion_main!(benches);
