//! Sequential against rayon execution for the two data-parallel hot loops:
//! the α scan of the exact self-force and mode reconstruction over a k-grid.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use renormlab::atom::PotentialSpec;
use renormlab::kernels::KernelContext;
use renormlab::meanfield::{reconstruct_modes, KGrid};
use renormlab::model::{Charge, Dim, ModelConfig, Switching};
use renormlab::motion::{HarmonicMotion, Trajectory};
use renormlab::rrforce::{divergence_scan, ExactOpts};
use renormlab::Exec;

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn alpha_scan(c: &mut Criterion) {
    let w = 0.1;
    let motion = HarmonicMotion::from_velocity(vec![0.01, 0.005, 0.0], w);
    let charge = Charge {
        q: 0.3,
        switching: Switching::tanh(0.0, 20.0 / w),
    };
    let ctx = KernelContext::new(1e4, 1.0, 1.0).unwrap();
    let alphas: Vec<f64> = (0..7).map(|i| 1e3 * 10f64.powf(0.5 * i as f64)).collect();
    let opts = ExactOpts {
        tol: 1e-10,
        max_frequency: w,
        history_start: None,
    };
    let mut group = c.benchmark_group("d3_alpha_scan");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| divergence_scan(&ctx, &motion, &charge, Dim::Three, 1900.3, black_box(&alphas), &opts, exec).unwrap())
        });
    }
    group.finish();
}

fn mode_reconstruction(c: &mut Criterion) {
    let config = ModelConfig {
        dim: Dim::Three,
        mass: 1.0,
        charge: 0.3,
        potential: PotentialSpec::harmonic(Dim::Three, 1.0, 1.0),
        alpha: 1e4,
        eta: 1.0,
        switching: Switching::Constant,
    };
    let motion = HarmonicMotion::from_velocity(vec![0.01, 0.0, 0.0], 1.0);
    let traj = Trajectory::sample(&motion, &Charge::constant(0.3), 0.0, 0.02, 5000).unwrap();
    let grid = KGrid::for_config(&config, 1.0, 64, 16).unwrap();
    let mut group = c.benchmark_group("mode_reconstruction");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| reconstruct_modes(&config, black_box(&traj), &grid, None, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, alpha_scan, mode_reconstruction);
criterion_main!(benches);
