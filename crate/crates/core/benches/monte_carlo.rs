use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use risopt::harness::{presets, run_monte_carlo, Execution, RunOptions};
use risopt::optimizer::Algorithm;

fn monte_carlo(c: &mut Criterion) {
    let mut cfg = presets::preset("desk_indoor").expect("bundled preset");
    cfg.sweep = None;
    cfg.trials = 16;
    cfg.link_budget.p_tx_dbm = Some(30.0);
    cfg.algorithms = vec![Algorithm::JprMapg, Algorithm::StaticRis];
    cfg.optimizer.max_iterations = 100;

    let mut group = c.benchmark_group("desk_indoor_16_trials");
    group.sample_size(10);
    for (name, execution) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        let opts = RunOptions { execution, timing: false };
        group.bench_function(name, |b| b.iter(|| black_box(run_monte_carlo(&cfg, opts).unwrap())));
    }
    group.finish();
}

criterion_group!(benches, monte_carlo);
criterion_main!(benches);
