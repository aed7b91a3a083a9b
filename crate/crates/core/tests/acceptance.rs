//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. The full-scale check runs with `--ignored` or
//! `--include-ignored`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use risopt::channel::Topology;
use risopt::harness::checks::{check_gradients, random_channels, residual_decayed, InstanceDims};
use risopt::harness::presets::preset;
use risopt::harness::{mean_std, run_trial, sweep, write_csv, Execution, ResultRow, RunOptions, ScenarioConfig, SweepParam};
use risopt::lipschitz::{
    empirical_lipschitz_ratio, chain_difference_gap, lipschitz_bound, lipschitz_multihop, lipschitz_parallel,
    random_feasible_precoder, ChainNorm,
};
use risopt::numerics::random::{gaussian_matrix, gaussian_vector};
use risopt::objective::evaluate;
use risopt::optimizer::Algorithm;
use risopt::{ChannelSet, ComplexMatrix, LinkBudget, Phases};

const SLACK: f64 = 1e-9;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

fn within(v: Verdict, started: Instant, limit: Duration) -> Verdict {
    let took = started.elapsed();
    let passed = v.passed && took <= limit;
    verdict(passed, format!("{}; {:.1} s (limit {} s)", v.detail, took.as_secs_f64(), limit.as_secs()))
}

fn run(opts: Execution) -> RunOptions {
    RunOptions { execution: opts, timing: false }
}

fn rates<'a>(rows: &'a [ResultRow], alg: Algorithm, value: f64) -> impl Iterator<Item = &'a ResultRow> + 'a {
    rows.iter().filter(move |r| r.algorithm == alg.as_str() && r.sweep_value == Some(value))
}

fn rate_vec(rows: &[ResultRow], alg: Algorithm, value: f64) -> Vec<f64> {
    rates(rows, alg, value).map(|r| r.rate_bps_hz.expect("ok row")).collect()
}

fn gradients() -> Verdict {
    let t = Instant::now();
    let r = check_gradients(50, 7).unwrap();
    let v = verdict(
        r.max_error() < 1e-5,
        format!("max relative error {:.2e} (parallel) {:.2e} (multihop) over 50 instances each", r.max_error_parallel, r.max_error_multihop),
    );
    within(v, t, Duration::from_secs(30))
}

fn lipschitz() -> Verdict {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for topology in [Topology::Parallel, Topology::Multihop] {
        for _ in 0..20 {
            let d = InstanceDims::random(&mut rng);
            let ch = random_channels(&mut rng, topology, d);
            let lb = LinkBudget::from_snr(10f64.powf(rng.random_range(-1.0..1.0)));
            let a = rng.random_range(0.5..=1.0);
            let l = lipschitz_bound(&ch, &lb, d.n_s, a).unwrap().l;
            let ratio = empirical_lipschitz_ratio(&ch, &lb, d.n_s, a, &mut rng, 100).unwrap();
            worst = worst.max(ratio / (l * (1.0 + SLACK)));
        }
    }
    let one = ComplexMatrix::identity(1);
    let lb = LinkBudget::from_snr(1.0);
    let par = ChannelSet::parallel(ComplexMatrix::zeros(1, 1), vec![(one.clone(), one.clone())]).unwrap();
    let mh = ChannelSet::multihop(ComplexMatrix::zeros(1, 1), vec![one.clone(), one]).unwrap();
    let lp = lipschitz_parallel(&par, &lb, 1, 1.0).unwrap().l;
    let lm = lipschitz_multihop(&mh, &lb, 1, 1.0).unwrap().l;
    let toys = lp == 7.0 && lm == 50f64.sqrt();
    let v = verdict(
        worst <= 1.0 && toys,
        format!("max ratio/L {worst:.3e} over 2x20 instances x 100 pairs; toy L = {lp} and {lm}"),
    );
    within(v, t, Duration::from_secs(60))
}

fn chains() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut violations = 0;
    for i in 0..500 {
        let n = 2 + i % 3;
        let dims: Vec<usize> = (0..=n).map(|_| rng.random_range(1..=5)).collect();
        let mut chain = || -> Vec<ComplexMatrix> {
            (0..n).map(|k| gaussian_matrix(&mut rng, dims[k + 1], dims[k], 1.0)).collect()
        };
        let (c1, c2) = (chain(), chain());
        for norm in [ChainNorm::Frobenius, ChainNorm::Spectral] {
            let (lhs, rhs) = chain_difference_gap(&c1, &c2, norm).unwrap();
            if lhs > rhs * (1.0 + 1e-12) {
                violations += 1;
            }
        }
    }
    verdict(violations == 0, format!("{violations} violations on 500 chains in both norms"))
}

fn descent() -> Verdict {
    let t = Instant::now();
    let mut runs = 0;
    let mut descent_violations = 0;
    let mut monitor_violations = 0;
    let mut decayed = 0;
    let mut ratios = Vec::new();
    for (name, p_tx) in [("desk_indoor", 30.0), ("desk_multihop", 40.0)] {
        let mut cfg = preset(name).unwrap().with_sweep_value(SweepParam::PTxDbm, p_tx).unwrap();
        cfg.sweep = None;
        cfg.algorithms = vec![Algorithm::JprMapg, Algorithm::JprPg];
        cfg.optimizer.max_iterations = 500;
        cfg.optimizer.stop_tol = 0.0;
        for trial in 0..50 {
            for (_, report) in run_trial(&cfg, trial).reports {
                runs += 1;
                let Ok(r) = report else {
                    descent_violations += 1;
                    continue;
                };
                descent_violations += r.objective.windows(2).filter(|w| w[1] > w[0] + SLACK).count();
                monitor_violations += r
                    .iterations
                    .iter()
                    .zip(&r.objective)
                    .filter(|(it, f_old)| it.monitored_objective > **f_old + SLACK)
                    .count();
                if residual_decayed(&r.iterations, 1e-6) {
                    decayed += 1;
                }
                if let Some(first) = r.iterations.first().map(|i| i.residual_sq()).filter(|&r0| r0 > 0.0) {
                    let min = r.iterations.iter().map(|i| i.residual_sq()).fold(f64::INFINITY, f64::min);
                    ratios.push(min / first);
                }
            }
        }
    }
    ratios.sort_by(f64::total_cmp);
    let median = ratios.get(ratios.len() / 2).copied().unwrap_or(0.0);
    let v = verdict(
        descent_violations == 0 && monitor_violations == 0 && decayed * 100 >= runs * 95,
        format!(
            "{runs} runs: {descent_violations} descent and {monitor_violations} monitor violations; \
             residual below 1e-6 of its initial value in {decayed} (needs 190), median ratio {median:.1e}"
        ),
    );
    within(v, t, Duration::from_secs(300))
}

fn consistency() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let mut d = InstanceDims::random(&mut rng);
        d.n_panels = 1;
        let par = random_channels(&mut rng, Topology::Parallel, d);
        let ChannelSet::Parallel { direct, panels } = &par else { unreachable!() };
        let mh = ChannelSet::multihop(direct.clone(), vec![panels[0].0.clone(), panels[0].1.clone()]).unwrap();
        let f = random_feasible_precoder(&mut rng, d.n_tx, d.n_s, 0.9);
        let phases = Phases::new(gaussian_vector(&mut rng, d.n_ris, 1.0), d.n_ris).unwrap();
        let lb = LinkBudget::from_snr(10f64.powf(rng.random_range(-1.0..1.0)));
        let (a, b) = (evaluate(&par, &phases, &f, &lb).unwrap(), evaluate(&mh, &phases, &f, &lb).unwrap());
        let scale = a.value.abs().max(1.0);
        let dg: f64 = a.grad_phases.as_slice().iter().zip(b.grad_phases.as_slice()).map(|(x, y)| (x - y).norm_sqr()).sum();
        let errs = [
            (a.value - b.value).abs() / scale,
            // the rate is -f / ln 2, so its error follows f's
            ((a.value - b.value) / std::f64::consts::LN_2).abs() / scale,
            a.grad_precoder.sub(&b.grad_precoder).frobenius_norm() / a.grad_precoder.frobenius_norm().max(1.0),
            dg.sqrt() / a.grad_phases.norm_sq().sqrt().max(1.0),
        ];
        worst = errs.iter().fold(worst, |m, &e| m.max(e));
    }
    verdict(worst <= 1e-12, format!("max relative difference {worst:.2e} on 50 instances"))
}

fn desk_indoor() -> ScenarioConfig {
    let mut cfg = preset("desk_indoor").unwrap();
    cfg.sweep = None;
    cfg
}

/// Mean of `a - b` over paired trials, at least minus one standard error.
fn paired_at_least(a: &[f64], b: &[f64]) -> (bool, f64, f64) {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let (m, s) = mean_std(&diff);
    let se = s / (diff.len() as f64).sqrt();
    (m >= -se, m, se)
}

fn ordering() -> Verdict {
    let t = Instant::now();
    let cfg = desk_indoor();
    let grid = [0.0, 10.0, 20.0, 30.0, 40.0];
    let rows = sweep(&cfg, SweepParam::PTxDbm, &grid, run(Execution::Parallel)).unwrap();
    let errors = rows.iter().filter(|r| !r.is_ok()).count();
    let mut failures = Vec::new();
    let mut dominance = 0;
    let mut means = String::new();
    use Algorithm::*;
    for &p in &grid {
        let get = |a| rate_vec(&rows, a, p);
        let (mapg, pg, ro, st, no) = (get(JprMapg), get(JprPg), get(RisOnly), get(StaticRis), get(NoRis));
        for (hi, lo, label) in [(&mapg, &pg, "mapg>=pg"), (&mapg, &ro, "mapg>=ris_only"), (&ro, &st, "ris_only>=static"), (&st, &no, "static>=no_ris")] {
            let (ok, m, se) = paired_at_least(hi, lo);
            if !ok {
                failures.push(format!("{label} at {p} dBm (mean diff {m:.3e}, se {se:.1e})"));
            }
        }
        dominance += mapg.iter().zip(&st).filter(|(m, s)| m < s).count();
        if p == 30.0 {
            let mean = |x: &[f64]| mean_std(x).0;
            means = format!(
                "means at 30 dBm: mapg {:.3} pg {:.3} ris_only {:.3} static {:.3} no_ris {:.3}",
                mean(&mapg), mean(&pg), mean(&ro), mean(&st), mean(&no)
            );
        }
    }
    let passed = errors == 0 && failures.is_empty() && dominance == 0;
    let detail = if failures.is_empty() {
        format!("{means}; {dominance} trials with mapg < static; {errors} error rows")
    } else {
        format!("{}; {dominance} trials with mapg < static", failures.join(", "))
    };
    within(verdict(passed, detail), t, Duration::from_secs(600))
}

fn quantization() -> Verdict {
    let mut cfg = desk_indoor().with_sweep_value(SweepParam::PTxDbm, 30.0).unwrap();
    cfg.algorithms = vec![Algorithm::JprMapg];
    let bits = [1.0, 2.0, 3.0];
    let rows = sweep(&cfg, SweepParam::QuantBits, &bits, run(Execution::Parallel)).unwrap();
    let loss: Vec<f64> = bits
        .iter()
        .map(|&b| {
            let r: Vec<&ResultRow> = rates(&rows, Algorithm::JprMapg, b).collect();
            let full: f64 = r.iter().map(|x| x.rate_bps_hz.unwrap()).sum();
            let quant: f64 = r.iter().map(|x| x.rate_quantized_bps_hz.unwrap()).sum();
            1.0 - quant / full
        })
        .collect();
    verdict(
        loss[0] >= loss[1] && loss[1] >= loss[2] && loss[2] < 0.05,
        format!("relative loss at 1, 2, 3 bits: {:.2}%, {:.2}%, {:.2}%", 100.0 * loss[0], 100.0 * loss[1], 100.0 * loss[2]),
    )
}

fn trends() -> Verdict {
    use Algorithm::*;
    let cfg = desk_indoor();
    let grid = [0.0, 10.0, 20.0, 30.0, 40.0];
    let rows = sweep(&cfg, SweepParam::PTxDbm, &grid, run(Execution::Parallel)).unwrap();
    let mut per_trial = 0;
    let mut mean_drops = Vec::new();
    for alg in Algorithm::ALL {
        let series: Vec<Vec<f64>> = grid.iter().map(|&p| rate_vec(&rows, alg, p)).collect();
        for w in series.windows(2) {
            if !alg.is_iterative() {
                per_trial += w[0].iter().zip(&w[1]).filter(|(lo, hi)| hi < lo).count();
            }
            if mean_std(&w[1]).0 < mean_std(&w[0]).0 {
                mean_drops.push(alg.as_str());
            }
        }
    }

    let mut n_cfg = cfg.with_sweep_value(SweepParam::PTxDbm, 30.0).unwrap();
    n_cfg.algorithms = vec![JprMapg, StaticRis];
    let sizes = [16.0, 32.0, 64.0];
    let n_rows = sweep(&n_cfg, SweepParam::NRis, &sizes, run(Execution::Parallel)).unwrap();
    let mut n_drops = Vec::new();
    let mut n_means = Vec::new();
    for alg in [JprMapg, StaticRis] {
        let means: Vec<f64> = sizes.iter().map(|&n| mean_std(&rate_vec(&n_rows, alg, n)).0).collect();
        if means.windows(2).any(|w| w[1] < w[0]) {
            n_drops.push(alg.as_str());
        }
        n_means.push(format!("{} {}", alg.as_str(), means.iter().map(|m| format!("{m:.3}")).collect::<Vec<_>>().join("/")));
    }
    verdict(
        per_trial == 0 && mean_drops.is_empty() && n_drops.is_empty(),
        format!(
            "p_tx: {per_trial} per-trial drops (fixed-configuration algorithms), mean drops {:?}; n_ris 16/32/64 ({} trials): {}",
            mean_drops,
            n_cfg.trials,
            n_means.join(", ")
        ),
    )
}

fn determinism() -> Verdict {
    let mut cfg = desk_indoor();
    cfg.trials = 12;
    let bytes = |e| {
        let rows = sweep(&cfg, SweepParam::PTxDbm, &[10.0, 30.0], run(e)).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        buf
    };
    let reference = bytes(Execution::Sequential);
    let same = [Execution::Sequential, Execution::Parallel, Execution::Workers(2), Execution::Workers(5)]
        .into_iter()
        .all(|e| bytes(e) == reference);
    verdict(same, format!("{} CSV bytes identical across sequential and 2, 5 and default workers", reference.len()))
}

fn full_scale() -> Verdict {
    let t = Instant::now();
    let mut cfg = preset("indoor_panel_10_10").unwrap().with_sweep_value(SweepParam::PTxDbm, 30.0).unwrap();
    cfg.sweep = None;
    cfg.trials = 100;
    cfg.algorithms = vec![Algorithm::JprMapg, Algorithm::NoRis];
    let rows = sweep(&cfg, SweepParam::PTxDbm, &[30.0], run(Execution::Parallel)).unwrap();
    let mean = |a| mean_std(&rate_vec(&rows, a, 30.0)).0;
    let (m, n) = (mean(Algorithm::JprMapg), mean(Algorithm::NoRis));
    let v = verdict(m / n >= 4.0, format!("jpr_mapg {m:.3} / no_ris {n:.3} = {:.2}", m / n));
    within(v, t, Duration::from_secs(3600))
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let extended = args.iter().any(|a| a == "--ignored" || a == "--include-ignored");
    // `cargo test` passes test-harness flags such as `--list` through
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let criteria: Vec<(&str, fn() -> Verdict)> = vec![
        ("1 gradient correctness", gradients),
        ("2 lipschitz soundness", lipschitz),
        ("3 chain difference inequality", chains),
        ("4 monotone descent and residual decay", descent),
        ("5 single-panel consistency", consistency),
        ("6 algorithm ordering", ordering),
        ("7 quantization loss", quantization),
        ("8 monotone trends", trends),
        ("9 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let v = check();
        println!("{} criterion {name}: {}", if v.passed { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.passed);
    }
    if extended {
        let v = full_scale();
        println!("{} criterion 10 full-scale gain: {}", if v.passed { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.passed);
    } else {
        println!("SKIP criterion 10 full-scale gain: run with --ignored");
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
