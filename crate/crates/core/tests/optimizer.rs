use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use risopt::channel::Topology;
use risopt::harness::checks::{random_channels, InstanceDims};
use risopt::lipschitz::{lipschitz_bound, random_feasible_precoder};
use risopt::numerics::random::{gaussian_matrix, gaussian_vector};
use risopt::objective::{achievable_rate, composite_channel, configuration_rate, PRECODER_SLACK};
use risopt::optimizer::{
    jpr_mapg, jpr_pg, momentum_sequence, no_ris, project_phases, prox_phase, prox_precoder, quantize_phases,
    ris_only, run_algorithm, static_ris, svd_precoder, Algorithm, Branch, InitialPoint, OptimizerConfig, RunReport,
    DESCENT_SLACK,
};
use risopt::{ChannelSet, ComplexMatrix, Error, LinkBudget, Phases, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

struct Setup {
    ch: ChannelSet,
    lb: LinkBudget,
    n_s: usize,
    init: InitialPoint,
    l: f64,
}

fn setup(seed: u64, topology: Topology, dims: Option<InstanceDims>) -> Setup {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = dims.unwrap_or_else(|| InstanceDims::random(&mut rng));
    let ch = random_channels(&mut rng, topology, d);
    let lb = LinkBudget::from_snr(10f64.powf(rng.random_range(-1.0..1.0)));
    let init = InitialPoint::static_mirror(&ch, d.n_s, 1.0).unwrap();
    let l = lipschitz_bound(&ch, &lb, d.n_s, 1.0).unwrap().l;
    Setup { ch, lb, n_s: d.n_s, init, l }
}

fn quick() -> OptimizerConfig {
    OptimizerConfig { max_iterations: 60, stop_tol: 0.0, ..OptimizerConfig::default() }
}

fn check_report(r: &RunReport, n_s: usize) {
    for w in r.objective.windows(2) {
        assert!(w[1] <= w[0] + DESCENT_SLACK, "objective rose from {} to {}", w[0], w[1]);
    }
    for (q, it) in r.iterations.iter().enumerate() {
        assert!(it.monitored_objective <= r.objective[q] + DESCENT_SLACK);
        match (it.branch, it.accelerated_objective) {
            (Branch::Accelerated, Some(acc)) => assert!(acc <= it.monitored_objective),
            (Branch::Monitored, Some(acc)) => assert!(it.monitored_objective < acc),
            (Branch::Monitored, None) => {}
            (Branch::Accelerated, None) => panic!("accelerated branch without a candidate"),
        }
    }
    assert!(r.precoder.matrix().frobenius_norm_sq() <= n_s as f64 + PRECODER_SLACK);
    assert!(r.phases.phases().modulus_defect(r.phases.amplitude()) <= 1e-12);
    assert!(r.final_rate >= r.initial_rate - 1e-12);
}

#[test]
fn momentum_terms() {
    let t = momentum_sequence(4);
    assert_eq!(&t[..2], &[0.0, 1.0]);
    assert!((t[2] - (5f64.sqrt() + 1.0) / 2.0).abs() < 1e-15);
    assert!((t[3] - 2.193527).abs() < 1e-6);
}

#[test]
fn prox_examples() {
    let x = ComplexMatrix::from_real_diag(&[2.0, 2.0]);
    assert_eq!(prox_precoder(&x, 2).matrix(), &ComplexMatrix::identity(2));
    let small = ComplexMatrix::from_real_diag(&[0.5, 0.5, 0.5, 0.5]);
    assert_eq!(prox_precoder(&small, 2).matrix(), &small);
    let p = prox_phase(&[c(3.0, 4.0), c(0.0, 0.0)], 1.0);
    assert!((p[0] - c(0.6, 0.8)).norm() < 1e-15);
    assert_eq!(p[1], c(1.0, 0.0));
}

#[test]
fn quantization_examples() {
    let at = |theta: f64, bits: u32| {
        let p = Phases::new(vec![C64::from_polar(1.0, theta)], 1).unwrap();
        quantize_phases(&p, bits, 1.0).phases().as_slice()[0]
    };
    assert!((at(0.6 * PI, 1) - c(-1.0, 0.0)).norm() < 1e-12);
    assert!((at(0.3 * PI, 2) - c(0.0, 1.0)).norm() < 1e-12);
    assert!((at(-0.1 * PI, 1) - c(1.0, 0.0)).norm() < 1e-12);
}

#[test]
fn fine_quantization_keeps_the_rate() {
    for seed in 0..10 {
        let s = setup(seed, Topology::Parallel, None);
        let r = jpr_mapg(&s.ch, &s.lb, &quick(), &s.init, s.l).unwrap();
        let q = quantize_phases(r.phases.phases(), 10, 1.0);
        let rq = configuration_rate(&s.ch, q.phases(), r.precoder.matrix(), &s.lb).unwrap();
        assert!((r.final_rate - rq).abs() <= 1e-3 * r.final_rate, "{} vs {}", r.final_rate, rq);
    }
}

#[test]
fn zero_channels_stay_put() {
    let z = |r, c| ComplexMatrix::zeros(r, c);
    let ch = ChannelSet::parallel(z(2, 3), vec![(z(4, 3), z(2, 4))]).unwrap();
    let lb = LinkBudget::from_snr(1.0);
    let init = InitialPoint::static_mirror(&ch, 2, 1.0).unwrap();
    let r = jpr_mapg(&ch, &lb, &quick(), &init, 0.0).unwrap();
    assert!(r.objective.iter().all(|&f| f == 0.0));
    assert_eq!(r.precoder.matrix(), init.precoder.matrix());
    assert_eq!(r.phases.phases(), init.phases.phases());
}

#[test]
fn runs_descend_and_stay_feasible() {
    let dims = InstanceDims { n_tx: 8, n_rx: 4, n_ris: 16, n_panels: 1, n_s: 2 };
    for seed in 0..10 {
        for topology in [Topology::Parallel, Topology::Multihop] {
            let s = setup(seed, topology, Some(dims));
            for r in [
                jpr_mapg(&s.ch, &s.lb, &quick(), &s.init, s.l).unwrap(),
                jpr_pg(&s.ch, &s.lb, &quick(), &s.init, s.l).unwrap(),
                ris_only(&s.ch, &s.lb, &quick(), &s.init, s.l).unwrap(),
            ] {
                check_report(&r, s.n_s);
            }
        }
    }
}

#[test]
fn first_iterate_is_a_plain_gradient_step() {
    for seed in 0..10 {
        let s = setup(seed, Topology::Parallel, None);
        let one = OptimizerConfig { max_iterations: 1, ..quick() };
        let a = jpr_mapg(&s.ch, &s.lb, &one, &s.init, s.l).unwrap();
        let b = jpr_pg(&s.ch, &s.lb, &one, &s.init, s.l).unwrap();
        assert_eq!(a.precoder.matrix(), b.precoder.matrix());
        assert_eq!(a.phases.phases(), b.phases.phases());
        assert_eq!(a.iterations[0].accelerated_objective, Some(a.iterations[0].monitored_objective));
        assert_eq!(a.iterations[0].branch, Branch::Accelerated);
    }
}

#[test]
fn ris_only_keeps_the_precoder() {
    for seed in 0..10 {
        let s = setup(seed, Topology::Multihop, None);
        let r = ris_only(&s.ch, &s.lb, &quick(), &s.init, s.l).unwrap();
        assert_eq!(r.precoder.matrix(), s.init.precoder.matrix());
        let base = static_ris(&s.ch, &s.lb, &s.init, &quick()).unwrap();
        assert!(r.final_rate >= base.final_rate - 1e-12);
    }
}

#[test]
fn oversized_steps_are_checked() {
    // Steps beyond 1/L lose the guarantee; any rise must be reported, not returned.
    for seed in 0..40 {
        let s = setup(seed, Topology::Parallel, None);
        let f: f64 = [0.5, 0.2, 0.05, 0.01][seed as usize % 4];
        match jpr_pg(&s.ch, &s.lb, &quick(), &s.init, s.l * f) {
            Err(Error::NonmonotoneDetected { before, after, .. }) => {
                assert!(after > before + DESCENT_SLACK);
            }
            Err(e) => panic!("unexpected error {e}"),
            Ok(r) => check_report(&r, s.n_s),
        }
    }
}

#[test]
fn baselines() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let lb = LinkBudget::from_snr(2.0);
    let cfg = OptimizerConfig::default();
    let pair = (gaussian_matrix(&mut rng, 4, 3, 1.0), gaussian_matrix(&mut rng, 2, 4, 1.0));
    let dead = ChannelSet::parallel(ComplexMatrix::zeros(2, 3), vec![pair]).unwrap();
    assert_eq!(no_ris(&dead, &lb, 2, &cfg).unwrap().final_rate, 0.0);

    let direct = gaussian_matrix(&mut rng, 2, 3, 1.0);
    let bare = ChannelSet::parallel(direct, vec![]).unwrap();
    let init = InitialPoint::static_mirror(&bare, 2, 1.0).unwrap();
    let st = static_ris(&bare, &lb, &init, &cfg).unwrap().final_rate;
    assert!((st - no_ris(&bare, &lb, 2, &cfg).unwrap().final_rate).abs() < 1e-12);

    for alg in Algorithm::ALL {
        let r = run_algorithm(alg, &dead, &lb, &cfg, 2, 1.0).unwrap();
        assert_eq!(r.algorithm, alg);
    }
}

#[test]
fn svd_precoder_is_full_power_and_beats_random_on_average() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let lb = LinkBudget::from_snr(1.0);
    let (mut svd_total, mut random_total) = (0.0, 0.0);
    for _ in 0..200 {
        let h = gaussian_matrix(&mut rng, 3, 5, 1.0);
        let f = svd_precoder(&h, 1).unwrap();
        assert!((f.matrix().frobenius_norm_sq() - 1.0).abs() < 1e-12);
        svd_total += achievable_rate(&h, f.matrix(), &lb).unwrap();
        let g = random_feasible_precoder(&mut rng, 5, 1, 1.0);
        random_total += achievable_rate(&h, &g, &lb).unwrap();
    }
    assert!(svd_total > random_total);
}

#[test]
fn unitary_channel_rate_is_basis_independent() {
    // A DFT matrix is unitary; any orthonormal precoder gives the same rate.
    let n = 3;
    let h = ComplexMatrix::from_fn(n, n, |r, k| C64::from_polar(1.0 / (n as f64).sqrt(), -2.0 * PI * (r * k) as f64 / n as f64));
    let lb = LinkBudget::from_snr(2.0);
    let a = achievable_rate(&h, svd_precoder(&h, n).unwrap().matrix(), &lb).unwrap();
    let b = achievable_rate(&h, &ComplexMatrix::identity(n), &lb).unwrap();
    assert!((a - b).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn precoder_projection(seed in any::<u64>(), rows in 1usize..6, cols in 1usize..4, var in 0.01f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = gaussian_matrix(&mut rng, rows, cols, var);
        let p = prox_precoder(&x, cols);
        prop_assert!(p.matrix().frobenius_norm_sq() <= cols as f64 + PRECODER_SLACK);
        let again = prox_precoder(p.matrix(), cols);
        prop_assert!(again.matrix().sub(p.matrix()).frobenius_norm() <= 1e-15 * p.matrix().frobenius_norm().max(1.0));
    }

    #[test]
    fn phase_projection(seed in any::<u64>(), n in 1usize..20, a in 0.1f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Phases::new(gaussian_vector(&mut rng, n, 1.0), n).unwrap();
        let p = project_phases(&x, a);
        prop_assert!(p.modulus_defect(a) <= 1e-12);
        for bits in 1..=4 {
            prop_assert!(quantize_phases(&p, bits, a).phases().modulus_defect(a) <= 1e-12);
        }
    }

    #[test]
    fn finer_grids_are_never_farther(seed in any::<u64>(), n in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = project_phases(&Phases::new(gaussian_vector(&mut rng, n, 1.0), n).unwrap(), 1.0);
        let dist = |bits: u32| {
            let q = quantize_phases(&x, bits, 1.0);
            q.phases().as_slice().iter().zip(x.as_slice()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
        };
        // Grid 2^b is a subset of grid 2^(b+1).
        for bits in 1..6 {
            prop_assert!(dist(bits + 1) <= dist(bits) + 1e-12);
        }
    }

    #[test]
    fn any_run_descends(seed in any::<u64>(), multihop in any::<bool>()) {
        let topology = if multihop { Topology::Multihop } else { Topology::Parallel };
        let s = setup(seed, topology, None);
        let cfg = OptimizerConfig { max_iterations: 30, ..quick() };
        let r = jpr_mapg(&s.ch, &s.lb, &cfg, &s.init, s.l).unwrap();
        check_report(&r, s.n_s);
        let h = composite_channel(&s.ch, r.phases.phases()).unwrap();
        let direct = achievable_rate(&h, r.precoder.matrix(), &s.lb).unwrap();
        prop_assert!((direct - r.final_rate).abs() <= 1e-9 * r.final_rate.max(1.0));
    }
}
