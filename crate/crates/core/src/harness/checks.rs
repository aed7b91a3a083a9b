//! Self-check instruments behind the `check-gradients` and `audit` commands.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ScenarioConfig;
use super::run::run_trial;
use crate::channel::{mix64, Topology};
use crate::error::Result;
use crate::lipschitz::{empirical_lipschitz_ratio, chain_difference_gap, lipschitz_bound, random_feasible_precoder, ChainNorm};
use crate::numerics::random::{gaussian_matrix, gaussian_vector, unit_modulus_vector};
use crate::numerics::{ComplexMatrix, C64};
use crate::objective::{evaluate, objective_f, ChannelSet, LinkBudget, Phases};
use crate::optimizer::{jpr_mapg, jpr_pg, Algorithm, InitialPoint, OptimizerConfig};

/// Gradient error above which `check-gradients` fails.
pub const GRADIENT_TOLERANCE: f64 = 1e-5;

/// Sizes of a synthetic test instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceDims {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_ris: usize,
    pub n_panels: usize,
    pub n_s: usize,
}

impl InstanceDims {
    /// Random sizes within `n_tx <= 8, n_rx <= 4, n_ris <= 16, n_panels <= 3`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let n_tx = rng.random_range(1..=8);
        let n_rx = rng.random_range(1..=4);
        Self {
            n_tx,
            n_rx,
            n_ris: rng.random_range(1..=16),
            n_panels: rng.random_range(1..=3),
            n_s: rng.random_range(1..=n_tx.min(n_rx)),
        }
    }
}

/// Channel set with i.i.d. `CN(0, 1)` entries.
pub fn random_channels<R: Rng + ?Sized>(rng: &mut R, topology: Topology, d: InstanceDims) -> ChannelSet {
    let direct = gaussian_matrix(rng, d.n_rx, d.n_tx, 1.0);
    match topology {
        Topology::Parallel => {
            let panels = (0..d.n_panels)
                .map(|_| (gaussian_matrix(rng, d.n_ris, d.n_tx, 1.0), gaussian_matrix(rng, d.n_rx, d.n_ris, 1.0)))
                .collect();
            ChannelSet::parallel(direct, panels).expect("consistent by construction")
        }
        Topology::Multihop => {
            let mut hops = vec![gaussian_matrix(rng, d.n_ris, d.n_tx, 1.0)];
            for _ in 1..d.n_panels {
                hops.push(gaussian_matrix(rng, d.n_ris, d.n_ris, 1.0));
            }
            hops.push(gaussian_matrix(rng, d.n_rx, d.n_ris, 1.0));
            ChannelSet::multihop(direct, hops).expect("consistent by construction")
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientCheck {
    pub instances: usize,
    pub max_error_parallel: f64,
    pub max_error_multihop: f64,
}

impl GradientCheck {
    pub fn max_error(&self) -> f64 {
        self.max_error_parallel.max(self.max_error_multihop)
    }

    pub fn passed(&self) -> bool {
        self.max_error() < GRADIENT_TOLERANCE
    }
}

/// Compares `2 Re<grad, delta>` with a central difference of `f` along a
/// random direction `delta`, separately for the precoder and the phases.
/// The error of one comparison is `|fd - an| / max(|an|, ||grad|| ||delta||)`.
pub fn gradient_errors<R: Rng + ?Sized>(
    ch: &ChannelSet,
    phases: &Phases,
    f: &ComplexMatrix,
    lb: &LinkBudget,
    rng: &mut R,
) -> Result<f64> {
    let e = evaluate(ch, phases, f, lb)?;
    let h = 1e-5;
    let mut worst: f64 = 0.0;

    let df = gaussian_matrix(rng, f.rows(), f.cols(), 1.0);
    let df = df.scale(1.0 / df.frobenius_norm().max(f64::MIN_POSITIVE));
    let plus = objective_f(ch, phases, &f.add(&df.scale(h)), lb)?;
    let minus = objective_f(ch, phases, &f.sub(&df.scale(h)), lb)?;
    let fd = (plus - minus) / (2.0 * h);
    let an = 2.0 * e.grad_precoder.real_inner(&df);
    worst = worst.max(relative(fd, an, e.grad_precoder.frobenius_norm()));

    if !phases.is_empty() {
        let dv = gaussian_vector(rng, phases.len(), 1.0);
        let norm = crate::numerics::vec_norm(&dv).max(f64::MIN_POSITIVE);
        let dv: Vec<C64> = dv.iter().map(|z| z / norm).collect();
        let shifted = |s: f64| {
            Phases::new(
                phases.as_slice().iter().zip(&dv).map(|(p, d)| p + d * s).collect(),
                phases.panel_len(),
            )
        };
        let plus = objective_f(ch, &shifted(h)?, f, lb)?;
        let minus = objective_f(ch, &shifted(-h)?, f, lb)?;
        let fd = (plus - minus) / (2.0 * h);
        let an = 2.0 * crate::numerics::vec_real_inner(e.grad_phases.as_slice(), &dv);
        worst = worst.max(relative(fd, an, crate::numerics::vec_norm(e.grad_phases.as_slice())));
    }
    Ok(worst)
}

fn relative(fd: f64, an: f64, grad_norm: f64) -> f64 {
    let scale = an.abs().max(grad_norm);
    if scale == 0.0 {
        fd.abs()
    } else {
        (fd - an).abs() / scale
    }
}

/// Finite-difference gradient check over random instances of both topologies.
pub fn check_gradients(n_instances: usize, seed: u64) -> Result<GradientCheck> {
    let mut worst = [0.0f64; 2];
    for (k, topology) in [Topology::Parallel, Topology::Multihop].into_iter().enumerate() {
        for i in 0..n_instances {
            let mut rng = ChaCha8Rng::seed_from_u64(mix64(seed ^ k as u64, i as u64));
            let d = InstanceDims::random(&mut rng);
            let ch = random_channels(&mut rng, topology, d);
            let lb = LinkBudget::from_snr(10f64.powf(rng.random_range(-1.0..1.0)));
            let fill = rng.random_range(0.1..=1.0);
            let f = random_feasible_precoder(&mut rng, d.n_tx, d.n_s, fill);
            let phases = Phases::new(unit_modulus_vector(&mut rng, d.n_panels * d.n_ris, 1.0), d.n_ris)?;
            worst[k] = worst[k].max(gradient_errors(&ch, &phases, &f, &lb, &mut rng)?);
        }
    }
    Ok(GradientCheck {
        instances: n_instances,
        max_error_parallel: worst[0],
        max_error_multihop: worst[1],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditLine {
    pub property: String,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for AuditLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{mark} {}: {}", self.property, self.detail)
    }
}

/// Trials the audit runs on the configured scenario.
pub const AUDIT_TRIALS: u64 = 5;

/// Runs the property checks: Lipschitz ratio on random instances and on the
/// scenario, the chain-difference inequality, descent and residual decay.
pub fn audit(cfg: &ScenarioConfig) -> Result<Vec<AuditLine>> {
    let mut lines = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(mix64(cfg.master_seed, u64::MAX));

    for topology in [Topology::Parallel, Topology::Multihop] {
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let d = InstanceDims::random(&mut rng);
            let ch = random_channels(&mut rng, topology, d);
            let lb = LinkBudget::from_snr(1.0);
            let l = lipschitz_bound(&ch, &lb, d.n_s, 1.0)?.l;
            let ratio = empirical_lipschitz_ratio(&ch, &lb, d.n_s, 1.0, &mut rng, 50)?;
            worst = worst.max(ratio / l);
        }
        lines.push(AuditLine {
            property: format!("lipschitz bound ({topology:?}, random instances)"),
            passed: worst <= 1.0,
            detail: format!("max ratio / L = {worst:.3e}"),
        });
    }

    let mut violations = 0;
    for i in 0..200 {
        let n = 2 + i % 3;
        let dims: Vec<usize> = (0..=n).map(|_| rng.random_range(1..=4)).collect();
        let chain = |rng: &mut ChaCha8Rng| -> Vec<ComplexMatrix> {
            (0..n).map(|k| gaussian_matrix(rng, dims[k + 1], dims[k], 1.0)).collect()
        };
        let (c1, c2) = (chain(&mut rng), chain(&mut rng));
        for norm in [ChainNorm::Frobenius, ChainNorm::Spectral] {
            let (lhs, rhs) = chain_difference_gap(&c1, &c2, norm)?;
            if lhs > rhs * (1.0 + 1e-12) {
                violations += 1;
            }
        }
    }
    lines.push(AuditLine {
        property: "chain difference inequality".into(),
        passed: violations == 0,
        detail: format!("{violations} violations in 400 checks"),
    });

    let mut scene_ratio: f64 = 0.0;
    let mut descent_failures = 0;
    let mut decayed = 0;
    let mut runs = 0;
    let opt = OptimizerConfig { stop_tol: 0.0, ..cfg.optimizer.clone() };
    let mut scene = cfg.clone();
    scene.algorithms = vec![Algorithm::StaticRis];
    for t in 0..AUDIT_TRIALS {
        let outcome = run_trial(&scene, t);
        let Some(ch) = outcome.channels else { continue };
        let lb = cfg.budget()?;
        let bound = lipschitz_bound(&ch, &lb, cfg.streams, cfg.ris.amplitude)?;
        let ratio = empirical_lipschitz_ratio(&ch, &lb, cfg.streams, cfg.ris.amplitude, &mut rng, 20)?;
        if bound.l > 0.0 {
            scene_ratio = scene_ratio.max(ratio / bound.l);
        }
        let init = InitialPoint::static_mirror(&ch, cfg.streams, cfg.ris.amplitude)?;
        for run in [jpr_mapg(&ch, &lb, &opt, &init, bound.l), jpr_pg(&ch, &lb, &opt, &init, bound.l)] {
            runs += 1;
            match run {
                Ok(r) => {
                    if residual_decayed(&r.iterations, 1e-6) {
                        decayed += 1;
                    }
                }
                Err(_) => descent_failures += 1,
            }
        }
    }
    lines.push(AuditLine {
        property: "lipschitz bound (configured scenario)".into(),
        passed: scene_ratio <= 1.0,
        detail: format!("max ratio / L = {scene_ratio:.3e} over {AUDIT_TRIALS} trials"),
    });
    lines.push(AuditLine {
        property: "monotone descent".into(),
        passed: descent_failures == 0,
        detail: format!("{descent_failures} of {runs} runs violated descent"),
    });
    lines.push(AuditLine {
        property: "residual decay".into(),
        passed: runs > 0 && decayed * 100 >= runs * 95,
        detail: format!("{decayed} of {runs} runs reached 1e-6 of the initial residual"),
    });
    Ok(lines)
}

/// Whether the smallest squared residual fell below `ratio` times the first.
pub fn residual_decayed(iterations: &[crate::optimizer::IterationRecord], ratio: f64) -> bool {
    let Some(first) = iterations.first() else { return true };
    let r0 = first.residual_sq();
    if r0 == 0.0 {
        return true;
    }
    let min = iterations.iter().map(|r| r.residual_sq()).fold(f64::INFINITY, f64::min);
    min <= ratio * r0
}
