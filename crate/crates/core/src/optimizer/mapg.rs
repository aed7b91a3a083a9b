use serde::{Deserialize, Serialize};
use std::str::FromStr;
use std::time::{Duration, Instant};

use super::prox::{project_phases, prox_precoder, quantize_phases};
use crate::error::{Error, Result};
use crate::lipschitz::lipschitz_bound;
use crate::numerics::{vec_norm, vec_sub, ComplexMatrix, C64};
use crate::objective::{evaluate, ChannelSet, Evaluation, LinkBudget, PhasePattern, Phases, Precoder};

/// Slack on every descent assertion.
pub const DESCENT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    JprMapg,
    JprPg,
    RisOnly,
    StaticRis,
    NoRis,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::JprMapg,
        Algorithm::JprPg,
        Algorithm::RisOnly,
        Algorithm::StaticRis,
        Algorithm::NoRis,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::JprMapg => "jpr_mapg",
            Algorithm::JprPg => "jpr_pg",
            Algorithm::RisOnly => "ris_only",
            Algorithm::StaticRis => "static_ris",
            Algorithm::NoRis => "no_ris",
        }
    }

    /// Whether the algorithm iterates (and so needs a Lipschitz constant).
    pub fn is_iterative(self) -> bool {
        matches!(self, Algorithm::JprMapg | Algorithm::JprPg | Algorithm::RisOnly)
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s.trim())
            .ok_or_else(|| Error::config("algorithms", format!("unknown algorithm '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    /// `alpha = step_scale / L`.
    pub step_scale: f64,
    /// Stop when `|f_new - f_old| < stop_tol * max(|f_old|, 1)`. Zero disables.
    pub stop_tol: f64,
    /// Phase resolution applied after convergence; `None` keeps continuous phases.
    pub quant_bits: Option<u32>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            step_scale: 0.99,
            stop_tol: 1e-8,
            quant_bits: None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::config("optimizer.max_iterations", "must be at least 1"));
        }
        if !(self.step_scale > 0.0 && self.step_scale < 1.0) {
            return Err(Error::config("optimizer.step_scale", "must lie in (0, 1)"));
        }
        if !(self.stop_tol >= 0.0) {
            return Err(Error::config("optimizer.stop_tol", "must be nonnegative"));
        }
        if let Some(b) = self.quant_bits {
            if !(1..=31).contains(&b) {
                return Err(Error::config("optimizer.quant_bits", "must lie in 1..=31"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Accelerated,
    Monitored,
}

/// One iteration of the solver.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    /// `f(W, z)`; absent without extrapolation.
    pub accelerated_objective: Option<f64>,
    /// `f(U, v)`.
    pub monitored_objective: f64,
    pub branch: Branch,
    /// `||U - F||_F` against the iterate the step started from.
    pub residual_precoder: f64,
    /// `||v - phi||_2`.
    pub residual_phases: f64,
}

impl IterationRecord {
    pub fn residual_sq(&self) -> f64 {
        self.residual_precoder.powi(2) + self.residual_phases.powi(2)
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub algorithm: Algorithm,
    /// `f` at the start and after every iteration.
    pub objective: Vec<f64>,
    /// Rate in bits/s/Hz matching `objective`.
    pub rate: Vec<f64>,
    pub iterations: Vec<IterationRecord>,
    pub precoder: Precoder,
    pub phases: PhasePattern,
    pub lipschitz: f64,
    pub alpha: f64,
    pub initial_rate: f64,
    pub final_rate: f64,
    pub quantized_rate: Option<f64>,
    pub converged: bool,
    pub wall_time: Duration,
}

impl RunReport {
    pub fn n_iterations(&self) -> usize {
        self.iterations.len()
    }
}

/// Starting point of every iterative method.
#[derive(Debug, Clone)]
pub struct InitialPoint {
    pub precoder: Precoder,
    pub phases: PhasePattern,
}

impl InitialPoint {
    /// Static mirror `phi = a 1` with the SVD precoder of the resulting channel.
    pub fn static_mirror(ch: &ChannelSet, n_s: usize, a: f64) -> Result<Self> {
        let phases = PhasePattern::uniform(ch.n_panels(), ch.n_ris(), a);
        let h = crate::objective::composite_channel(ch, phases.phases())?;
        Ok(Self {
            precoder: super::baselines::svd_precoder(&h, n_s)?,
            phases,
        })
    }
}

fn rate_of(f: f64) -> f64 {
    -f / std::f64::consts::LN_2
}

/// Knobs of the shared proximal gradient loop.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LoopKind {
    pub accelerate: bool,
    pub freeze_precoder: bool,
}

struct Point {
    f: ComplexMatrix,
    phi: Phases,
    eval: Evaluation,
}

/// Projected gradient step from an evaluated point.
fn step(
    f: &ComplexMatrix,
    phi: &Phases,
    eval: &Evaluation,
    alpha: f64,
    n_s: usize,
    a: f64,
    freeze: bool,
) -> (ComplexMatrix, Phases) {
    let new_f = if freeze {
        f.clone()
    } else {
        let mut x = f.clone();
        x.axpy(C64::new(-alpha, 0.0), &eval.grad_precoder);
        prox_precoder(&x, n_s).into_matrix()
    };
    let moved = phi.zip_map(&eval.grad_phases, |p, g| p - g * alpha);
    (new_f, project_phases(&moved, a))
}

fn extrapolate(cur: &[C64], acc: &[C64], prev: &[C64], c1: f64, c2: f64) -> Vec<C64> {
    cur.iter()
        .zip(acc)
        .zip(prev)
        .map(|((x, w), p)| x + (w - x) * c1 + (x - p) * c2)
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn run_loop(
    algorithm: Algorithm,
    ch: &ChannelSet,
    lb: &LinkBudget,
    cfg: &OptimizerConfig,
    init: &InitialPoint,
    lipschitz: f64,
    kind: LoopKind,
) -> Result<RunReport> {
    cfg.validate()?;
    let started = Instant::now();
    let n_s = init.precoder.n_streams();
    let a = init.phases.amplitude();
    let alpha = if lipschitz > 0.0 { cfg.step_scale / lipschitz } else { 0.0 };
    let n_ris = init.phases.phases().panel_len();

    let f0 = init.precoder.matrix().clone();
    let phi0 = init.phases.phases().clone();
    let eval0 = evaluate(ch, &phi0, &f0, lb)?;
    let mut objective = vec![eval0.value];
    let mut cur = Point { f: f0.clone(), phi: phi0.clone(), eval: eval0 };
    // F^(q-1) and the accelerated candidate W^(q); both start at the init
    let mut prev_f = f0.clone();
    let mut prev_phi = phi0.clone();
    let mut acc_f = f0;
    let mut acc_phi = phi0;
    let (mut t_prev, mut t_cur) = (0.0f64, 1.0f64);
    let mut iterations = Vec::new();
    let mut converged = false;

    for q in 1..=cfg.max_iterations {
        let f_old = cur.eval.value;

        let accelerated = if kind.accelerate {
            let c1 = t_prev / t_cur;
            let c2 = (t_prev - 1.0) / t_cur;
            let p = ComplexMatrix::new(
                cur.f.rows(),
                cur.f.cols(),
                extrapolate(cur.f.as_slice(), acc_f.as_slice(), prev_f.as_slice(), c1, c2),
            )?;
            let y = Phases::new(
                extrapolate(cur.phi.as_slice(), acc_phi.as_slice(), prev_phi.as_slice(), c1, c2),
                n_ris,
            )?;
            let ey = evaluate(ch, &y, &p, lb)?;
            let (w, z) = step(&p, &y, &ey, alpha, n_s, a, kind.freeze_precoder);
            let ew = evaluate(ch, &z, &w, lb)?;
            Some(Point { f: w, phi: z, eval: ew })
        } else {
            None
        };

        let (u, v) = step(&cur.f, &cur.phi, &cur.eval, alpha, n_s, a, kind.freeze_precoder);
        let eu = evaluate(ch, &v, &u, lb)?;
        if eu.value > f_old + DESCENT_SLACK {
            return Err(Error::NonmonotoneDetected { iteration: q, before: f_old, after: eu.value });
        }
        let residual_precoder = u.sub(&cur.f).frobenius_norm();
        let residual_phases = vec_norm(&vec_sub(v.as_slice(), cur.phi.as_slice()));
        let monitored = Point { f: u, phi: v, eval: eu };

        let accelerated_objective = accelerated.as_ref().map(|p| p.eval.value);
        let monitored_objective = monitored.eval.value;
        let (branch, next) = match accelerated {
            Some(w) if w.eval.value <= monitored_objective => {
                acc_f = w.f.clone();
                acc_phi = w.phi.clone();
                (Branch::Accelerated, w)
            }
            Some(w) => {
                acc_f = w.f;
                acc_phi = w.phi;
                (Branch::Monitored, monitored)
            }
            None => (Branch::Monitored, monitored),
        };
        if next.eval.value > f_old + DESCENT_SLACK {
            return Err(Error::NonmonotoneDetected { iteration: q, before: f_old, after: next.eval.value });
        }

        prev_f = std::mem::replace(&mut cur.f, next.f);
        prev_phi = std::mem::replace(&mut cur.phi, next.phi);
        cur.eval = next.eval;
        let t_next = ((4.0 * t_cur * t_cur + 1.0).sqrt() + 1.0) / 2.0;
        t_prev = t_cur;
        t_cur = t_next;

        objective.push(cur.eval.value);
        iterations.push(IterationRecord {
            accelerated_objective,
            monitored_objective,
            branch,
            residual_precoder,
            residual_phases,
        });

        if cfg.stop_tol > 0.0 && (cur.eval.value - f_old).abs() < cfg.stop_tol * f_old.abs().max(1.0) {
            converged = true;
            break;
        }
    }

    let precoder = Precoder::new_unchecked(cur.f);
    let phases = PhasePattern::new_unchecked(cur.phi, a);
    let quantized_rate = match cfg.quant_bits {
        Some(bits) if phases.phases().n_panels() > 0 => {
            let qp = quantize_phases(phases.phases(), bits, a);
            Some(crate::objective::configuration_rate(ch, qp.phases(), precoder.matrix(), lb)?)
        }
        Some(_) => Some(rate_of(cur.eval.value)),
        None => None,
    };
    let rate = objective.iter().map(|&f| rate_of(f)).collect::<Vec<_>>();
    Ok(RunReport {
        algorithm,
        initial_rate: rate[0],
        final_rate: *rate.last().expect("trajectory starts with the initial value"),
        objective,
        rate,
        iterations,
        precoder,
        phases,
        lipschitz,
        alpha,
        quantized_rate,
        converged,
        wall_time: started.elapsed(),
    })
}

/// Sequence `t_1 = 1, t_{q+1} = (sqrt(4 t_q^2 + 1) + 1) / 2`, returned from `t_0 = 0`.
pub fn momentum_sequence(len: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(len);
    if len > 0 {
        t.push(0.0);
    }
    if len > 1 {
        t.push(1.0);
    }
    while t.len() < len {
        let last: f64 = t[t.len() - 1];
        t.push(((4.0 * last * last + 1.0).sqrt() + 1.0) / 2.0);
    }
    t
}

/// Joint precoder and phase optimization with extrapolation and monitoring.
pub fn jpr_mapg(
    ch: &ChannelSet,
    lb: &LinkBudget,
    cfg: &OptimizerConfig,
    init: &InitialPoint,
    lipschitz: f64,
) -> Result<RunReport> {
    let kind = LoopKind { accelerate: true, freeze_precoder: false };
    run_loop(Algorithm::JprMapg, ch, lb, cfg, init, lipschitz, kind)
}

/// Plain proximal gradient: the monitored step only.
pub fn jpr_pg(
    ch: &ChannelSet,
    lb: &LinkBudget,
    cfg: &OptimizerConfig,
    init: &InitialPoint,
    lipschitz: f64,
) -> Result<RunReport> {
    let kind = LoopKind { accelerate: false, freeze_precoder: false };
    run_loop(Algorithm::JprPg, ch, lb, cfg, init, lipschitz, kind)
}

/// Runs one algorithm from the static-mirror start, computing `L` if needed.
pub fn run_algorithm(
    algorithm: Algorithm,
    ch: &ChannelSet,
    lb: &LinkBudget,
    cfg: &OptimizerConfig,
    n_s: usize,
    a: f64,
) -> Result<RunReport> {
    use super::baselines::{no_ris, ris_only, static_ris};
    if algorithm == Algorithm::NoRis {
        return no_ris(ch, lb, n_s, cfg);
    }
    let init = InitialPoint::static_mirror(ch, n_s, a)?;
    if algorithm == Algorithm::StaticRis {
        return static_ris(ch, lb, &init, cfg);
    }
    let l = lipschitz_bound(ch, lb, n_s, a)?.l;
    match algorithm {
        Algorithm::JprMapg => jpr_mapg(ch, lb, cfg, &init, l),
        Algorithm::JprPg => jpr_pg(ch, lb, cfg, &init, l),
        Algorithm::RisOnly => ris_only(ch, lb, cfg, &init, l),
        Algorithm::StaticRis | Algorithm::NoRis => unreachable!("handled above"),
    }
}
