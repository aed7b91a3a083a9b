use serde::{Deserialize, Serialize};

use super::config::{ScenarioConfig, SweepParam};
use crate::channel::{generate_scenario_channels, trial_rng};
use crate::error::{Error, Result};
use crate::lipschitz::lipschitz_bound;
use crate::objective::ChannelSet;
use crate::optimizer::{jpr_mapg, jpr_pg, no_ris, ris_only, static_ris, Algorithm, InitialPoint, RunReport};

/// Environment variable that sets the worker count.
pub const WORKERS_ENV: &str = "RIS_OPT_WORKERS";

/// How trials are scheduled. Output is identical either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// One trial after another on the calling thread.
    Sequential,
    /// Trials spread over a rayon pool; `None` reads [`WORKERS_ENV`] and then
    /// falls back to the rayon default. Sequential when the `parallel`
    /// feature is off.
    #[default]
    Parallel,
    /// Parallel with an explicit worker count.
    Workers(usize),
}

/// One CSV line: a (sweep value, trial, algorithm) outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep_param: String,
    pub sweep_value: Option<f64>,
    pub trial: u64,
    pub algorithm: String,
    pub rate_bps_hz: Option<f64>,
    pub rate_quantized_bps_hz: Option<f64>,
    pub iterations: Option<usize>,
    pub lipschitz_l: Option<f64>,
    pub alpha: Option<f64>,
    pub wall_ms: Option<f64>,
    pub status: String,
}

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Row-level options that do not change the numbers.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub execution: Execution,
    /// Fill `wall_ms`. Off by default so repeated runs are byte-identical.
    pub timing: bool,
}

/// Everything a trial produced, for callers that need more than the rows.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trial: u64,
    pub channels: Option<ChannelSet>,
    pub reports: Vec<(Algorithm, Result<RunReport>)>,
}

/// Generates the channel of `trial` and runs every configured algorithm on it.
/// The Lipschitz constant is computed once and shared.
pub fn run_trial(cfg: &ScenarioConfig, trial: u64) -> TrialOutcome {
    let mut rng = trial_rng(cfg.master_seed, trial);
    let channels = cfg
        .to_scenario()
        .and_then(|s| generate_scenario_channels(&s, &mut rng));
    let ch = match channels {
        Ok(ch) => ch,
        Err(e) => {
            let reports = cfg.algorithms.iter().map(|&a| (a, Err(e.clone()))).collect();
            return TrialOutcome { trial, channels: None, reports };
        }
    };
    let reports = run_algorithms(cfg, &ch);
    TrialOutcome { trial, channels: Some(ch), reports }
}

fn run_algorithms(cfg: &ScenarioConfig, ch: &ChannelSet) -> Vec<(Algorithm, Result<RunReport>)> {
    let n_s = cfg.streams;
    let a = cfg.ris.amplitude;
    let opt = &cfg.optimizer;
    let setup = || -> Result<(crate::objective::LinkBudget, InitialPoint)> {
        Ok((cfg.budget()?, InitialPoint::static_mirror(ch, n_s, a)?))
    };
    let setup = setup();
    let needs_l = cfg.algorithms.iter().any(|a| a.is_iterative());
    let l = match (&setup, needs_l) {
        (Ok((lb, _)), true) => Some(lipschitz_bound(ch, lb, n_s, a).map(|b| b.l)),
        _ => None,
    };
    cfg.algorithms
        .iter()
        .map(|&alg| {
            let report = setup.clone().and_then(|(lb, init)| match alg {
                Algorithm::NoRis => no_ris(ch, &lb, n_s, opt),
                Algorithm::StaticRis => static_ris(ch, &lb, &init, opt),
                iterative => {
                    let l = l.clone().expect("computed for iterative algorithms")?;
                    match iterative {
                        Algorithm::JprMapg => jpr_mapg(ch, &lb, opt, &init, l),
                        Algorithm::JprPg => jpr_pg(ch, &lb, opt, &init, l),
                        _ => ris_only(ch, &lb, opt, &init, l),
                    }
                }
            });
            (alg, report)
        })
        .collect()
}

/// Maps `f` over `0..n` keeping index order, on the requested schedule.
pub fn map_indexed<T, F>(n: u64, execution: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match execution {
        Execution::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel | Execution::Workers(_) => {
            use rayon::prelude::*;
            let workers = match execution {
                Execution::Workers(w) => Some(w),
                _ => std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()),
            };
            match workers.filter(|&w| w > 0) {
                Some(w) => match rayon::ThreadPoolBuilder::new().num_threads(w).build() {
                    Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
                    Err(e) => {
                        log::warn!("could not build a pool of {w} workers ({e}); running on the global pool");
                        (0..n).into_par_iter().map(f).collect()
                    }
                },
                None => (0..n).into_par_iter().map(f).collect(),
            }
        }
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel | Execution::Workers(_) => (0..n).map(f).collect(),
    }
}

fn rows_for(
    outcome: &TrialOutcome,
    sweep: Option<(SweepParam, f64)>,
    timing: bool,
) -> Vec<ResultRow> {
    let (sweep_param, sweep_value) = match sweep {
        Some((p, v)) => (p.as_str().to_string(), Some(v)),
        None => (String::new(), None),
    };
    outcome
        .reports
        .iter()
        .map(|(alg, report)| match report {
            Ok(r) => ResultRow {
                sweep_param: sweep_param.clone(),
                sweep_value,
                trial: outcome.trial,
                algorithm: alg.as_str().to_string(),
                rate_bps_hz: Some(r.final_rate),
                rate_quantized_bps_hz: r.quantized_rate,
                iterations: Some(r.n_iterations()),
                lipschitz_l: alg.is_iterative().then_some(r.lipschitz),
                alpha: alg.is_iterative().then_some(r.alpha),
                wall_ms: timing.then(|| r.wall_time.as_secs_f64() * 1e3),
                status: "ok".to_string(),
            },
            Err(e) => ResultRow {
                sweep_param: sweep_param.clone(),
                sweep_value,
                trial: outcome.trial,
                algorithm: alg.as_str().to_string(),
                rate_bps_hz: None,
                rate_quantized_bps_hz: None,
                iterations: None,
                lipschitz_l: None,
                alpha: None,
                wall_ms: None,
                status: format!("error: {e}"),
            },
        })
        .collect()
}

/// All trials of one configuration, rows ordered by (trial, algorithm).
pub fn run_monte_carlo(cfg: &ScenarioConfig, opts: RunOptions) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let outcomes = map_indexed(cfg.trials as u64, opts.execution, |t| run_trial(cfg, t));
    Ok(outcomes.iter().flat_map(|o| rows_for(o, None, opts.timing)).collect())
}

/// Runs the configuration once per sweep value.
///
/// Trial `t` uses the same random stream for every value, so differences
/// between values are not masked by fresh channel draws.
pub fn sweep(cfg: &ScenarioConfig, param: SweepParam, values: &[f64], opts: RunOptions) -> Result<Vec<ResultRow>> {
    if values.is_empty() {
        return Err(Error::config("sweep.values", "list is empty"));
    }
    let configs = values
        .iter()
        .map(|&v| cfg.clone().with_sweep_value(param, v).and_then(|c| c.validate().map(|_| c)))
        .collect::<Result<Vec<_>>>()?;
    let trials = cfg.trials as u64;
    let outcomes = map_indexed(trials * values.len() as u64, opts.execution, |k| {
        let (vi, t) = ((k / trials) as usize, k % trials);
        run_trial(&configs[vi], t)
    });
    Ok(outcomes
        .iter()
        .enumerate()
        .flat_map(|(k, o)| rows_for(o, Some((param, values[k / cfg.trials])), opts.timing))
        .collect())
}

/// Runs the configured sweep, or a single Monte Carlo pass when there is none.
pub fn run_configured(cfg: &ScenarioConfig, opts: RunOptions) -> Result<Vec<ResultRow>> {
    match &cfg.sweep {
        Some(s) => {
            let mut base = cfg.clone();
            base.sweep = None;
            sweep(&base, s.param, &s.values, opts)
        }
        None => run_monte_carlo(cfg, opts),
    }
}
