use std::time::Instant;

use super::mapg::{run_loop, Algorithm, InitialPoint, LoopKind, OptimizerConfig, RunReport};
use super::prox::quantize_phases;
use crate::error::{Error, Result};
use crate::numerics::{to_nalgebra, vec_norm, ComplexMatrix, C64};
use crate::objective::{achievable_rate, configuration_rate, ChannelSet, LinkBudget, PhasePattern, Phases, Precoder};

/// Singular values below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-12;

/// Eigenbeamforming precoder: the top `n_s` right singular vectors of `h`
/// with unit norm each, so `||F||_F^2 = n_s`.
///
/// When `h` has fewer than `n_s` usable directions the remaining columns are
/// an orthonormal complement and a warning is logged.
pub fn svd_precoder(h: &ComplexMatrix, n_s: usize) -> Result<Precoder> {
    let n_tx = h.cols();
    if n_s == 0 || n_s > n_tx {
        return Err(Error::DimensionMismatch(format!(
            "{n_s} streams on {n_tx} transmit antennas"
        )));
    }
    let svd = to_nalgebra(h).svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors were requested");
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]).then(i.cmp(&j)));
    let top = sv.iter().copied().fold(0.0, f64::max);
    let usable = order.iter().filter(|&&i| sv[i] > RANK_TOL * top && top > 0.0).count();
    if usable < n_s {
        log::warn!("channel has rank {usable} below {n_s} streams; padding the precoder");
    }

    let mut cols: Vec<Vec<C64>> = order
        .iter()
        .take(usable.min(n_s))
        .map(|&i| (0..n_tx).map(|r| v_t[(i, r)].conj()).collect())
        .collect();
    // orthonormal completion from the standard basis
    let mut e = 0;
    while cols.len() < n_s {
        let mut v = vec![C64::new(0.0, 0.0); n_tx];
        v[e] = C64::new(1.0, 0.0);
        e += 1;
        for _ in 0..2 {
            for c in &cols {
                let proj: C64 = c.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= ci * proj;
                }
            }
        }
        let norm = vec_norm(&v);
        if norm > 1e-6 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    let f = ComplexMatrix::from_fn(n_tx, n_s, |r, c| cols[c][r]);
    Ok(Precoder::new_unchecked(f))
}

fn single_point(
    algorithm: Algorithm,
    precoder: Precoder,
    phases: PhasePattern,
    rate: f64,
    quantized_rate: Option<f64>,
    started: Instant,
) -> RunReport {
    let f = -rate * std::f64::consts::LN_2;
    RunReport {
        algorithm,
        objective: vec![f],
        rate: vec![rate],
        iterations: Vec::new(),
        precoder,
        phases,
        lipschitz: 0.0,
        alpha: 0.0,
        initial_rate: rate,
        final_rate: rate,
        quantized_rate,
        converged: true,
        wall_time: started.elapsed(),
    }
}

/// Evaluates the static mirror with its SVD precoder.
pub fn static_ris(
    ch: &ChannelSet,
    lb: &LinkBudget,
    init: &InitialPoint,
    cfg: &OptimizerConfig,
) -> Result<RunReport> {
    let started = Instant::now();
    let rate = configuration_rate(ch, init.phases.phases(), init.precoder.matrix(), lb)?;
    let a = init.phases.amplitude();
    let quantized = match cfg.quant_bits {
        Some(bits) => {
            let q = quantize_phases(init.phases.phases(), bits, a);
            Some(configuration_rate(ch, q.phases(), init.precoder.matrix(), lb)?)
        }
        None => None,
    };
    Ok(single_point(
        Algorithm::StaticRis,
        init.precoder.clone(),
        init.phases.clone(),
        rate,
        quantized,
        started,
    ))
}

/// Rate over the direct link alone, with the SVD precoder of `H_SD`.
pub fn no_ris(ch: &ChannelSet, lb: &LinkBudget, n_s: usize, cfg: &OptimizerConfig) -> Result<RunReport> {
    let started = Instant::now();
    let h = ch.direct();
    let precoder = svd_precoder(h, n_s)?;
    let rate = achievable_rate(h, precoder.matrix(), lb)?;
    let phases = PhasePattern::new_unchecked(Phases::new(Vec::new(), 0)?, 1.0);
    let quantized = cfg.quant_bits.map(|_| rate);
    Ok(single_point(Algorithm::NoRis, precoder, phases, rate, quantized, started))
}

/// Projected gradient on the phases only; the precoder stays at its initial
/// value bit for bit.
pub fn ris_only(
    ch: &ChannelSet,
    lb: &LinkBudget,
    cfg: &OptimizerConfig,
    init: &InitialPoint,
    lipschitz: f64,
) -> Result<RunReport> {
    let kind = LoopKind { accelerate: false, freeze_precoder: true };
    run_loop(Algorithm::RisOnly, ch, lb, cfg, init, lipschitz, kind)
}
