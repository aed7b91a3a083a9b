use std::f64::consts::LN_2;

use super::types::{ChannelSet, LinkBudget, Phases};
use crate::error::{Error, Result};
use crate::numerics::{hpd_inverse, logdet_hpd, ComplexMatrix, C64};

fn check_inputs(ch: &ChannelSet, phases: &Phases, f: Option<&ComplexMatrix>) -> Result<()> {
    if phases.n_panels() != ch.n_panels() {
        return Err(Error::DimensionMismatch(format!(
            "{} phase panels for {} channel panels",
            phases.n_panels(),
            ch.n_panels()
        )));
    }
    if ch.n_panels() > 0 && phases.panel_len() != ch.n_ris() {
        return Err(Error::DimensionMismatch(format!(
            "phase panels of length {} for RIS panels of {} elements",
            phases.panel_len(),
            ch.n_ris()
        )));
    }
    if let Some(f) = f {
        if f.rows() != ch.n_tx() {
            return Err(Error::DimensionMismatch(format!(
                "precoder has {} rows, transmitter has {} antennas",
                f.rows(),
                ch.n_tx()
            )));
        }
    }
    Ok(())
}

/// Materialized composite channel for the given RIS coefficients.
pub fn composite_channel(ch: &ChannelSet, phases: &Phases) -> Result<ComplexMatrix> {
    check_inputs(ch, phases, None)?;
    let mut h = ch.direct().clone();
    match ch {
        ChannelSet::Parallel { panels, .. } => {
            for (i, (src, dst)) in panels.iter().enumerate() {
                h.add_assign(&dst.scale_cols(phases.panel(i)).matmul(src));
            }
        }
        ChannelSet::MultiHop { hops, .. } => {
            if let Some((last, inner)) = hops.split_last() {
                // H_{N+1} * (Phi_N H_N) * ... * (Phi_1 H_1)
                let mut chain = inner[0].scale_rows(phases.panel(0));
                for (i, hop) in inner.iter().enumerate().skip(1) {
                    chain = hop.matmul(&chain).scale_rows(phases.panel(i));
                }
                h.add_assign(&last.matmul(&chain));
            }
        }
    }
    Ok(h)
}

/// Forward pass `H F`, keeping the per-panel source-side products.
///
/// For parallel panels the stored product is `H_Si F`; for multi-hop it is the
/// effective `Hbar_Si F = H_i Phi_{i-1} H_{i-1} ... Phi_1 H_1 F`.
fn forward(ch: &ChannelSet, phases: &Phases, f: &ComplexMatrix) -> (ComplexMatrix, Vec<ComplexMatrix>) {
    let mut hf = ch.direct().matmul(f);
    let mut source_side = Vec::with_capacity(ch.n_panels());
    match ch {
        ChannelSet::Parallel { panels, .. } => {
            for (i, (src, dst)) in panels.iter().enumerate() {
                let sf = src.matmul(f);
                hf.add_assign(&dst.matmul(&sf.scale_rows(phases.panel(i))));
                source_side.push(sf);
            }
        }
        ChannelSet::MultiHop { hops, .. } => {
            if let Some((last, inner)) = hops.split_last() {
                let mut s = inner[0].matmul(f);
                for (i, hop) in inner.iter().enumerate().skip(1) {
                    let next = hop.matmul(&s.scale_rows(phases.panel(i - 1)));
                    source_side.push(s);
                    s = next;
                }
                let n = inner.len();
                hf.add_assign(&last.matmul(&s.scale_rows(phases.panel(n - 1))));
                source_side.push(s);
            }
        }
    }
    (hf, source_side)
}

/// `H^H Y` without materializing `H`; also returns the per-panel
/// destination-side products (`H_iD^H Y` or `Hbar_iD^H Y`).
fn adjoint(ch: &ChannelSet, phases: &Phases, y: &ComplexMatrix) -> (ComplexMatrix, Vec<ComplexMatrix>) {
    let mut out = ch.direct().adjoint_matmul(y);
    let n = ch.n_panels();
    let mut dest_side = Vec::with_capacity(n);
    match ch {
        ChannelSet::Parallel { panels, .. } => {
            for (i, (src, dst)) in panels.iter().enumerate() {
                let g = dst.adjoint_matmul(y);
                let conj: Vec<C64> = phases.panel(i).iter().map(|z| z.conj()).collect();
                out.add_assign(&src.adjoint_matmul(&g.scale_rows(&conj)));
                dest_side.push(g);
            }
        }
        ChannelSet::MultiHop { hops, .. } => {
            if n > 0 {
                // G_N = H_{N+1}^H Y ; G_i = H_{i+1}^H conj(Phi_{i+1}) G_{i+1}
                let mut rev = Vec::with_capacity(n);
                let mut g = hops[n].adjoint_matmul(y);
                for i in (0..n).rev() {
                    let conj: Vec<C64> = phases.panel(i).iter().map(|z| z.conj()).collect();
                    let next = hops[i].adjoint_matmul(&g.scale_rows(&conj));
                    rev.push(g);
                    g = next;
                }
                out.add_assign(&g);
                rev.reverse();
                dest_side = rev;
            }
        }
    }
    (out, dest_side)
}

/// `H F` for the given configuration.
pub fn channel_times(ch: &ChannelSet, phases: &Phases, f: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_inputs(ch, phases, Some(f))?;
    Ok(forward(ch, phases, f).0)
}

/// `I + snr (HF)^H (HF)`
fn stream_gram(hf: &ComplexMatrix, snr: f64) -> ComplexMatrix {
    let mut m = hf.adjoint_matmul(hf).scale(snr);
    for i in 0..m.rows() {
        m[(i, i)] += 1.0;
    }
    m
}

fn neg_logdet_from_hf(hf: &ComplexMatrix, snr: f64) -> Result<f64> {
    Ok(-logdet_hpd(&stream_gram(hf, snr))?)
}

/// Achievable rate `log2 det(I + (rho/P_n) F^H H^H H F)` in bits/s/Hz.
pub fn achievable_rate(h: &ComplexMatrix, f: &ComplexMatrix, lb: &LinkBudget) -> Result<f64> {
    if h.cols() != f.rows() {
        return Err(Error::DimensionMismatch(format!(
            "channel has {} columns, precoder {} rows",
            h.cols(),
            f.rows()
        )));
    }
    let hf = h.matmul(f);
    Ok(logdet_hpd(&stream_gram(&hf, lb.snr()))? / LN_2)
}

/// Rate of a configuration without materializing the composite channel.
pub fn configuration_rate(
    ch: &ChannelSet,
    phases: &Phases,
    f: &ComplexMatrix,
    lb: &LinkBudget,
) -> Result<f64> {
    Ok(-objective_f(ch, phases, f, lb)? / LN_2)
}

/// Objective `f = -ln det(I + (rho/P_n) F^H H^H H F)`.
pub fn objective_f(ch: &ChannelSet, phases: &Phases, f: &ComplexMatrix, lb: &LinkBudget) -> Result<f64> {
    check_inputs(ch, phases, Some(f))?;
    let (hf, _) = forward(ch, phases, f);
    neg_logdet_from_hf(&hf, lb.snr())
}

/// Objective value and both Wirtinger gradients at one point.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub value: f64,
    /// `grad_{F*} f`, N_tx x N_s.
    pub grad_precoder: ComplexMatrix,
    /// `grad_{phi*} f` stacked in panel order.
    pub grad_phases: Phases,
}

/// Evaluates `f` and its gradients with respect to `F*` and every `phi_i*`.
///
/// Gradients are valid at arbitrary complex coefficients, not only on the
/// unit-modulus set.
pub fn evaluate(ch: &ChannelSet, phases: &Phases, f: &ComplexMatrix, lb: &LinkBudget) -> Result<Evaluation> {
    check_inputs(ch, phases, Some(f))?;
    let snr = lb.snr();
    let (hf, source_side) = forward(ch, phases, f);
    let m = stream_gram(&hf, snr);
    let value = -logdet_hpd(&m)?;
    let k = hpd_inverse(&m)?;
    let hfk = hf.matmul(&k);
    let (hh_hfk, dest_side) = adjoint(ch, phases, &hfk);
    let grad_precoder = hh_hfk.scale(-snr);

    let n_ris = phases.panel_len();
    let mut grad = Vec::with_capacity(phases.len());
    for (g, s) in dest_side.iter().zip(&source_side) {
        // diag(G S^H)[m] = sum_s G[m,s] conj(S[m,s])
        for row in 0..n_ris {
            let d: C64 = g.row(row).iter().zip(s.row(row)).map(|(a, b)| a * b.conj()).sum();
            grad.push(d * (-snr));
        }
    }
    Ok(Evaluation {
        value,
        grad_precoder,
        grad_phases: Phases::new(grad, n_ris)?,
    })
}

/// `grad_{F*} f = -(rho/P_n) H^H H F K`.
pub fn grad_f(ch: &ChannelSet, phases: &Phases, f: &ComplexMatrix, lb: &LinkBudget) -> Result<ComplexMatrix> {
    Ok(evaluate(ch, phases, f, lb)?.grad_precoder)
}

/// Gradient with respect to `phi_i*` for parallel panels.
pub fn grad_phi_parallel(
    ch: &ChannelSet,
    phases: &Phases,
    f: &ComplexMatrix,
    lb: &LinkBudget,
    panel: usize,
) -> Result<Vec<C64>> {
    if !matches!(ch, ChannelSet::Parallel { .. }) {
        return Err(Error::WrongTopology { expected: "parallel" });
    }
    panel_gradient(ch, phases, f, lb, panel)
}

/// Gradient with respect to `phi_i*` for a multi-hop chain.
pub fn grad_phi_multihop(
    ch: &ChannelSet,
    phases: &Phases,
    f: &ComplexMatrix,
    lb: &LinkBudget,
    panel: usize,
) -> Result<Vec<C64>> {
    if !matches!(ch, ChannelSet::MultiHop { .. }) {
        return Err(Error::WrongTopology { expected: "multihop" });
    }
    panel_gradient(ch, phases, f, lb, panel)
}

fn panel_gradient(
    ch: &ChannelSet,
    phases: &Phases,
    f: &ComplexMatrix,
    lb: &LinkBudget,
    panel: usize,
) -> Result<Vec<C64>> {
    if panel >= ch.n_panels() {
        return Err(Error::DimensionMismatch(format!(
            "panel index {panel} out of range for {} panels",
            ch.n_panels()
        )));
    }
    Ok(evaluate(ch, phases, f, lb)?.grad_phases.panel(panel).to_vec())
}

/// Precoder gradient and the concatenated phase gradient.
pub fn grad_concat(
    ch: &ChannelSet,
    phases: &Phases,
    f: &ComplexMatrix,
    lb: &LinkBudget,
) -> Result<(ComplexMatrix, Phases)> {
    let e = evaluate(ch, phases, f, lb)?;
    Ok((e.grad_precoder, e.grad_phases))
}
