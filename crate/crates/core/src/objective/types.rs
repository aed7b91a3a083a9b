use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{vec_norm_sq, ComplexMatrix, C64};

/// Feasibility slack on `||F||_F^2 <= N_s`.
pub const PRECODER_SLACK: f64 = 1e-9;

/// Slack on `| |phi_m| - a |`.
pub const MODULUS_SLACK: f64 = 1e-12;

/// Transmit power per stream and receiver noise power, both in watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub rho: f64,
    pub noise_power: f64,
}

impl LinkBudget {
    pub fn new(rho: f64, noise_power: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::config("rho", format!("must be positive, got {rho}")));
        }
        if !(noise_power > 0.0 && noise_power.is_finite()) {
            return Err(Error::config(
                "noise_power",
                format!("must be positive, got {noise_power}"),
            ));
        }
        Ok(Self { rho, noise_power })
    }

    /// Budget with `rho / P_n = snr`.
    pub fn from_snr(snr: f64) -> Self {
        Self {
            rho: snr,
            noise_power: 1.0,
        }
    }

    #[inline]
    pub fn snr(&self) -> f64 {
        self.rho / self.noise_power
    }
}

/// Channel matrices for either RIS arrangement.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSet {
    /// Panels reflect in parallel: `H = H_SD + sum_i H_iD diag(phi_i) H_Si`.
    Parallel {
        direct: ComplexMatrix,
        /// `(H_Si, H_iD)` per panel.
        panels: Vec<(ComplexMatrix, ComplexMatrix)>,
    },
    /// Panels reflect in sequence: `H = H_SD + H_{N+1} Phi_N H_N ... Phi_1 H_1`.
    MultiHop {
        direct: ComplexMatrix,
        /// `H_1 .. H_{N+1}`.
        hops: Vec<ComplexMatrix>,
    },
}

impl ChannelSet {
    pub fn parallel(
        direct: ComplexMatrix,
        panels: Vec<(ComplexMatrix, ComplexMatrix)>,
    ) -> Result<Self> {
        let ch = ChannelSet::Parallel { direct, panels };
        ch.validate()?;
        Ok(ch)
    }

    pub fn multihop(direct: ComplexMatrix, hops: Vec<ComplexMatrix>) -> Result<Self> {
        let ch = ChannelSet::MultiHop { direct, hops };
        ch.validate()?;
        Ok(ch)
    }

    pub fn direct(&self) -> &ComplexMatrix {
        match self {
            ChannelSet::Parallel { direct, .. } | ChannelSet::MultiHop { direct, .. } => direct,
        }
    }

    pub fn n_tx(&self) -> usize {
        self.direct().cols()
    }

    pub fn n_rx(&self) -> usize {
        self.direct().rows()
    }

    pub fn n_panels(&self) -> usize {
        match self {
            ChannelSet::Parallel { panels, .. } => panels.len(),
            ChannelSet::MultiHop { hops, .. } => hops.len().saturating_sub(1),
        }
    }

    /// Elements per panel (0 when there are no panels).
    pub fn n_ris(&self) -> usize {
        match self {
            ChannelSet::Parallel { panels, .. } => panels.first().map_or(0, |(s, _)| s.rows()),
            ChannelSet::MultiHop { hops, .. } => {
                if hops.len() < 2 {
                    0
                } else {
                    hops[0].rows()
                }
            }
        }
    }

    pub fn topology_name(&self) -> &'static str {
        match self {
            ChannelSet::Parallel { .. } => "parallel",
            ChannelSet::MultiHop { .. } => "multihop",
        }
    }

    /// Checks that every product in the composite channel is well formed.
    pub fn validate(&self) -> Result<()> {
        let (n_rx, n_tx) = self.direct().shape();
        let mismatch = |msg: String| Err(Error::DimensionMismatch(msg));
        match self {
            ChannelSet::Parallel { panels, .. } => {
                let n_ris = self.n_ris();
                for (i, (s, d)) in panels.iter().enumerate() {
                    if s.shape() != (n_ris, n_tx) {
                        return mismatch(format!(
                            "panel {i}: H_Si is {:?}, expected ({n_ris}, {n_tx})",
                            s.shape()
                        ));
                    }
                    if d.shape() != (n_rx, n_ris) {
                        return mismatch(format!(
                            "panel {i}: H_iD is {:?}, expected ({n_rx}, {n_ris})",
                            d.shape()
                        ));
                    }
                }
            }
            ChannelSet::MultiHop { hops, .. } => {
                if hops.is_empty() {
                    return Ok(());
                }
                if hops.len() == 1 {
                    return mismatch("multihop needs at least two hop matrices".into());
                }
                let n_ris = self.n_ris();
                let last = hops.len() - 1;
                for (i, h) in hops.iter().enumerate() {
                    let expected = if i == 0 {
                        (n_ris, n_tx)
                    } else if i == last {
                        (n_rx, n_ris)
                    } else {
                        (n_ris, n_ris)
                    };
                    if h.shape() != expected {
                        return mismatch(format!(
                            "hop {}: {:?}, expected {expected:?}",
                            i + 1,
                            h.shape()
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Every matrix multiplied by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        match self {
            ChannelSet::Parallel { direct, panels } => ChannelSet::Parallel {
                direct: direct.scale(t),
                panels: panels.iter().map(|(s, d)| (s.scale(t), d.scale(t))).collect(),
            },
            ChannelSet::MultiHop { direct, hops } => ChannelSet::MultiHop {
                direct: direct.scale(t),
                hops: hops.iter().map(|h| h.scale(t)).collect(),
            },
        }
    }
}

/// Concatenated RIS coefficient vector `[phi_1; ...; phi_N]`.
///
/// Entries are arbitrary complex numbers; the unit-modulus set is enforced by
/// the optimizer's projection, not by this type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phases {
    data: Vec<C64>,
    panel_len: usize,
}

impl Phases {
    pub fn new(data: Vec<C64>, panel_len: usize) -> Result<Self> {
        if panel_len == 0 && !data.is_empty() {
            return Err(Error::DimensionMismatch("panel length 0 with nonempty data".into()));
        }
        if panel_len > 0 && data.len() % panel_len != 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients do not split into panels of {panel_len}",
                data.len()
            )));
        }
        Ok(Self { data, panel_len })
    }

    pub fn from_panels(panels: &[Vec<C64>]) -> Result<Self> {
        let panel_len = panels.first().map_or(0, Vec::len);
        if panels.iter().any(|p| p.len() != panel_len) {
            return Err(Error::DimensionMismatch("panels of unequal length".into()));
        }
        Ok(Self {
            data: panels.concat(),
            panel_len,
        })
    }

    /// `a * 1` for every element of every panel (the static mirror).
    pub fn uniform(n_panels: usize, panel_len: usize, amplitude: f64) -> Self {
        Self {
            data: vec![C64::new(amplitude, 0.0); n_panels * panel_len],
            panel_len,
        }
    }

    pub fn n_panels(&self) -> usize {
        if self.panel_len == 0 {
            0
        } else {
            self.data.len() / self.panel_len
        }
    }

    pub fn panel_len(&self) -> usize {
        self.panel_len
    }

    pub fn panel(&self, i: usize) -> &[C64] {
        &self.data[i * self.panel_len..(i + 1) * self.panel_len]
    }

    pub fn panel_mut(&mut self, i: usize) -> &mut [C64] {
        &mut self.data[i * self.panel_len..(i + 1) * self.panel_len]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        vec_norm_sq(&self.data)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            data: self.data.iter().map(|&z| f(z)).collect(),
            panel_len: self.panel_len,
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(self.data.len(), other.data.len());
        Self {
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
            panel_len: self.panel_len,
        }
    }

    /// Largest deviation `| |phi_m| - a |`.
    pub fn modulus_defect(&self, amplitude: f64) -> f64 {
        self.data
            .iter()
            .map(|z| (z.norm() - amplitude).abs())
            .fold(0.0, f64::max)
    }
}

/// Transmit precoder `F` (N_tx x N_s) inside the Frobenius ball of radius `sqrt(N_s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder(ComplexMatrix);

impl Precoder {
    pub fn new(f: ComplexMatrix) -> Result<Self> {
        let n_s = f.cols() as f64;
        let power = f.frobenius_norm_sq();
        if power > n_s + PRECODER_SLACK {
            return Err(Error::config(
                "precoder",
                format!("||F||_F^2 = {power} exceeds N_s = {n_s}"),
            ));
        }
        Ok(Self(f))
    }

    pub(crate) fn new_unchecked(f: ComplexMatrix) -> Self {
        Self(f)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn n_streams(&self) -> usize {
        self.0.cols()
    }
}

impl AsRef<ComplexMatrix> for Precoder {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Feasible RIS configuration: every coefficient has magnitude `amplitude`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePattern {
    phases: Phases,
    amplitude: f64,
}

impl PhasePattern {
    pub fn new(phases: Phases, amplitude: f64) -> Result<Self> {
        let defect = phases.modulus_defect(amplitude);
        if defect > MODULUS_SLACK * amplitude.max(1.0) {
            return Err(Error::config(
                "phases",
                format!("modulus deviates from a = {amplitude} by {defect:.3e}"),
            ));
        }
        Ok(Self { phases, amplitude })
    }

    pub(crate) fn new_unchecked(phases: Phases, amplitude: f64) -> Self {
        Self { phases, amplitude }
    }

    pub fn uniform(n_panels: usize, panel_len: usize, amplitude: f64) -> Self {
        Self {
            phases: Phases::uniform(n_panels, panel_len, amplitude),
            amplitude,
        }
    }

    pub fn phases(&self) -> &Phases {
        &self.phases
    }

    pub fn into_phases(self) -> Phases {
        self.phases
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }
}

impl AsRef<Phases> for PhasePattern {
    fn as_ref(&self) -> &Phases {
        &self.phases
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_dimension_checks() {
        let ok = ChannelSet::parallel(
            ComplexMatrix::zeros(2, 4),
            vec![(ComplexMatrix::zeros(3, 4), ComplexMatrix::zeros(2, 3))],
        );
        assert!(ok.is_ok());
        let bad = ChannelSet::parallel(
            ComplexMatrix::zeros(2, 4),
            vec![(ComplexMatrix::zeros(3, 4), ComplexMatrix::zeros(2, 5))],
        );
        assert!(matches!(bad, Err(Error::DimensionMismatch(_))));
        let hop = ChannelSet::multihop(
            ComplexMatrix::zeros(2, 4),
            vec![
                ComplexMatrix::zeros(3, 4),
                ComplexMatrix::zeros(3, 3),
                ComplexMatrix::zeros(2, 3),
            ],
        )
        .unwrap();
        assert_eq!(hop.n_panels(), 2);
        assert_eq!(hop.n_ris(), 3);
    }

    #[test]
    fn precoder_feasibility() {
        assert!(Precoder::new(ComplexMatrix::identity(2)).is_ok());
        assert!(Precoder::new(ComplexMatrix::identity(2).scale(1.01)).is_err());
    }

    #[test]
    fn phase_pattern_modulus() {
        let p = Phases::new(vec![C64::from_polar(1.0, 0.3); 4], 2).unwrap();
        assert!(PhasePattern::new(p.clone(), 1.0).is_ok());
        assert!(PhasePattern::new(p, 0.9).is_err());
        assert!(Phases::new(vec![C64::new(1.0, 0.0); 3], 2).is_err());
    }
}
