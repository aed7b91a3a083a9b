use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::channel::{
    wavelength, Aperture, ArrayGeometry, Endpoint, LinkClass, LinkClasses, Orientation, PropagationPhysics,
    RayGainMode, Scenario, Topology, Vec3,
};
use crate::error::{Error, Result};
use crate::objective::LinkBudget;
use crate::optimizer::{Algorithm, OptimizerConfig};

/// Boltzmann constant in J/K.
const BOLTZMANN: f64 = 1.380_649e-23;
/// Reference noise temperature in K.
const NOISE_TEMPERATURE: f64 = 290.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub topology: Topology,
    pub trials: usize,
    pub master_seed: u64,
    pub streams: usize,
    pub algorithms: Vec<Algorithm>,
    pub physics: PhysicsConfig,
    pub link_budget: LinkBudgetConfig,
    pub ris: RisConfig,
    pub bs: ArrayConfig,
    pub user: ArrayConfig,
    pub panels: Vec<PanelConfig>,
    pub links: LinksConfig,
    pub optimizer: OptimizerConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    pub user_path: UserPathConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsConfig {
    pub frequency_hz: f64,
    pub k_abs: f64,
    pub tx_gain: f64,
    pub rx_gain: f64,
    pub ray_gain: RayGainMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkBudgetConfig {
    /// Total transmit power; split evenly over the streams.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_tx_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_tx_w: Option<f64>,
    /// Explicit noise power; otherwise `k T B` times the noise figure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_power_w: Option<f64>,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RisConfig {
    pub amplitude: f64,
    pub grid: [usize; 2],
    /// Defaults to half a wavelength.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    /// Defaults to a half-wavelength square.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub element_size: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayConfig {
    /// Two or three coordinates in meters; a missing z is 0.
    pub position: Vec<f64>,
    pub grid: [usize; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    /// Point the array faces; defaults to the next node on the path.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub facing: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PanelConfig {
    pub position: Vec<f64>,
    /// Defaults to the midpoint of the previous and next nodes on the path.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub facing: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    pub k_rice: f64,
    pub n_rays: usize,
    pub pl_exp_los: f64,
    pub pl_exp_nlos: f64,
    pub blocked: bool,
    pub scatter_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinksConfig {
    pub direct: LinkConfig,
    pub tx_ris: LinkConfig,
    pub ris_rx: LinkConfig,
    pub ris_ris: LinkConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    PTxDbm,
    NRis,
    UserDistance,
    QuantBits,
    NPanels,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::PTxDbm => "p_tx_dbm",
            SweepParam::NRis => "n_ris",
            SweepParam::UserDistance => "user_distance",
            SweepParam::QuantBits => "quant_bits",
            SweepParam::NPanels => "n_panels",
        }
    }
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            SweepParam::PTxDbm,
            SweepParam::NRis,
            SweepParam::UserDistance,
            SweepParam::QuantBits,
            SweepParam::NPanels,
        ]
        .into_iter()
        .find(|p| p.as_str() == s.trim())
        .ok_or_else(|| Error::config("sweep.param", format!("unknown sweep parameter '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub param: SweepParam,
    /// `inf` is accepted for `quant_bits` and means unquantized.
    pub values: Vec<f64>,
}

/// Line followed by the user in a distance sweep: `(value, y_offset, z)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UserPathConfig {
    pub y_offset: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            topology: Topology::Parallel,
            trials: 500,
            master_seed: 1,
            streams: 1,
            algorithms: Algorithm::ALL.to_vec(),
            physics: PhysicsConfig::default(),
            link_budget: LinkBudgetConfig::default(),
            ris: RisConfig::default(),
            bs: ArrayConfig { position: vec![0.0, 0.0, 0.0], ..ArrayConfig::default() },
            user: ArrayConfig { position: vec![50.0, 0.0, 0.0], ..ArrayConfig::default() },
            panels: vec![PanelConfig { position: vec![10.0, 10.0, 0.0], facing: None }],
            links: LinksConfig::default(),
            optimizer: OptimizerConfig::default(),
            sweep: None,
            user_path: UserPathConfig::default(),
        }
    }
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            frequency_hz: 28e9,
            k_abs: 0.0,
            tx_gain: 1.0,
            rx_gain: 1.0,
            ray_gain: RayGainMode::Magnitude,
        }
    }
}

impl Default for LinkBudgetConfig {
    fn default() -> Self {
        Self {
            p_tx_dbm: None,
            p_tx_w: None,
            noise_power_w: None,
            bandwidth_hz: 800e6,
            noise_figure_db: 0.0,
        }
    }
}

impl Default for RisConfig {
    fn default() -> Self {
        Self { amplitude: 1.0, grid: [4, 4], spacing: None, element_size: None }
    }
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self { position: vec![0.0, 0.0, 0.0], grid: [2, 2], spacing: None, facing: None }
    }
}

impl Default for PanelConfig {
    fn default() -> Self {
        Self { position: vec![10.0, 10.0, 0.0], facing: None }
    }
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            k_rice: 10.0,
            n_rays: 10,
            pl_exp_los: 1.9,
            pl_exp_nlos: 4.39,
            blocked: false,
            scatter_margin: 2.0,
        }
    }
}

impl Default for LinksConfig {
    fn default() -> Self {
        Self {
            direct: LinkConfig { k_rice: 0.0, ..LinkConfig::default() },
            tx_ris: LinkConfig::default(),
            ris_rx: LinkConfig::default(),
            ris_ris: LinkConfig::default(),
        }
    }
}

/// Default transmit power when neither `p_tx_dbm` nor `p_tx_w` is given.
pub const DEFAULT_P_TX_DBM: f64 = 20.0;

fn point(field: &str, v: &[f64]) -> Result<Vec3> {
    match v {
        [x, y] => Ok(Vec3::new(*x, *y, 0.0)),
        [x, y, z] => Ok(Vec3::new(*x, *y, *z)),
        _ => Err(Error::config(field, format!("expected 2 or 3 coordinates, got {}", v.len()))),
    }
}

/// `10^((dBm - 30) / 10)` watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.resolved()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_toml_str(&text)
    }

    /// Every defaulted quantity made explicit, as printed by `--dump-config`.
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn wavelength(&self) -> f64 {
        wavelength(self.physics.frequency_hz)
    }

    /// Validates and fills spacing, element size, transmit power and noise.
    pub fn resolved(mut self) -> Result<Self> {
        if !(self.physics.frequency_hz > 0.0) || !self.physics.frequency_hz.is_finite() {
            return Err(Error::config("physics.frequency_hz", "must be positive"));
        }
        let half = self.wavelength() / 2.0;
        self.ris.spacing.get_or_insert(half);
        self.ris.element_size.get_or_insert([half, half]);
        self.bs.spacing.get_or_insert(half);
        self.user.spacing.get_or_insert(half);

        let lb = &mut self.link_budget;
        match (lb.p_tx_dbm, lb.p_tx_w) {
            (Some(_), Some(_)) => {
                return Err(Error::config("link_budget", "give p_tx_dbm or p_tx_w, not both"));
            }
            (None, Some(w)) => {
                if !(w > 0.0) || !w.is_finite() {
                    return Err(Error::config("link_budget.p_tx_w", format!("must be positive, got {w}")));
                }
                lb.p_tx_dbm = Some(watts_to_dbm(w));
                lb.p_tx_w = None;
            }
            (None, None) => lb.p_tx_dbm = Some(DEFAULT_P_TX_DBM),
            (Some(_), None) => {}
        }
        if lb.noise_power_w.is_none() {
            if !(lb.bandwidth_hz > 0.0) {
                return Err(Error::config("link_budget.bandwidth_hz", "must be positive"));
            }
            let nf = 10f64.powf(lb.noise_figure_db / 10.0);
            lb.noise_power_w = Some(BOLTZMANN * NOISE_TEMPERATURE * lb.bandwidth_hz * nf);
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.streams == 0 {
            return Err(Error::config("streams", "must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::config("algorithms", "list is empty"));
        }
        if !(self.ris.amplitude > 0.0) || !self.ris.amplitude.is_finite() {
            return Err(Error::config("ris.amplitude", "must be positive"));
        }
        if self.physics.tx_gain <= 0.0 || self.physics.rx_gain <= 0.0 {
            return Err(Error::config("physics", "antenna gains must be positive"));
        }
        let dbm = self.link_budget.p_tx_dbm.unwrap_or(DEFAULT_P_TX_DBM);
        if !dbm.is_finite() {
            return Err(Error::config("link_budget.p_tx_dbm", "must be finite"));
        }
        if let Some(pn) = self.link_budget.noise_power_w {
            if !(pn > 0.0) || !pn.is_finite() {
                return Err(Error::config("link_budget.noise_power_w", "must be positive"));
            }
        }
        self.optimizer.validate()?;
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(Error::config("sweep.values", "list is empty"));
            }
            for &v in &s.values {
                self.clone().with_sweep_value(s.param, v)?;
            }
        }
        self.to_scenario()?.validate()?;
        if self.streams > self.bs.grid[0] * self.bs.grid[1] {
            return Err(Error::config("streams", "exceeds the number of transmit antennas"));
        }
        Ok(())
    }

    /// Total transmit power in watts.
    pub fn p_tx_watts(&self) -> f64 {
        dbm_to_watts(self.link_budget.p_tx_dbm.unwrap_or(DEFAULT_P_TX_DBM))
    }

    /// `rho = P_tx / N_s` and the noise power.
    pub fn budget(&self) -> Result<LinkBudget> {
        let pn = self
            .link_budget
            .noise_power_w
            .ok_or_else(|| Error::config("link_budget.noise_power_w", "unresolved"))?;
        LinkBudget::new(self.p_tx_watts() / self.streams as f64, pn)
    }

    fn physics_for(&self, link: &LinkConfig) -> LinkClass {
        LinkClass {
            physics: PropagationPhysics {
                frequency_hz: self.physics.frequency_hz,
                k_abs: self.physics.k_abs,
                pl_exp_los: link.pl_exp_los,
                pl_exp_nlos: link.pl_exp_nlos,
                rician_factor: link.k_rice,
                n_rays: link.n_rays,
                ray_gain: self.physics.ray_gain,
                scatter_margin: link.scatter_margin,
            },
            blocked: link.blocked,
        }
    }

    /// Places and orients every array.
    pub fn to_scenario(&self) -> Result<Scenario> {
        let half = self.wavelength() / 2.0;
        let bs_pos = point("bs.position", &self.bs.position)?;
        let user_pos = point("user.position", &self.user.position)?;
        let panel_pos = self
            .panels
            .iter()
            .enumerate()
            .map(|(i, p)| point(&format!("panels[{i}].position"), &p.position))
            .collect::<Result<Vec<_>>>()?;

        // nodes along the signal path; parallel panels each sit between BS and user
        let neighbours = |i: usize| -> (Vec3, Vec3) {
            match self.topology {
                Topology::Parallel => (bs_pos, user_pos),
                Topology::Multihop => (
                    if i == 0 { bs_pos } else { panel_pos[i - 1] },
                    panel_pos.get(i + 1).copied().unwrap_or(user_pos),
                ),
            }
        };
        let facing = |field: &str, given: &Option<Vec<f64>>, default: Vec3| -> Result<Vec3> {
            match given {
                Some(v) => point(field, v),
                None => Ok(default),
            }
        };
        let orient = |field: &str, from: Vec3, target: Vec3| {
            Orientation::facing(from, target)
                .map_err(|_| Error::config(field, "array faces its own position"))
        };

        let (bs_target, user_target) = match (self.topology, panel_pos.first(), panel_pos.last()) {
            (Topology::Multihop, Some(first), Some(last)) => (*first, *last),
            _ => (user_pos, bs_pos),
        };
        let antenna = |cfg: &ArrayConfig, field: &str, pos: Vec3, target: Vec3, gain: f64| -> Result<Endpoint> {
            let target = facing(&format!("{field}.facing"), &cfg.facing, target)?;
            let geometry = ArrayGeometry::new(
                cfg.grid,
                cfg.spacing.unwrap_or(half),
                [0.0, 0.0],
                pos,
                orient(&format!("{field}.facing"), pos, target)?,
            )
            .map_err(|e| prefix(field, e))?;
            Ok(Endpoint { geometry, aperture: Aperture::Antenna { gain } })
        };
        let bs = antenna(&self.bs, "bs", bs_pos, bs_target, self.physics.tx_gain)?;
        let user = antenna(&self.user, "user", user_pos, user_target, self.physics.rx_gain)?;

        let mut panels = Vec::with_capacity(panel_pos.len());
        for (i, (p, cfg)) in panel_pos.iter().zip(&self.panels).enumerate() {
            let field = format!("panels[{i}]");
            let (prev, next) = neighbours(i);
            let target = facing(&format!("{field}.facing"), &cfg.facing, (prev + next) / 2.0)?;
            let geometry = ArrayGeometry::new(
                self.ris.grid,
                self.ris.spacing.unwrap_or(half),
                self.ris.element_size.unwrap_or([half, half]),
                *p,
                orient(&format!("{field}.facing"), *p, target)?,
            )
            .map_err(|e| prefix("ris", e))?;
            panels.push(Endpoint { geometry, aperture: Aperture::Ris });
        }

        Ok(Scenario {
            topology: self.topology,
            bs,
            user,
            panels,
            links: LinkClasses {
                direct: self.physics_for(&self.links.direct),
                tx_ris: self.physics_for(&self.links.tx_ris),
                ris_rx: self.physics_for(&self.links.ris_rx),
                ris_ris: self.physics_for(&self.links.ris_ris),
            },
        })
    }

    /// Copy with one sweep parameter set; the value must suit the parameter.
    pub fn with_sweep_value(mut self, param: SweepParam, value: f64) -> Result<Self> {
        let field = format!("sweep.{}", param.as_str());
        let count = |v: f64| -> Result<usize> {
            if v.is_finite() && v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::config(field.clone(), format!("{v} is not a count")))
            }
        };
        match param {
            SweepParam::PTxDbm => {
                if !value.is_finite() {
                    return Err(Error::config(field, "power must be finite"));
                }
                self.link_budget.p_tx_dbm = Some(value);
                self.link_budget.p_tx_w = None;
            }
            SweepParam::NRis => {
                let n = count(value)?;
                if n == 0 {
                    return Err(Error::config(field, "needs at least one element"));
                }
                self.ris.grid = near_square(n);
            }
            SweepParam::UserDistance => {
                if !value.is_finite() {
                    return Err(Error::config(field, "distance must be finite"));
                }
                let z = self.user.position.get(2).copied().unwrap_or(0.0);
                self.user.position = vec![value, self.user_path.y_offset, z];
            }
            SweepParam::QuantBits => {
                self.optimizer.quant_bits = if value == f64::INFINITY {
                    None
                } else {
                    let b = count(value)?;
                    Some(u32::try_from(b).map_err(|_| Error::config(field.clone(), "too many bits"))?)
                };
            }
            SweepParam::NPanels => {
                let n = count(value)?;
                if n > self.panels.len() {
                    return Err(Error::config(
                        field,
                        format!("{n} panels requested, {} configured", self.panels.len()),
                    ));
                }
                self.panels.truncate(n);
            }
        }
        Ok(self)
    }
}

fn prefix(field: &str, e: Error) -> Error {
    match e {
        Error::Config { field: inner, message } => Error::Config { field: format!("{field}.{inner}"), message },
        other => other,
    }
}

/// Grid `[p, q]` with `p * q = n`, `p <= q` and `p` as large as possible.
pub fn near_square(n: usize) -> [usize; 2] {
    let mut p = (n as f64).sqrt().floor() as usize;
    while p > 1 && n % p != 0 {
        p -= 1;
    }
    let p = p.max(1);
    [p, n / p]
}
