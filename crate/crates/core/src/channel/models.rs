use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::geometry::{local_angles, wavelength, wavenumber, ArrayGeometry, Vec3};
use crate::error::{Error, Result};
use crate::numerics::random::complex_gaussian;
use crate::numerics::ComplexMatrix;

/// How a spherical-model ray gain enters the entry sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RayGainMode {
    /// `|alpha|` only; the phase comes from the path length.
    #[default]
    Magnitude,
    /// Full complex `alpha` on top of the path-length phase.
    Complex,
}

/// Propagation parameters of one link class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationPhysics {
    pub frequency_hz: f64,
    /// Molecular absorption coefficient in 1/m.
    pub k_abs: f64,
    pub pl_exp_los: f64,
    pub pl_exp_nlos: f64,
    pub rician_factor: f64,
    pub n_rays: usize,
    pub ray_gain: RayGainMode,
    /// Scatter points are drawn in the bounding box of the two array centers
    /// grown by this margin (meters) on every side.
    pub scatter_margin: f64,
}

impl PropagationPhysics {
    pub fn wavelength(&self) -> f64 {
        wavelength(self.frequency_hz)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: &str| Err(Error::config(field, msg));
        if !(self.frequency_hz > 0.0) || !self.frequency_hz.is_finite() {
            return bad("frequency_hz", "must be positive");
        }
        if !(self.k_abs >= 0.0) {
            return bad("k_abs", "must be nonnegative");
        }
        if !(self.rician_factor >= 0.0) || !self.rician_factor.is_finite() {
            return bad("k_rice", "must be nonnegative");
        }
        if self.n_rays == 0 {
            return bad("n_rays", "must be at least 1");
        }
        if !self.pl_exp_los.is_finite() || !self.pl_exp_nlos.is_finite() {
            return bad("pl_exp", "must be finite");
        }
        if !(self.scatter_margin >= 0.0) {
            return bad("scatter_margin", "must be nonnegative");
        }
        Ok(())
    }
}

/// Antenna arrays radiate with a gain; RIS panels collect with an element area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Aperture {
    Antenna { gain: f64 },
    Ris,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Endpoint {
    pub geometry: ArrayGeometry,
    pub aperture: Aperture,
}

impl Endpoint {
    pub fn len(&self) -> usize {
        self.geometry.len()
    }

    pub fn is_empty(&self) -> bool {
        self.geometry.is_empty()
    }

    /// Transmit-side gain. A RIS element of area `A` has `4 pi A / lambda^2`.
    pub fn gain(&self, wavelength: f64) -> f64 {
        match self.aperture {
            Aperture::Antenna { gain } => gain,
            Aperture::Ris => 4.0 * PI * self.geometry.element_area() / (wavelength * wavelength),
        }
    }

    /// Receive-side effective area. An antenna of gain `G` has `lambda^2 G / (4 pi)`.
    pub fn effective_area(&self, wavelength: f64) -> f64 {
        match self.aperture {
            Aperture::Antenna { gain } => wavelength * wavelength * gain / (4.0 * PI),
            Aperture::Ris => self.geometry.element_area(),
        }
    }
}

/// `G_tx * A_rx`, the numerator shared by every path-loss expression. For
/// BS to RIS this is `G_tx A_RIS`, for RIS to user `G_rx A_RIS`.
pub fn power_factor(tx: &Endpoint, rx: &Endpoint, wavelength: f64) -> f64 {
    tx.gain(wavelength) * rx.effective_area(wavelength)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelModel {
    Spherical,
    Planar,
}

/// Spherical below the larger Fraunhofer distance of the two arrays, planar at
/// and beyond it.
pub fn select_model(tx: &Endpoint, rx: &Endpoint, wavelength: f64) -> ChannelModel {
    let d = (rx.geometry.center - tx.geometry.center).norm();
    let df = tx
        .geometry
        .fraunhofer_distance(wavelength)
        .max(rx.geometry.fraunhofer_distance(wavelength));
    if d < df {
        ChannelModel::Spherical
    } else {
        ChannelModel::Planar
    }
}

fn spherical_term(factor: f64, d: f64, k_abs: f64, k: f64) -> C64 {
    let amp = (factor / (4.0 * PI * d * d)).sqrt() * (-k_abs * d).exp();
    C64::from_polar(amp, -k * d)
}

/// Near-field line-of-sight channel from exact element-pair distances.
/// Rows index receive elements.
pub fn los_spherical(tx: &Endpoint, rx: &Endpoint, phys: &PropagationPhysics) -> Result<ComplexMatrix> {
    let lam = phys.wavelength();
    let factor = power_factor(tx, rx, lam);
    let k = wavenumber(lam);
    let tx_pos = tx.geometry.element_positions();
    let rx_pos = rx.geometry.element_positions();
    let mut h = ComplexMatrix::zeros(rx_pos.len(), tx_pos.len());
    for (n, r) in rx_pos.iter().enumerate() {
        for (m, t) in tx_pos.iter().enumerate() {
            let d = (r - t).norm();
            if d == 0.0 {
                return Err(Error::CoincidentElements);
            }
            h[(n, m)] = spherical_term(factor, d, phys.k_abs, k);
        }
    }
    Ok(h)
}

/// One bounce of a near-field NLOS path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterRay {
    pub scatter: Vec3,
    pub alpha: C64,
}

/// `n_rays` scatter points uniform in the grown bounding box of the two
/// centers, with gains `alpha ~ CN(0, 1/n_rays)`.
pub fn draw_scatter_rays<R: Rng + ?Sized>(
    tx: &Endpoint,
    rx: &Endpoint,
    phys: &PropagationPhysics,
    rng: &mut R,
) -> Vec<ScatterRay> {
    let (a, b) = (tx.geometry.center, rx.geometry.center);
    let lo = a.inf(&b).add_scalar(-phys.scatter_margin);
    let hi = a.sup(&b).add_scalar(phys.scatter_margin);
    (0..phys.n_rays)
        .map(|_| {
            let scatter = Vec3::from_fn(|i, _| {
                if hi[i] > lo[i] {
                    rng.random_range(lo[i]..hi[i])
                } else {
                    lo[i]
                }
            });
            let alpha = complex_gaussian(rng, 1.0 / phys.n_rays as f64);
            ScatterRay { scatter, alpha }
        })
        .collect()
}

/// Near-field NLOS sum over explicit rays, multiplied by `scale`.
pub fn nlos_spherical_rays(
    tx: &Endpoint,
    rx: &Endpoint,
    phys: &PropagationPhysics,
    rays: &[ScatterRay],
    scale: f64,
) -> ComplexMatrix {
    let lam = phys.wavelength();
    let factor = power_factor(tx, rx, lam);
    let k = wavenumber(lam);
    let tx_pos = tx.geometry.element_positions();
    let rx_pos = rx.geometry.element_positions();
    let mut h = ComplexMatrix::zeros(rx_pos.len(), tx_pos.len());
    for ray in rays {
        let gain = match phys.ray_gain {
            RayGainMode::Magnitude => C64::new(ray.alpha.norm(), 0.0),
            RayGainMode::Complex => ray.alpha,
        } * scale;
        let to_rx: Vec<f64> = rx_pos.iter().map(|r| (r - ray.scatter).norm()).collect();
        let from_tx: Vec<f64> = tx_pos.iter().map(|t| (ray.scatter - t).norm()).collect();
        for (n, dr) in to_rx.iter().enumerate() {
            for (m, dt) in from_tx.iter().enumerate() {
                h[(n, m)] += gain * spherical_term(factor, dr + dt, phys.k_abs, k);
            }
        }
    }
    h
}

/// Near-field NLOS component with the `1 / sqrt(K)` Rician split.
pub fn nlos_spherical<R: Rng + ?Sized>(
    tx: &Endpoint,
    rx: &Endpoint,
    phys: &PropagationPhysics,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    if !(phys.rician_factor > 0.0) {
        return Err(Error::InvalidRicianFactor(phys.rician_factor));
    }
    let rays = draw_scatter_rays(tx, rx, phys, rng);
    Ok(nlos_spherical_rays(tx, rx, phys, &rays, 1.0 / phys.rician_factor.sqrt()))
}

/// Corner-indexed UPA response: element `(p, q)` has phase
/// `(2 pi / lambda) d (p sin az sin el + q cos el)`.
pub fn steering_vector(az: f64, el: f64, geom: &ArrayGeometry, wavelength: f64) -> Vec<C64> {
    let k = wavenumber(wavelength) * geom.spacing;
    let (su, sv) = (az.sin() * el.sin(), el.cos());
    (0..geom.len())
        .map(|idx| {
            let (p, q) = ((idx / geom.grid[1]) as f64, (idx % geom.grid[1]) as f64);
            C64::from_polar(1.0, k * (p * su + q * sv))
        })
        .collect()
}

/// Response referenced to the array center, for a direction in local coordinates.
fn centered_response(geom: &ArrayGeometry, local: &Vec3, wavelength: f64) -> Vec<C64> {
    let k = wavenumber(wavelength) * geom.spacing;
    let cp = (geom.grid[0] as f64 - 1.0) / 2.0;
    let cq = (geom.grid[1] as f64 - 1.0) / 2.0;
    (0..geom.len())
        .map(|idx| {
            let (p, q) = ((idx / geom.grid[1]) as f64, (idx % geom.grid[1]) as f64);
            C64::from_polar(1.0, k * ((p - cp) * local.x + (q - cq) * local.y))
        })
        .collect()
}

/// `G A / (4 pi d^gamma) e^{-k_abs d}` at the center distance.
pub fn path_gain(tx: &Endpoint, rx: &Endpoint, phys: &PropagationPhysics, exponent: f64) -> f64 {
    let d = (rx.geometry.center - tx.geometry.center).norm();
    power_factor(tx, rx, phys.wavelength()) / (4.0 * PI * d.powf(exponent)) * (-phys.k_abs * d).exp()
}

/// Far-field cluster with explicit angles. Angles are `(azimuth, elevation)`
/// in each array's local frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarRay {
    pub alpha: C64,
    pub departure: (f64, f64),
    pub arrival: (f64, f64),
}

pub fn draw_planar_rays<R: Rng + ?Sized>(phys: &PropagationPhysics, rng: &mut R) -> Vec<PlanarRay> {
    let angle = |rng: &mut R| (rng.random_range(-PI..PI), rng.random_range(-PI / 2.0..PI / 2.0));
    (0..phys.n_rays)
        .map(|_| {
            let alpha = complex_gaussian(rng, 1.0 / phys.n_rays as f64);
            let departure = angle(rng);
            let arrival = angle(rng);
            PlanarRay { alpha, departure, arrival }
        })
        .collect()
}

fn add_outer(h: &mut ComplexMatrix, s: C64, left: &[C64], right: &[C64]) {
    for (n, l) in left.iter().enumerate() {
        let ls = l * s;
        for (m, r) in right.iter().enumerate() {
            h[(n, m)] += ls * r.conj();
        }
    }
}

/// Rank-one far-field LOS term `sqrt(beta_LOS) e^{-j 2 pi d0 / lambda} a_rx a_tx^H`.
///
/// Both responses are evaluated for the direction from the receiver toward
/// the transmitter, which reproduces the first-order expansion of the exact
/// element distances.
pub fn planar_los(tx: &Endpoint, rx: &Endpoint, phys: &PropagationPhysics) -> Result<ComplexMatrix> {
    let lam = phys.wavelength();
    let delta = tx.geometry.center - rx.geometry.center;
    let d0 = delta.norm();
    if d0 == 0.0 {
        return Err(Error::CoincidentElements);
    }
    let w = delta / d0;
    let a_rx = centered_response(&rx.geometry, &rx.geometry.orientation.to_local(&w), lam);
    let a_tx = centered_response(&tx.geometry, &tx.geometry.orientation.to_local(&w), lam);
    let s = C64::from_polar(path_gain(tx, rx, phys, phys.pl_exp_los).sqrt(), -wavenumber(lam) * d0);
    let mut h = ComplexMatrix::zeros(rx.len(), tx.len());
    add_outer(&mut h, s, &a_rx, &a_tx);
    Ok(h)
}

/// Far-field cluster channel over explicit rays. The NLOS sum is scaled by
/// `sqrt(beta_NLOS / K)`, or `sqrt(beta_NLOS)` when `K = 0`.
pub fn planar_cluster_rays(
    tx: &Endpoint,
    rx: &Endpoint,
    phys: &PropagationPhysics,
    rays: &[PlanarRay],
    include_los: bool,
) -> Result<ComplexMatrix> {
    let lam = phys.wavelength();
    if (tx.geometry.center - rx.geometry.center).norm() == 0.0 {
        return Err(Error::CoincidentElements);
    }
    let split = if phys.rician_factor > 0.0 { phys.rician_factor } else { 1.0 };
    let scale = (path_gain(tx, rx, phys, phys.pl_exp_nlos) / split).sqrt();
    let mut h = if include_los {
        planar_los(tx, rx, phys)?
    } else {
        ComplexMatrix::zeros(rx.len(), tx.len())
    };
    for ray in rays {
        let a_rx = steering_vector(ray.arrival.0, ray.arrival.1, &rx.geometry, lam);
        let a_tx = steering_vector(ray.departure.0, ray.departure.1, &tx.geometry, lam);
        add_outer(&mut h, ray.alpha * scale, &a_rx, &a_tx);
    }
    Ok(h)
}

pub fn planar_cluster_channel<R: Rng + ?Sized>(
    tx: &Endpoint,
    rx: &Endpoint,
    phys: &PropagationPhysics,
    rng: &mut R,
    include_los: bool,
) -> Result<ComplexMatrix> {
    let rays = draw_planar_rays(phys, rng);
    planar_cluster_rays(tx, rx, phys, &rays, include_los)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    TxToRis(usize),
    RisToRx(usize),
    TxToRx,
    RisToRis(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkChannel {
    pub matrix: ComplexMatrix,
    pub model_used: ChannelModel,
    pub link_kind: LinkKind,
}

/// One link realization. `K > 0` gives LOS plus a `1/K`-weighted NLOS part;
/// `K = 0` gives NLOS only with unit weight.
pub fn generate_link<R: Rng + ?Sized>(
    tx: &Endpoint,
    rx: &Endpoint,
    phys: &PropagationPhysics,
    link_kind: LinkKind,
    rng: &mut R,
) -> Result<LinkChannel> {
    phys.validate()?;
    let model_used = select_model(tx, rx, phys.wavelength());
    let has_los = phys.rician_factor > 0.0;
    let matrix = match model_used {
        ChannelModel::Spherical => {
            let rays = draw_scatter_rays(tx, rx, phys, rng);
            let scale = if has_los { 1.0 / phys.rician_factor.sqrt() } else { 1.0 };
            let nlos = nlos_spherical_rays(tx, rx, phys, &rays, scale);
            if has_los {
                los_spherical(tx, rx, phys)?.add(&nlos)
            } else {
                nlos
            }
        }
        ChannelModel::Planar => planar_cluster_channel(tx, rx, phys, rng, has_los)?,
    };
    Ok(LinkChannel { matrix, model_used, link_kind })
}

/// Angles of the direction from `geom` toward `target`, in the local frame.
pub fn angles_toward(geom: &ArrayGeometry, target: &Vec3) -> (f64, f64) {
    local_angles(&geom.orientation.to_local(&(target - geom.center)))
}
