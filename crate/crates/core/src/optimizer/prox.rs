use std::f64::consts::TAU;

use crate::numerics::{ComplexMatrix, C64};
use crate::objective::{PhasePattern, Phases, Precoder};

/// Euclidean projection onto `||F||_F^2 <= N_s`.
pub fn prox_precoder(x: &ComplexMatrix, n_s: usize) -> Precoder {
    let power = x.frobenius_norm_sq();
    let cap = n_s as f64;
    if power <= cap {
        Precoder::new_unchecked(x.clone())
    } else {
        Precoder::new_unchecked(x.scale(cap.sqrt() / power.sqrt()))
    }
}

/// Entrywise projection onto `|x_m| = a`. Zero entries map to `a`.
pub fn prox_phase(x: &[C64], a: f64) -> Vec<C64> {
    x.iter().map(|&z| project_entry(z, a)).collect()
}

fn project_entry(z: C64, a: f64) -> C64 {
    let r = z.norm();
    if r == 0.0 {
        C64::new(a, 0.0)
    } else {
        z * (a / r)
    }
}

/// [`prox_phase`] on a stacked phase vector.
pub fn project_phases(x: &Phases, a: f64) -> Phases {
    x.map(|z| project_entry(z, a))
}

/// Snaps every phase to the nearest point of `{2 pi k / 2^bits}` by wrapped
/// distance. An exact tie goes to the smaller grid index, so the tie between
/// the last point and the wrap-around goes to index 0.
pub fn quantize_phases(phases: &Phases, bits: u32, a: f64) -> PhasePattern {
    assert!((1..=31).contains(&bits), "quantization needs 1..=31 bits");
    let levels = 1u64 << bits;
    let step = TAU / levels as f64;
    let snapped = phases.map(|z| {
        let theta = z.arg().rem_euclid(TAU);
        let x = theta / step;
        let lo = x.floor();
        let frac = x - lo;
        let lo = (lo as u64) % levels;
        let hi = (lo + 1) % levels;
        let k = if frac > 0.5 {
            hi
        } else if frac < 0.5 {
            lo
        } else {
            lo.min(hi)
        };
        C64::from_polar(a, k as f64 * step)
    });
    PhasePattern::new_unchecked(snapped, a)
}
