//! Gradient Lipschitz constants for the rate objective.
//!
//! The bound `L` holds for the stacked Wirtinger gradient
//! `(grad_{F*} f, grad_{phi*} f)` over the feasible set and fixes the step size
//! `alpha < 1 / L`. Singular values are obtained once per channel realization.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::random::{gaussian_matrix, unit_modulus_vector};
use crate::numerics::{spectral_norm_or_svd, vec_norm_sq, ComplexMatrix};
use crate::objective::{evaluate, ChannelSet, LinkBudget, Phases};

/// Tolerance handed to the power iteration for every singular value here.
pub const SINGULAR_VALUE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Arrangement {
    Parallel,
    MultiHop,
}

/// Lipschitz constant together with the intermediates it is built from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzBound {
    pub arrangement: Arrangement,
    pub l: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// Only present for parallel panels.
    pub e: Option<f64>,
    pub zeta: f64,
    pub n_panels: usize,
    /// `(label, largest singular value)` for every matrix that entered the bound.
    pub singular_values: Vec<(String, f64)>,
}

impl LipschitzBound {
    /// Recomputes `L` from the stored intermediates.
    pub fn recombine(&self) -> f64 {
        let (b, c, d) = (self.b, self.c, self.d);
        match self.arrangement {
            Arrangement::Parallel => {
                let e = self.e.unwrap_or(0.0);
                (b * b + b * c + d * d + d * e)
                    .max(c * c + b * c + e * e + d * e)
                    .sqrt()
            }
            Arrangement::MultiHop => {
                let n = self.n_panels as f64;
                ((n + 1.0) * (b * b + n * c * c).max(c * c + n * d * d)).sqrt()
            }
        }
    }

    /// `c_alpha / L`, or 0 when `L = 0` (then every gradient vanishes).
    pub fn step_size(&self, step_scale: f64) -> f64 {
        if self.l > 0.0 {
            step_scale / self.l
        } else {
            0.0
        }
    }
}

fn sv(m: &ComplexMatrix) -> f64 {
    spectral_norm_or_svd(m, SINGULAR_VALUE_TOL)
}

/// Bound for parallel panels.
pub fn lipschitz_parallel(ch: &ChannelSet, lb: &LinkBudget, n_s: usize, a: f64) -> Result<LipschitzBound> {
    let ChannelSet::Parallel { direct, panels } = ch else {
        return Err(Error::WrongTopology { expected: "parallel" });
    };
    let snr = lb.snr();
    let ns = n_s as f64;
    let mut svs = vec![("H_SD".to_string(), sv(direct))];

    let mut pair_sum = 0.0;
    for (i, (src, dst)) in panels.iter().enumerate() {
        let s_src = sv(src);
        let s_dst = sv(dst);
        svs.push((format!("H_S{}", i + 1), s_src));
        svs.push((format!("H_{}D", i + 1), s_dst));
        pair_sum += s_dst * s_src;
    }
    let (s_rd, s_sr) = if panels.is_empty() {
        (0.0, 0.0)
    } else {
        let dsts: Vec<&ComplexMatrix> = panels.iter().map(|(_, d)| d).collect();
        let srcs: Vec<&ComplexMatrix> = panels.iter().map(|(s, _)| s).collect();
        (
            sv(&ComplexMatrix::hstack(&dsts)?),
            sv(&ComplexMatrix::vstack(&srcs)?),
        )
    };
    svs.push(("H~_RD".to_string(), s_rd));
    svs.push(("H~_SR".to_string(), s_sr));

    let zeta = svs[0].1 + a * pair_sum;
    let z2 = zeta * zeta;
    let b = snr * z2 * (1.0 + 2.0 * ns * snr * z2);
    let c = 2.0 * ns.sqrt() * snr * zeta * s_rd * s_sr * (1.0 + ns * snr * z2);
    let d = 2.0 * ns.sqrt() * snr * zeta * (1.0 + ns * snr * z2) * pair_sum;
    let e = ns * snr * (1.0 + 2.0 * ns * snr * z2) * s_rd * s_sr * pair_sum;

    let mut bound = LipschitzBound {
        arrangement: Arrangement::Parallel,
        l: 0.0,
        b,
        c,
        d,
        e: Some(e),
        zeta,
        n_panels: panels.len(),
        singular_values: svs,
    };
    bound.l = bound.recombine();
    Ok(bound)
}

/// Bound for a multi-hop chain.
pub fn lipschitz_multihop(ch: &ChannelSet, lb: &LinkBudget, n_s: usize, a: f64) -> Result<LipschitzBound> {
    let ChannelSet::MultiHop { direct, hops } = ch else {
        return Err(Error::WrongTopology { expected: "multihop" });
    };
    let snr = lb.snr();
    let ns = n_s as f64;
    let n_pan = ch.n_panels();
    let mut svs = vec![("H_SD".to_string(), sv(direct))];
    let mut prod = 1.0;
    for (i, h) in hops.iter().enumerate() {
        let s = sv(h);
        svs.push((format!("H_{}", i + 1), s));
        prod *= s;
    }

    let (zeta, b, c, d) = if n_pan == 0 {
        let zeta = svs[0].1;
        let z2 = zeta * zeta;
        (zeta, snr * z2 * (1.0 + 2.0 * ns * snr * z2), 0.0, 0.0)
    } else {
        let n = n_pan as i32;
        let zeta = svs[0].1 + a.powi(n) * prod;
        let z2 = zeta * zeta;
        let b = snr * z2 * (1.0 + 2.0 * ns * snr * z2);
        let c = 2.0 * ns.sqrt() * snr * zeta * a.powi(n - 1) * prod * (1.0 + ns * snr * z2);
        let d = ns * snr * a.powi(2 * n - 2) * prod * prod * (1.0 + 2.0 * ns * snr * z2);
        (zeta, b, c, d)
    };

    let mut bound = LipschitzBound {
        arrangement: Arrangement::MultiHop,
        l: 0.0,
        b,
        c,
        d,
        e: None,
        zeta,
        n_panels: n_pan,
        singular_values: svs,
    };
    bound.l = bound.recombine();
    Ok(bound)
}

/// Dispatches on the channel arrangement.
pub fn lipschitz_bound(ch: &ChannelSet, lb: &LinkBudget, n_s: usize, a: f64) -> Result<LipschitzBound> {
    match ch {
        ChannelSet::Parallel { .. } => lipschitz_parallel(ch, lb, n_s, a),
        ChannelSet::MultiHop { .. } => lipschitz_multihop(ch, lb, n_s, a),
    }
}

/// Norm used on both sides of the chain-difference inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainNorm {
    /// Frobenius norm on the product difference and on each factor difference.
    Frobenius,
    /// Spectral norm throughout.
    Spectral,
}

/// Left and right sides of the telescoping bound
/// `||prod Psi2 - prod Psi1|| <= sum_l (prod_{m>l} ||Psi1_m||_2) ||Psi2_l - Psi1_l|| (prod_{k<l} ||Psi2_k||_2)`.
///
/// Chains are listed from the rightmost factor: `chain[0]` is `Psi_1` and the
/// product is `Psi_N ... Psi_1`.
pub fn chain_difference_gap(
    chain1: &[ComplexMatrix],
    chain2: &[ComplexMatrix],
    norm: ChainNorm,
) -> Result<(f64, f64)> {
    if chain1.len() != chain2.len() || chain1.len() < 2 {
        return Err(Error::DimensionMismatch(format!(
            "chains of length {} and {} (need equal lengths >= 2)",
            chain1.len(),
            chain2.len()
        )));
    }
    for (k, (p, q)) in chain1.iter().zip(chain2).enumerate() {
        if p.shape() != q.shape() {
            return Err(Error::DimensionMismatch(format!("factor {} shapes differ", k + 1)));
        }
        if k > 0 && chain1[k - 1].rows() != p.cols() {
            return Err(Error::DimensionMismatch(format!(
                "factor {} does not multiply factor {}",
                k + 1,
                k
            )));
        }
    }
    let product = |chain: &[ComplexMatrix]| {
        chain[1..].iter().fold(chain[0].clone(), |acc, m| m.matmul(&acc))
    };
    let measure = |m: &ComplexMatrix| match norm {
        ChainNorm::Frobenius => m.frobenius_norm(),
        ChainNorm::Spectral => sv(m),
    };
    let lhs = measure(&product(chain2).sub(&product(chain1)));

    let n = chain1.len();
    let spec1: Vec<f64> = chain1.iter().map(sv).collect();
    let spec2: Vec<f64> = chain2.iter().map(sv).collect();
    let mut rhs = 0.0;
    for l in 0..n {
        let left: f64 = spec1[l + 1..].iter().product();
        let right: f64 = spec2[..l].iter().product();
        rhs += left * measure(&chain2[l].sub(&chain1[l])) * right;
    }
    Ok((lhs, rhs))
}

/// Random feasible precoder with `||F||_F^2 = fill * N_s`.
pub fn random_feasible_precoder<R: Rng + ?Sized>(rng: &mut R, n_tx: usize, n_s: usize, fill: f64) -> ComplexMatrix {
    let g = gaussian_matrix(rng, n_tx, n_s, 1.0);
    let norm = g.frobenius_norm();
    if norm == 0.0 {
        return g;
    }
    g.scale((fill * n_s as f64).sqrt() / norm)
}

/// Largest observed ratio of stacked gradient difference to stacked point
/// difference over random feasible pairs.
///
/// Half of the pairs are independent draws; the other half are local
/// perturbations of a random point (projected back onto the feasible set),
/// which probe the local curvature. Coincident pairs are skipped.
pub fn empirical_lipschitz_ratio<R: Rng + ?Sized>(
    ch: &ChannelSet,
    lb: &LinkBudget,
    n_s: usize,
    a: f64,
    rng: &mut R,
    n_pairs: usize,
) -> Result<f64> {
    assert!(n_pairs >= 1);
    let (n_tx, n_pan, n_ris) = (ch.n_tx(), ch.n_panels(), ch.n_ris());
    let mut worst: f64 = 0.0;
    for pair in 0..n_pairs {
        let fill = rng.random_range(0.05..=1.0);
        let f1 = random_feasible_precoder(rng, n_tx, n_s, fill);
        let p1 = Phases::new(unit_modulus_vector(rng, n_pan * n_ris, a), n_ris)?;
        let (f2, p2) = if pair % 2 == 0 {
            let fill = rng.random_range(0.05..=1.0);
            (
                random_feasible_precoder(rng, n_tx, n_s, fill),
                Phases::new(unit_modulus_vector(rng, n_pan * n_ris, a), n_ris)?,
            )
        } else {
            let scale = 10f64.powf(rng.random_range(-4.0..-1.0));
            let df = gaussian_matrix(rng, n_tx, n_s, 1.0).scale(scale);
            let f2 = crate::optimizer::prox_precoder(&f1.add(&df), n_s).into_matrix();
            let jitter = unit_modulus_vector(rng, n_pan * n_ris, 1.0);
            let p2 = p1.zip_map(
                &Phases::new(jitter, n_ris)?,
                |z, u| z + u * scale * a,
            );
            (f2, crate::optimizer::project_phases(&p2, a))
        };
        let e1 = evaluate(ch, &p1, &f1, lb)?;
        let e2 = evaluate(ch, &p2, &f2, lb)?;
        let dx = f2.sub(&f1).frobenius_norm_sq()
            + vec_norm_sq(&crate::numerics::vec_sub(p2.as_slice(), p1.as_slice()));
        if dx == 0.0 {
            continue;
        }
        let dg = e2.grad_precoder.sub(&e1.grad_precoder).frobenius_norm_sq()
            + vec_norm_sq(&crate::numerics::vec_sub(
                e2.grad_phases.as_slice(),
                e1.grad_phases.as_slice(),
            ));
        worst = worst.max((dg / dx).sqrt());
    }
    Ok(worst)
}
