//! Random complex draws shared by the channel generator and test instruments.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::matrix::{ComplexMatrix, C64};

/// One circularly-symmetric complex Gaussian sample with `E|z|^2 = variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re * s, im * s)
}

/// Matrix of i.i.d. CN(0, variance) entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    variance: f64,
) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng, variance))
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize, variance: f64) -> Vec<C64> {
    (0..len).map(|_| complex_gaussian(rng, variance)).collect()
}

/// Vector of entries `a * e^{j theta}` with uniform phases.
pub fn unit_modulus_vector<R: Rng + ?Sized>(rng: &mut R, len: usize, amplitude: f64) -> Vec<C64> {
    (0..len)
        .map(|_| C64::from_polar(amplitude, rng.random_range(0.0..std::f64::consts::TAU)))
        .collect()
}
