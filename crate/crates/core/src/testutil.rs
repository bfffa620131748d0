//! Random instance generators for unit tests.

use nalgebra::DMatrix;
use rand::Rng;

use crate::prior::{Direction, GaussianPrior};
use crate::resource::ProbeSpectrum;

pub fn random_prior<R: Rng>(rng: &mut R, k: usize) -> GaussianPrior {
    let b = DMatrix::from_fn(k, k, |_, _| rng.gen_range(-1.0..1.0));
    let scale = rng.gen_range(0.1..4.0);
    let sigma = (&b * b.transpose() / k as f64 + DMatrix::identity(k, k) * 0.1) * scale;
    // exact symmetry
    let sigma = (&sigma + sigma.transpose()) * 0.5;
    GaussianPrior::centered(sigma).unwrap()
}

pub fn random_direction<R: Rng>(rng: &mut R, k: usize) -> Direction {
    loop {
        let u: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if u.iter().map(|x| x * x).sum::<f64>() > 1e-4 {
            return Direction::new(u).unwrap();
        }
    }
}

/// Pure-probe spectrum on random photon-number vectors `m ∈ {0..=max_n}^k`.
pub fn random_spectrum<R: Rng>(rng: &mut R, k: usize, support: usize, max_n: u32) -> ProbeSpectrum {
    let weights: Vec<f64> = (0..support).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let atoms = weights
        .iter()
        .map(|w| {
            let m = (0..k).map(|_| rng.gen_range(0..=max_n) as f64).collect();
            (m, w / total)
        })
        .collect();
    ProbeSpectrum::new(k, atoms).unwrap()
}
