//! Brute-force witnesses: concrete estimation problems whose achieved
//! Bayes mean-square error must dominate the computed bound.
//!
//! * Linear-Gaussian observation `y = Hx + w`, `w ~ N(0, R)`: the posterior
//!   mean is linear and its MSE is closed form. The pairwise error
//!   probability for hypotheses separated by `vτ` is
//!   `½ erfc(d/(2√2))` with `d = τ·‖R^{-1/2}Hv‖`.
//! * Scalar phase on a pure probe `Σ_m c_m|m⟩`, read out with the canonical
//!   phase measurement `E(y) = |e(y)⟩⟨e(y)|/2π`, `|e(y)⟩ = Σ_m e^{imy}|m⟩`,
//!   so `P(y|x) = |Σ_m c_m e^{im(x−y)}|²/2π`. The posterior-mean MSE is
//!   computed by trapezoid quadrature in `x ∈ [−8σ, 8σ]` and periodic
//!   trapezoid in `y ∈ [0, 2π)`, doubling both grids until it settles.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bound::{bzzb_generic, directional_bound_with_tol, PeModel};
use crate::error::{check_dim, domain, Error, Result};
use crate::prior::{v_zero, Direction, GaussianPrior};
use crate::resource::ProbeSpectrum;
use crate::specfun::erfc;

pub const MAX_PROBE_DIM: usize = 8;
pub const MAX_PRIOR_SIGMA: f64 = 0.5;
/// Half-width of the prior integration window in standard deviations.
pub const PRIOR_WINDOW: f64 = 8.0;
pub const DEFAULT_MSE_TOL: f64 = 1e-10;
const START_POINTS: usize = 64;
const MAX_POINTS: usize = 8192;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub instance_id: String,
    pub achieved_mse: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
}

impl OracleReport {
    pub fn new(instance_id: impl Into<String>, achieved_mse: f64, bound: f64) -> Self {
        let margin = achieved_mse - bound;
        Self {
            instance_id: instance_id.into(),
            achieved_mse,
            bound,
            margin,
            pass: margin >= -1e-9 * bound.max(1.0),
        }
    }
}

fn spd_cholesky(m: &DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    if !m.is_square() {
        return Err(Error::IllConditioned(format!("{what} must be square")));
    }
    if (m - m.transpose()).amax() > 1e-12 * m.amax() {
        return Err(Error::IllConditioned(format!("{what} must be symmetric")));
    }
    Cholesky::new(m.clone())
        .ok_or_else(|| Error::IllConditioned(format!("{what} is not positive definite")))
}

/// `uᵀ(Σ₀ − Σ₀Hᵀ(HΣ₀Hᵀ + R)⁻¹HΣ₀)u`.
pub fn linear_gaussian_mmse(
    prior: &GaussianPrior,
    h_matrix: &DMatrix<f64>,
    noise_cov: &DMatrix<f64>,
    u: &Direction,
) -> Result<f64> {
    check_dim(prior.dim(), h_matrix.ncols())?;
    check_dim(h_matrix.nrows(), noise_cov.nrows())?;
    check_dim(prior.dim(), u.dim())?;
    spd_cholesky(noise_cov, "noise covariance")?;
    let s0 = prior.sigma0();
    let innovation = h_matrix * s0 * h_matrix.transpose() + noise_cov;
    let chol = spd_cholesky(&innovation, "innovation covariance")?;
    let uv = DVector::from_column_slice(u.as_slice());
    // uᵀΣ₀u − (HΣ₀u)ᵀ S⁻¹ (HΣ₀u)
    let g = h_matrix * (s0 * &uv);
    Ok(uv.dot(&(s0 * &uv)) - g.dot(&chol.solve(&g)))
}

/// Error probability between two equally likely unit-variance Gaussians
/// whose means differ by `d`.
pub fn gaussian_pe(d: f64) -> Result<f64> {
    if !(d >= 0.0) {
        return Err(domain(format!("mean gap must be >= 0, got {d}")));
    }
    Ok(0.5 * erfc(d / (2.0 * std::f64::consts::SQRT_2)))
}

/// Pairwise error probability of the linear-Gaussian model.
#[derive(Debug, Clone)]
pub struct LinearGaussianPe {
    h: DMatrix<f64>,
    noise: Cholesky<f64, Dyn>,
}

impl LinearGaussianPe {
    pub fn new(h_matrix: &DMatrix<f64>, noise_cov: &DMatrix<f64>) -> Result<Self> {
        check_dim(h_matrix.nrows(), noise_cov.nrows())?;
        Ok(Self {
            h: h_matrix.clone(),
            noise: spd_cholesky(noise_cov, "noise covariance")?,
        })
    }

    /// `‖R^{-1/2}Hv‖`, the whitened signal gap per unit `τ`.
    pub fn gap(&self, v: &[f64]) -> f64 {
        let hv = &self.h * DVector::from_column_slice(v);
        hv.dot(&self.noise.solve(&hv)).max(0.0).sqrt()
    }
}

impl PeModel for LinearGaussianPe {
    fn pe(&self, tau: f64, v: &[f64]) -> f64 {
        0.5 * erfc(tau * self.gap(v) / (2.0 * std::f64::consts::SQRT_2))
    }
}

/// Quadrature resolution for the phase-estimation oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PhaseGrid {
    pub nx: usize,
    pub ny: usize,
}

fn check_probe(amplitudes: &[Complex64], prior_sigma: f64) -> Result<()> {
    if amplitudes.is_empty() || amplitudes.len() > MAX_PROBE_DIM {
        return Err(domain(format!(
            "probe dimension must lie in 1..={MAX_PROBE_DIM}, got {}",
            amplitudes.len()
        )));
    }
    let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(domain(format!("probe amplitudes have norm² {norm}, expected 1")));
    }
    if !(prior_sigma > 0.0 && prior_sigma <= MAX_PRIOR_SIGMA) {
        return Err(domain(format!(
            "prior sigma must lie in (0, {MAX_PRIOR_SIGMA}], got {prior_sigma}"
        )));
    }
    Ok(())
}

/// Posterior-mean MSE of the canonical phase measurement at a fixed grid.
pub fn quantum_phase_bayes_mse(amplitudes: &[Complex64], prior_sigma: f64, grid: PhaseGrid) -> Result<f64> {
    check_probe(amplitudes, prior_sigma)?;
    if grid.nx < 3 || grid.ny < 2 * amplitudes.len() {
        return Err(domain(format!("phase grid {grid:?} too coarse")));
    }
    let half = PRIOR_WINDOW * prior_sigma;
    let hx = 2.0 * half / (grid.nx - 1) as f64;
    let xs: Vec<f64> = (0..grid.nx).map(|i| -half + i as f64 * hx).collect();
    let mut weights: Vec<f64> = xs
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let trap = if i == 0 || i == grid.nx - 1 { 0.5 } else { 1.0 };
            trap * (-0.5 * (x / prior_sigma).powi(2)).exp()
        })
        .collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);

    // a_m(x) = c_m e^{imx}
    let shifted: Vec<Vec<Complex64>> = xs
        .iter()
        .map(|&x| {
            amplitudes
                .iter()
                .enumerate()
                .map(|(m, c)| c * Complex64::from_polar(1.0, m as f64 * x))
                .collect()
        })
        .collect();

    let two_pi = 2.0 * std::f64::consts::PI;
    let hy = two_pi / grid.ny as f64;
    let mut mse = 0.0;
    let mut basis = vec![Complex64::new(0.0, 0.0); amplitudes.len()];
    for j in 0..grid.ny {
        let y = j as f64 * hy;
        for (m, b) in basis.iter_mut().enumerate() {
            *b = Complex64::from_polar(1.0, -(m as f64) * y);
        }
        let (mut a0, mut a1, mut a2) = (0.0, 0.0, 0.0);
        for ((x, w), a) in xs.iter().zip(&weights).zip(&shifted) {
            let amp: Complex64 = a.iter().zip(&basis).map(|(a, b)| a * b).sum();
            let joint = w * amp.norm_sqr() / two_pi;
            a0 += joint;
            a1 += joint * x;
            a2 += joint * x * x;
        }
        if a0 > 0.0 {
            mse += hy * (a2 - a1 * a1 / a0);
        }
    }
    Ok(mse)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergedMse {
    pub mse: f64,
    /// Change between the last two refinements.
    pub change: f64,
    pub grid: PhaseGrid,
}

/// Doubles both grids until successive MSE values differ by less than `tol`.
pub fn quantum_phase_bayes_mse_converged(
    amplitudes: &[Complex64],
    prior_sigma: f64,
    tol: f64,
) -> Result<ConvergedMse> {
    check_probe(amplitudes, prior_sigma)?;
    let mut n = START_POINTS;
    let mut prev = quantum_phase_bayes_mse(amplitudes, prior_sigma, PhaseGrid { nx: n, ny: n })?;
    while n < MAX_POINTS {
        n *= 2;
        let grid = PhaseGrid { nx: n, ny: n };
        let cur = quantum_phase_bayes_mse(amplitudes, prior_sigma, grid)?;
        let change = (cur - prev).abs();
        if change < tol {
            return Ok(ConvergedMse { mse: cur, change, grid });
        }
        prev = cur;
    }
    Err(Error::NotConverged(format!(
        "phase MSE did not settle to {tol:e} by {MAX_POINTS} points"
    )))
}

/// Photon-number spectrum `{m: |c_m|²}` of the probe.
pub fn probe_spectrum(amplitudes: &[Complex64]) -> Result<ProbeSpectrum> {
    let atoms: Vec<(f64, f64)> = amplitudes
        .iter()
        .enumerate()
        .map(|(m, c)| (m as f64, c.norm_sqr()))
        .collect();
    ProbeSpectrum::scalar(&atoms)
}

/// Equal-weight superposition of `|0⟩..|d−1⟩`.
pub fn uniform_probe(d: usize) -> Vec<Complex64> {
    let c = 1.0 / (d as f64).sqrt();
    vec![Complex64::new(c, 0.0); d]
}

#[derive(Debug, Clone)]
pub enum OracleInstance {
    LinearGaussian {
        id: String,
        prior: GaussianPrior,
        h_matrix: DMatrix<f64>,
        noise_cov: DMatrix<f64>,
        u: Direction,
    },
    QuantumPhase {
        id: String,
        amplitudes: Vec<Complex64>,
        prior_sigma: f64,
    },
    /// No data: the prior mean is the estimator and `P_e ≡ ½`.
    PriorOnly {
        id: String,
        prior: GaussianPrior,
        u: Direction,
    },
}

impl OracleInstance {
    pub fn id(&self) -> &str {
        match self {
            Self::LinearGaussian { id, .. } | Self::QuantumPhase { id, .. } | Self::PriorOnly { id, .. } => id,
        }
    }

    pub fn evaluate(&self, rel_tol: f64) -> Result<OracleReport> {
        match self {
            Self::LinearGaussian {
                id,
                prior,
                h_matrix,
                noise_cov,
                u,
            } => {
                let achieved = linear_gaussian_mmse(prior, h_matrix, noise_cov, u)?;
                let model = LinearGaussianPe::new(h_matrix, noise_cov)?;
                let v0 = v_zero(prior, u)?;
                let bound = bzzb_generic(prior, &model, u, &v0, rel_tol)?;
                Ok(OracleReport::new(id.clone(), achieved, bound))
            }
            Self::QuantumPhase {
                id,
                amplitudes,
                prior_sigma,
            } => {
                let achieved =
                    quantum_phase_bayes_mse_converged(amplitudes, *prior_sigma, DEFAULT_MSE_TOL)?;
                let prior = GaussianPrior::diagonal(&[prior_sigma * prior_sigma])?;
                let spec = probe_spectrum(amplitudes)?;
                let u = Direction::new(vec![1.0])?;
                let bound = directional_bound_with_tol(&prior, &spec, &u, None, rel_tol)?;
                Ok(OracleReport::new(id.clone(), achieved.mse, bound.z))
            }
            Self::PriorOnly { id, prior, u } => {
                let achieved = prior.quad_form(u.as_slice())?;
                let v0 = v_zero(prior, u)?;
                let half = |_: f64, _: &[f64]| 0.5;
                let bound = bzzb_generic(prior, &half, u, &v0, rel_tol)?;
                Ok(OracleReport::new(id.clone(), achieved, bound))
            }
        }
    }
}

/// Evaluates every instance; order of the reports follows the input.
pub fn verify(instances: &[OracleInstance], rel_tol: f64) -> Result<Vec<OracleReport>> {
    instances.par_iter().map(|i| i.evaluate(rel_tol)).collect()
}

fn random_spd(rng: &mut ChaCha8Rng, k: usize, scale: f64) -> DMatrix<f64> {
    let b = DMatrix::from_fn(k, k, |_, _| rng.gen_range(-1.0..1.0));
    let m = (&b * b.transpose() / k as f64 + DMatrix::identity(k, k) * 0.2) * scale;
    (&m + m.transpose()) * 0.5
}

/// `count` seeded random linear-Gaussian instances with `K ≤ 4`.
pub fn random_linear_gaussian(seed: u64, count: usize) -> Vec<OracleInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let k = rng.gen_range(1..=4);
            let rows = rng.gen_range(1..=4);
            let prior_scale = rng.gen_range(0.1..5.0);
            let noise_scale = 10f64.powf(rng.gen_range(-2.0..2.0));
            let prior = GaussianPrior::centered(random_spd(&mut rng, k, prior_scale))
                .expect("diagonally loaded SPD");
            let h_matrix = DMatrix::from_fn(rows, k, |_, _| rng.gen_range(-2.0..2.0));
            let noise_cov = random_spd(&mut rng, rows, noise_scale);
            let u = loop {
                let u: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
                if u.iter().any(|x| x.abs() > 0.1) {
                    break Direction::new(u).expect("nonzero");
                }
            };
            OracleInstance::LinearGaussian {
                id: format!("linear-gaussian-{i:02}"),
                prior,
                h_matrix,
                noise_cov,
                u,
            }
        })
        .collect()
}

/// Seeded random complex probe on `d` photon-number states.
pub fn random_probe(rng: &mut ChaCha8Rng, d: usize) -> Vec<Complex64> {
    let raw: Vec<Complex64> = (0..d)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    raw.into_iter().map(|c| c / norm).collect()
}

/// The fixed battery run by `verify --suite default`.
pub fn default_suite() -> Vec<OracleInstance> {
    let mut out = vec![OracleInstance::PriorOnly {
        id: "prior-only".into(),
        prior: GaussianPrior::centered(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]))
            .expect("SPD"),
        u: Direction::new(vec![1.0, 0.0]).expect("nonzero"),
    }];
    out.extend(random_linear_gaussian(20_240_611, 20));
    for d in [1usize, 2, 3, 4] {
        for sigma in [0.05, 0.1, 0.2] {
            out.push(OracleInstance::QuantumPhase {
                id: format!("phase-uniform-d{d}-s{sigma}"),
                amplitudes: uniform_probe(d),
                prior_sigma: sigma,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..4 {
        let d = 2 + i % 3;
        out.push(OracleInstance::QuantumPhase {
            id: format!("phase-random-{i}-d{d}"),
            amplitudes: random_probe(&mut rng, d),
            prior_sigma: 0.1,
        });
    }
    out
}
