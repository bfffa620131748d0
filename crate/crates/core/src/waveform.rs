//! Continuous-time phase waveform limits.
//!
//! Mode `l` carries `n_l = dt·I(t_l)` photons. The resource at time `t` is
//! bounded by the prior-weighted flux
//! `H₊(t) ≤ (1/Σ₀(t,t)) ∫ |Σ₀(t,t′)| ⟨I(t′)⟩ dt′`, evaluated here with the
//! rectangle rule on the flux grid and truncated at `|t − t′| ≤ 20 T₀`.

use rayon::prelude::*;
use serde::Serialize;

use crate::bound::heisenberg_limit;
use crate::error::{check_dim, domain, Result};
use crate::prior::OUProcess;

/// Relative spread of grid steps accepted as uniform.
pub const UNIFORM_GRID_TOL: f64 = 1e-9;
/// Kernel support in units of the correlation time.
pub const KERNEL_CUTOFF: f64 = 20.0;

/// Mean photon flux `⟨I(t_l)⟩` on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxProfile {
    grid: Vec<f64>,
    flux: Vec<f64>,
}

impl FluxProfile {
    pub fn new(grid: Vec<f64>, flux: Vec<f64>) -> Result<Self> {
        check_dim(grid.len(), flux.len())?;
        if grid.is_empty() {
            return Err(domain("flux profile must not be empty"));
        }
        if grid.iter().any(|t| !t.is_finite()) {
            return Err(domain("flux grid must be finite"));
        }
        if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
            return Err(domain(format!(
                "flux grid must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(i) = flux.iter().find(|i| !(**i >= 0.0 && i.is_finite())) {
            return Err(domain(format!("flux must be finite and >= 0, got {i}")));
        }
        Ok(Self { grid, flux })
    }

    pub fn constant(grid: Vec<f64>, level: f64) -> Result<Self> {
        let flux = vec![level; grid.len()];
        Self::new(grid, flux)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn flux(&self) -> &[f64] {
        &self.flux
    }
}

/// Common step of a uniform grid.
pub fn uniform_step(grid: &[f64]) -> Result<f64> {
    if grid.len() < 2 {
        return Err(domain("a uniform step needs at least two grid points"));
    }
    let dt = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
    for w in grid.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > UNIFORM_GRID_TOL * dt {
            return Err(domain(format!(
                "grid is not uniform: step {} differs from {dt}",
                w[1] - w[0]
            )));
        }
    }
    Ok(dt)
}

/// Mean photon number per mode, `⟨n_l⟩ = dt·⟨I(t_l)⟩`.
pub fn discretize(flux: &FluxProfile) -> Result<Vec<f64>> {
    let dt = uniform_step(&flux.grid)?;
    Ok(flux.flux.iter().map(|i| dt * i).collect())
}

fn check_aligned(ou: &OUProcess, flux: &FluxProfile, dt: f64) -> Result<()> {
    check_dim(ou.grid().len(), flux.grid.len())?;
    let tol = UNIFORM_GRID_TOL * dt.max(f64::MIN_POSITIVE);
    if let Some((a, b)) = ou
        .grid()
        .iter()
        .zip(&flux.grid)
        .find(|(a, b)| (*a - *b).abs() > tol)
    {
        return Err(domain(format!("prior and flux grids differ ({a} vs {b})")));
    }
    Ok(())
}

/// Weighted-flux upper bound on `H₊(t_k)`.
pub fn h_plus_time_upper(ou: &OUProcess, flux: &FluxProfile, t_index: usize) -> Result<f64> {
    let photons = discretize(flux)?;
    let dt = uniform_step(&flux.grid)?;
    check_aligned(ou, flux, dt)?;
    weighted_sum(ou, &photons, t_index)
}

fn weighted_sum(ou: &OUProcess, photons: &[f64], t_index: usize) -> Result<f64> {
    let grid = ou.grid();
    let Some(&t) = grid.get(t_index) else {
        return Err(domain(format!("time index {t_index} out of range 0..{}", grid.len())));
    };
    let cutoff = KERNEL_CUTOFF * ou.t_corr();
    let diag = ou.kernel(t, t);
    Ok(grid
        .iter()
        .zip(photons)
        .filter(|(s, _)| (**s - t).abs() <= cutoff)
        .map(|(&s, n)| ou.kernel(t, s).abs() * n)
        .sum::<f64>()
        / diag)
}

/// Heisenberg limit on `Σ(t_k, t_k)` from the weighted-flux resource.
pub fn hlimit_time(ou: &OUProcess, flux: &FluxProfile, t_index: usize) -> Result<f64> {
    Ok(heisenberg_limit(h_plus_time_upper(ou, flux, t_index)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveformRow {
    pub t: f64,
    pub h_plus_upper: f64,
    pub hlimit: f64,
}

/// [`h_plus_time_upper`] and [`hlimit_time`] at every grid point.
pub fn time_resolved(ou: &OUProcess, flux: &FluxProfile) -> Result<Vec<WaveformRow>> {
    let photons = discretize(flux)?;
    let dt = uniform_step(&flux.grid)?;
    check_aligned(ou, flux, dt)?;
    (0..ou.grid().len())
        .into_par_iter()
        .map(|k| {
            let h = weighted_sum(ou, &photons, k)?;
            Ok(WaveformRow {
                t: ou.grid()[k],
                h_plus_upper: h,
                hlimit: heisenberg_limit(h),
            })
        })
        .collect()
}

/// Least-squares slope of `ln hlimit` against `ln ⟨I⟩` for constant flux
/// at each level, evaluated at the middle of the prior's grid.
pub fn scaling_check(ou: &OUProcess, flux_levels: &[f64]) -> Result<f64> {
    if flux_levels.len() < 3 {
        return Err(domain(format!(
            "scaling check needs at least 3 flux levels, got {}",
            flux_levels.len()
        )));
    }
    if let Some(l) = flux_levels.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(domain(format!("flux levels must be positive, got {l}")));
    }
    let mid = ou.grid().len() / 2;
    let points = flux_levels
        .iter()
        .map(|&level| {
            let flux = FluxProfile::constant(ou.grid().to_vec(), level)?;
            Ok((level.ln(), hlimit_time(ou, &flux, mid)?.ln()))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(domain("flux levels must not all be equal"));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}
