//! Probe-side quantities: the generator spectrum `P_m`, the resource
//! `H₊ = ⟨|vᵀn − H₀|⟩`, the resource time `τ_F = 1/(2λH₊)`, and the
//! fidelity / error-probability lower bounds built from them.
//!
//! The chain is
//!
//! ```text
//! F ≥ |⟨exp(iτ vᵀn)⟩|² = Σ_{m,l} P_m P_l cos[τ vᵀ(m − l)]
//!   ≥ 1 − 2λτ⟨|vᵀn − H₀|⟩
//! F ≥ Λ(τ/τ_F)                       (since F ≥ 0)
//! P_e ≥ ½[1 − sqrt(1 − F)]
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, domain, Result};
use crate::specfun::{lambda, lambda_fn};

/// Tolerance on `Σp = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Projected values closer than this (relative to `max(1, |s|)`) are merged.
pub const MERGE_TOL: f64 = 1e-12;

/// One joint eigenvalue vector `m` of the generators with its probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumAtom {
    pub m: Vec<f64>,
    pub p: f64,
}

/// Distribution of joint generator eigenvalues under the (purified) probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectrumFile")]
pub struct ProbeSpectrum {
    dimension: usize,
    support: Vec<SpectrumAtom>,
}

#[derive(Deserialize)]
struct SpectrumFile {
    dimension: usize,
    support: Vec<SpectrumAtom>,
}

impl TryFrom<SpectrumFile> for ProbeSpectrum {
    type Error = crate::error::Error;

    fn try_from(raw: SpectrumFile) -> Result<Self> {
        Self::from_atoms(raw.dimension, raw.support)
    }
}

impl ProbeSpectrum {
    pub fn new(dimension: usize, atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        Self::from_atoms(
            dimension,
            atoms
                .into_iter()
                .map(|(m, p)| SpectrumAtom { m, p })
                .collect(),
        )
    }

    pub fn from_atoms(dimension: usize, support: Vec<SpectrumAtom>) -> Result<Self> {
        if dimension == 0 {
            return Err(domain("spectrum dimension must be >= 1"));
        }
        if support.is_empty() {
            return Err(domain("spectrum support must not be empty"));
        }
        for atom in &support {
            check_dim(dimension, atom.m.len())?;
            if atom.m.iter().any(|x| !x.is_finite()) {
                return Err(domain("eigenvalues must be finite"));
            }
            if !(atom.p >= 0.0 && atom.p.is_finite()) {
                return Err(domain(format!("probability must be >= 0, got {}", atom.p)));
            }
        }
        let total: f64 = support.iter().map(|a| a.p).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(domain(format!("probabilities sum to {total}, expected 1")));
        }
        Ok(Self { dimension, support })
    }

    /// Spectrum of a single generator (`K = 1`) from `(value, p)` pairs.
    pub fn scalar(atoms: &[(f64, f64)]) -> Result<Self> {
        Self::new(1, atoms.iter().map(|&(m, p)| (vec![m], p)).collect())
    }

    /// Induced by the pure probe `Σ_j c_j |m_j⟩` (eigenstates assumed distinct).
    pub fn from_pure_probe(dimension: usize, amplitudes: &[(Vec<f64>, Complex64)]) -> Result<Self> {
        Self::new(
            dimension,
            amplitudes
                .iter()
                .map(|(m, c)| (m.clone(), c.norm_sqr()))
                .collect(),
        )
    }

    /// Product distribution of independent per-mode spectra.
    pub fn product(modes: &[ProbeSpectrum]) -> Result<Self> {
        let mut atoms: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
        for mode in modes {
            let mut next = Vec::with_capacity(atoms.len() * mode.support.len());
            for (m, p) in &atoms {
                for atom in &mode.support {
                    let mut joint = m.clone();
                    joint.extend_from_slice(&atom.m);
                    next.push((joint, p * atom.p));
                }
            }
            atoms = next;
        }
        let dimension = modes.iter().map(|s| s.dimension).sum();
        Self::new(dimension, atoms)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn support(&self) -> &[SpectrumAtom] {
        &self.support
    }

    /// Componentwise mean `⟨n⟩`.
    pub fn mean(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dimension];
        for atom in &self.support {
            for (o, m) in out.iter_mut().zip(&atom.m) {
                *o += atom.p * m;
            }
        }
        out
    }

    /// Every eigenvalue divided by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dimension: self.dimension,
            support: self
                .support
                .iter()
                .map(|a| SpectrumAtom {
                    m: a.m.iter().map(|x| x / c).collect(),
                    p: a.p,
                })
                .collect(),
        }
    }
}

/// Scalar marginal of `vᵀm`, sorted by value.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarDistribution {
    atoms: Vec<(f64, f64)>,
}

impl ScalarDistribution {
    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// Lower weighted median: the smallest value whose cumulative
    /// probability reaches one half.
    pub fn median(&self) -> f64 {
        let mut cum = 0.0;
        for &(s, p) in &self.atoms {
            cum += p;
            if cum >= 0.5 - NORMALIZATION_TOL {
                return s;
            }
        }
        self.atoms.last().map(|a| a.0).unwrap_or(0.0)
    }

    /// `Σ p |s − h0|`.
    pub fn mean_abs_deviation(&self, h0: f64) -> f64 {
        self.atoms.iter().map(|&(s, p)| p * (s - h0).abs()).sum()
    }
}

pub fn project(spec: &ProbeSpectrum, v: &[f64]) -> Result<ScalarDistribution> {
    check_dim(spec.dimension, v.len())?;
    let mut values: Vec<(f64, f64)> = spec
        .support
        .iter()
        .map(|a| (a.m.iter().zip(v).map(|(m, w)| m * w).sum(), a.p))
        .collect();
    values.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(values.len());
    for (s, p) in values {
        match atoms.last_mut() {
            Some(last) if (s - last.0).abs() <= MERGE_TOL * last.0.abs().max(1.0) => last.1 += p,
            _ => atoms.push((s, p)),
        }
    }
    Ok(ScalarDistribution { atoms })
}

/// `H₊`, the offset `H₀` it was measured from, and `τ_F = 1/(2λH₊)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResourceSummary {
    pub h_plus: f64,
    pub h0: f64,
    /// `+∞` exactly when `h_plus == 0`.
    pub tau_f: f64,
}

impl ResourceSummary {
    pub fn from_h_plus(h_plus: f64, h0: f64) -> Self {
        let tau_f = if h_plus > 0.0 {
            1.0 / (2.0 * lambda() * h_plus)
        } else {
            f64::INFINITY
        };
        Self { h_plus, h0, tau_f }
    }
}

/// Mean absolute deviation of `vᵀn` about `h0`, or about the lower median
/// when `h0` is `None` (which minimizes it).
pub fn h_plus(spec: &ProbeSpectrum, v: &[f64], h0: Option<f64>) -> Result<ResourceSummary> {
    let dist = project(spec, v)?;
    let h0 = match h0 {
        Some(h) if !h.is_finite() => return Err(domain(format!("H0 must be finite, got {h}"))),
        Some(h) => h,
        None => dist.median(),
    };
    Ok(ResourceSummary::from_h_plus(dist.mean_abs_deviation(h0), h0))
}

/// `|⟨exp(iτ vᵀn)⟩|²` evaluated on the projected distribution.
pub fn char_fn_fidelity_lb(spec: &ProbeSpectrum, v: &[f64], tau: f64) -> Result<f64> {
    if !tau.is_finite() {
        return Err(domain(format!("tau must be finite, got {tau}")));
    }
    let dist = project(spec, v)?;
    let (re, im) = dist.atoms.iter().fold((0.0, 0.0), |(re, im), &(s, p)| {
        let (sin, cos) = (tau * s).sin_cos();
        (re + p * cos, im + p * sin)
    });
    Ok((re * re + im * im).min(1.0))
}

/// `Λ(τ/τ_F) = max(1 − 2λH₊τ, 0)`.
pub fn fidelity_lb_truncated(summary: &ResourceSummary, tau: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(domain(format!("tau must be >= 0, got {tau}")));
    }
    if summary.tau_f.is_infinite() {
        return Ok(1.0);
    }
    lambda_fn(tau / summary.tau_f)
}

/// Error-probability bound `½[1 − sqrt(1 − F)]` from a fidelity lower bound.
pub fn pe_lb_quantum(fidelity_lb: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&fidelity_lb) {
        return Err(domain(format!("fidelity must lie in [0, 1], got {fidelity_lb}")));
    }
    Ok(0.5 * (1.0 - (1.0 - fidelity_lb).sqrt()))
}

/// Pure-state fidelity `|⟨ψ|exp(iτ vᵀn)|ψ⟩|²` from an explicit state vector
/// with amplitudes `sqrt(P_m)` on the unmerged eigenbasis.
pub fn exact_pure_fidelity(spec: &ProbeSpectrum, v: &[f64], tau: f64) -> Result<f64> {
    check_dim(spec.dimension, v.len())?;
    if !tau.is_finite() {
        return Err(domain(format!("tau must be finite, got {tau}")));
    }
    let psi: Vec<Complex64> = spec
        .support
        .iter()
        .map(|a| Complex64::new(a.p.sqrt(), 0.0))
        .collect();
    let overlap: Complex64 = spec
        .support
        .iter()
        .zip(&psi)
        .map(|(a, c)| {
            let phase: f64 = tau * a.m.iter().zip(v).map(|(m, w)| m * w).sum::<f64>();
            c.conj() * Complex64::from_polar(1.0, phase) * c
        })
        .sum();
    Ok(overlap.norm_sqr())
}
