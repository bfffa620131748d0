//! The quantum Bell–Ziv–Zakai bound for Gaussian priors.
//!
//! With `v = v₀` the bound on `uᵀΣu` is
//!
//! ```text
//! Z = ½ ∫₀^{τ_F} τ erfc(τ/τ₀) (1 − sqrt(τ/τ_F)) dτ
//! ```
//!
//! with limits `Z → τ₀²/8 = uᵀΣ₀u` as `τ_F/τ₀ → ∞` and
//! `Z → τ_F²/20 = 1/(80λ²H₊²)` as `τ₀/τ_F → ∞`. The prior side converges
//! only like `sqrt(τ₀/τ_F)`: the leading correction is
//! `−½ Γ(7/4)/(√π·5/2) · τ₀² sqrt(τ₀/τ_F)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_dim, domain, Error, Result};
use crate::prior::{tau0, v_zero, Direction, GaussianPrior};
use crate::quadrature::{integrate_with_breaks, QuadOptions};
use crate::resource::{h_plus, ProbeSpectrum, ResourceSummary};
use crate::specfun::{erfc, lambda};

pub const DEFAULT_REL_TOL: f64 = 1e-8;

/// `τ₀/τ_F` below this is labelled prior-dominated.
pub const PRIOR_REGIME_RATIO: f64 = 0.01;
/// `τ₀/τ_F` above this is labelled Heisenberg.
pub const HEISENBERG_REGIME_RATIO: f64 = 100.0;

/// Relative floor (against the running maximum) at which the generic
/// evaluator stops extending its integration range.
pub const TRUNCATION_REL: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    PriorDominated,
    Intermediate,
    Heisenberg,
}

impl Regime {
    pub fn classify(tau0: f64, tau_f: f64) -> Self {
        let ratio = tau0 / tau_f;
        if ratio < PRIOR_REGIME_RATIO {
            Regime::PriorDominated
        } else if ratio > HEISENBERG_REGIME_RATIO {
            Regime::Heisenberg
        } else {
            Regime::Intermediate
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::PriorDominated => "prior-dominated",
            Regime::Intermediate => "intermediate",
            Regime::Heisenberg => "heisenberg",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    pub v0: Vec<f64>,
    pub tau0: f64,
    pub tau_f: f64,
    pub h_plus: f64,
    pub h0: f64,
    pub z: f64,
    /// `uᵀΣ₀u`.
    pub prior_limit: f64,
    /// `τ_F²/20`, infinite when `τ_F` is.
    pub asymptotic_limit: f64,
    pub regime: Regime,
}

fn check_rel_tol(rel_tol: f64) -> Result<()> {
    if rel_tol > 1e-14 && rel_tol < 1e-2 {
        Ok(())
    } else {
        Err(domain(format!("rel_tol must lie in (1e-14, 1e-2), got {rel_tol}")))
    }
}

/// The `Z` integral. Finite `τ_F` is handled with `τ = τ_F s²`, which turns
/// the integrand into `τ_F² s³ (1 − s) erfc((τ_F/τ₀) s²)` on `[0, 1]`.
pub fn z_integral(tau0: f64, tau_f: f64, rel_tol: f64) -> Result<f64> {
    if !(tau0 > 0.0 && tau0.is_finite()) {
        return Err(domain(format!("tau0 must be positive and finite, got {tau0}")));
    }
    if !(tau_f > 0.0) {
        return Err(domain(format!("tau_f must be positive, got {tau_f}")));
    }
    check_rel_tol(rel_tol)?;
    if tau_f.is_infinite() {
        return Ok(tau0 * tau0 / 8.0);
    }
    let r = tau_f / tau0;
    // erfc(r s²) has decayed to ~1e-17 at r s² = 6
    let breaks = [(1.0 / r).sqrt(), (6.0 / r).sqrt()];
    let res = integrate_with_breaks(
        |s| s * s * s * (1.0 - s) * erfc(r * s * s),
        0.0,
        1.0,
        &breaks,
        QuadOptions::with_rel_tol(0.1 * rel_tol),
    );
    Ok(tau_f * tau_f * res.value)
}

pub fn directional_bound(
    prior: &GaussianPrior,
    spec: &ProbeSpectrum,
    u: &Direction,
    h0: Option<f64>,
) -> Result<BoundResult> {
    directional_bound_with_tol(prior, spec, u, h0, DEFAULT_REL_TOL)
}

pub fn directional_bound_with_tol(
    prior: &GaussianPrior,
    spec: &ProbeSpectrum,
    u: &Direction,
    h0: Option<f64>,
    rel_tol: f64,
) -> Result<BoundResult> {
    check_dim(prior.dim(), u.dim())?;
    check_dim(prior.dim(), spec.dimension())?;
    let v0 = v_zero(prior, u)?;
    let prior_limit = prior.quad_form(u.as_slice())?;
    let t0 = 2.0 * (2.0 * prior_limit).sqrt();
    let resource = h_plus(spec, &v0, h0)?;
    let z = z_integral(t0, resource.tau_f, rel_tol)?;
    Ok(BoundResult {
        tau0: t0,
        tau_f: resource.tau_f,
        h_plus: resource.h_plus,
        h0: resource.h0,
        z,
        prior_limit,
        asymptotic_limit: resource.tau_f * resource.tau_f / 20.0,
        regime: Regime::classify(t0, resource.tau_f),
        v0,
    })
}

/// Bound on the single variance `Σ_kk` (`u = e_k`).
pub fn parameter_bound(prior: &GaussianPrior, spec: &ProbeSpectrum, k: usize) -> Result<BoundResult> {
    let u = Direction::axis(prior.dim(), k)?;
    directional_bound(prior, spec, &u, None)
}

/// `(1/Σ₀kk) Σ_l |Σ₀kl| ⟨n_l⟩`, an upper bound on `H₊k` taken about
/// `H₀ = 0` for nonnegative generators such as photon number.
pub fn weighted_photon_upper(prior: &GaussianPrior, mean_photons: &[f64], k: usize) -> Result<f64> {
    check_dim(prior.dim(), mean_photons.len())?;
    if k >= prior.dim() {
        return Err(domain(format!("parameter index {k} out of range 0..{}", prior.dim())));
    }
    if let Some(n) = mean_photons.iter().find(|n| !(**n >= 0.0 && n.is_finite())) {
        return Err(domain(format!("mean photon numbers must be >= 0, got {n}")));
    }
    let s = prior.sigma0();
    let diag = s[(k, k)];
    Ok(mean_photons
        .iter()
        .enumerate()
        .map(|(l, n)| s[(k, l)].abs() * n)
        .sum::<f64>()
        / diag)
}

/// Heisenberg limit `1/(80λ²H₊²)`; infinite when `H₊ = 0`.
pub fn heisenberg_limit(h_plus: f64) -> f64 {
    if h_plus > 0.0 {
        1.0 / (80.0 * lambda().powi(2) * h_plus * h_plus)
    } else {
        f64::INFINITY
    }
}

/// An x-independent model of the pairwise error probability `P_e(τ, v)`.
pub trait PeModel {
    fn pe(&self, tau: f64, v: &[f64]) -> f64;

    /// Points in `τ` where the model is not smooth.
    fn breakpoints(&self, _v: &[f64]) -> Vec<f64> {
        Vec::new()
    }
}

impl<F: Fn(f64, &[f64]) -> f64> PeModel for F {
    fn pe(&self, tau: f64, v: &[f64]) -> f64 {
        self(tau, v)
    }
}

/// `½[1 − sqrt(1 − Λ(τ/τ_F))] = ½(1 − sqrt(τ/τ_F))` up to `τ_F`, zero after.
#[derive(Debug, Clone, Copy)]
pub struct QuantumChainPe {
    pub resource: ResourceSummary,
}

impl PeModel for QuantumChainPe {
    fn pe(&self, tau: f64, _v: &[f64]) -> f64 {
        let r = (tau / self.resource.tau_f).min(1.0);
        0.5 * (1.0 - r.sqrt())
    }

    fn breakpoints(&self, _v: &[f64]) -> Vec<f64> {
        if self.resource.tau_f.is_finite() {
            vec![self.resource.tau_f]
        } else {
            Vec::new()
        }
    }
}

/// `∫₀^∞ τ erfc(τ/τ₀(v)) P_e(τ, v) dτ` for a single fixed `v` with `uᵀv = 1`.
///
/// The range is extended panel by panel until the envelope
/// `½ τ erfc(τ/τ₀)` (which dominates the integrand because `P_e ≤ ½`) drops
/// below [`TRUNCATION_REL`] of the largest integrand value seen so far.
pub fn bzzb_generic<M: PeModel + ?Sized>(
    prior: &GaussianPrior,
    pe_model: &M,
    u: &Direction,
    v: &[f64],
    rel_tol: f64,
) -> Result<f64> {
    check_dim(prior.dim(), u.dim())?;
    check_dim(prior.dim(), v.len())?;
    check_rel_tol(rel_tol)?;
    let uv: f64 = u.as_slice().iter().zip(v).map(|(a, b)| a * b).sum();
    if (uv - 1.0).abs() > 1e-9 {
        return Err(domain(format!("shift direction must satisfy uᵀv = 1, got {uv}")));
    }
    let t0 = tau0(prior, v)?;
    let breaks = pe_model.breakpoints(v);

    let mut violation: Option<f64> = None;
    let mut integrand = |tau: f64| {
        let p = pe_model.pe(tau, v);
        if !(0.0..=0.5).contains(&p) {
            violation.get_or_insert(p);
            return 0.0;
        }
        tau * erfc(tau / t0) * p
    };

    let panel = 0.5 * t0;
    let opts = QuadOptions::with_rel_tol(0.1 * rel_tol);
    let mut total = 0.0;
    let mut running_max: f64 = 0.0;
    let mut a = 0.0;
    loop {
        let b = a + panel;
        let res = integrate_with_breaks(&mut integrand, a, b, &breaks, opts);
        total += res.value;
        running_max = running_max.max(res.max_abs_f);
        let envelope = 0.5 * b * erfc(b / t0);
        a = b;
        if envelope <= TRUNCATION_REL * running_max || envelope == 0.0 {
            break;
        }
    }
    if let Some(p) = violation {
        return Err(Error::Contract(format!(
            "pe_model returned {p}, outside [0, 1/2]"
        )));
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    /// `τ₀/τ_F`.
    pub ratio: f64,
    pub z_over_tauf2: f64,
    pub z_over_tau02: f64,
    /// `τ₀²/8` in units of `τ_F²`.
    pub prior_limit_norm: f64,
    /// `τ_F²/20` in units of `τ_F²`.
    pub asymptotic_limit_norm: f64,
}

/// Normalized `Z` on a grid of `τ₀/τ_F` values (evaluated with `τ_F = 1`).
pub fn scan(ratios: &[f64], rel_tol: f64) -> Result<Vec<ScanRow>> {
    if let Some(r) = ratios.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(domain(format!("scan ratios must be positive, got {r}")));
    }
    ratios
        .par_iter()
        .map(|&ratio| {
            let z = z_integral(ratio, 1.0, rel_tol)?;
            Ok(ScanRow {
                ratio,
                z_over_tauf2: z,
                z_over_tau02: z / (ratio * ratio),
                prior_limit_norm: ratio * ratio / 8.0,
                asymptotic_limit_norm: 1.0 / 20.0,
            })
        })
        .collect()
}

/// `count` geometrically spaced values from `start` to `stop` inclusive.
pub fn geometric_grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop > 0.0 && start.is_finite() && stop.is_finite()) {
        return Err(domain("geometric grid endpoints must be positive"));
    }
    match count {
        0 => Err(domain("geometric grid needs at least one point")),
        1 => Ok(vec![start]),
        _ => {
            let (la, lb) = (start.ln(), stop.ln());
            let step = (lb - la) / (count - 1) as f64;
            Ok((0..count)
                .map(|i| match i {
                    0 => start,
                    _ if i == count - 1 => stop,
                    _ => (la + step * i as f64).exp(),
                })
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_direction, random_prior, random_spectrum};
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // reference values from 40-digit adaptive quadrature
    const Z_UNIT: f64 = 0.026_085_168_338_558_738;
    const Z_HEISENBERG_1E4: f64 = 0.049_997_313_382_938_906;
    const Z_PRIOR_1E3: f64 = 0.121_720_556_763_193_22;
    const LEADING_PRIOR_COEF: f64 = 0.103_705_100_855_444_00;

    /// Plain trapezoid in τ, no substitution.
    fn trapezoid_z(t0: f64, tf: f64, n: usize) -> f64 {
        let h = tf / n as f64;
        let f = |t: f64| 0.5 * t * erfc(t / t0) * (1.0 - (t / tf).sqrt());
        let inner: f64 = (1..n).map(|i| f(i as f64 * h)).sum();
        h * (inner + 0.5 * (f(0.0) + f(tf)))
    }

    fn corr_prior() -> GaussianPrior {
        GaussianPrior::centered(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap()
    }

    #[test]
    fn z_examples() {
        assert_eq!(z_integral(1.0, f64::INFINITY, 1e-8).unwrap(), 0.125);
        let z = z_integral(1e4, 1.0, 1e-8).unwrap();
        assert!((z / 0.05 - 1.0).abs() < 5e-3);
        assert!((z - Z_HEISENBERG_1E4).abs() < 1e-9 * Z_HEISENBERG_1E4);
        let z = z_integral(1.0, 1.0, 1e-10).unwrap();
        assert!(z > 0.0 && z < 0.05);
        let oracle = trapezoid_z(1.0, 1.0, 1_000_000);
        assert!((z - oracle).abs() < 1e-9, "z={z} oracle={oracle}");
        assert!((z - Z_UNIT).abs() < 1e-10 * Z_UNIT);
    }

    #[test]
    fn z_rejects_bad_arguments() {
        assert!(z_integral(0.0, 1.0, 1e-8).is_err());
        assert!(z_integral(-1.0, 1.0, 1e-8).is_err());
        assert!(z_integral(1.0, 0.0, 1e-8).is_err());
        assert!(z_integral(1.0, 1.0, 1e-15).is_err());
        assert!(z_integral(1.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn prior_side_converges_like_sqrt_ratio() {
        let z = z_integral(1e-3, 1.0, 1e-10).unwrap() / 1e-6;
        assert!((z - Z_PRIOR_1E3).abs() < 1e-9);
        for ratio in [1e-6, 1e-5, 1e-4, 1e-3] {
            let deficit = 0.125 - z_integral(ratio, 1.0, 1e-10).unwrap() / (ratio * ratio);
            let lead = LEADING_PRIOR_COEF * ratio.sqrt();
            assert!((deficit / lead - 1.0).abs() < 0.01, "ratio={ratio}");
        }
    }

    #[test]
    fn heisenberg_side_converges_like_inverse_ratio() {
        // Z/τ_F² = 1/20 − (1/(21√π)) τ_F/τ₀ + ...
        for ratio in [1e2, 1e3, 1e4] {
            let z = z_integral(ratio, 1.0, 1e-10).unwrap();
            let deficit = 0.05 - z;
            let lead = 1.0 / (21.0 * std::f64::consts::PI.sqrt() * ratio);
            assert!((deficit / lead - 1.0).abs() < 0.02, "ratio={ratio}");
            assert!((z / 0.05 - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn deterministic_spectrum_gives_prior_limit() {
        let prior = GaussianPrior::diagonal(&[0.09]).unwrap();
        let spec = ProbeSpectrum::scalar(&[(5.0, 1.0)]).unwrap();
        let r = directional_bound(&prior, &spec, &Direction::new(vec![1.0]).unwrap(), None).unwrap();
        assert_eq!(r.regime, Regime::PriorDominated);
        assert!(r.tau_f.is_infinite() && r.asymptotic_limit.is_infinite());
        assert!((r.z - 0.09).abs() < 1e-15);
    }

    #[test]
    fn diagonal_prior_reduces_to_single_parameter() {
        let prior = GaussianPrior::diagonal(&[0.5, 2.0, 0.1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spec = random_spectrum(&mut rng, 3, 12, 9);
        for k in 0..3 {
            let r = parameter_bound(&prior, &spec, k).unwrap();
            let marginal = ProbeSpectrum::new(
                1,
                spec.support().iter().map(|a| (vec![a.m[k]], a.p)).collect(),
            )
            .unwrap();
            let single = h_plus(&marginal, &[1.0], None).unwrap();
            assert!((r.h_plus - single.h_plus).abs() < 1e-12);
            let one = GaussianPrior::diagonal(&[prior.sigma0()[(k, k)]]).unwrap();
            let r1 = directional_bound(&one, &marginal, &Direction::new(vec![1.0]).unwrap(), None)
                .unwrap();
            assert!((r.z - r1.z).abs() < 1e-14 * r1.z.max(1e-300));
        }
    }

    #[test]
    fn correlated_example_by_hand() {
        let spec = ProbeSpectrum::new(2, vec![(vec![0.0, 0.0], 0.5), (vec![1.0, 1.0], 0.5)]).unwrap();
        let r = directional_bound(&corr_prior(), &spec, &Direction::new(vec![1.0, 0.0]).unwrap(), None)
            .unwrap();
        // projections (2n₁ + n₂)/2 ∈ {0, 1.5}; lower median 0
        assert_eq!(r.v0, vec![1.0, 0.5]);
        assert!((r.h_plus - 0.75).abs() < 1e-15);
        assert!((r.tau0 - 4.0).abs() < 1e-14);
        assert!((r.tau_f - 0.920_033_426_459_533_97).abs() < 1e-12);
        assert!((r.z - 0.037_127_342_651_792_464).abs() < 1e-9 * r.z);
        assert!((r.prior_limit - 2.0).abs() < 1e-15);
        assert!((r.prior_limit - r.tau0 * r.tau0 / 8.0).abs() < 1e-9);
        assert_eq!(r.regime, Regime::Intermediate);
    }

    #[test]
    fn parameter_bound_examples() {
        let one = GaussianPrior::diagonal(&[0.3]).unwrap();
        let spec = ProbeSpectrum::scalar(&[(0.0, 0.2), (3.0, 0.5), (4.0, 0.3)]).unwrap();
        let a = parameter_bound(&one, &spec, 0).unwrap();
        let b = directional_bound(&one, &spec, &Direction::new(vec![1.0]).unwrap(), None).unwrap();
        assert_eq!(a, b);
        assert!(parameter_bound(&one, &spec, 1).is_err());
        assert!((heisenberg_limit(a.h_plus) - a.asymptotic_limit).abs() < 1e-12 * a.asymptotic_limit);
    }

    #[test]
    fn ou_two_point_weighting() {
        use crate::prior::{ou_covariance, OUProcess};
        // |Δt| = T₀ ln 2 makes the correlation exactly 1/2
        let ou = OUProcess::new(1.0, 1.0, vec![0.0, std::f64::consts::LN_2]).unwrap();
        let prior = ou_covariance(&ou).unwrap();
        let modes = [
            ProbeSpectrum::scalar(&[(0.0, 0.5), (2.0, 0.5)]).unwrap(),
            ProbeSpectrum::scalar(&[(0.0, 0.5), (4.0, 0.5)]).unwrap(),
        ];
        let spec = ProbeSpectrum::product(&modes).unwrap();
        // projections n₁ + n₂/2 ∈ {0, 2, 2, 4}
        let r = parameter_bound(&prior, &spec, 0).unwrap();
        assert!((r.h0 - 2.0).abs() < 1e-12);
        assert!((r.h_plus - 1.0).abs() < 1e-12);
        let about_zero = h_plus(&spec, &r.v0, Some(0.0)).unwrap().h_plus;
        assert!((about_zero - 2.0).abs() < 1e-12);
        let upper = weighted_photon_upper(&prior, &spec.mean(), 0).unwrap();
        assert!((upper - 2.0).abs() < 1e-12);
        assert!(r.h_plus <= upper);
    }

    #[test]
    fn weighted_photon_examples() {
        let diag = GaussianPrior::diagonal(&[0.4, 0.9]).unwrap();
        assert_eq!(weighted_photon_upper(&diag, &[3.0, 5.0], 1).unwrap(), 5.0);
        assert_eq!(weighted_photon_upper(&corr_prior(), &[3.0, 5.0], 0).unwrap(), 5.5);
        assert_eq!(weighted_photon_upper(&corr_prior(), &[0.0, 0.0], 0).unwrap(), 0.0);
        assert!(heisenberg_limit(0.0).is_infinite());
        assert!(weighted_photon_upper(&corr_prior(), &[-1.0, 0.0], 0).is_err());
        assert!(weighted_photon_upper(&corr_prior(), &[1.0, 0.0], 2).is_err());
    }

    #[test]
    fn weighted_upper_dominates_h_plus_about_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..30 {
            let k = rng.gen_range(1..=4);
            let prior = random_prior(&mut rng, k);
            let spec = random_spectrum(&mut rng, k, 8, 6);
            let j = rng.gen_range(0..k);
            let v0 = v_zero(&prior, &Direction::axis(k, j).unwrap()).unwrap();
            let exact = h_plus(&spec, &v0, Some(0.0)).unwrap().h_plus;
            let upper = weighted_photon_upper(&prior, &spec.mean(), j).unwrap();
            assert!(exact <= upper + 1e-12);
        }
    }

    #[test]
    fn generic_prior_only_is_prior_variance() {
        let prior = corr_prior();
        let u = Direction::new(vec![0.3, -1.0]).unwrap();
        let v0 = v_zero(&prior, &u).unwrap();
        let half = |_: f64, _: &[f64]| 0.5;
        let got = bzzb_generic(&prior, &half, &u, &v0, 1e-10).unwrap();
        let want = prior.quad_form(u.as_slice()).unwrap();
        assert!((got - want).abs() < 1e-9 * want);
    }

    #[test]
    fn generic_with_quantum_chain_matches_z() {
        let prior = corr_prior();
        let u = Direction::new(vec![1.0, 0.0]).unwrap();
        let v0 = v_zero(&prior, &u).unwrap();
        for h in [0.01, 0.3, 1.0, 10.0, 500.0] {
            let resource = ResourceSummary::from_h_plus(h, 0.0);
            let model = QuantumChainPe { resource };
            let generic = bzzb_generic(&prior, &model, &u, &v0, 1e-9).unwrap();
            let z = z_integral(4.0, resource.tau_f, 1e-10).unwrap();
            assert!((generic - z).abs() < 1e-8 * z, "h={h} generic={generic} z={z}");
        }
    }

    #[test]
    fn generic_rejects_contract_violations() {
        let prior = corr_prior();
        let u = Direction::new(vec![1.0, 0.0]).unwrap();
        let v0 = v_zero(&prior, &u).unwrap();
        let bad = |_: f64, _: &[f64]| 0.7;
        assert!(matches!(bzzb_generic(&prior, &bad, &u, &v0, 1e-8), Err(Error::Contract(_))));
        let neg = |t: f64, _: &[f64]| if t > 1.0 { -0.1 } else { 0.2 };
        assert!(matches!(bzzb_generic(&prior, &neg, &u, &v0, 1e-8), Err(Error::Contract(_))));
        let half = |_: f64, _: &[f64]| 0.5;
        assert!(bzzb_generic(&prior, &half, &u, &[2.0, 0.0], 1e-8).is_err());
    }

    #[test]
    fn scan_examples() {
        let rows = scan(&[1e-3, 1.0, 1e3], 1e-10).unwrap();
        assert!((rows[0].z_over_tau02 - Z_PRIOR_1E3).abs() < 1e-9);
        assert!((rows[2].z_over_tauf2 / 0.05 - 1.0).abs() < 0.01);
        let mid = rows[1];
        assert!((mid.z_over_tauf2 - Z_UNIT).abs() < 1e-10);
        assert!(mid.z_over_tauf2 < mid.prior_limit_norm.min(mid.asymptotic_limit_norm));
        assert!(scan(&[1.0, -1.0], 1e-8).is_err());
    }

    #[test]
    fn geometric_grid_endpoints() {
        let g = geometric_grid(1e-3, 1e3, 25).unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[24], 1e3);
        assert!((g[12] - 1.0).abs() < 1e-12);
        assert!(geometric_grid(0.0, 1.0, 3).is_err());
        assert!(geometric_grid(1.0, 2.0, 0).is_err());
    }

    #[test]
    fn z_monotone_and_enveloped() {
        let grid = geometric_grid(1e-3, 1e3, 40).unwrap();
        for &t0 in &grid {
            let mut prev = 0.0;
            for &tf in &grid {
                let z = z_integral(t0, tf, 1e-10).unwrap();
                assert!(z >= prev);
                assert!(z <= (t0 * t0 / 8.0).min(tf * tf / 20.0));
                prev = z;
            }
        }
        for &tf in &grid {
            let mut prev = 0.0;
            for &t0 in &grid {
                let z = z_integral(t0, tf, 1e-10).unwrap();
                assert!(z >= prev);
                prev = z;
            }
        }
    }

    #[test]
    fn heisenberg_side_within_one_percent_at_ratio_100() {
        let z = z_integral(100.0, 1.0, 1e-10).unwrap();
        assert!((z - 0.05).abs() / 0.05 < 0.01, "z={z}");
        // prior side is still 8% short at 1e-2; deficit follows the √ratio law
        let p = z_integral(1.0, 100.0, 1e-10).unwrap();
        let deficit = 0.125 - p;
        assert!((deficit / 0.1 - LEADING_PRIOR_COEF).abs() / LEADING_PRIOR_COEF < 0.1, "p={p}");
    }

    proptest! {
        #[test]
        fn bound_below_both_limits(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = rng.gen_range(1..=4);
            let prior = random_prior(&mut rng, k);
            let spec = random_spectrum(&mut rng, k, 6, 5);
            let u = random_direction(&mut rng, k);
            let r = directional_bound(&prior, &spec, &u, None).unwrap();
            prop_assert!(r.z <= r.prior_limit + 1e-12);
            prop_assert!(r.z <= r.asymptotic_limit + 1e-12);
            prop_assert!((r.prior_limit - r.tau0 * r.tau0 / 8.0).abs() < 1e-9 * r.prior_limit.max(1.0));
        }

        #[test]
        fn z_scales_quadratically(seed in any::<u64>(), c in 0.05..20.0f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = rng.gen_range(1..=3);
            let prior = random_prior(&mut rng, k);
            let spec = random_spectrum(&mut rng, k, 6, 5);
            let u = random_direction(&mut rng, k);
            let base = directional_bound_with_tol(&prior, &spec, &u, None, 1e-11).unwrap();
            let scaled = directional_bound_with_tol(
                &prior.scaled(c).unwrap(), &spec.scaled(c), &u, None, 1e-11,
            ).unwrap();
            prop_assert!((scaled.z - c * c * base.z).abs() < 1e-8 * scaled.z);
        }
    }
}
