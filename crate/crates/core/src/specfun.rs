//! Special functions shared by every bound.
//!
//! `erfc` is the standard complementary error function
//! `(2/√π) ∫_z^∞ exp(−ξ²) dξ`, so the Gaussian min-overlap is 1 at zero
//! shift and `∫₀^∞ x erfc(x) dx = 1/4`, which is what makes the prior
//! limit of the bound equal to `τ₀²/8`.
//!
//! The cosine bound `cos θ ≥ 1 − λ|θ|` uses the line through `(0, 1)` that
//! touches `cos` at `θ = φ`: `λ = sin φ = (1 − cos φ)/φ`. Eliminating `λ` gives
//! `φ sin φ = 1 − cos φ`, i.e. `tan(φ/2) = φ`, which has a single root in
//! `(π/2, π)`.

use std::sync::OnceLock;

use crate::error::{domain, Result};

/// Tolerance used for the cached process-wide constant.
pub const LAMBDA_TOL: f64 = 1e-12;

const BRACKET_LO: f64 = 1.6;
const BRACKET_HI: f64 = 3.1;

/// Root `φ` of `tan(φ/2) = φ` together with the slope `λ = sin φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaConstant {
    pub phi: f64,
    pub lambda: f64,
}

impl LambdaConstant {
    /// Residual of the reduced equation `tan(φ/2) − φ`.
    pub fn residual(&self) -> f64 {
        (0.5 * self.phi).tan() - self.phi
    }
}

/// Complementary error function.
///
/// Backed by the musl/fdlibm algorithm (`libm::erfc`), which is accurate to
/// well under 1e-14 relative on `|z| ≤ 6` and underflows to zero past
/// `z ≈ 27.3`.
pub fn erfc_std(z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(domain(format!("erfc argument must be finite, got {z}")));
    }
    Ok(erfc(z))
}

/// Infallible `erfc` for internal callers that already hold finite input.
#[inline]
pub(crate) fn erfc(z: f64) -> f64 {
    libm::erfc(z)
}

/// Solves `tan(φ/2) = φ` by bisection on `(1.6, 3.1)`.
pub fn solve_lambda(tol: f64) -> Result<LambdaConstant> {
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be positive, got {tol}")));
    }
    let g = |phi: f64| (0.5 * phi).tan() - phi;
    let (mut lo, mut hi) = (BRACKET_LO, BRACKET_HI);
    // g(lo) < 0 < g(hi)
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm.abs() < tol || hi - lo <= f64::EPSILON * mid {
            break;
        }
        if gm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(LambdaConstant {
        phi: mid,
        lambda: mid.sin(),
    })
}

/// The cosine-bound constant solved once per process to [`LAMBDA_TOL`].
pub fn lambda_constant() -> LambdaConstant {
    static CELL: OnceLock<LambdaConstant> = OnceLock::new();
    *CELL.get_or_init(|| solve_lambda(LAMBDA_TOL).expect("bracketed root"))
}

/// Shorthand for `lambda_constant().lambda` (≈ 0.7246).
#[inline]
pub fn lambda() -> f64 {
    lambda_constant().lambda
}

/// Truncated linear decay `max(1 − r, 0)`.
pub fn lambda_fn(r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(domain(format!("truncation argument must be >= 0, got {r}")));
    }
    Ok((1.0 - r).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `erf` by the positive-term series
    /// `erf z = (2/√π) e^{−z²} Σ 2ⁿ z^{2n+1} / (1·3·…·(2n+1))`.
    fn erf_series(z: f64) -> f64 {
        let mut term = z;
        let mut sum = z;
        let mut n = 0.0;
        while term > 1e-18 * sum {
            n += 1.0;
            term *= 2.0 * z * z / (2.0 * n + 1.0);
            sum += term;
        }
        2.0 / std::f64::consts::PI.sqrt() * (-z * z).exp() * sum
    }

    /// `erfc` by the Laplace continued fraction (modified Lentz), z > 0.
    fn erfc_cf(z: f64) -> f64 {
        // erfc z = e^{-z²}/√π · 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
        let tiny = 1e-300;
        let mut f = z;
        let mut c = z;
        let mut d = 0.0;
        for k in 1..20_000 {
            let a = 0.5 * k as f64;
            d = z + a * d;
            if d.abs() < tiny {
                d = tiny;
            }
            c = z + a / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-z * z).exp() / std::f64::consts::PI.sqrt() / f
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn erfc_examples() {
        assert_eq!(erfc_std(0.0).unwrap(), 1.0);
        assert!(erfc_std(10.0).unwrap() < 1e-40);
        // 40-digit reference values
        let frozen = [
            (0.5, 0.479_500_122_186_953_46),
            (1.0, 0.157_299_207_050_285_13),
            (2.0, 0.004_677_734_981_047_265_8),
            (3.0, 2.209_049_699_858_544_1e-5),
            (4.5, 1.966_160_441_542_887_5e-10),
            (6.0, 2.151_973_671_249_891_3e-17),
            (10.0, 2.088_487_583_762_544_8e-45),
        ];
        for (z, want) in frozen {
            assert!(rel(erfc_std(z).unwrap(), want) < 1e-14, "z={z}");
        }
    }

    #[test]
    fn erfc_matches_independent_series() {
        for i in 0..=600 {
            let z = i as f64 * 0.01;
            let got = erfc_std(z).unwrap();
            // 1 − erf cancels past z ≈ 1
            let want = if z < 1.0 {
                1.0 - erf_series(z)
            } else {
                erfc_cf(z)
            };
            let tol = 1e-14;
            assert!(rel(got, want) < tol, "z={z} got={got} want={want}");
            // erf part consistency on the series side
            if z < 3.0 {
                assert!((got + erf_series(z) - 1.0).abs() < 1e-15, "z={z}");
            }
        }
    }

    #[test]
    fn erfc_negative_argument_reflects() {
        for z in [0.1, 0.7, 2.5] {
            let sum = erfc_std(-z).unwrap() + erfc_std(z).unwrap();
            assert!((sum - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn erfc_rejects_non_finite() {
        assert!(erfc_std(f64::NAN).is_err());
        assert!(erfc_std(f64::INFINITY).is_err());
    }

    #[test]
    fn erfc_monotone_decreasing() {
        let mut prev = erfc_std(0.0).unwrap();
        for i in 1..2000 {
            let cur = erfc_std(i as f64 * 0.005).unwrap();
            assert!(cur <= prev);
            prev = cur;
        }
    }

    #[test]
    fn lambda_value_and_identities() {
        let c = solve_lambda(1e-10).unwrap();
        assert!((c.lambda - 0.7246).abs() < 5e-5);
        assert!((c.phi.sin() - c.lambda).abs() < 1e-9);
        assert!(((1.0 - c.phi.cos()) / c.phi - c.lambda).abs() < 1e-9);
        assert!((c.phi - 2.3311).abs() < 1e-4);
        assert!(c.residual().abs() < 1e-10);
        assert!(c.phi > 0.0 && c.phi < std::f64::consts::PI);
    }

    #[test]
    fn lambda_rejects_bad_tolerance() {
        assert!(solve_lambda(0.0).is_err());
        assert!(solve_lambda(-1.0).is_err());
    }

    #[test]
    fn cached_constant_is_tight() {
        let c = lambda_constant();
        assert!(c.residual().abs() < 1e-12);
        assert_eq!(lambda(), c.lambda);
    }

    #[test]
    fn cosine_bound_holds() {
        let c = lambda_constant();
        let span = 4.0 * std::f64::consts::PI;
        for i in 0..=10_000 {
            let theta = -span + 2.0 * span * i as f64 / 10_000.0;
            assert!(theta.cos() >= 1.0 - c.lambda * theta.abs() - 1e-15);
        }
        for theta in [c.phi, -c.phi] {
            let gap = theta.cos() - (1.0 - c.lambda * theta.abs());
            assert!(gap.abs() < 1e-12, "gap={gap}");
        }
    }

    #[test]
    fn lambda_fn_examples() {
        assert_eq!(lambda_fn(0.0).unwrap(), 1.0);
        assert_eq!(lambda_fn(1.0).unwrap(), 0.0);
        assert_eq!(lambda_fn(0.25).unwrap(), 0.75);
        assert_eq!(lambda_fn(7.0).unwrap(), 0.0);
        assert!(lambda_fn(-0.1).is_err());
        assert!(lambda_fn(f64::NAN).is_err());
    }
}
