//! Gaussian prior model.
//!
//! For a Gaussian prior with covariance `Σ₀`, the overlap
//! `∫ min[P(x), P(x + vτ)] dx` equals `erfc(τ/τ₀)` with
//! `τ₀ = sqrt(8 / vᵀΣ₀⁻¹v)`. Among directions with `uᵀv = 1`, `τ₀` is
//! largest at `v₀ = Σ₀u / uᵀΣ₀u`, where `τ₀(v₀) = 2·sqrt(2·uᵀΣ₀u)`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{check_dim, domain, Error, Result};
use crate::specfun::erfc;

/// Relative tolerance on the eigenvalue spread for positive-definiteness.
pub const PD_REL_TOL: f64 = 1e-10;
/// Relative tolerance on `|Σ₀ − Σ₀ᵀ|`.
pub const SYMMETRY_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct GaussianPrior {
    mean: DVector<f64>,
    sigma0: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl GaussianPrior {
    /// Validates symmetry and positive-definiteness; matrices that fail are
    /// rejected, never regularized.
    pub fn new(mean: Vec<f64>, sigma0: DMatrix<f64>) -> Result<Self> {
        let k = sigma0.nrows();
        if k == 0 {
            return Err(domain("prior covariance must be at least 1x1"));
        }
        if sigma0.ncols() != k {
            return Err(Error::IllConditioned(format!(
                "covariance must be square, got {}x{}",
                k,
                sigma0.ncols()
            )));
        }
        check_dim(k, mean.len())?;
        if sigma0.iter().chain(mean.iter()).any(|x| !x.is_finite()) {
            return Err(domain("prior entries must be finite"));
        }
        let scale = sigma0.amax();
        let asym = (&sigma0 - sigma0.transpose()).amax();
        if asym > SYMMETRY_REL_TOL * scale {
            return Err(Error::IllConditioned(format!(
                "covariance not symmetric (max asymmetry {asym:e})"
            )));
        }
        let eig = SymmetricEigen::new(sigma0.clone()).eigenvalues;
        let (min, max) = eig
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| {
                (lo.min(e), hi.max(e))
            });
        if !(max > 0.0) || min <= PD_REL_TOL * max {
            return Err(Error::IllConditioned(format!(
                "covariance not positive definite (eigenvalues in [{min:e}, {max:e}])"
            )));
        }
        let chol = Cholesky::new(sigma0.clone())
            .ok_or_else(|| Error::IllConditioned("Cholesky factorization failed".into()))?;
        Ok(Self {
            mean: DVector::from_vec(mean),
            sigma0,
            chol,
        })
    }

    /// Zero-mean prior.
    pub fn centered(sigma0: DMatrix<f64>) -> Result<Self> {
        let k = sigma0.nrows();
        Self::new(vec![0.0; k], sigma0)
    }

    /// Independent parameters with the given variances.
    pub fn diagonal(variances: &[f64]) -> Result<Self> {
        Self::centered(DMatrix::from_diagonal(&DVector::from_column_slice(
            variances,
        )))
    }

    pub fn dim(&self) -> usize {
        self.sigma0.nrows()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn sigma0(&self) -> &DMatrix<f64> {
        &self.sigma0
    }

    /// `uᵀΣ₀u`.
    pub fn quad_form(&self, u: &[f64]) -> Result<f64> {
        check_dim(self.dim(), u.len())?;
        let u = DVector::from_column_slice(u);
        Ok(u.dot(&(&self.sigma0 * &u)))
    }

    /// `vᵀΣ₀⁻¹v` through the Cholesky factor.
    pub fn inv_quad_form(&self, v: &[f64]) -> Result<f64> {
        check_dim(self.dim(), v.len())?;
        let v = DVector::from_column_slice(v);
        let w = self.chol.solve(&v);
        Ok(v.dot(&w))
    }

    /// Prior with every parameter rescaled by `c` (`Σ₀ → c²Σ₀`).
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            (&self.mean * c).iter().copied().collect(),
            &self.sigma0 * (c * c),
        )
    }
}

/// Nonzero real weight vector selecting the error combination `uᵀΣu`.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Vec<f64>);

impl Direction {
    pub fn new(u: Vec<f64>) -> Result<Self> {
        if u.is_empty() || u.iter().any(|x| !x.is_finite()) {
            return Err(domain("direction must be a non-empty finite vector"));
        }
        if u.iter().all(|&x| x == 0.0) {
            return Err(domain("direction must not be the zero vector"));
        }
        Ok(Self(u))
    }

    /// Unit vector `e_k` of length `dim`.
    pub fn axis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(domain(format!("parameter index {k} out of range 0..{dim}")));
        }
        let mut u = vec![0.0; dim];
        u[k] = 1.0;
        Ok(Self(u))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Ornstein–Uhlenbeck covariance `σ₀·exp(−|t − t′|/T₀)` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OUProcess {
    sigma0_var: f64,
    t_corr: f64,
    grid: Vec<f64>,
}

impl OUProcess {
    pub fn new(sigma0_var: f64, t_corr: f64, grid: Vec<f64>) -> Result<Self> {
        if !(sigma0_var > 0.0 && sigma0_var.is_finite()) {
            return Err(domain(format!("OU variance must be positive, got {sigma0_var}")));
        }
        if !(t_corr > 0.0 && t_corr.is_finite()) {
            return Err(domain(format!("OU correlation time must be positive, got {t_corr}")));
        }
        if grid.is_empty() || grid.iter().any(|t| !t.is_finite()) {
            return Err(domain("OU grid must be a non-empty finite list"));
        }
        if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
            return Err(domain(format!(
                "OU grid must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self {
            sigma0_var,
            t_corr,
            grid,
        })
    }

    pub fn sigma0_var(&self) -> f64 {
        self.sigma0_var
    }

    pub fn t_corr(&self) -> f64 {
        self.t_corr
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Kernel value `Σ₀(t, t′)`.
    pub fn kernel(&self, t: f64, t_prime: f64) -> f64 {
        self.sigma0_var * (-(t - t_prime).abs() / self.t_corr).exp()
    }
}

/// `τ₀ = sqrt(8 / vᵀΣ₀⁻¹v)`.
pub fn tau0(prior: &GaussianPrior, v: &[f64]) -> Result<f64> {
    check_dim(prior.dim(), v.len())?;
    if v.iter().all(|&x| x == 0.0) {
        return Err(domain("tau0 requires a nonzero shift direction"));
    }
    let q = prior.inv_quad_form(v)?;
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::IllConditioned(format!(
            "vᵀΣ₀⁻¹v = {q:e} is not a positive finite number"
        )));
    }
    Ok((8.0 / q).sqrt())
}

/// `∫ min[P(x), P(x + vτ)] dx = erfc(τ/τ₀)`.
pub fn min_overlap(prior: &GaussianPrior, v: &[f64], tau: f64) -> Result<f64> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(domain(format!("shift tau must be finite and >= 0, got {tau}")));
    }
    Ok(erfc(tau / tau0(prior, v)?))
}

/// The direction `v₀ = Σ₀u / uᵀΣ₀u` maximizing `τ₀` subject to `uᵀv = 1`.
pub fn v_zero(prior: &GaussianPrior, u: &Direction) -> Result<Vec<f64>> {
    check_dim(prior.dim(), u.dim())?;
    let uv = DVector::from_column_slice(u.as_slice());
    let s_u = prior.sigma0() * &uv;
    let q = uv.dot(&s_u);
    if !(q > 0.0) {
        return Err(domain(format!("degenerate direction: uᵀΣ₀u = {q:e}")));
    }
    Ok(s_u.iter().map(|x| x / q).collect())
}

pub fn ou_covariance(ou: &OUProcess) -> Result<GaussianPrior> {
    let grid = ou.grid();
    let k = grid.len();
    let sigma0 = DMatrix::from_fn(k, k, |i, j| ou.kernel(grid[i], grid[j]));
    GaussianPrior::centered(sigma0)
}
