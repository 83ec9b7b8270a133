//! Circulant eigenvalues of the periodized Matérn correlation on the grid.
//!
//! Eigenvalues are always those of the correlation matrix (`φ = 1`); the
//! amplitude enters callers analytically.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::aliasing::MaternProduct;
use crate::error::{Error, Result};
use crate::grid::GridSample;
use crate::params::MaternParams;

/// `c_j(θ) = φ (α² + j²)^(-ν-1/2)`.
pub fn fourier_coeff(params: &MaternParams, j: i64) -> f64 {
    let j = j as f64;
    params.phi * (params.alpha * params.alpha + j * j).powf(-params.nu - 0.5)
}

/// `λ_m = n Σ_{j∈ℤ} c_{m+nj}(ν, 1, α)` for `m = 0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    nu: f64,
    alpha: f64,
    lambdas: Vec<f64>,
    rel_err: f64,
}

impl EigenSpectrum {
    /// A spectrum given directly by its eigenvalues.
    pub fn from_eigenvalues(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.len() < 3 || lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::domain("EigenSpectrum", "need at least 3 positive finite eigenvalues"));
        }
        Ok(Self { nu: f64::NAN, alpha: f64::NAN, lambdas, rel_err: 0.0 })
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Largest relative truncation bound over all bins.
    pub fn rel_err(&self) -> f64 {
        self.rel_err
    }
}

pub fn eigen_spectrum(nu: f64, alpha: f64, n: usize, rel_tol: f64) -> Result<EigenSpectrum> {
    if n < 3 {
        return Err(Error::domain("eigen_spectrum", format!("n = {n} must be at least 3")));
    }
    if !(nu > 0.0 && alpha > 0.0 && nu.is_finite() && alpha.is_finite()) {
        return Err(Error::domain("eigen_spectrum", format!("nu = {nu}, alpha = {alpha} must be positive")));
    }
    let f = MaternProduct::matern(nu, alpha);
    let nf = n as f64;
    let mut lambdas = vec![0.0; n];
    let mut rel_err = 0.0f64;
    for m in 0..=n / 2 {
        let s = f.aliased(m, n, rel_tol);
        let total = s.total();
        rel_err = rel_err.max(s.bound / total);
        lambdas[m] = nf * total;
        if m != 0 {
            lambdas[n - m] = lambdas[m];
        }
    }
    Ok(EigenSpectrum { nu, alpha, lambdas, rel_err })
}

/// `Zᵀ R⁻¹ Z = Σ_m |ẑ_m|² / λ_m`.
pub fn quad_form(spectrum: &EigenSpectrum, z: &GridSample) -> Result<f64> {
    if z.n() != spectrum.n() {
        return Err(Error::DimensionMismatch { expected: spectrum.n(), actual: z.n() });
    }
    Ok(z.dft().iter().zip(&spectrum.lambdas).map(|(v, l)| v.norm_sqr() / l).sum())
}

/// `ln det R = Σ_m ln λ_m`.
pub fn log_det(spectrum: &EigenSpectrum) -> f64 {
    spectrum.lambdas.iter().map(|l| l.ln()).sum()
}

/// `K_ν(z)` from `∫_0^∞ e^(-z cosh u) cosh(νu) du` by the trapezoid rule, which
/// converges geometrically for this analytic, doubly decaying integrand.
fn bessel_k(nu: f64, z: f64) -> f64 {
    const H: f64 = 0.05;
    let mut sum = 0.5 * (-z).exp();
    let mut k = 1;
    loop {
        let u = k as f64 * H;
        let term = (-z * u.cosh()).exp() * (nu * u).cosh();
        sum += term;
        if term <= 1e-18 * sum && z * u.cosh() > nu * u {
            break;
        }
        k += 1;
    }
    H * sum
}

/// `k_θ(x) = Σ_j c_j(θ) e^(2πijx)`.
///
/// Evaluated through its image representation: the Fourier sum of the
/// Matérn spectral density is the periodization over `x + ℤ` of the Matérn
/// covariance on the line, whose terms decay like `e^(-2πα|x+k|)`.
pub fn covariance_value(params: &MaternParams, x: f64) -> f64 {
    let MaternParams { nu, phi, alpha } = *params;
    let x = x.rem_euclid(1.0);
    let prefactor = 2.0 * PI.sqrt() / gamma(nu + 0.5);
    let at_zero = gamma(nu) / (2.0 * alpha.powf(2.0 * nu));
    let image = |t: f64| -> f64 {
        if t == 0.0 {
            at_zero
        } else {
            (PI * t / alpha).powf(nu) * bessel_k(nu, 2.0 * PI * alpha * t)
        }
    };
    let mut sum = image(x) + image(1.0 - x);
    let mut k = 1.0;
    loop {
        let term = image(x + k) + image(1.0 - x + k);
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
        k += 1.0;
    }
    phi * prefactor * sum
}
