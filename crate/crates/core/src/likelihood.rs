//! Negative log-likelihood on the grid, its profile in the amplitude, and the
//! maximum-likelihood fit over a parameter box.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSample;
use crate::params::{MaternParams, ParamBox, PhiRange};
use crate::spectrum::{eigen_spectrum, log_det, quad_form, EigenSpectrum};

/// Relative accuracy of the eigenvalues used by the criteria.
pub const SPECTRUM_REL_TOL: f64 = 1e-12;

/// `n⁻¹ (ln det K_θ + zᵀ K_θ⁻¹ z)`.
pub fn nll(params: &MaternParams, z: &GridSample, rel_tol: f64) -> Result<f64> {
    let spectrum = eigen_spectrum(params.nu, params.alpha, z.n(), rel_tol)?;
    nll_with_spectrum(params.phi, &spectrum, z)
}

pub fn nll_with_spectrum(phi: f64, spectrum: &EigenSpectrum, z: &GridSample) -> Result<f64> {
    let q = quad_form(spectrum, z)?;
    let n = z.n() as f64;
    Ok(phi.ln() + (log_det(spectrum) + q / phi) / n)
}

/// `inf_φ` of [`nll`]: returns the value and the minimizing `φ̂ = zᵀR⁻¹z / n`.
pub fn profile_nll(nu: f64, alpha: f64, z: &GridSample, rel_tol: f64) -> Result<(f64, f64)> {
    let spectrum = eigen_spectrum(nu, alpha, z.n(), rel_tol)?;
    profile_with_spectrum(&spectrum, z)
}

pub fn profile_with_spectrum(spectrum: &EigenSpectrum, z: &GridSample) -> Result<(f64, f64)> {
    let q = quad_form(spectrum, z)?;
    if !(q > 0.0) {
        return Err(Error::DegenerateSample);
    }
    let n = z.n() as f64;
    let phi_hat = q / n;
    Ok((1.0 + log_det(spectrum) / n + phi_hat.ln(), phi_hat))
}

/// The normalized profile `M_n`: `profile_nll + 2ν₀ ln n − 1`, or with
/// `(2ν₀ + 1) ln n − 1` for a deterministic function of smoothness `ν₀`.
pub fn criterion_m_n(nu: f64, alpha: f64, z: &GridSample, nu0: f64, deterministic: bool) -> Result<f64> {
    let (value, _) = profile_nll(nu, alpha, z, SPECTRUM_REL_TOL)?;
    Ok(value + m_n_offset(z.n(), nu0, deterministic))
}

pub fn m_n_offset(n: usize, nu0: f64, deterministic: bool) -> f64 {
    let ln_n = (n as f64).ln();
    let exponent = if deterministic { 2.0 * nu0 + 1.0 } else { 2.0 * nu0 };
    exponent * ln_n - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub nu_grid: usize,
    pub alpha_grid: usize,
    pub nu_tol: f64,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub record_profile: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            nu_grid: 33,
            alpha_grid: 9,
            nu_tol: 1e-5,
            max_iter: 60,
            rel_tol: SPECTRUM_REL_TOL,
            record_profile: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub nu_hat: f64,
    pub phi_hat: f64,
    pub alpha_hat: f64,
    /// `L_n` at the optimum.
    pub criterion: f64,
    pub n_evals: usize,
    pub converged: bool,
    /// `(ν, criterion)` over the ν-grid at the selected α.
    pub profile_curve: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, Copy)]
struct Probe {
    nu: f64,
    alpha: f64,
    phi: f64,
    value: f64,
}

/// `L_n` minimized over φ in the admissible range at fixed `(ν, α)`.
fn evaluate(nu: f64, alpha: f64, z: &GridSample, phi_range: &PhiRange, rel_tol: f64) -> Result<Probe> {
    let spectrum = eigen_spectrum(nu, alpha, z.n(), rel_tol)?;
    let (profiled, phi_hat) = profile_with_spectrum(&spectrum, z)?;
    let (phi, value) = match phi_range {
        PhiRange::Unbounded => (phi_hat, profiled),
        range => {
            // criterion is convex in ln φ, so projecting the minimizer is exact
            let phi = range.project(phi_hat);
            (phi, nll_with_spectrum(phi, &spectrum, z)?)
        }
    };
    Ok(Probe { nu, alpha, phi, value })
}

/// Maximum-likelihood estimate over `bounds`: grid search then golden
/// section in ν at the best α.
pub fn fit(z: &GridSample, bounds: &ParamBox, opts: &FitOptions) -> Result<FitResult> {
    if z.is_zero() {
        return Err(Error::DegenerateSample);
    }
    bounds.phi_range.validate()?;
    let nus = bounds.nu_range.grid(opts.nu_grid.max(2));
    let alphas = bounds.alpha_range.grid(opts.alpha_grid.max(1));
    let mut n_evals = 0usize;

    let mut table = Vec::with_capacity(nus.len() * alphas.len());
    for &nu in &nus {
        for &alpha in &alphas {
            table.push(evaluate(nu, alpha, z, &bounds.phi_range, opts.rel_tol)?);
            n_evals += 1;
        }
    }
    // strict comparison keeps the smallest ν, then the smallest α, on ties
    let mut best_idx = 0;
    for (i, p) in table.iter().enumerate() {
        if p.value < table[best_idx].value {
            best_idx = i;
        }
    }
    let mut best = table[best_idx];
    let nu_idx = best_idx / alphas.len();
    let profile_curve =
        opts.record_profile.then(|| table.iter().filter(|p| p.alpha == best.alpha).map(|p| (p.nu, p.value)).collect());

    let mut converged = true;
    if !bounds.nu_range.is_singleton() {
        let mut lo = nus[nu_idx.saturating_sub(1)];
        let mut hi = nus[(nu_idx + 1).min(nus.len() - 1)];
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let alpha = best.alpha;
        let mut probe = |nu: f64, best: &mut Probe| -> Result<Probe> {
            let p = evaluate(nu, alpha, z, &bounds.phi_range, opts.rel_tol)?;
            n_evals += 1;
            if p.value < best.value {
                *best = p;
            }
            Ok(p)
        };
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let mut f1 = probe(x1, &mut best)?.value;
        let mut f2 = probe(x2, &mut best)?.value;
        let mut iter = 0;
        while hi - lo > opts.nu_tol && iter < opts.max_iter {
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = probe(x1, &mut best)?.value;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = probe(x2, &mut best)?.value;
            }
            iter += 1;
        }
        converged = hi - lo <= opts.nu_tol;
    }

    Ok(FitResult {
        nu_hat: best.nu,
        phi_hat: best.phi,
        alpha_hat: best.alpha,
        criterion: best.value,
        n_evals,
        converged,
        profile_curve,
    })
}
