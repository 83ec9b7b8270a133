//! Posterior mean on the grid in Fourier form, and its integrated squared
//! error.
//!
//! The predictor built from `(ν, α)` has coefficients
//! `ĉ_j = c_j(ν, α) · A_m / S_m` with `m = j mod n`, where `A_m` is the folded
//! data coefficient and `S_m = Σ_{k ≡ m} c_k(ν, α)`. The amplitude cancels.

use std::io::Write;

use num_complex::Complex64;

use crate::aliasing::MaternProduct;
use crate::error::{Error, Result};
use crate::grid::GridSample;
use crate::params::MaternParams;
use crate::sampling::FourierFunction;
use crate::spectrum::eigen_spectrum;

#[derive(Debug, Clone, PartialEq)]
pub struct PredictorCoeffs {
    pub n: usize,
    pub nu: f64,
    pub alpha: f64,
    /// `A_m / S_m` for `m = 0..n`.
    pub ratios: Vec<Complex64>,
    pub j_max: usize,
    /// `coeffs[j + j_max]` is `ĉ_j`.
    coeffs: Vec<Complex64>,
}

impl PredictorCoeffs {
    pub fn coeff(&self, j: i64) -> Complex64 {
        let jm = self.j_max as i64;
        if j.abs() > jm {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(j + jm) as usize]
        }
    }

    pub fn to_function(&self) -> Result<FourierFunction> {
        FourierFunction::new(self.coeffs.clone(), f64::NAN)
    }
}

pub fn blup_coeffs(z: &GridSample, nu: f64, alpha: f64, j_max: usize, rel_tol: f64) -> Result<PredictorCoeffs> {
    let n = z.n();
    let spectrum = eigen_spectrum(nu, alpha, n, rel_tol)?;
    let root_n = (n as f64).sqrt();
    // ẑ_m = √n A_m and λ_m = n S_m
    let ratios: Vec<Complex64> = z.dft().iter().zip(spectrum.lambdas()).map(|(v, l)| v * root_n / l).collect();
    let kernel = MaternProduct::matern(nu, alpha);
    let jm = j_max as i64;
    let coeffs = (-jm..=jm).map(|j| ratios[j.rem_euclid(n as i64) as usize] * kernel.eval(j as f64)).collect();
    Ok(PredictorCoeffs { n, nu, alpha, ratios, j_max, coeffs })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IseBreakdown {
    pub total: f64,
    /// `Σ_{j ≡ m} |c_j(f) − ĉ_j|²` over the represented range.
    pub per_band: Vec<f64>,
    /// Bound on the squared error carried by coefficients beyond both
    /// truncations.
    pub truncation_bound: f64,
}

/// `∫ |f − f̂|² = Σ_j |c_j(f) − ĉ_j|²` by Parseval.
pub fn ise_empirical(truth: &FourierFunction, pred: &PredictorCoeffs) -> Result<IseBreakdown> {
    if truth.j_max() < pred.j_max {
        return Err(Error::domain(
            "ise_empirical",
            format!("truth truncation {} below predictor truncation {}", truth.j_max(), pred.j_max),
        ));
    }
    let n = pred.n;
    let jm = truth.j_max() as i64;
    let mut per_band = vec![0.0; n];
    for j in (1..=jm).rev() {
        for j in [j, -j] {
            per_band[j.rem_euclid(n as i64) as usize] += (truth.coeff(j) - pred.coeff(j)).norm_sqr();
        }
    }
    per_band[0] += (truth.coeff(0) - pred.coeff(0)).norm_sqr();
    let total = per_band.iter().sum();

    let max_ratio = pred.ratios.iter().map(|r| r.norm_sqr()).fold(0.0, f64::max);
    let pred_tail =
        max_ratio * MaternProduct::new(&[(pred.alpha, 2.0 * pred.nu + 1.0)]).two_sided_tail(pred.j_max, 1e-10).value;
    let truth_tail = truth.tail_variance.unwrap_or(0.0);
    Ok(IseBreakdown { total, per_band, truncation_bound: 2.0 * (truth_tail + pred_tail) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedIse {
    pub value: f64,
    pub per_band: Vec<f64>,
    /// Absolute bound from the truncated alias tails.
    pub bound: f64,
}

/// `E ∫ |ξ − ξ̂|²` for `ξ` with parameters `theta0` and the predictor at
/// `(ν, α)`, summed band by band in closed form.
pub fn expected_ise_exact(theta0: &MaternParams, nu: f64, alpha: f64, n: usize, rel_tol: f64) -> Result<ExpectedIse> {
    if !(theta0.nu > 0.5) {
        return Err(Error::domain("expected_ise_exact", format!("nu0 = {} must exceed 1/2", theta0.nu)));
    }
    if n < 3 || !(nu > 0.0 && alpha > 0.0) {
        return Err(Error::domain("expected_ise_exact", "need n >= 3 and positive (nu, alpha)"));
    }
    let (nu0, alpha0) = (theta0.nu, theta0.alpha);
    let kernel = MaternProduct::matern(nu, alpha);
    let truth = MaternProduct::matern(nu0, alpha0);
    let kernel_sq = MaternProduct::new(&[(alpha, 2.0 * nu + 1.0)]);
    let cross = MaternProduct::new(&[(alpha, nu + 0.5), (alpha0, nu0 + 0.5)]);

    let mut per_band = vec![0.0; n];
    let mut bound = 0.0;
    for m in 0..=n / 2 {
        let s = kernel.aliased(m, n, rel_tol);
        let s0 = truth.aliased(m, n, rel_tol);
        let q = kernel_sq.aliased(m, n, rel_tol);
        let p = cross.aliased(m, n, rel_tol);
        let (st, s0t) = (s.total(), s0.total());
        let (c, c0) = (s.central, s0.central);
        let central = c * c * s0.rest / (st * st) + c0 * (s.rest / st).powi(2);
        let others = q.rest * s0t / (st * st) + s0.rest - 2.0 * p.rest / st;
        let band = theta0.phi * (central + others);
        let band_bound = theta0.phi * (q.bound * s0t / (st * st) + s0.bound + 2.0 * p.bound / st);
        per_band[m] = band;
        let weight = if m == 0 || 2 * m == n { 1.0 } else { 2.0 };
        bound += weight * band_bound;
        if m != 0 && 2 * m != n {
            per_band[n - m] = band;
        }
    }
    // pairwise summation keeps the reduction order fixed
    let value = pairwise_sum(&per_band);
    Ok(ExpectedIse { value, per_band, bound })
}

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        v.iter().sum()
    } else {
        let (a, b) = v.split_at(v.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// Columns `m,band_value`.
pub fn write_per_band_csv(per_band: &[f64], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "m,band_value")?;
    for (m, v) in per_band.iter().enumerate() {
        writeln!(out, "{m},{v:e}")?;
    }
    Ok(())
}
