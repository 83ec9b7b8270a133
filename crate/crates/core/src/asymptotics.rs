//! Large-sample limits of the likelihood criteria and the normalization of
//! the joint estimator of `(ν, φ)`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{e2_moment, e_moment, integral_det_ratio, integral_g, integral_h, v_moment};

/// `U(ν) = ∫g_ν + ln ∫h_{ν;ν₀}`, the limit of the normalized profile for a
/// sample path of smoothness `ν₀`.
pub fn limit_criterion_stochastic(nu: f64, nu0: f64, rel_tol: f64) -> Result<f64> {
    if !(nu > nu0 - 0.5) {
        return Err(Error::domain(
            "limit_criterion_stochastic",
            format!("nu = {nu} must exceed nu0 - 1/2 = {}", nu0 - 0.5),
        ));
    }
    Ok(integral_g(nu, rel_tol)? + integral_h(nu, nu0, rel_tol)?.ln())
}

/// `M∞^f(ν) = ∫ ln γ(2ν+1; ·) + ln ∫ γ²(ν₀+1; ·)/γ(2ν+1; ·)` for the
/// deterministic function with coefficients `|j|^(-ν₀-1)`.
pub fn limit_criterion_det(nu: f64, nu0f: f64, rel_tol: f64) -> Result<f64> {
    if !(nu > nu0f) {
        return Err(Error::domain("limit_criterion_det", format!("nu = {nu} must exceed nu0(f) = {nu0f}")));
    }
    Ok(integral_g(nu, rel_tol)? + integral_det_ratio(nu, nu0f, rel_tol)?.ln())
}

/// A limit criterion tabulated on a grid, with a refined minimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCriterion {
    pub nu_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Minimum over the grid.
    pub grid_argmin: (f64, f64),
    /// Golden-section refinement of the grid minimum.
    pub argmin: (f64, f64),
    /// Half the grid spacing.
    pub uncertainty: f64,
    pub rel_tol: f64,
}

impl LimitCriterion {
    /// Tabulate on `points` equally spaced nodes of `[lo, hi]` and refine the
    /// minimum between the neighbours of the best node.
    pub fn tabulate<F>(criterion: F, lo: f64, hi: f64, points: usize, rel_tol: f64) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        if !(lo < hi) || points < 3 {
            return Err(Error::domain("LimitCriterion", "need lo < hi and at least 3 points"));
        }
        let step = (hi - lo) / (points - 1) as f64;
        let nu_grid: Vec<f64> = (0..points).map(|i| if i + 1 == points { hi } else { lo + step * i as f64 }).collect();
        let values = nu_grid.iter().map(|&nu| criterion(nu)).collect::<Result<Vec<_>>>()?;
        let mut best = 0;
        for (i, v) in values.iter().enumerate() {
            if *v < values[best] {
                best = i;
            }
        }
        let grid_argmin = (nu_grid[best], values[best]);
        let (mut a, mut b) = (nu_grid[best.saturating_sub(1)], nu_grid[(best + 1).min(points - 1)]);
        let r = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = b - r * (b - a);
        let mut x2 = a + r * (b - a);
        let mut f1 = criterion(x1)?;
        let mut f2 = criterion(x2)?;
        let mut argmin = grid_argmin;
        for _ in 0..80 {
            if b - a <= 1e-7 {
                break;
            }
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - r * (b - a);
                f1 = criterion(x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + r * (b - a);
                f2 = criterion(x2)?;
            }
        }
        for (x, f) in [(x1, f1), (x2, f2)] {
            if f < argmin.1 {
                argmin = (x, f);
            }
        }
        Ok(Self { nu_grid, values, grid_argmin, argmin, uncertainty: step / 2.0, rel_tol })
    }

    /// `U` on `points` nodes of `[lo, hi]`.
    pub fn stochastic(nu0: f64, lo: f64, hi: f64, points: usize, rel_tol: f64) -> Result<Self> {
        Self::tabulate(|nu| limit_criterion_stochastic(nu, nu0, rel_tol), lo, hi, points, rel_tol)
    }

    /// `M∞^f` on `points` nodes of `[ν₀ + 1e-3, hi]`.
    pub fn deterministic(nu0f: f64, hi: f64, points: usize, rel_tol: f64) -> Result<Self> {
        Self::tabulate(|nu| limit_criterion_det(nu, nu0f, rel_tol), nu0f + 1e-3, hi, points, rel_tol)
    }

    /// Columns `nu,value`.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "nu,value")?;
        for (nu, v) in self.nu_grid.iter().zip(&self.values) {
            writeln!(out, "{nu},{v}")?;
        }
        Ok(())
    }
}

pub type Matrix2 = [[f64; 2]; 2];

fn mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn transpose(a: &Matrix2) -> Matrix2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

/// `C_n`, the covariance of the rescaled score at `(ν₀, φ₀)`, and the
/// normalization `A_n` with `A_nᵀ C_n A_n = 2 I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationMatrices {
    pub n: usize,
    pub c_n: Matrix2,
    pub a_n: Matrix2,
    pub nu0: f64,
    pub phi0: f64,
}

impl NormalizationMatrices {
    /// `max |A_nᵀ C_n A_n − 2I|`.
    pub fn invariant_residual(&self) -> f64 {
        let m = mul(&transpose(&self.a_n), &mul(&self.c_n, &self.a_n));
        let mut r = 0.0f64;
        for (i, row) in m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let target = if i == j { 2.0 } else { 0.0 };
                r = r.max((v - target).abs());
            }
        }
        r
    }
}

/// The moments `e(ν₀)`, `e₂(ν₀)`, `V(ν₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiMoments {
    pub e: f64,
    pub e2: f64,
    pub v: f64,
}

impl PsiMoments {
    pub fn new(nu0: f64, rel_tol: f64) -> Result<Self> {
        Ok(Self { e: e_moment(nu0, rel_tol)?, e2: e2_moment(nu0, rel_tol)?, v: v_moment(nu0, rel_tol)? })
    }
}

pub fn theorem2_matrices(n: usize, nu0: f64, phi0: f64, rel_tol: f64) -> Result<NormalizationMatrices> {
    let moments = PsiMoments::new(nu0, rel_tol)?;
    normalization_from_moments(n, nu0, phi0, &moments)
}

pub fn normalization_from_moments(n: usize, nu0: f64, phi0: f64, m: &PsiMoments) -> Result<NormalizationMatrices> {
    if n < 3 || !(phi0 > 0.0) {
        return Err(Error::domain("theorem2_matrices", "need n >= 3 and phi0 > 0"));
    }
    let l = (n as f64).ln();
    let off = -(l + m.e) / phi0;
    let c_n = [[2.0 * l * l + 4.0 * l * m.e + 2.0 * m.e2, off], [off, 1.0 / (2.0 * phi0 * phi0)]];
    let root_v = m.v.sqrt();
    let s = 2.0 * phi0 / root_v;
    let a_n = [[s / (2.0 * phi0), 0.0], [s * (l + m.e), s * root_v]];
    let mats = NormalizationMatrices { n, c_n, a_n, nu0, phi0 };
    let residual = mats.invariant_residual();
    if !(residual <= 1e-8 * (1.0 + l * l)) {
        return Err(Error::domain("theorem2_matrices", format!("A^T C A deviates from 2I by {residual:e}")));
    }
    Ok(mats)
}

/// `√(2n) ((φ̂−φ₀)/(2φ₀) − (ln n + e)(ν̂−ν₀), √V (ν̂−ν₀))`.
pub fn theorem2_statistic(
    nu_hat: f64,
    phi_hat: f64,
    n: usize,
    nu0: f64,
    phi0: f64,
    moments: &PsiMoments,
) -> (f64, f64) {
    let scale = (2.0 * n as f64).sqrt();
    let dnu = nu_hat - nu0;
    let first = (phi_hat - phi0) / (2.0 * phi0) - ((n as f64).ln() + moments.e) * dnu;
    (scale * first, scale * moments.v.sqrt() * dnu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u_at_nu0_is_integral_of_g() {
        let u = limit_criterion_stochastic(1.0, 1.0, 1e-9).unwrap();
        let g = integral_g(1.0, 1e-9).unwrap();
        assert!((u - g).abs() < 1e-8);
    }

    #[test]
    fn domains() {
        assert!(limit_criterion_stochastic(0.5, 1.0, 1e-8).is_err());
        assert!(limit_criterion_det(1.0, 1.0, 1e-8).is_err());
    }

    #[test]
    fn matrices_satisfy_invariant() {
        let m = theorem2_matrices(1024, 1.5, 1.0, 1e-9).unwrap();
        assert!(m.invariant_residual() < 1e-8);
        assert_eq!(m.c_n[1][1], 0.5);
        let m = theorem2_matrices(64, 1.0, 2.5, 1e-9).unwrap();
        assert!((m.c_n[1][1] - 1.0 / (2.0 * 6.25)).abs() < 1e-15);
    }

    #[test]
    fn statistic_vanishes_at_truth_and_is_affine() {
        let moments = PsiMoments { e: -1.3, e2: 2.0, v: 0.31 };
        assert_eq!(theorem2_statistic(1.5, 1.0, 4096, 1.5, 1.0, &moments), (0.0, 0.0));
        let a = theorem2_statistic(1.6, 1.0, 4096, 1.5, 1.0, &moments);
        let b = theorem2_statistic(1.7, 1.0, 4096, 1.5, 1.0, &moments);
        assert!((b.0 - 2.0 * a.0).abs() < 1e-9 && (b.1 - 2.0 * a.1).abs() < 1e-9);
    }

    #[test]
    fn tabulate_finds_parabola_minimum() {
        let c = LimitCriterion::tabulate(|x| Ok((x - 0.3) * (x - 0.3)), 0.0, 1.0, 11, 1e-9).unwrap();
        assert!((c.argmin.0 - 0.3).abs() < 1e-6);
        assert!(c.argmin.1 <= c.grid_argmin.1);
        let mut out = Vec::new();
        c.write_csv(&mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().starts_with("nu,value\n0,0.09"));
    }
}
