//! Symmetrized Hurwitz zeta `γ(α; x) = Σ_{j∈ℤ} |j + x|^(-α)` and the functions
//! of it that make up the limiting constants.
//!
//! Everything near the end points is evaluated at `y = min(x, 1-x)` and split
//! as `γ(s; y) = y^(-s) + ρ_s(y)`, where `ρ_s(y) = Σ_{j≠0} |j + y|^(-s)` is
//! smooth and bounded. The singular part then cancels analytically instead of
//! numerically.

pub mod quadrature;
pub mod series;

pub use quadrature::{integrate_01, integrate_01_pair, integrate_01_symmetric, Quadrature, QuadratureSpec};
pub use series::{log_power_sum, zeta, Series};

use crate::error::{Error, Result};

/// Default relative tolerance for pointwise evaluations.
pub const POINTWISE_REL_TOL: f64 = 1e-10;
/// Default relative tolerance for integrals.
pub const INTEGRAL_REL_TOL: f64 = 1e-8;

const ALPHA_MIN: f64 = 1.0 + 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaEval {
    pub alpha: f64,
    pub x: f64,
    pub value: f64,
    pub abs_error_bound: f64,
}

fn check_alpha(function: &'static str, alpha: f64) -> Result<()> {
    if !(alpha > ALPHA_MIN) || !alpha.is_finite() {
        return Err(Error::domain(function, format!("exponent {alpha} must exceed 1")));
    }
    Ok(())
}

fn check_x(function: &'static str, x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::domain(function, format!("x = {x} must lie in (0, 1)")));
    }
    Ok(())
}

fn check_nu(function: &'static str, nu: f64) -> Result<()> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::domain(function, format!("nu = {nu} must be positive")));
    }
    Ok(())
}

/// `γ(α; x)` with a certified remainder bound.
pub fn gamma_sym(alpha: f64, x: f64, rel_tol: f64) -> Result<GammaEval> {
    check_alpha("gamma_sym", alpha)?;
    check_x("gamma_sym", x)?;
    let total = log_power_sum(alpha, x, 0, rel_tol / 2.0) + log_power_sum(alpha, 1.0 - x, 0, rel_tol / 2.0);
    Ok(GammaEval { alpha, x, value: total.value, abs_error_bound: total.bound })
}

/// `∂^order/∂ν^order γ(2ν+1; x) = Σ_j (-2 ln|j+x|)^order |j+x|^(-2ν-1)`,
/// differentiated term by term.
pub fn gamma_sym_dnu(nu: f64, x: f64, order: u32, rel_tol: f64) -> Result<f64> {
    check_nu("gamma_sym_dnu", nu)?;
    check_x("gamma_sym_dnu", x)?;
    if order > 3 {
        return Err(Error::domain("gamma_sym_dnu", format!("order {order} exceeds 3")));
    }
    let s = 2.0 * nu + 1.0;
    let total = log_power_sum(s, x, order, rel_tol / 2.0) + log_power_sum(s, 1.0 - x, order, rel_tol / 2.0);
    Ok((-2.0f64).powi(order as i32) * total.value)
}

/// `ρ_s(y) = Σ_{j≠0} ln|j+y|^r |j+y|^(-s)` for `y ∈ (0, 1)`.
fn rest(s: f64, y: f64, r: u32, rel_tol: f64) -> f64 {
    log_power_sum(s, 1.0 + y, r, rel_tol).value + log_power_sum(s, 1.0 - y, r, rel_tol).value
}

fn fold(x: f64) -> f64 {
    x.min(1.0 - x)
}

/// `ln γ(s; x)` without overflow near the end points.
pub fn ln_gamma_sym(s: f64, x: f64, rel_tol: f64) -> Result<f64> {
    check_alpha("ln_gamma_sym", s)?;
    check_x("ln_gamma_sym", x)?;
    let y = fold(x);
    let t = y.powf(s);
    Ok(-s * y.ln() + (rest(s, y, 0, rel_tol) * t).ln_1p())
}

/// `g_ν = ln γ(2ν+1; ·)`.
pub fn g_nu(nu: f64, x: f64) -> Result<f64> {
    check_nu("g_nu", nu)?;
    ln_gamma_sym(2.0 * nu + 1.0, x, POINTWISE_REL_TOL)
}

/// `h_{ν;ν₀} = γ(2ν₀+1; ·) / γ(2ν+1; ·)`.
pub fn h_ratio(nu: f64, nu0: f64, x: f64) -> Result<f64> {
    check_nu("h_ratio", nu)?;
    check_nu("h_ratio", nu0)?;
    check_x("h_ratio", x)?;
    let y = fold(x);
    let (s, s0) = (2.0 * nu + 1.0, 2.0 * nu0 + 1.0);
    let t = y.powf(s);
    let num = y.powf(s - s0) + rest(s0, y, 0, POINTWISE_REL_TOL) * t;
    let den = 1.0 + rest(s, y, 0, POINTWISE_REL_TOL) * t;
    Ok(num / den)
}

/// `γ²(ν₀+1; ·) / γ(2ν+1; ·)`, the inner integrand of the deterministic limit.
pub fn det_ratio(nu: f64, nu0f: f64, x: f64) -> Result<f64> {
    check_nu("det_ratio", nu)?;
    check_nu("det_ratio", nu0f)?;
    check_x("det_ratio", x)?;
    let y = fold(x);
    let (s, q) = (2.0 * nu + 1.0, nu0f + 1.0);
    let lead = 1.0 + rest(q, y, 0, POINTWISE_REL_TOL) * y.powf(q);
    let den = 1.0 + rest(s, y, 0, POINTWISE_REL_TOL) * y.powf(s);
    Ok(y.powf(s - 2.0 * q) * lead * lead / den)
}

/// `ϑ_{ν;ν₀} = γ(4ν+2)γ(2ν₀+1)/γ²(2ν+1) + γ(2ν₀+1) - 2γ(2ν+2ν₀+2)/γ(2ν+1)`.
///
/// Evaluated as the sum of the non-negative per-frequency error terms, which
/// removes the cancellation of the three `y^(-2ν₀-1)` leading parts.
pub fn vartheta(nu: f64, nu0: f64, x: f64) -> Result<f64> {
    check_nu("vartheta", nu)?;
    check_nu("vartheta", nu0)?;
    check_x("vartheta", x)?;
    let y = fold(x);
    let tol = POINTWISE_REL_TOL;
    let (s, s0) = (2.0 * nu + 1.0, 2.0 * nu0 + 1.0);
    let r_a = rest(2.0 * s, y, 0, tol);
    let r_b = rest(s0, y, 0, tol);
    let r_c = rest(s, y, 0, tol);
    let r_d = rest(s + s0, y, 0, tol);
    let t = y.powf(s);
    let den = 1.0 + r_c * t;
    let y_lead = y.powf(2.0 * s - s0);
    let head = (r_b + r_c * r_c * y_lead + r_a * (y_lead + r_b * t * t)) / (den * den);
    Ok(head + r_b - 2.0 * r_d * t / den)
}

/// Direct three-term form of `ϑ_{ν;ν₀}`; loses accuracy near the end points.
pub fn vartheta_direct(nu: f64, nu0: f64, x: f64, rel_tol: f64) -> Result<f64> {
    let (s, s0) = (2.0 * nu + 1.0, 2.0 * nu0 + 1.0);
    let a = gamma_sym(2.0 * s, x, rel_tol)?.value;
    let b = gamma_sym(s0, x, rel_tol)?.value;
    let c = gamma_sym(s, x, rel_tol)?.value;
    let d = gamma_sym(s + s0, x, rel_tol)?.value;
    Ok(a * b / (c * c) + b - 2.0 * d / c)
}

/// `ψ_ν(x) = Σ_j |x+j|^(-2ν-1) ln|x+j| / Σ_j |x+j|^(-2ν-1)`.
pub fn psi_nu(nu: f64, x: f64, rel_tol: f64) -> Result<f64> {
    check_nu("psi_nu", nu)?;
    check_x("psi_nu", x)?;
    let y = fold(x);
    let s = 2.0 * nu + 1.0;
    let t = y.powf(s);
    let weighted = rest(s, y, 1, rel_tol);
    let plain = rest(s, y, 0, rel_tol);
    Ok((y.ln() + weighted * t) / (1.0 + plain * t))
}

fn symmetric_integral<F: Fn(f64) -> Result<f64>>(f: F, spec: &QuadratureSpec) -> Result<Quadrature> {
    // Errors inside the closure surface as a non-finite value.
    integrate_01_symmetric(|y| f(y).unwrap_or(f64::NAN), spec)
}

/// `∫₀¹ f` for `f` symmetric about 1/2 with `f(y) ~ y^p` at 0. For `p < 0`
/// the smooth symmetric `x^p + (1-x)^p` is integrated in closed form and only
/// the bounded remainder goes through quadrature, since the node ladder
/// cannot reach the mass of `x^p` as `p → -1`.
fn singular_integral<F: Fn(f64) -> Result<f64>>(f: F, p: f64, rel_tol: f64) -> Result<f64> {
    if p >= 0.0 {
        let spec = QuadratureSpec::with_rel_tol(rel_tol).with_exponents(0.0, 0.0);
        return Ok(symmetric_integral(f, &spec)?.value);
    }
    let leading = 2.0 / (p + 1.0);
    let spec = QuadratureSpec::with_rel_tol(rel_tol).with_exponents(p, p);
    // the remainder is small next to the closed-form part, so scale its
    // tolerance accordingly
    let spec = QuadratureSpec { rel_tol: rel_tol.max(1e-14), ..spec };
    match symmetric_integral(|y| f(y).map(|v| v - y.powf(p) - (1.0 - y).powf(p)), &spec) {
        Ok(q) => Ok(leading + q.value),
        Err(Error::Quadrature { estimate, error_estimate, .. })
            if error_estimate <= rel_tol * (leading + estimate).abs() =>
        {
            Ok(leading + estimate)
        }
        Err(e) => Err(e),
    }
}

/// `e(ν) = ∫₀¹ ψ_ν`.
pub fn e_moment(nu: f64, rel_tol: f64) -> Result<f64> {
    check_nu("e_moment", nu)?;
    let spec = QuadratureSpec::with_rel_tol(rel_tol);
    Ok(symmetric_integral(|x| psi_nu(nu, x, POINTWISE_REL_TOL), &spec)?.value)
}

/// `e₂(ν) = ∫₀¹ ψ_ν²`.
pub fn e2_moment(nu: f64, rel_tol: f64) -> Result<f64> {
    check_nu("e2_moment", nu)?;
    let spec = QuadratureSpec::with_rel_tol(rel_tol);
    Ok(symmetric_integral(|x| psi_nu(nu, x, POINTWISE_REL_TOL).map(|p| p * p), &spec)?.value)
}

/// `V(ν) = ∫₀¹ (ψ_ν - e(ν))²`, equal to `e₂ - e²`.
pub fn v_moment(nu: f64, rel_tol: f64) -> Result<f64> {
    let e = e_moment(nu, rel_tol)?;
    let spec = QuadratureSpec::with_rel_tol(rel_tol);
    Ok(symmetric_integral(|x| psi_nu(nu, x, POINTWISE_REL_TOL).map(|p| (p - e) * (p - e)), &spec)?.value)
}

/// `∫₀¹ g_ν`.
pub fn integral_g(nu: f64, rel_tol: f64) -> Result<f64> {
    check_nu("integral_g", nu)?;
    let spec = QuadratureSpec::with_rel_tol(rel_tol);
    Ok(symmetric_integral(|x| g_nu(nu, x), &spec)?.value)
}

/// `∫₀¹ h_{ν;ν₀}`, finite for `ν > ν₀ - 1/2`.
pub fn integral_h(nu: f64, nu0: f64, rel_tol: f64) -> Result<f64> {
    if !(nu > nu0 - 0.5) {
        return Err(Error::domain(
            "integral_h",
            format!("h is not integrable for nu = {nu} <= nu0 - 1/2 = {}", nu0 - 0.5),
        ));
    }
    singular_integral(|x| h_ratio(nu, nu0, x), 2.0 * (nu - nu0), rel_tol)
}

/// `∫₀¹ γ²(ν₀+1; ·)/γ(2ν+1; ·)`, finite for `ν > ν₀`.
pub fn integral_det_ratio(nu: f64, nu0f: f64, rel_tol: f64) -> Result<f64> {
    if !(nu > nu0f) {
        return Err(Error::domain(
            "integral_det_ratio",
            format!("integrand is not integrable for nu = {nu} <= nu0(f) = {nu0f}"),
        ));
    }
    singular_integral(|x| det_ratio(nu, nu0f, x), 2.0 * (nu - nu0f) - 1.0, rel_tol)
}

/// `∫₀¹ ϑ_{ν;ν₀}`, finite for `ν > (ν₀-1)/2`.
pub fn integral_vartheta(nu: f64, nu0: f64, rel_tol: f64) -> Result<f64> {
    if !(nu > (nu0 - 1.0) / 2.0) {
        return Err(Error::domain(
            "integral_vartheta",
            format!("vartheta is not integrable for nu = {nu} <= (nu0 - 1)/2"),
        ));
    }
    let p = (4.0 * nu - 2.0 * nu0 + 1.0).min(0.0);
    let spec = QuadratureSpec::with_rel_tol(rel_tol).with_exponents(p, p);
    Ok(symmetric_integral(|x| vartheta(nu, nu0, x), &spec)?.value)
}
