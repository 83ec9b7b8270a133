//! Tanh-sinh (double exponential) quadrature on the open interval (0, 1).
//!
//! With `u = (π/2)·sinh(t)` the nodes are `x = 1/(1+e^(-2u))` and the
//! complementary `1-x = 1/(1+e^(2u))` is formed directly, so integrands that
//! are singular at either end never see `1 - x` rounded to zero.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub max_levels: usize,
    /// Power exponents `p > -1` of the admissible behaviour `x^p` (times a
    /// logarithm) at 0 and `(1-x)^p` at 1. They decide how far into each end
    /// the node ladder extends.
    pub endpoint_exponents: (f64, f64),
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-8, max_levels: 12, endpoint_exponents: (-0.5, -0.5) }
    }
}

impl QuadratureSpec {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }

    pub fn with_exponents(mut self, at_zero: f64, at_one: f64) -> Self {
        self.endpoint_exponents = (at_zero, at_one);
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::domain("integrate_01", "rel_tol must lie in (0, 1)"));
        }
        if self.max_levels == 0 {
            return Err(Error::domain("integrate_01", "max_levels must be at least 1"));
        }
        let (p0, p1) = self.endpoint_exponents;
        if !(p0 > -1.0 && p1 > -1.0) {
            return Err(Error::domain("integrate_01", format!("endpoint exponents must exceed -1, got ({p0}, {p1})")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub err_est: f64,
    pub levels: usize,
    pub evaluations: usize,
}

/// Node parameter `t` at which the distance to the end point falls to `dist`.
fn t_for_distance(dist: f64) -> f64 {
    // dist ≈ e^(-2u) with u = (π/2) sinh t
    let u = -dist.ln() / 2.0;
    (u / FRAC_PI_2).asinh()
}

/// Truncation distance for an end-point behaviour `x^p`: the neglected
/// piece `x^(p+1)/(p+1)` is kept below 1e-20.
fn cutoff(p: f64) -> f64 {
    (1e-20f64).powf(1.0 / (p + 1.0)).max(1e-300)
}

/// Integrate `f(x, 1-x)` over (0, 1).
pub fn integrate_01_pair<F>(f: F, spec: &QuadratureSpec) -> Result<Quadrature>
where
    F: Fn(f64, f64) -> f64,
{
    spec.validate()?;
    let t_lo = -t_for_distance(cutoff(spec.endpoint_exponents.0));
    let t_hi = t_for_distance(cutoff(spec.endpoint_exponents.1));

    let mut evaluations = 0usize;
    let mut node = |t: f64| -> Result<f64> {
        let u = FRAC_PI_2 * t.sinh();
        let x = 1.0 / (1.0 + (-2.0 * u).exp());
        let c = 1.0 / (1.0 + (2.0 * u).exp());
        if x <= 0.0 || c <= 0.0 {
            return Ok(0.0);
        }
        let w = std::f64::consts::PI * t.cosh() * x * c;
        evaluations += 1;
        let fx = f(x, c);
        if !fx.is_finite() {
            return Err(Error::domain("integrate_01", format!("integrand is not finite at x = {x:e} (1-x = {c:e})")));
        }
        Ok(w * fx)
    };

    // Level 0: unit spacing.
    let mut h = 1.0;
    let mut sum = 0.0;
    let k_lo = t_lo.ceil() as i64;
    let k_hi = t_hi.floor() as i64;
    for k in k_lo..=k_hi {
        sum += node(k as f64)?;
    }
    let mut estimate = h * sum;
    let mut err_est = f64::INFINITY;

    for level in 1..=spec.max_levels {
        h /= 2.0;
        // New nodes are odd multiples of h.
        let j_lo = ((t_lo / h).ceil() as i64) | 1;
        let mut j = j_lo;
        while (j as f64) * h <= t_hi {
            sum += node(j as f64 * h)?;
            j += 2;
        }
        let next = h * sum;
        err_est = (next - estimate).abs();
        estimate = next;
        if level >= 3 && err_est <= spec.rel_tol * estimate.abs() {
            return Ok(Quadrature { value: estimate, err_est, levels: level, evaluations });
        }
    }
    Err(Error::Quadrature { estimate, error_estimate: err_est, levels: spec.max_levels })
}

/// Integrate `f` over (0, 1).
pub fn integrate_01<F>(f: F, spec: &QuadratureSpec) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    integrate_01_pair(|x, _| f(x), spec)
}

/// Integrate a function symmetric about 1/2, evaluating it only on (0, 1/2].
pub fn integrate_01_symmetric<F>(f: F, spec: &QuadratureSpec) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    let p = spec.endpoint_exponents.0.min(spec.endpoint_exponents.1);
    let spec = spec.with_exponents(p, p);
    integrate_01_pair(|x, c| f(x.min(c)), &spec)
}
