//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use matern_circle::{covariance_value, MaternParams};
use nalgebra::{DMatrix, DVector};

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

/// Dense circulant covariance assembled from `covariance_value` at grid lags.
pub fn dense_covariance(params: &MaternParams, n: usize) -> DMatrix<f64> {
    let row: Vec<f64> = (0..n).map(|l| covariance_value(params, l as f64 / n as f64)).collect();
    DMatrix::from_fn(n, n, |a, b| row[(a + n - b) % n])
}

pub struct DenseSolve {
    pub log_det: f64,
    pub quad: f64,
}

pub fn dense_solve(k: &DMatrix<f64>, z: &[f64]) -> DenseSolve {
    let chol = k.clone().cholesky().expect("covariance must be positive definite");
    let log_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let zv = DVector::from_column_slice(z);
    let quad = zv.dot(&chol.solve(&zv));
    DenseSolve { log_det, quad }
}

/// `Σ_j |j+x|^(-s)` and `Σ_j |j+x|^(-s) ln|j+x|` by brute force over
/// `|j| ≤ K` with midpoint tail integrals.
pub fn brute_gamma(s: f64, x: f64) -> (f64, f64) {
    const K: i64 = 4000;
    let (mut plain, mut weighted) = (0.0, 0.0);
    for j in (1..=K).rev() {
        for t in [j as f64 + x, j as f64 - x] {
            let v = t.abs().powf(-s);
            plain += v;
            weighted += v * t.abs().ln();
        }
    }
    let v = x.abs().powf(-s);
    plain += v;
    weighted += v * x.abs().ln();
    for a in [K as f64 + 0.5 + x, K as f64 + 0.5 - x] {
        // ∫_a^∞ t^(-s) and ∫_a^∞ t^(-s) ln t
        let p = a.powf(1.0 - s) / (s - 1.0);
        plain += p;
        weighted += p * (a.ln() + 1.0 / (s - 1.0));
    }
    (plain, weighted)
}

/// `∫₀¹ f` for `f` symmetric about 1/2, by composite Simpson after the
/// substitution `x = t⁴` on `(0, 1/2]`, which tames `x^p` and `ln x` end
/// behavior for `p > -3/4`.
pub fn symmetric_quadrature<F: Fn(f64) -> f64>(f: F) -> f64 {
    const INTERVALS: usize = 4000;
    let top = 0.5f64.powf(0.25);
    let h = top / INTERVALS as f64;
    let g = |t: f64| if t == 0.0 { 0.0 } else { f(t.powi(4)) * 4.0 * t.powi(3) };
    let mut acc = g(0.0) + g(top);
    for i in 1..INTERVALS {
        acc += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    2.0 * acc * h / 3.0
}

pub fn brute_integral_g(nu: f64) -> f64 {
    symmetric_quadrature(|x| brute_gamma(2.0 * nu + 1.0, x).0.ln())
}
