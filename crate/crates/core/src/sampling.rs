//! Samplers for the Gaussian process and deterministic test functions.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::aliasing::MaternProduct;
use crate::error::{Error, Result};
use crate::grid::GridSample;
use crate::params::MaternParams;
use crate::special::{gamma_sym, zeta};
use crate::spectrum::{eigen_spectrum, fourier_coeff, EigenSpectrum};

/// Stream used by [`sample_grid_exact`].
pub const STREAM_GRID: u64 = 0;
/// Stream used by [`sample_path_truncated`].
pub const STREAM_PATH: u64 = 1;

/// Residue above which a grid evaluation is not considered real.
pub const REALNESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub replicate_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, replicate_index: u64) -> Self {
        Self { master_seed, replicate_index }
    }

    /// Generator keyed by `(master_seed, replicate_index, stream)`.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.replicate_index.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(stream);
        rng
    }
}

fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// A zero-mean Gaussian vector with `E|ẑ_m|² = φ λ_m` and Hermitian symmetry;
/// its inverse DFT has exactly the law `N(0, φ R)`.
pub fn sample_grid_with_spectrum(phi: f64, spectrum: &EigenSpectrum, seed: SeedSpec) -> Result<GridSample> {
    let n = spectrum.n();
    let lambdas = spectrum.lambdas();
    let mut rng = seed.rng(STREAM_GRID);
    let mut dft = vec![Complex64::new(0.0, 0.0); n];
    dft[0] = Complex64::new((phi * lambdas[0]).sqrt() * normal(&mut rng), 0.0);
    for m in 1..n.div_ceil(2) {
        let sd = (phi * lambdas[m] / 2.0).sqrt();
        let v = Complex64::new(sd * normal(&mut rng), sd * normal(&mut rng));
        dft[m] = v;
        dft[n - m] = v.conj();
    }
    if n.is_multiple_of(2) {
        dft[n / 2] = Complex64::new((phi * lambdas[n / 2]).sqrt() * normal(&mut rng), 0.0);
    }
    GridSample::from_dft(dft, 1e-12)
}

/// `Z = (ξ(k/n))_k` for the process with parameters `theta0`.
pub fn sample_grid_exact(theta0: &MaternParams, n: usize, seed: SeedSpec) -> Result<GridSample> {
    let spectrum = eigen_spectrum(theta0.nu, theta0.alpha, n, 1e-13)?;
    sample_grid_with_spectrum(theta0.phi, &spectrum, seed)
}

/// A function on the circle given by the coefficients `c_j`, `|j| ≤ J`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierFunction {
    /// `coeffs[j + J]` is `c_j`.
    coeffs: Vec<Complex64>,
    pub decay_exponent: f64,
    pub hermitian: bool,
    /// `Σ_{|j|>J} E|c_j|²` when the function is a truncated random path.
    pub tail_variance: Option<f64>,
}

impl FourierFunction {
    pub fn new(coeffs: Vec<Complex64>, decay_exponent: f64) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::domain("FourierFunction", "coefficient vector must have odd length 2J+1"));
        }
        let j_max = coeffs.len() / 2;
        let hermitian = (1..=j_max).all(|j| coeffs[j_max + j] == coeffs[j_max - j].conj()) && coeffs[j_max].im == 0.0;
        Ok(Self { coeffs, decay_exponent, hermitian, tail_variance: None })
    }

    pub fn j_max(&self) -> usize {
        self.coeffs.len() / 2
    }

    /// `c_j`, zero beyond the truncation.
    pub fn coeff(&self, j: i64) -> Complex64 {
        let jm = self.j_max() as i64;
        if j.abs() > jm {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(j + jm) as usize]
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `Σ_j c_j e^(2πijx)`.
    pub fn eval(&self, x: f64) -> Complex64 {
        let jm = self.j_max() as i64;
        (-jm..=jm)
            .rev()
            .map(|j| self.coeff(j) * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 * x))
            .sum()
    }

    /// `Σ_j (1 + j²)^(β+1/2) |c_j|²`.
    pub fn sobolev_norm_sq(&self, beta: f64) -> f64 {
        let jm = self.j_max() as i64;
        (-jm..=jm).map(|j| (1.0 + (j * j) as f64).powf(beta + 0.5) * self.coeff(j).norm_sqr()).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Serialize, Deserialize)]
struct FourierFunctionJson {
    coeffs: Vec<(i64, f64, f64)>,
    decay_exponent: f64,
}

impl Serialize for FourierFunction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let jm = self.j_max() as i64;
        FourierFunctionJson {
            coeffs: (-jm..=jm)
                .map(|j| {
                    let c = self.coeff(j);
                    (j, c.re, c.im)
                })
                .collect(),
            decay_exponent: self.decay_exponent,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FourierFunction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = FourierFunctionJson::deserialize(deserializer)?;
        let jm = raw.coeffs.iter().map(|c| c.0.unsigned_abs()).max().unwrap_or(0) as usize;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * jm + 1];
        for (j, re, im) in raw.coeffs {
            coeffs[(j + jm as i64) as usize] = Complex64::new(re, im);
        }
        FourierFunction::new(coeffs, raw.decay_exponent).map_err(serde::de::Error::custom)
    }
}

/// Truncated spectral representation of the process:
/// `c_j = sqrt(c_j(θ₀)/2) (U_{1,|j|} + i sign(j) U_{2,|j|})` for `j ≠ 0` and
/// `c_0 = sqrt(c_0(θ₀)/2) U_{1,0}` with `U_{1,0} ~ N(0, 2)`.
pub fn sample_path_truncated(theta0: &MaternParams, j_max: usize, seed: SeedSpec) -> Result<FourierFunction> {
    if j_max < 1 {
        return Err(Error::domain("sample_path_truncated", "truncation must be at least 1"));
    }
    let mut rng = seed.rng(STREAM_PATH);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * j_max + 1];
    let u10 = std::f64::consts::SQRT_2 * normal(&mut rng);
    coeffs[j_max] = Complex64::new((fourier_coeff(theta0, 0) / 2.0).sqrt() * u10, 0.0);
    for j in 1..=j_max {
        let sd = (fourier_coeff(theta0, j as i64) / 2.0).sqrt();
        let (u1, u2) = (normal(&mut rng), normal(&mut rng));
        let c = Complex64::new(sd * u1, sd * u2);
        coeffs[j_max + j] = c;
        coeffs[j_max - j] = c.conj();
    }
    let tail = MaternProduct::matern(theta0.nu, theta0.alpha).two_sided_tail(j_max, 1e-12);
    Ok(FourierFunction {
        coeffs,
        decay_exponent: theta0.nu + 0.5,
        hermitian: true,
        tail_variance: Some(theta0.phi * tail.value),
    })
}

/// `c_0 = 0`, `c_j = |j|^(-ν₀-1)` for `0 < |j| ≤ J`.
pub fn make_deterministic_f(nu0f: f64, j_max: usize) -> Result<FourierFunction> {
    if !(nu0f > 0.0) {
        return Err(Error::domain("make_deterministic_f", format!("nu0f = {nu0f} must be positive")));
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * j_max + 1];
    for j in 1..=j_max {
        let c = Complex64::new((j as f64).powf(-nu0f - 1.0), 0.0);
        coeffs[j_max + j] = c;
        coeffs[j_max - j] = c;
    }
    Ok(FourierFunction { coeffs, decay_exponent: nu0f + 1.0, hermitian: true, tail_variance: None })
}

/// `Z_k = Σ_j c_j e^(2πijk/n)`, computed by folding the coefficients onto
/// the `n` bins; the unitary DFT of `Z` is `√n` times the folded sums.
pub fn evaluate_grid(f: &FourierFunction, n: usize) -> Result<GridSample> {
    let jm = f.j_max() as i64;
    let mut bins = vec![Complex64::new(0.0, 0.0); n];
    // smallest coefficients first
    for j in (1..=jm).rev() {
        bins[(j as usize) % n] += f.coeff(j);
        bins[(-j).rem_euclid(n as i64) as usize] += f.coeff(-j);
    }
    bins[0] += f.coeff(0);
    let root_n = (n as f64).sqrt();
    bins.iter_mut().for_each(|b| *b *= root_n);
    GridSample::from_dft(bins, REALNESS_TOL)
}

/// Grid values of the untruncated deterministic function
/// `Σ_{j≠0} |j|^(-ν₀-1) e^(2πijx)`: bin `m ≥ 1` folds to
/// `n^(-ν₀-1) γ(ν₀+1; m/n)` and bin 0 to `2 ζ(ν₀+1) n^(-ν₀-1)`.
pub fn deterministic_grid_exact(nu0f: f64, n: usize) -> Result<GridSample> {
    if !(nu0f > 0.0) {
        return Err(Error::domain("deterministic_grid_exact", format!("nu0f = {nu0f} must be positive")));
    }
    let s = nu0f + 1.0;
    let nf = n as f64;
    let scale = nf.powf(-s) * nf.sqrt();
    let mut bins = vec![Complex64::new(0.0, 0.0); n];
    bins[0] = Complex64::new(2.0 * zeta(s, 1e-14).value * scale, 0.0);
    for m in 1..=n / 2 {
        let g = gamma_sym(s, m as f64 / nf, 1e-14)?.value * scale;
        bins[m] = Complex64::new(g, 0.0);
        bins[n - m] = bins[m];
    }
    GridSample::from_dft(bins, REALNESS_TOL)
}
