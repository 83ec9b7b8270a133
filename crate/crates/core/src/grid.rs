use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unitary DFT `x̂_m = n^(-1/2) Σ_k x_k e^(-2πi km/n)`, any length.
pub fn unitary_dft(input: &[Complex64]) -> Vec<Complex64> {
    transform(input, false)
}

/// Inverse of [`unitary_dft`].
pub fn unitary_idft(input: &[Complex64]) -> Vec<Complex64> {
    transform(input, true)
}

fn transform(input: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = input.len();
    let mut buf = input.to_vec();
    if n == 0 {
        return buf;
    }
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        let fft = if inverse { p.plan_fft_inverse(n) } else { p.plan_fft_forward(n) };
        fft.process(&mut buf);
    });
    let scale = 1.0 / (n as f64).sqrt();
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// Observations `Z_k = f(k/n)` together with their unitary DFT.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSample {
    values: Vec<f64>,
    dft: Vec<Complex64>,
}

impl GridSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::domain("GridSample", format!("n = {} must be at least 3", values.len())));
        }
        let complex: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let dft = unitary_dft(&complex);
        Ok(Self { values, dft })
    }

    /// Build from a Hermitian spectrum; the values must come out real.
    pub fn from_dft(dft: Vec<Complex64>, tolerance: f64) -> Result<Self> {
        if dft.len() < 3 {
            return Err(Error::domain("GridSample", format!("n = {} must be at least 3", dft.len())));
        }
        let values = unitary_idft(&dft);
        let scale = values.iter().map(|v| v.norm()).fold(1.0, f64::max);
        let residue = values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        if residue > tolerance * scale {
            return Err(Error::NotReal { residue });
        }
        Ok(Self { values: values.iter().map(|v| v.re).collect(), dft })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dft(&self) -> &[Complex64] {
        &self.dft
    }

    /// `|ẑ_m|²` for each bin.
    pub fn periodogram(&self) -> Vec<f64> {
        self.dft.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { values: self.values.iter().map(|v| c * v).collect(), dft: self.dft.iter().map(|v| c * v).collect() }
    }

    /// `max_m |ẑ_m − conj(ẑ_{n−m})|`.
    pub fn hermitian_residue(&self) -> f64 {
        let n = self.n();
        (0..n).map(|m| (self.dft[m] - self.dft[(n - m) % n].conj()).norm()).fold(0.0, f64::max)
    }
}
