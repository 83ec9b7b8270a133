//! Aliased sums `Σ_{j∈ℤ} f(m + n j)` of products of Matérn factors
//! `f(k) = Π_i (α_i² + k²)^(-e_i)`.
//!
//! A few aliases around the band are summed explicitly. Far out, `f` is
//! expanded in powers of `1/k²` and each power folds into a Hurwitz zeta
//! value, so the tail is exact up to the Euler–Maclaurin remainder.

use crate::special::{log_power_sum, Series};

const MAX_EXPANSION: usize = 32;

#[derive(Debug, Clone)]
pub(crate) struct MaternProduct {
    factors: Vec<(f64, f64)>,
    /// `Π_i (1 + α_i² u)^(-e_i) = Σ_l coeffs[l] u^l`
    coeffs: Vec<f64>,
    /// `2 Σ e_i`
    power: f64,
    alpha_max: f64,
}

/// An aliased sum split into the band's own term and everything else.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Aliased {
    pub central: f64,
    pub rest: f64,
    pub bound: f64,
}

impl Aliased {
    pub fn total(&self) -> f64 {
        self.central + self.rest
    }
}

impl MaternProduct {
    /// `factors` holds `(α, e)` pairs.
    pub fn new(factors: &[(f64, f64)]) -> Self {
        let factors: Vec<(f64, f64)> = factors.iter().map(|&(a, e)| (a * a, e)).collect();
        let mut coeffs = vec![0.0; MAX_EXPANSION];
        coeffs[0] = 1.0;
        for &(a2, e) in &factors {
            // binomial series of (1 + a2 u)^(-e)
            let mut series = vec![0.0; MAX_EXPANSION];
            series[0] = 1.0;
            for l in 1..MAX_EXPANSION {
                series[l] = series[l - 1] * (-e - (l - 1) as f64) / l as f64 * a2;
            }
            let mut product = vec![0.0; MAX_EXPANSION];
            for (i, &c) in coeffs.iter().enumerate() {
                for (l, &s) in series.iter().enumerate().take(MAX_EXPANSION - i) {
                    product[i + l] += c * s;
                }
            }
            coeffs = product;
        }
        let power = 2.0 * factors.iter().map(|f| f.1).sum::<f64>();
        let alpha_max = factors.iter().map(|f| f.0.sqrt()).fold(0.0, f64::max);
        Self { factors, coeffs, power, alpha_max }
    }

    pub fn matern(nu: f64, alpha: f64) -> Self {
        Self::new(&[(alpha, nu + 0.5)])
    }

    #[inline]
    pub fn eval(&self, k: f64) -> f64 {
        let k2 = k * k;
        match self.factors.as_slice() {
            [(a2, e)] => (a2 + k2).powf(-e),
            fs => fs.iter().map(|&(a2, e)| (a2 + k2).powf(-e)).product(),
        }
    }

    /// Number of aliases summed explicitly on each side of the band.
    pub fn direct_radius(&self, n: usize) -> i64 {
        ((4.0 * self.alpha_max / n as f64).ceil() as i64).max(1)
    }

    /// `Σ_{j ≥ start} f(n (j + a))` for `n (start + a) ≥ 2 α_max`.
    pub fn tail(&self, n: f64, a: f64, start: f64, rel_tol: f64) -> Series {
        let shift = start + a;
        let k_min = n * shift;
        debug_assert!(k_min >= 2.0 * self.alpha_max);
        let mut value = 0.0;
        let mut bound = 0.0;
        let mut n_pow = n.powf(-self.power);
        let mut lead = 0.0;
        for (l, &c) in self.coeffs.iter().enumerate() {
            let z = log_power_sum(self.power + 2.0 * l as f64, shift, 0, rel_tol);
            let term = c * n_pow * z.value;
            value += term;
            bound += (c * n_pow).abs() * z.bound;
            if l == 0 {
                lead = term.abs();
            } else if term.abs() <= 1e-17 * lead {
                // successive terms shrink at least by (α_max / k_min)² ≤ 1/4
                bound += term.abs() / 3.0;
                return Series { value, bound };
            }
            n_pow /= n * n;
        }
        bound += self.coeffs[MAX_EXPANSION - 1].abs()
            * n_pow
            * n
            * n
            * shift.powf(-self.power)
            * 4f64.powi(-(MAX_EXPANSION as i32));
        Series { value, bound }
    }

    /// `Σ_{j∈ℤ} f(m + n j)` for `0 ≤ m ≤ n/2`, split into the `j = 0` term and
    /// the rest.
    pub fn aliased(&self, m: usize, n: usize, rel_tol: f64) -> Aliased {
        debug_assert!(2 * m <= n);
        let radius = self.direct_radius(n);
        let (mf, nf) = (m as f64, n as f64);
        let central = self.eval(mf);
        let mut rest = 0.0;
        for j in (1..=radius).rev() {
            let jf = j as f64;
            rest += self.eval(mf + nf * jf) + self.eval(nf * jf - mf);
        }
        let start = (radius + 1) as f64;
        let a = mf / nf;
        let right = self.tail(nf, a, start, rel_tol);
        let left = self.tail(nf, -a, start, rel_tol);
        Aliased { central, rest: rest + right.value + left.value, bound: right.bound + left.bound }
    }

    /// `Σ_{|j| > big_j} f(j)`.
    pub fn two_sided_tail(&self, big_j: usize, rel_tol: f64) -> Series {
        let start = (big_j + 1) as f64;
        let mut direct = 0.0;
        let mut first = start;
        while first < 2.0 * self.alpha_max {
            direct += self.eval(first);
            first += 1.0;
        }
        let tail = self.tail(1.0, 0.0, first, rel_tol);
        Series { value: 2.0 * (direct + tail.value), bound: 2.0 * tail.bound }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_aliased(f: &MaternProduct, m: i64, n: i64, big_j: i64) -> f64 {
        // smallest terms first
        let mut acc = 0.0;
        for j in (1..=big_j).rev() {
            acc += f.eval((m + n * j) as f64) + f.eval((m - n * j) as f64);
        }
        acc + f.eval(m as f64)
    }

    #[test]
    fn expansion_reproduces_factor() {
        let f = MaternProduct::new(&[(1.3, 0.8), (0.7, 1.6)]);
        let k = 40.0_f64;
        let u = 1.0 / (k * k);
        let series: f64 = f.coeffs.iter().enumerate().map(|(l, c)| c * u.powi(l as i32)).sum();
        let exact = f.eval(k) * k.powf(f.power);
        assert!((series - exact).abs() < 1e-14, "{series} vs {exact}");
    }

    #[test]
    fn aliased_matches_brute_force() {
        // s = 2ν+1 = 5, tails past 10⁵ aliases are below 1e-20
        let f = MaternProduct::matern(2.0, 1.0);
        for &(m, n) in &[(0usize, 3usize), (1, 3), (2, 8), (4, 8), (7, 33), (16, 33)] {
            let fast = f.aliased(m, n, 1e-14);
            let slow = brute_aliased(&f, m as i64, n as i64, 100_000);
            assert!((fast.total() - slow).abs() < 1e-14 * slow, "m={m} n={n}: {} vs {slow}", fast.total());
        }
    }

    #[test]
    fn aliased_slow_decay() {
        // s = 1.6: compare against brute force with an integral tail estimate.
        let f = MaternProduct::matern(0.3, 2.5);
        let (m, n) = (1i64, 4i64);
        let big_j = 2_000_000i64;
        let mut slow = brute_aliased(&f, m, n, big_j);
        // Σ_{j>J} (n j ± m)^(-1.6) ≈ ∫_{J+1/2}^∞ (n t)^(-1.6) dt on each side
        let t0 = big_j as f64 + 0.5;
        slow += 2.0 * (n as f64).powf(-1.6) * t0.powf(-0.6) / 0.6;
        let fast = f.aliased(m as usize, n as usize, 1e-14);
        assert!((fast.total() - slow).abs() < 1e-9 * slow, "{} vs {slow}", fast.total());
    }

    #[test]
    fn product_factor_tail() {
        let f = MaternProduct::new(&[(1.0, 1.25), (2.0, 2.0)]);
        let fast = f.aliased(3, 16, 1e-14);
        let slow = brute_aliased(&f, 3, 16, 200_000);
        assert!((fast.total() - slow).abs() < 1e-14 * slow);
    }

    #[test]
    fn two_sided_tail_matches_direct() {
        let f = MaternProduct::matern(1.5, 3.0);
        let t = f.two_sided_tail(2, 1e-14);
        let direct: f64 = (3..2_000_000).map(|j| 2.0 * f.eval(j as f64)).sum();
        assert!((t.value - direct).abs() < 1e-12 * direct);
    }
}
