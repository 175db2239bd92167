//! Independent reference implementations shared by the integration tests.
//! Nothing here calls the library's FFT or Newton code.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

pub fn thetas(g: usize) -> Vec<f64> {
    (0..g).map(|m| -PI + 2.0 * PI * m as f64 / g as f64).collect()
}

/// Plain-sum error functional `mean(|A - h|^α f + |h|^α g)` for
/// `h = Σ_{k=1}^{M} x_k e^{-ikθ}`.
pub struct DirectFunctional {
    pub alpha: f64,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub a_vals: Vec<Complex64>,
    /// `basis[k][m] = e^{-i(k+1)θ_m}`.
    pub basis: Vec<Vec<Complex64>>,
}

impl DirectFunctional {
    pub fn new(alpha: f64, f: Vec<f64>, g: Vec<f64>, a: &[Complex64], m: usize) -> Self {
        let th = thetas(f.len());
        let a_vals = th
            .iter()
            .map(|t| a.iter().enumerate().map(|(j, c)| c * Complex64::from_polar(1.0, j as f64 * t)).sum())
            .collect();
        let basis = (1..=m)
            .map(|k| th.iter().map(|t| Complex64::from_polar(1.0, -(k as f64) * t)).collect())
            .collect();
        Self {
            alpha,
            f,
            g,
            a_vals,
            basis,
        }
    }

    pub fn h_values(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.f.len())
            .map(|m| x.iter().zip(&self.basis).map(|(c, b)| c * b[m]).sum())
            .collect()
    }

    pub fn value(&self, x: &[Complex64]) -> f64 {
        let h = self.h_values(x);
        let n = self.f.len() as f64;
        (0..self.f.len())
            .map(|m| (self.a_vals[m] - h[m]).norm().powf(self.alpha) * self.f[m] + h[m].norm().powf(self.alpha) * self.g[m])
            .sum::<f64>()
            / n
    }

    /// `∂Δ/∂Re x_k + i·∂Δ/∂Im x_k`.
    pub fn gradient(&self, x: &[Complex64]) -> Vec<Complex64> {
        let h = self.h_values(x);
        let n = self.f.len() as f64;
        let p = self.alpha;
        let field: Vec<Complex64> = (0..self.f.len())
            .map(|m| {
                let e = self.a_vals[m] - h[m];
                let t1 = if e.norm() > 0.0 { -e * (e.norm().powf(p - 2.0) * self.f[m]) } else { Complex64::new(0.0, 0.0) };
                let t2 = if h[m].norm() > 0.0 { h[m] * (h[m].norm().powf(p - 2.0) * self.g[m]) } else { Complex64::new(0.0, 0.0) };
                (t1 + t2) * p
            })
            .collect();
        self.basis
            .iter()
            .map(|b| (0..self.f.len()).map(|m| field[m] * b[m].conj()).sum::<Complex64>() / n)
            .collect()
    }
}

/// `max_{1≤k≤M} |r_{-k}((A - h)^⟨α-1⟩ f - h^⟨α-1⟩ g)|` for `h` given by its
/// grid values, plain sums.
pub fn stationarity_residual(alpha: f64, a: &[Complex64], f: &[f64], g: &[f64], h: &[Complex64], m: usize) -> f64 {
    let th = thetas(f.len());
    let spow = |z: Complex64| if z.norm() > 0.0 { z * z.norm().powf(alpha - 2.0) } else { z };
    let field: Vec<Complex64> = th
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let big_a: Complex64 = a.iter().enumerate().map(|(j, c)| c * Complex64::from_polar(1.0, j as f64 * t)).sum();
            spow(big_a - h[i]) * f[i] - spow(h[i]) * g[i]
        })
        .collect();
    (1..=m)
        .map(|k| {
            let r: Complex64 = th.iter().zip(&field).map(|(t, v)| v * Complex64::from_polar(1.0, k as f64 * t)).sum();
            r.norm() / f.len() as f64
        })
        .fold(0.0, f64::max)
}

/// Nesterov-accelerated gradient descent with backtracking and restarts,
/// started from `h = 0`.
pub fn descent_minimize(fun: &DirectFunctional, iterations: usize) -> (Vec<Complex64>, f64) {
    let m = fun.basis.len();
    let mut x = vec![Complex64::new(0.0, 0.0); m];
    let mut y = x.clone();
    let mut fx = fun.value(&x);
    let mut step = 1.0;
    let mut t = 1.0f64;
    let g0: f64 = fun.gradient(&x).iter().map(|z| z.norm_sqr()).sum();
    for _ in 0..iterations {
        let gy = fun.gradient(&y);
        let fy = fun.value(&y);
        let gn: f64 = gy.iter().map(|z| z.norm_sqr()).sum();
        if gn <= 1e-24 * g0 || gn < 1e-30 {
            break;
        }
        let mut next;
        loop {
            next = y.iter().zip(&gy).map(|(a, b)| a - b * step).collect::<Vec<_>>();
            if fun.value(&next) <= fy - 0.5 * step * gn || step < 1e-14 {
                break;
            }
            step *= 0.5;
        }
        let fnext = fun.value(&next);
        if fnext > fx {
            // Restart the momentum.
            y = x.clone();
            t = 1.0;
            continue;
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let beta = (t - 1.0) / t_next;
        y = next.iter().zip(&x).map(|(n, o)| n + (n - o) * beta).collect();
        x = next;
        fx = fnext;
        t = t_next;
        step *= 1.5;
    }
    (x, fx)
}

use rand::Rng;
use stable_extrap::SpectralDensity;

/// Rational density whose numerator and denominator are products of
/// factors `1 + ρz`, `|ρ| ≤ max_radius`.
pub fn random_rational<R: Rng>(rng: &mut R, max_radius: f64) -> SpectralDensity {
    let poly = |rng: &mut R| -> Vec<f64> {
        let order = rng.random_range(0..=2);
        let mut p = vec![1.0];
        for _ in 0..order {
            let root = rng.random_range(-max_radius..=max_radius);
            let mut next = vec![0.0; p.len() + 1];
            for (i, c) in p.iter().enumerate() {
                next[i] += c;
                next[i + 1] += c * root;
            }
            p = next;
        }
        p[1..].to_vec()
    };
    let num = poly(rng);
    let den = poly(rng);
    let scale = rng.random_range(0.5..2.0);
    SpectralDensity::rational(num, den, scale)
}

pub fn random_coeffs<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}
