//! Uniform periodic grid on `[-π, π)` and the FFT-backed quadrature used for
//! every Fourier coefficient in the crate.
//!
//! Convention: `r_k = (1/2π) ∫ e^{-ikθ} ρ(θ) dθ`, approximated by the
//! rectangle rule on `θ_m = -π + 2πm/G`, which is exact for trigonometric
//! polynomials of degree below `G` and spectrally accurate for smooth
//! periodic integrands. Since `e^{-ikθ_m} = (-1)^k e^{-2πikm/G}`, one forward
//! FFT gives all `r_k` at once.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Smallest grid accepted by the public entry points.
pub const MIN_GRID: usize = 64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// A validated grid size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    size: usize,
}

impl Grid {
    pub fn new(size: usize) -> Result<Self> {
        if size < MIN_GRID || size % 2 != 0 {
            return Err(Error::validation(format!(
                "grid size must be even and at least {MIN_GRID}, got {size}"
            )));
        }
        Ok(Self { size })
    }

    /// For sizes taken from data that was already validated on construction.
    pub(crate) fn of_len(size: usize) -> Self {
        Self { size }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn theta(&self, m: usize) -> f64 {
        -PI + 2.0 * PI * m as f64 / self.size as f64
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.size).map(|m| self.theta(m)).collect()
    }

    /// Index of the grid point at `-θ_m` (the grid is symmetric modulo 2π).
    #[inline]
    pub fn mirror(&self, m: usize) -> usize {
        (self.size - m) % self.size
    }
}

/// `(1/2π)∫ρ`, by the rectangle rule.
pub fn mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}

/// Pairwise summation; deterministic and order-fixed.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 32 {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

#[inline]
fn parity(k: isize) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// All `G` discrete coefficients of a grid function: `out[k mod G] = r_k`.
pub(crate) fn dft_coeffs(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf = values.to_vec();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n));
    fft.process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().enumerate().for_each(|(k, v)| {
        *v *= scale * parity(k as isize);
    });
    buf
}

pub(crate) fn dft_coeffs_real(values: &[f64]) -> Vec<Complex64> {
    let cvals: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    dft_coeffs(&cvals)
}

/// Inverse of [`dft_coeffs`]: grid values of `Σ_k r_k e^{ikθ}` from
/// coefficients laid out as `coeffs[k mod G]`.
pub(crate) fn synthesize(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len();
    let mut buf: Vec<Complex64> = coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| c * parity(k as isize))
        .collect();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n));
    fft.process(&mut buf);
    buf
}

/// Grid values of `Σ_j x_j e^{i·lag_j·θ}` for explicit `(lag, coefficient)` pairs.
pub(crate) fn synthesize_lags(
    grid: Grid,
    terms: impl IntoIterator<Item = (isize, Complex64)>,
) -> Vec<Complex64> {
    let n = grid.size();
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    for (lag, c) in terms {
        spec[lag.rem_euclid(n as isize) as usize] += c;
    }
    synthesize(&spec)
}

/// Reads `r_k` out of a coefficient vector laid out as `coeffs[k mod G]`.
#[inline]
pub(crate) fn coeff_at(coeffs: &[Complex64], k: isize) -> Complex64 {
    coeffs[k.rem_euclid(coeffs.len() as isize) as usize]
}
