//! Canonical factorization of a density's reciprocal,
//! `1/f = |Σψ_j e^{-ijθ}|² = |Σφ_j e^{-ijθ}|^{-2}`, by the cepstral method.
//!
//! With `κ_k` the Fourier coefficients of `log(1/f)`, the outer function
//! `ψ(z) = exp(κ_0/2 + Σ_{k≥1} κ_{-k} z^k)`, `z = e^{-iθ}`, has
//! `2·Re log ψ = log(1/f)` and no zeros in the unit disk. Its reciprocal
//! `φ = exp(-…)` is the causal factor of `f` itself. Both series are read off
//! the grid with one FFT each, so the method is spectrally accurate for
//! smooth densities and handles parametric and tabulated input alike.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, Grid};
use crate::spectral::{require_positive, FourierCoeffs, SpectralDensity};

/// Largest accepted `sup |(|ψ|²·f) - 1|` unless the caller overrides it.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationResult {
    /// `ψ_0, …, ψ_L`; `ψ_0` real and positive.
    pub psi: Vec<Complex64>,
    /// `φ_0, …, φ_L` with `ψ * φ = δ`.
    pub phi: Vec<Complex64>,
    /// `sup_θ | |Σψ_j e^{-ijθ}|²·f(θ) - 1 |` over the grid.
    pub residual: f64,
    /// `max_{0≤k≤L} |(ψ * φ)_k - δ_k|`.
    pub inversion_residual: f64,
    pub grid_size: usize,
}

impl FactorizationResult {
    pub fn order(&self) -> usize {
        self.psi.len() - 1
    }

    /// Smallest `n` such that `Σ_{j≥n} |φ_j|² ≤ rel·Σ_j |φ_j|²`.
    pub fn phi_support(&self, rel: f64) -> usize {
        tail_cutoff(&self.phi, rel)
    }
}

pub(crate) fn tail_cutoff(x: &[Complex64], rel: f64) -> usize {
    let total: f64 = x.iter().map(|z| z.norm_sqr()).sum();
    let mut tail = 0.0;
    for n in (0..x.len()).rev() {
        tail += x[n].norm_sqr();
        if tail > rel * total {
            return n + 1;
        }
    }
    0
}

/// Factorizes `1/f` for a density given in closed or tabulated form.
pub fn factorize_reciprocal(f: &SpectralDensity, order: usize, grid_size: usize) -> Result<FactorizationResult> {
    let values = f.evaluate(grid_size)?;
    factorize_on_grid(&values, order, DEFAULT_TOLERANCE)
}

/// Grid version of [`factorize_reciprocal`] with an explicit tolerance.
pub fn factorize_on_grid(values: &[f64], order: usize, tolerance: f64) -> Result<FactorizationResult> {
    let grid = Grid::new(values.len())?;
    let n = grid.size();
    if order == 0 || 2 * order >= n {
        return Err(Error::Resolution {
            max_lag: order,
            grid_size: n,
        });
    }
    require_positive(values, "density to factorize")?;

    let log_recip: Vec<f64> = values.iter().map(|v| -v.ln()).collect();
    let kappa = grid::dft_coeffs_real(&log_recip);

    // Analytic part in z = e^{-iθ}: lag -k carries κ_{-k}; Nyquist split in half.
    let half = n / 2;
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    spec[0] = Complex64::new(kappa[0].re / 2.0, 0.0);
    for k in 1..half {
        let idx = n - k;
        spec[idx] = kappa[idx];
    }
    spec[half] = kappa[half] / 2.0;
    let cepstrum = grid::synthesize(&spec);

    let psi_grid: Vec<Complex64> = cepstrum.iter().map(|c| c.exp()).collect();
    let phi_grid: Vec<Complex64> = cepstrum.iter().map(|c| (-c).exp()).collect();
    let psi_all = grid::dft_coeffs(&psi_grid);
    let phi_all = grid::dft_coeffs(&phi_grid);
    let mut psi: Vec<Complex64> = (0..=order).map(|j| grid::coeff_at(&psi_all, -(j as isize))).collect();
    let mut phi: Vec<Complex64> = (0..=order).map(|j| grid::coeff_at(&phi_all, -(j as isize))).collect();
    // ψ_0 = exp(κ_0/2) up to rounding; pin the canonical normalization.
    psi[0] = Complex64::new(psi[0].norm(), 0.0);
    phi[0] = Complex64::new(phi[0].norm(), 0.0);

    let synth = grid::synthesize_lags(grid, psi.iter().enumerate().map(|(j, &c)| (-(j as isize), c)));
    let residual = synth
        .iter()
        .zip(values)
        .map(|(s, v)| (s.norm_sqr() * v - 1.0).abs())
        .fold(0.0, f64::max);

    let inversion_residual = (0..=order)
        .map(|k| {
            let conv: Complex64 = (0..=k).map(|j| psi[j] * phi[k - j]).sum();
            let target = if k == 0 { 1.0 } else { 0.0 };
            (conv - target).norm()
        })
        .fold(0.0, f64::max);

    if !(residual <= tolerance) {
        return Err(Error::convergence(
            format!(
                "factorization residual {residual:.3e} exceeds {tolerance:.1e} (order {order}, grid {n}); \
                 increase the order or the grid"
            ),
            vec![
                format!("residual = {residual:e}"),
                format!("inversion_residual = {inversion_residual:e}"),
                format!("|psi_L| = {:e}", psi[order].norm()),
            ],
        ));
    }

    Ok(FactorizationResult {
        psi,
        phi,
        residual,
        inversion_residual,
        grid_size: n,
    })
}

/// `b_p = Σ_k ψ_k conj(ψ_{k+p})` for `p ≥ 0` and `b_{-p} = conj(b_p)`; these are
/// the Fourier coefficients of `1/f`.
pub fn b_coeffs_from_psi(r: &FactorizationResult, max_lag: usize) -> FourierCoeffs {
    let psi = &r.psi;
    let b = |p: usize| -> Complex64 {
        psi.iter()
            .zip(psi.iter().skip(p))
            .map(|(x, y)| x * y.conj())
            .sum()
    };
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * max_lag + 1];
    for p in 0..=max_lag {
        let v = b(p);
        coeffs[max_lag + p] = v;
        coeffs[max_lag - p] = v.conj();
    }
    coeffs[max_lag].im = 0.0;
    FourierCoeffs::from_lags(max_lag, coeffs)
}
