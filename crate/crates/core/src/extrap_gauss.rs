//! Optimal extrapolation of a stationary (`α = 2`) sequence from its noisy or
//! noiseless past.
//!
//! The characteristic is `h = (A f - C)/(f + g)` with `A(θ) = Σa_j e^{ijθ}`,
//! `C(θ) = Σc_j e^{ijθ}` and `c = B⁻¹Ra`. The mean-square error is computed
//! three ways: the bilinear form `⟨Ra, B⁻¹Ra⟩ + ⟨Qa, a⟩` (reported), grid
//! quadrature of `|A - h|²f + |h|²g`, and, without noise, `‖Φ'a‖²` from the
//! causal factor of `f`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorization::{factorize_on_grid, DEFAULT_TOLERANCE};
use crate::grid::{self, Grid};
use crate::operators::{build_brq_on_grid, solve_coeffs, CoefficientSolution};
use crate::spectral::{check_minimality, FunctionalCoeffs, SpectralDensity};

/// Relative disagreement between error routes that is reported as a warning.
pub const ROUTE_WARNING: f64 = 1e-6;
/// Relative disagreement (or one-sidedness defect) treated as a truncation failure.
pub const ROUTE_FAILURE: f64 = 1e-4;

/// Spectral characteristic `h(θ) = Σ_{k≥1} h_{-k} e^{-ikθ}` of a linear estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralCharacteristic {
    /// `h_{-1}, …, h_{-M}`.
    pub negative_coeffs: Vec<Complex64>,
    /// `h(θ_m)` on the grid.
    pub grid_values: Vec<Complex64>,
    pub alpha: f64,
}

impl SpectralCharacteristic {
    /// Keeps grid values and reads off the first `m` negative-lag coefficients.
    pub fn from_grid(grid_values: Vec<Complex64>, m: usize, alpha: f64) -> Self {
        let all = grid::dft_coeffs(&grid_values);
        let negative_coeffs = (1..=m).map(|k| grid::coeff_at(&all, -(k as isize))).collect();
        Self {
            negative_coeffs,
            grid_values,
            alpha,
        }
    }

    /// Synthesizes the grid values from `h_{-1}, …, h_{-M}`.
    pub fn from_coeffs(negative_coeffs: Vec<Complex64>, grid: Grid, alpha: f64) -> Self {
        let grid_values = synthesize_negative(&negative_coeffs, grid);
        Self {
            negative_coeffs,
            grid_values,
            alpha,
        }
    }

    pub fn grid_size(&self) -> usize {
        self.grid_values.len()
    }

    /// `max_{0 ≤ k < G/2} |r_k(h)|`; zero for an exactly one-sided `h`.
    pub fn one_sided_residual(&self) -> f64 {
        let all = grid::dft_coeffs(&self.grid_values);
        all[..self.grid_size() / 2].iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Sup distance between the grid values and the synthesized coefficients.
    pub fn synthesis_residual(&self) -> f64 {
        let grid = Grid::of_len(self.grid_size());
        synthesize_negative(&self.negative_coeffs, grid)
            .iter()
            .zip(&self.grid_values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn synthesize_negative(coeffs: &[Complex64], grid: Grid) -> Vec<Complex64> {
    grid::synthesize_lags(grid, coeffs.iter().enumerate().map(|(k, &c)| (-(k as isize) - 1, c)))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GaussDiagnostics {
    pub error_bilinear: f64,
    pub error_quadrature: f64,
    /// `‖Φ'a‖²`, noiseless case only.
    pub error_factor: Option<f64>,
    /// Largest relative disagreement among the routes.
    pub route_discrepancy: f64,
    pub one_sided_residual: f64,
    /// Largest `|r_{-k}((A - h)f - hg)|`, `1 ≤ k ≤ N/2`.
    pub orthogonality_residual: f64,
    pub synthesis_residual: f64,
    pub solve_residual: f64,
    /// Residual of the factorization behind `error_factor`.
    pub factorization_residual: Option<f64>,
    pub truncation: usize,
    pub grid_size: usize,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub h: SpectralCharacteristic,
    pub c: CoefficientSolution,
    /// Mean-square error, bilinear-form route.
    pub error_value: f64,
    pub diagnostics: GaussDiagnostics,
}

/// Estimate from observations of `ξ + η` with signal density `f` and noise density `g`.
pub fn extrapolate_noisy_gauss(
    f: &SpectralDensity,
    g: &SpectralDensity,
    a: &FunctionalCoeffs,
    n: usize,
    grid_size: usize,
) -> Result<EstimateReport> {
    require_minimal(f, Some(g), grid_size)?;
    let fv = f.evaluate(grid_size)?;
    let gv = g.evaluate(grid_size)?;
    gauss_on_grid(&fv, Some(&gv), a, n, false)
}

/// Estimate from exact observations of `ξ` with density `f`.
pub fn extrapolate_noiseless_gauss(
    f: &SpectralDensity,
    a: &FunctionalCoeffs,
    n: usize,
    grid_size: usize,
) -> Result<EstimateReport> {
    require_minimal(f, None, grid_size)?;
    let fv = f.evaluate(grid_size)?;
    gauss_on_grid(&fv, None, a, n, true)
}

fn require_minimal(f: &SpectralDensity, g: Option<&SpectralDensity>, grid_size: usize) -> Result<()> {
    let rep = check_minimality(f, g, 2.0, grid_size);
    if rep.passes {
        Ok(())
    } else {
        Err(Error::domain(format!("minimality condition fails: {}", rep.note)))
    }
}

/// `Σ_j |Σ_m φ_m a_{j+m}|²`, the squared norm of the Hankel operator
/// `(A)_{i,j} = a_{i+j}` applied to `φ`.
pub fn factor_error(a: &[Complex64], phi: &[Complex64]) -> f64 {
    hankel_apply(a, phi).iter().map(|z| z.norm_sqr()).sum()
}

/// `(Aφ)_j = Σ_m a_{j+m} φ_m` for `j < len(a)`.
pub(crate) fn hankel_apply(a: &[Complex64], phi: &[Complex64]) -> Vec<Complex64> {
    (0..a.len())
        .map(|j| a[j..].iter().zip(phi).map(|(x, p)| x * p).sum())
        .collect()
}

fn relative_gap(x: f64, y: f64) -> f64 {
    let scale = x.abs().max(y.abs());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).abs() / scale
    }
}

pub(crate) fn gauss_on_grid(
    f: &[f64],
    g: Option<&[f64]>,
    a: &FunctionalCoeffs,
    n: usize,
    factor_route: bool,
) -> Result<EstimateReport> {
    let grid = Grid::new(f.len())?;
    if n < 4 * a.len() {
        return Err(Error::validation(format!(
            "truncation N = {n} must be at least 4 × len(a) = {}",
            4 * a.len()
        )));
    }
    let ops = build_brq_on_grid(f, g, n)?;
    let c = solve_coeffs(&ops.b, &ops.r, a)?;

    let a_pad: Vec<Complex64> = (0..n).map(|j| a.as_slice().get(j).copied().unwrap_or_default()).collect();
    let ra = ops.r.apply(&a_pad);
    let qa = ops.q.apply(&a_pad);
    let dot = |x: &[Complex64], y: &[Complex64]| -> Complex64 { x.iter().zip(y).map(|(u, v)| u.conj() * v).sum() };
    let error_bilinear = (dot(&ra, &c.c) + dot(&a_pad, &qa)).re;

    let big_a = a.symbol_on_grid(grid);
    let big_c = grid::synthesize_lags(grid, c.c.iter().enumerate().map(|(j, &v)| (j as isize, v)));
    let zero = vec![0.0; f.len()];
    let g = g.unwrap_or(&zero);
    let h_vals: Vec<Complex64> = (0..f.len())
        .map(|m| (big_a[m] * f[m] - big_c[m]) / (f[m] + g[m]))
        .collect();
    let integrand: Vec<f64> = (0..f.len())
        .map(|m| (big_a[m] - h_vals[m]).norm_sqr() * f[m] + h_vals[m].norm_sqr() * g[m])
        .collect();
    let error_quadrature = grid::mean(&integrand);

    let defect: Vec<Complex64> = (0..f.len())
        .map(|m| (big_a[m] - h_vals[m]) * f[m] - h_vals[m] * g[m])
        .collect();
    let defect_coeffs = grid::dft_coeffs(&defect);
    let orthogonality_residual = (1..=(n / 2).max(1))
        .map(|k| grid::coeff_at(&defect_coeffs, -(k as isize)).norm())
        .fold(0.0, f64::max);

    let mut warnings = c.warnings.clone();
    let mut route_discrepancy = relative_gap(error_bilinear, error_quadrature);
    let (error_factor, factorization_residual) = if factor_route {
        let order = (f.len() / 4).max(a.len());
        let fact = factorize_on_grid(f, order, DEFAULT_TOLERANCE)?;
        let e = factor_error(a.as_slice(), &fact.phi);
        route_discrepancy = route_discrepancy.max(relative_gap(error_bilinear, e));
        (Some(e), Some(fact.residual))
    } else {
        (None, None)
    };

    let h = SpectralCharacteristic::from_grid(h_vals, n, 2.0);
    let one_sided_residual = h.one_sided_residual();
    let synthesis_residual = h.synthesis_residual();
    let scale = a.norm_sqr().sqrt().max(f64::MIN_POSITIVE);
    if route_discrepancy > ROUTE_FAILURE || one_sided_residual > ROUTE_FAILURE * scale {
        return Err(Error::Truncation(format!(
            "error routes disagree by {route_discrepancy:.3e} (relative) and h has nonnegative-lag mass \
             {one_sided_residual:.3e} at N = {n}; increase N"
        )));
    }
    if route_discrepancy > ROUTE_WARNING {
        warnings.push(format!("error routes disagree by {route_discrepancy:.3e} (relative)"));
    }
    if one_sided_residual > ROUTE_WARNING * scale {
        warnings.push(format!("h has nonnegative-lag coefficients up to {one_sided_residual:.3e}"));
    }

    let diagnostics = GaussDiagnostics {
        error_bilinear,
        error_quadrature,
        error_factor,
        route_discrepancy,
        one_sided_residual,
        orthogonality_residual,
        synthesis_residual,
        solve_residual: c.solve_residual,
        factorization_residual,
        truncation: n,
        grid_size: f.len(),
        warnings,
    };
    Ok(EstimateReport {
        h,
        c,
        error_value: error_bilinear.max(0.0),
        diagnostics,
    })
}
