//! Truncated Toeplitz operators `B`, `R`, `Q` and the coefficient solve
//! `B c = R a`.
//!
//! For a weight `ρ` the operator has entries `T_{k,j} = (1/2π)∫e^{i(j-k)θ}ρ dθ`,
//! which in terms of `r_k = (1/2π)∫e^{-ikθ}ρ` is `T_{k,j} = r_{k-j}`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorization::FactorizationResult;
use crate::spectral::{fourier_coeffs, require_positive, FourierCoeffs, FunctionalCoeffs, SpectralDensity};

/// Condition estimates above this attach a warning to the solution.
pub const CONDITION_WARNING: f64 = 1e12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzOperator {
    size: usize,
    /// Generating coefficients `r_k`, `|k| < size`.
    lags: FourierCoeffs,
}

impl ToeplitzOperator {
    pub fn from_lags(size: usize, lags: FourierCoeffs) -> Self {
        Self { size, lags }
    }

    /// Operator of the real weight given by its grid values.
    pub fn from_weight(values: &[f64], size: usize) -> Result<Self> {
        let lags = fourier_coeffs(values, size.saturating_sub(1))?;
        Ok(Self { size, lags })
    }

    pub fn identity(size: usize, scale: f64) -> Self {
        let mut lags = vec![Complex64::new(0.0, 0.0); 2 * size - 1];
        lags[size - 1] = Complex64::new(scale, 0.0);
        Self::from_lags(size, FourierCoeffs::from_lags(size - 1, lags))
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn lags(&self) -> &FourierCoeffs {
        &self.lags
    }

    pub fn entry(&self, k: usize, j: usize) -> Complex64 {
        self.lags.get(k as isize - j as isize)
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.size, self.size, |k, j| self.entry(k, j))
    }

    /// `T x` for `x` zero-padded (or truncated) to the operator size.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.size)
            .map(|k| x.iter().take(self.size).enumerate().map(|(j, v)| self.entry(k, j) * v).sum())
            .collect()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.lags.iter().all(|(k, r)| (r - self.lags.get(-k).conj()).norm() <= tol)
    }

    /// Smallest and largest eigenvalue of the Hermitian part.
    pub fn eigen_range(&self) -> (f64, f64) {
        let m = self.to_matrix();
        let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let ev = herm.symmetric_eigenvalues();
        let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

/// The three operators of the noisy problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorTriple {
    /// From `1/(f+g)`.
    pub b: ToeplitzOperator,
    /// From `f/(f+g)`.
    pub r: ToeplitzOperator,
    /// From `fg/(f+g)`.
    pub q: ToeplitzOperator,
    pub min_eigenvalue_b: f64,
}

/// Builds `B`, `R`, `Q` of size `n` on a grid of `grid_size` points. Without
/// noise `B` comes from `1/f`, `R = I` and `Q = 0`.
pub fn build_brq(
    f: &SpectralDensity,
    g: Option<&SpectralDensity>,
    n: usize,
    grid_size: usize,
) -> Result<OperatorTriple> {
    let fv = f.evaluate(grid_size)?;
    let gv = g.map(|g| g.evaluate(grid_size)).transpose()?;
    build_brq_on_grid(&fv, gv.as_deref(), n)
}

pub(crate) fn build_brq_on_grid(f: &[f64], g: Option<&[f64]>, n: usize) -> Result<OperatorTriple> {
    let grid_size = f.len();
    if n == 0 || 4 * n > grid_size {
        return Err(Error::Resolution {
            max_lag: n,
            grid_size,
        });
    }
    let (b, r, q) = match g {
        None => {
            require_positive(f, "f")?;
            let recip: Vec<f64> = f.iter().map(|v| 1.0 / v).collect();
            (
                ToeplitzOperator::from_weight(&recip, n)?,
                ToeplitzOperator::identity(n, 1.0),
                ToeplitzOperator::identity(n, 0.0),
            )
        }
        Some(g) => {
            let total: Vec<f64> = f.iter().zip(g).map(|(a, b)| a + b).collect();
            require_positive(&total, "f + g")?;
            let recip: Vec<f64> = total.iter().map(|t| 1.0 / t).collect();
            let ratio: Vec<f64> = f.iter().zip(&total).map(|(a, t)| a / t).collect();
            let harm: Vec<f64> = f.iter().zip(g).zip(&total).map(|((a, b), t)| a * b / t).collect();
            (
                ToeplitzOperator::from_weight(&recip, n)?,
                ToeplitzOperator::from_weight(&ratio, n)?,
                ToeplitzOperator::from_weight(&harm, n)?,
            )
        }
    };
    let (min_eig, _) = b.eigen_range();
    if !(min_eig > 0.0) {
        return Err(Error::Numerical(format!(
            "B is not positive definite: smallest eigenvalue {min_eig:e}"
        )));
    }
    Ok(OperatorTriple {
        b,
        r,
        q,
        min_eigenvalue_b: min_eig,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSolution {
    /// `c_0, …, c_{N-1}`.
    pub c: Vec<Complex64>,
    /// `‖B c - R a‖`.
    pub solve_residual: f64,
    pub condition_estimate: f64,
    pub warnings: Vec<String>,
}

/// Solves `B c = R a` by Cholesky factorization of `B`.
pub fn solve_coeffs(b: &ToeplitzOperator, r: &ToeplitzOperator, a: &FunctionalCoeffs) -> Result<CoefficientSolution> {
    let n = b.size();
    if r.size() != n {
        return Err(Error::validation(format!("operator sizes differ: B is {n}, R is {}", r.size())));
    }
    if a.len() > n {
        return Err(Error::validation(format!(
            "functional has {} coefficients but the operators are {n}×{n}",
            a.len()
        )));
    }
    let rhs = DVector::from_vec(r.apply(a.as_slice()));
    let bm = b.to_matrix();
    let (lo, hi) = b.eigen_range();
    let condition_estimate = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    let chol = bm.clone().cholesky().ok_or_else(|| {
        Error::Numerical(format!("B is singular or indefinite (smallest eigenvalue {lo:e})"))
    })?;
    let c = chol.solve(&rhs);
    let solve_residual = (&bm * &c - &rhs).norm();
    let mut warnings = Vec::new();
    if condition_estimate > CONDITION_WARNING {
        warnings.push(format!("B is ill-conditioned (condition estimate {condition_estimate:.3e})"));
    }
    Ok(CoefficientSolution {
        c: c.iter().copied().collect(),
        solve_residual,
        condition_estimate,
        warnings,
    })
}

/// Leading `n×n` block of `B⁻¹ = Φ̄Φ'`, entries
/// `Σ_{m ≤ min(k,j)} conj(φ_{k-m}) φ_{j-m}`. Coefficients past the
/// factorization order count as zero.
pub fn b_inverse_via_phi(fact: &FactorizationResult, n: usize) -> DMatrix<Complex64> {
    let phi = |i: usize| fact.phi.get(i).copied().unwrap_or_default();
    DMatrix::from_fn(n, n, |k, j| (0..=k.min(j)).map(|m| phi(k - m).conj() * phi(j - m)).sum())
}
