//! Damped Newton minimization of grid integrals of the form
//!
//! `Φ(x) = Σ_t mean(w_t·(|o_t + s_t·P|² + ε²)^{p_t/2}) - Re Σ_k conj(x_k)·d_k`,
//! `P(θ) = Σ_k x_k e^{iℓ_kθ}`,
//!
//! over complex coefficients `x`. Gradient and Hessian are assembled in
//! Wirtinger form from one FFT of each of three grid fields, then mapped to the
//! real/imaginary parametrization for the Newton solve.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{self, Grid};

/// Consecutive accepted steps without any decrease before Newton gives up.
const MAX_STALLED: usize = 5;

/// One smoothed power term `w·(|o + s·P|² + ε²)^{p/2}`.
#[derive(Clone, Debug)]
pub(crate) struct Term {
    pub offset: Vec<Complex64>,
    pub sign: f64,
    pub weight: Vec<f64>,
    pub power: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct ConvexProblem {
    pub grid: Grid,
    /// Frequency `ℓ_k` carried by coefficient `x_k`.
    pub lags: Vec<isize>,
    pub terms: Vec<Term>,
    /// `d` in the linear part `-Re Σ conj(x_k) d_k`.
    pub linear: Vec<Complex64>,
    pub smoothing: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct NewtonOutcome {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    pub trace: Vec<String>,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct NewtonOptions {
    pub max_iterations: usize,
    /// Stop once `max_k |∂Φ/∂conj(x_k)| ≤ gradient_tol`.
    pub gradient_tol: f64,
}

impl ConvexProblem {
    pub fn dim(&self) -> usize {
        self.lags.len()
    }

    pub fn field(&self, x: &[Complex64]) -> Vec<Complex64> {
        grid::synthesize_lags(self.grid, self.lags.iter().copied().zip(x.iter().copied()))
    }

    fn linear_part(&self, x: &[Complex64]) -> f64 {
        x.iter().zip(&self.linear).map(|(x, d)| (x.conj() * d).re).sum()
    }

    fn value_with(&self, x: &[Complex64], eps2: f64) -> f64 {
        let p = self.field(x);
        let mut total = vec![0.0; self.grid.size()];
        for t in &self.terms {
            for (m, acc) in total.iter_mut().enumerate() {
                let z = t.offset[m] + p[m] * t.sign;
                *acc += t.weight[m] * (z.norm_sqr() + eps2).powf(t.power / 2.0);
            }
        }
        grid::mean(&total) - self.linear_part(x)
    }

    pub fn value(&self, x: &[Complex64]) -> f64 {
        self.value_with(x, self.smoothing * self.smoothing)
    }

    pub fn value_unsmoothed(&self, x: &[Complex64]) -> f64 {
        self.value_with(x, 0.0)
    }

    /// Wirtinger gradient `∂Φ/∂conj(x_k)` and the fields behind the Hessian.
    fn derivatives(&self, x: &[Complex64], with_hessian: bool) -> (Vec<Complex64>, Option<(Vec<Complex64>, Vec<Complex64>)>) {
        let n = self.grid.size();
        let eps2 = self.smoothing * self.smoothing;
        let p = self.field(x);
        let mut g = vec![Complex64::new(0.0, 0.0); n];
        let mut w1 = vec![Complex64::new(0.0, 0.0); if with_hessian { n } else { 0 }];
        let mut w2 = w1.clone();
        for t in &self.terms {
            let half = t.power / 2.0;
            for m in 0..n {
                if t.weight[m] == 0.0 {
                    continue;
                }
                let z = t.offset[m] + p[m] * t.sign;
                let s = z.norm_sqr() + eps2;
                let s1 = s.powf(half - 1.0);
                let coef = t.weight[m] * half;
                g[m] += z * (coef * s1 * t.sign);
                if with_hessian {
                    let s2 = if s > 0.0 { s1 / s } else { 0.0 };
                    w1[m] += Complex64::new(coef * (s1 + (half - 1.0) * s2 * z.norm_sqr()), 0.0);
                    w2[m] += z * z * (coef * (half - 1.0) * s2);
                }
            }
        }
        let gc = grid::dft_coeffs(&g);
        let grad = self
            .lags
            .iter()
            .zip(&self.linear)
            .map(|(&l, d)| grid::coeff_at(&gc, l) - d * 0.5)
            .collect();
        let hess = with_hessian.then(|| (grid::dft_coeffs(&w1), grid::dft_coeffs(&w2)));
        (grad, hess)
    }

    pub fn gradient(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.derivatives(x, false).0
    }

    /// Real gradient and Hessian in the variables `(Re x, Im x)`.
    pub fn real_derivatives(&self, x: &[Complex64]) -> (DVector<f64>, DMatrix<f64>) {
        let (g, hf) = self.derivatives(x, true);
        let (c1, c2) = hf.expect("hessian requested");
        (real_gradient(&g), real_hessian(&self.lags, &c1, &c2))
    }

    pub fn minimize(&self, x0: &[Complex64], opts: NewtonOptions) -> Result<NewtonOutcome> {
        let mdim = self.dim();
        let mut x = x0.to_vec();
        let mut value = self.value(&x);
        let mut trace = Vec::new();
        let mut stalled = 0;
        for iter in 0..opts.max_iterations {
            // The objective has stopped moving in the last digit; the
            // caller's stationarity check decides whether that is good enough.
            if stalled >= MAX_STALLED {
                trace.push(format!("objective unchanged for {MAX_STALLED} steps; stopped"));
                return Ok(NewtonOutcome {
                    x,
                    iterations: iter,
                    trace,
                });
            }
            let (grad, hess) = self.real_derivatives(&x);
            let gnorm = grad.amax() / 2.0;
            trace.push(format!("iter {iter}: value {value:.15e}, |grad| {gnorm:.3e}"));
            if gnorm <= opts.gradient_tol {
                return Ok(NewtonOutcome {
                    x,
                    iterations: iter,
                    trace,
                });
            }
            let step = newton_direction(&hess, &grad)?;
            let slope = grad.dot(&step);
            let mut t = 1.0;
            let mut accepted = false;
            while t > 1e-12 {
                let trial: Vec<Complex64> = (0..mdim)
                    .map(|k| x[k] + Complex64::new(step[k], step[mdim + k]) * t)
                    .collect();
                let v = self.value(&trial);
                let armijo = v <= value + 1e-4 * t * slope;
                // Values equal to rounding carry no information; fall back
                // to the gradient norm as the merit function.
                let flat = !armijo
                    && (v - value).abs() <= 8.0 * f64::EPSILON * value.abs()
                    && real_gradient(&self.gradient(&trial)).amax() / 2.0 < gnorm;
                if armijo || flat {
                    stalled = if v < value || flat { 0 } else { stalled + 1 };
                    x = trial;
                    value = v;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                // No representable decrease left; accept if the gradient is
                // already at rounding level.
                if gnorm <= opts.gradient_tol * 1e4 {
                    trace.push(format!("line search stalled at |grad| {gnorm:.3e}; accepted"));
                    return Ok(NewtonOutcome {
                        x,
                        iterations: iter + 1,
                        trace,
                    });
                }
                trace.push("line search failed".into());
                return Err(Error::convergence(
                    format!("Newton line search failed with gradient {gnorm:.3e}"),
                    trace,
                ));
            }
        }
        let gnorm = self.gradient(&x).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if gnorm <= opts.gradient_tol * 1e4 {
            return Ok(NewtonOutcome {
                x,
                iterations: opts.max_iterations,
                trace,
            });
        }
        Err(Error::convergence(
            format!(
                "Newton did not converge in {} iterations (gradient {gnorm:.3e})",
                opts.max_iterations
            ),
            trace,
        ))
    }
}

/// Real gradient `(2 Re g, 2 Im g)` from the Wirtinger gradient.
pub(crate) fn real_gradient(g: &[Complex64]) -> DVector<f64> {
    let m = g.len();
    let mut out = DVector::zeros(2 * m);
    for k in 0..m {
        out[k] = 2.0 * g[k].re;
        out[m + k] = 2.0 * g[k].im;
    }
    out
}

/// Wirtinger gradient of `mean(ψ(P))` for a grid field `d = ∂ψ/∂conj(P)`.
pub(crate) fn field_gradient(lags: &[isize], d: &[Complex64]) -> Vec<Complex64> {
    let c = grid::dft_coeffs(d);
    lags.iter().map(|&l| grid::coeff_at(&c, l)).collect()
}

/// Real Hessian of `mean(ψ(P))` from the Fourier coefficients of
/// `∂²ψ/∂P∂conj(P)` (`c1`) and `∂²ψ/∂conj(P)²` (`c2`).
pub(crate) fn real_hessian(lags: &[isize], c1: &[Complex64], c2: &[Complex64]) -> DMatrix<f64> {
    let mdim = lags.len();
    let mut hess = DMatrix::zeros(2 * mdim, 2 * mdim);
    for k in 0..mdim {
        for l in 0..mdim {
            let h1 = grid::coeff_at(c1, lags[k] - lags[l]);
            let h2 = grid::coeff_at(c2, lags[k] + lags[l]);
            hess[(k, l)] = 2.0 * (h1.re + h2.re);
            hess[(mdim + k, mdim + l)] = 2.0 * (h1.re - h2.re);
            hess[(k, mdim + l)] = 2.0 * (h2.im - h1.im);
            hess[(mdim + l, k)] = 2.0 * (h2.im - h1.im);
        }
    }
    hess
}

/// Solves `H d = -g`, shifting the diagonal when `H` is not numerically
/// positive definite.
pub(crate) fn newton_direction(hess: &DMatrix<f64>, grad: &DVector<f64>) -> Result<DVector<f64>> {
    let n = hess.nrows();
    let diag_scale = (0..n).map(|i| hess[(i, i)].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut shift = 0.0;
    for _ in 0..30 {
        let mut h = hess.clone();
        for i in 0..n {
            h[(i, i)] += shift;
        }
        if let Some(ch) = h.cholesky() {
            return Ok(-ch.solve(grad));
        }
        shift = if shift == 0.0 { 1e-12 * diag_scale } else { shift * 10.0 };
    }
    Err(Error::Numerical("Newton system could not be made positive definite".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_problem(p: f64) -> ConvexProblem {
        let grid = Grid::new(128).unwrap();
        let th = grid.thetas();
        let offset: Vec<Complex64> = th
            .iter()
            .map(|t| Complex64::new(1.0 + 0.3 * t.cos(), 0.5 * (2.0 * t).sin()))
            .collect();
        let w1: Vec<f64> = th.iter().map(|t| 1.2 + 0.5 * t.cos()).collect();
        let w2: Vec<f64> = th.iter().map(|t| 0.7 - 0.2 * (3.0 * t).cos()).collect();
        ConvexProblem {
            grid,
            lags: vec![-1, -2, -3],
            terms: vec![
                Term {
                    offset,
                    sign: -1.0,
                    weight: w1,
                    power: p,
                },
                Term {
                    offset: vec![Complex64::new(0.0, 0.0); 128],
                    sign: 1.0,
                    weight: w2,
                    power: p,
                },
            ],
            linear: vec![Complex64::new(0.1, -0.2), Complex64::new(0.0, 0.3), Complex64::new(-0.1, 0.0)],
            smoothing: 1e-10,
        }
    }

    fn to_real(x: &[Complex64]) -> Vec<f64> {
        x.iter().map(|z| z.re).chain(x.iter().map(|z| z.im)).collect()
    }

    fn from_real(y: &[f64]) -> Vec<Complex64> {
        let m = y.len() / 2;
        (0..m).map(|k| Complex64::new(y[k], y[m + k])).collect()
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for p in [1.3, 1.7, 2.0, 3.5] {
            let prob = sample_problem(p);
            let x = vec![Complex64::new(0.2, 0.1), Complex64::new(-0.3, 0.05), Complex64::new(0.1, -0.2)];
            let (grad, hess) = prob.real_derivatives(&x);
            let y = to_real(&x);
            let h = 1e-5;
            for i in 0..y.len() {
                let mut yp = y.clone();
                let mut ym = y.clone();
                yp[i] += h;
                ym[i] -= h;
                let fd = (prob.value(&from_real(&yp)) - prob.value(&from_real(&ym))) / (2.0 * h);
                assert!((fd - grad[i]).abs() < 1e-7, "p {p} grad {i}: {fd} vs {}", grad[i]);
                let (gp, _) = prob.real_derivatives(&from_real(&yp));
                let (gm, _) = prob.real_derivatives(&from_real(&ym));
                for j in 0..y.len() {
                    let fd2 = (gp[j] - gm[j]) / (2.0 * h);
                    assert!((fd2 - hess[(j, i)]).abs() < 1e-6, "p {p} hess ({j},{i}): {fd2} vs {}", hess[(j, i)]);
                }
            }
        }
    }

    #[test]
    fn newton_reaches_stationarity() {
        let prob = sample_problem(1.5);
        let out = prob
            .minimize(
                &[Complex64::new(0.0, 0.0); 3],
                NewtonOptions {
                    max_iterations: 100,
                    gradient_tol: 1e-12,
                },
            )
            .unwrap();
        let gnorm = prob.gradient(&out.x).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(gnorm <= 1e-8);
        let value = prob.value(&out.x);
        // Any nearby point is no better.
        for k in 0..3 {
            for d in [Complex64::new(1e-3, 0.0), Complex64::new(0.0, -1e-3)] {
                let mut y = out.x.clone();
                y[k] += d;
                assert!(prob.value(&y) >= value);
            }
        }
    }
}
